import re
from pathlib import Path

import pytest

from diffnet import synth

CRITERION_LABELS = {}
_outcomes = {}

PLANTED_LABELS = ["a", "b.B", "b.C", "g.A", "g.B", "g.C", "g.A.B", "g.B.C"]


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            CRITERION_LABELS[item.nodeid] = mark.args


def pytest_runtest_logreport(report):
    if report.nodeid in CRITERION_LABELS and (report.when == "call" or report.failed):
        prev = _outcomes.get(report.nodeid, "PASS")
        _outcomes[report.nodeid] = "FAIL" if report.failed or prev == "FAIL" else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    def order(row):
        m = re.match(r"(\d+)(.*)", str(row[0][0]))
        return int(m.group(1)), m.group(2), row[2]

    rows = sorted(((CRITERION_LABELS[k], v, k) for k, v in _outcomes.items()), key=order)
    for (number, title), outcome, nodeid in rows:
        terminalreporter.write_line(f"criterion {str(number):<4} {outcome}  {title}  [{nodeid.split('::')[-1]}]")


def write_edges(path: Path, rows, header=None, delimiter="\t") -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(delimiter.join(header) + "\n")
        for row in rows:
            fh.write(delimiter.join(str(x) for x in row) + "\n")
    return path


@pytest.fixture
def edge_file(tmp_path):
    counter = iter(range(10**6))

    def make(rows, header=None, delimiter="\t", name=None):
        return write_edges(tmp_path / (name or f"net{next(counter)}.tsv"), rows, header, delimiter)

    return make


def planted_spec(seed=11, noise_sd=0.05) -> synth.PlantedSpec:
    """The 3-network, 10,000-node, 50,000-link, 8-group instance used by the acceptance suite."""
    return synth.PlantedSpec(
        n_nodes=10_000,
        w_networks=3,
        links_per_class={lab: 6_250 for lab in PLANTED_LABELS},
        magnitude_range=(0.6, 0.9),
        noise_sd=noise_sd,
        seed=seed,
        hubs_per_class=5,
        hub_degree=120,
    )


@pytest.fixture(scope="session")
def planted_instance():
    return synth.generate_edge_lists(planted_spec())
