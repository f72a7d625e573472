import numpy as np
import pytest
from scipy import stats

from diffnet import synth
from diffnet.classify import classify_all, classify_weights
from diffnet.pipeline import make_diff_net

LABELS = ["a", "b.B", "g.A", "g.B.C"]


def small_spec(**kw):
    base = dict(n_nodes=400, w_networks=3, links_per_class={lab: 300 for lab in LABELS},
                noise_sd=0.0, seed=1, hubs_per_class=2, hub_degree=40)
    base.update(kw)
    return synth.PlantedSpec(**base)


def recovery(spec):
    ns, truth = synth.generate(spec)
    return synth.evaluate(synth.predicted_labels(classify_all(ns)), truth)


class TestGenerate:
    def test_noiseless_recovery_is_perfect(self):
        ns, truth = synth.generate(small_spec())
        net = make_diff_net(ns)
        node_labels = dict(zip(net.nodes["node"], net.nodes["assigned_phi_tilde"]))
        rep = synth.evaluate(synth.predicted_labels(net.classified), truth, node_labels)
        assert rep.accuracy == 1.0
        assert all(v == 1.0 for v in rep.precision.values())
        assert all(v == 1.0 for v in rep.recall.values())
        assert rep.n_links == 1200 and rep.n_hubs == 8
        assert rep.node_accuracy == 1.0

    @pytest.mark.parametrize("w,labels", [(2, ["a", "b.B", "g.A", "g.B"]), (4, ["a", "b.B.D", "g.A.C.D"])])
    def test_noiseless_other_widths(self, w, labels):
        spec = synth.PlantedSpec(n_nodes=200, w_networks=w, links_per_class={lab: 100 for lab in labels}, seed=3)
        assert recovery(spec).accuracy == 1.0

    def test_deterministic(self):
        one, t1 = synth.generate(small_spec(noise_sd=0.1, seed=9))
        two, t2 = synth.generate(small_spec(noise_sd=0.1, seed=9))
        np.testing.assert_array_equal(one.weights, two.weights)
        assert t1.links == t2.links and t1.hubs == t2.hubs
        three, _ = synth.generate(small_spec(noise_sd=0.1, seed=10))
        assert not np.array_equal(one.weights, three.weights)

    def test_hub_links_are_pure(self):
        lists, truth = synth.generate_edge_lists(small_spec())
        for hub, label in truth.hubs.items():
            incident = [lab for (x, y), lab in truth.links.items() if hub in (x, y)]
            assert len(incident) == 40 and set(incident) == {label}

    def test_weights_in_range(self):
        ns, _ = synth.generate(small_spec(noise_sd=0.5))
        assert np.abs(ns.weights).max() <= 1.0

    def test_error_rate_within_tail_bound(self):
        sd, tau, (lo, hi) = 0.15, 1 / 3, (0.6, 0.9)
        spec = small_spec(noise_sd=sd, n_nodes=2000, links_per_class={lab: 2000 for lab in LABELS},
                          hubs_per_class=0, hub_degree=0, seed=21)
        rep = recovery(spec)
        # chance a coordinate lands in the wrong bin, averaged over the magnitude draw
        m = np.linspace(lo, hi, 2001)
        p_present = float(stats.norm.cdf((tau - m) / sd).mean())
        p_absent = float(2 * stats.norm.sf(tau / sd))
        present = {"a": 3, "b.B": 3, "g.A": 1, "g.B.C": 2}
        bound = np.mean([1 - (1 - p_present) ** k * (1 - p_absent) ** (3 - k) for k in present.values()])
        n = rep.n_links
        assert 1 - rep.accuracy <= bound + 4 * np.sqrt(bound / n) + 1 / n

    def test_monotone_degradation(self):
        means = []
        for sd in (0.05, 0.15, 0.25):
            means.append(np.mean([recovery(small_spec(noise_sd=sd, seed=s)).accuracy for s in range(20)]))
        assert means[0] >= means[1] >= means[2]
        assert means[2] < 1.0

    @pytest.mark.parametrize("kw", [
        dict(links_per_class={"a": 10**6}),
        dict(w_networks=1),
        dict(links_per_class={"z.Q": 10}),
        dict(magnitude_range=(0.2, 0.9)),
        dict(noise_sd=-1.0),
        dict(hub_degree=400),
    ])
    def test_infeasible_spec(self, kw):
        with pytest.raises(ValueError):
            synth.generate(small_spec(**kw))


class TestEvaluate:
    def test_shuffled_labels_near_chance(self):
        ns, truth = synth.generate(small_spec(links_per_class={"a": 1000, "b.B": 1000, "g.A": 1000},
                                              hubs_per_class=0, hub_degree=0, n_nodes=1000))
        rng = np.random.default_rng(0)
        pairs = list(truth.links)
        labels = np.array([truth.links[p] for p in pairs])
        rng.shuffle(labels)
        rep = synth.evaluate(dict(zip(pairs, labels.tolist())), truth)
        assert rep.accuracy == pytest.approx(1 / 3, abs=0.03)

    def test_empty_prediction(self):
        _, truth = synth.generate(small_spec())
        rep = synth.evaluate({}, truth)
        assert rep.accuracy == 0.0
        assert all(v == 0.0 for v in rep.recall.values())
        assert rep.node_accuracy == 0.0
        assert rep.confusion["a"][synth.NO_LABEL] == 300

    def test_unplanted_prediction_rejected(self):
        _, truth = synth.generate(small_spec())
        with pytest.raises(ValueError):
            synth.evaluate({("zz", "zzz"): "a"}, truth)


class TestSpecFile:
    def test_read_spec(self, tmp_path):
        path = tmp_path / "spec.ini"
        path.write_text("[planted]\nn_nodes = 100\nw_networks = 3\nnoise_sd = 0.05\nseed = 4\n"
                        "magnitude_range = 0.6, 0.8\n\n[links]\na = 20\ng.B = 30\n", encoding="utf-8")
        spec = synth.read_spec(path)
        assert spec.links_per_class == {"a": 20, "g.B": 30}
        assert spec.magnitude_range == (0.6, 0.8)
        assert spec.seed == 4

    def test_write_instance(self, tmp_path):
        lists, _ = synth.generate_edge_lists(small_spec())
        paths = synth.write_instance(lists, tmp_path / "nets")
        assert [n for n, _ in paths] == ["A", "B", "C"]
        assert all(p.exists() for _, p in paths)

    def test_patterns_cover_all(self):
        pats = synth.label_patterns(["A", "B", "C"])
        assert sum(len(v) for v in pats.values()) == 26
        for label, group in pats.items():
            w = np.array(group, dtype=float) * 0.9
            idx = np.arange(len(w))
            got = classify_weights(["A", "B", "C"], np.array([], dtype=object), idx, idx, w, 1 / 3).phi_tilde
            assert set(got) == {label}
