"""Simultaneous comparison of several weighted networks.

Links are classified as common, different or specific across the networks,
scored for how well they fit their class, filtered by score ratio, and nodes
are assigned the class that dominates their incident links.
"""

from .classify import ALPHA, BETA, GAMMA, categorize_weight, classify_all, classify_link
from .graph_io import EdgeList, EdgeListError, NetworkSet, build_network_set, load_edge_list, stretch_weights
from .node_class import NodeClassification, chi2_gof, classify_nodes
from .pipeline import DiffNetwork, RunConfig, make_diff_net, run
from .scoring import NormalizationMode, filter_by_ratio, minmax_normalize, raw_distance, score_all

__version__ = "0.1.0"

__all__ = [
    "ALPHA", "BETA", "GAMMA", "DiffNetwork", "EdgeList", "EdgeListError", "NetworkSet",
    "NodeClassification", "NormalizationMode", "RunConfig", "build_network_set", "categorize_weight",
    "chi2_gof", "classify_all", "classify_link", "classify_nodes", "filter_by_ratio", "load_edge_list",
    "make_diff_net", "minmax_normalize", "raw_distance", "run", "score_all", "stretch_weights",
]
