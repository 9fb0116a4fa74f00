"""Per-instance selection of the fastest optimal MAPF solver.

The pipeline encodes a MAPF instance as graphs, embeds them with
random-walk characteristic functions, joins hand-crafted features, and
trains a gradient-boosted multi-class selector evaluated under three
generalization regimes.
"""

from .benchmark import (DEFAULT_PORTFOLIO, GridMap, RuntimeRecord, ScenarioEntry,
                        load_results, parse_map, parse_scen, serialize_map,
                        serialize_results, serialize_scen)
from .embedding import (FeatherConfig, FeatherGraphEmbedder, GraphEmbedding,
                        characteristic_node_embedding, embed_graph, node_attributes,
                        pool, transition_matrix)
from .encodings import EncodedGraph, encode_full_graph, encode_path_subgraph
from .errors import DataError, NoPathError, ParseError, ValidationError
from .evaluation import (ConstantPolicy, EvalReport, LabeledInstance, ModelPolicy,
                         OraclePolicy, SplitSpec, derive_labels, evaluate,
                         evaluate_per_type, make_split, single_best_policy)
from .gbdt import (GradientBoostedClassifier, importance_report, multiclass_logloss,
                   softmax, softmax_gradients, tune_hyperparameters)
from .handcrafted import FEATURE_NAMES, handcrafted_features
from .instance import AgentPath, CellGraph, MapfInstance, agent_paths, cell_graph, shortest_path
from .pipeline import (FeatureCache, FeatureSubset, InstanceKey, MapfFeaturizer,
                       extract_batch, extract_features, feature_dimension, feature_names,
                       read_feature_csv, select_blocks, write_feature_csv)
from .synth import SynthConfig, generate_benchmark, planted_label

__version__ = "0.1.0"

__all__ = [
    "AgentPath", "CellGraph", "ConstantPolicy", "DataError", "DEFAULT_PORTFOLIO",
    "EncodedGraph", "EvalReport", "FeatherConfig", "FeatherGraphEmbedder",
    "FeatureCache", "FeatureSubset", "FEATURE_NAMES", "GradientBoostedClassifier",
    "GraphEmbedding", "GridMap", "InstanceKey", "LabeledInstance", "MapfFeaturizer",
    "MapfInstance", "ModelPolicy", "NoPathError", "OraclePolicy", "ParseError",
    "RuntimeRecord", "ScenarioEntry", "SplitSpec", "SynthConfig", "ValidationError",
    "agent_paths", "cell_graph", "characteristic_node_embedding", "derive_labels",
    "embed_graph", "encode_full_graph", "encode_path_subgraph", "evaluate",
    "evaluate_per_type", "extract_batch", "extract_features", "feature_dimension",
    "feature_names", "generate_benchmark", "handcrafted_features", "importance_report",
    "load_results", "make_split", "multiclass_logloss", "node_attributes", "parse_map",
    "parse_scen", "planted_label", "pool", "read_feature_csv", "select_blocks",
    "serialize_map", "serialize_results", "serialize_scen", "shortest_path",
    "single_best_policy", "softmax", "softmax_gradients", "transition_matrix",
    "tune_hyperparameters", "write_feature_csv",
]
