"""Causal graph queries, discovery, bias audits, and SCM simulation."""

from .adjustment import (
    AdjustmentSet,
    AuditReport,
    CausalQuery,
    all_sufficient_sets,
    audit_feature_set,
    build_query,
    minimal_sufficient_sets,
    proper_causal_paths,
    query_from_json_dict,
    query_to_json_dict,
    satisfies_backdoor,
)
from .data import (
    Dataset,
    as_dataset,
    dataset_from_csv_text,
    dataset_to_csv_text,
    load_csv,
    load_ordinal_sidecar,
    save_csv,
)
from .discovery import (
    GesConfig,
    GreedyEquivalenceSearch,
    SufficientStats,
    bic_local,
    bic_total,
    consistent_extension,
    dag_to_cpdag,
    ges,
    meek_closure,
    shd,
    sufficient_stats,
)
from .errors import (
    CausalAuditError,
    DataFormat,
    DegenerateColumnWarning,
    DuplicateEdge,
    EndpointConditioned,
    ExtrapolationWarning,
    FeatureIsExposureOrOutcome,
    GraphFormat,
    Inconsistent,
    InsufficientRows,
    MalformedBody,
    MissingFeature,
    NotADag,
    NotExtendable,
    OverlappingSets,
    ScmFormat,
    SelfLoop,
    SingularParentsWarning,
    TooFewRows,
    TooManyCandidates,
    UndirectedEdge,
    UnknownColumn,
    UnknownEndpoint,
    UnknownGraph,
    UnknownNode,
    UnknownVariable,
    ZeroMeanTarget,
    ZeroPair,
)
from .estimator import (
    ArmResult,
    CvReport,
    FalloutReport,
    LinearModel,
    Metrics,
    arms_from_json_dict,
    fallout_experiment,
    kfold_cv,
    metrics,
    ols_fit,
    render_fallout_table,
    scenario_effect,
)
from .graph import (
    Edge,
    MixedGraph,
    Path,
    PathClass,
    ancestors,
    build_graph,
    classify_path,
    d_separated,
    descendants,
    enumerate_paths,
    is_acyclic,
    path_open,
    random_dag,
    topological_order,
)
from .io import (
    canonical_json,
    graph_from_json_dict,
    graph_from_json_text,
    graph_to_json_dict,
    graph_to_json_text,
    load_graph,
    parse_graph_text,
    render_graph_text,
    save_graph,
)
from .scm import (
    ScmSpec,
    ScmVariable,
    build_scm,
    building_arms,
    building_preset,
    load_scm,
    population_means,
    sample,
    sample_do,
    save_scm,
    scm_from_json_dict,
    scm_graph,
    scm_to_json_dict,
    true_ace,
)

__version__ = "0.1.0"
