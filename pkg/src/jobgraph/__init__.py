"""Career graphs and job-title embeddings from raw work-history corpora.

The pipeline: parse and filter work histories, mine a tag set, build the
transition / enhanced / job-tag / transition-tag graphs, learn title
embeddings with biased or metapath random walks plus skip-gram negative
sampling, then evaluate by title classification and transition link
prediction.
"""

from .classify import (
    LogisticRegressionClassifier,
    evaluate_classification,
    macro_micro_f1,
    train_classifier,
)
from .corpus import (
    Corpus,
    Vocabulary,
    WorkHistory,
    WorkRecord,
    build_vocabulary,
    filter_corpus,
    load_histories,
    load_stopwords,
    normalize_title,
    one_hot_features,
    parse_histories,
    tokenize_title,
    write_features_tsv,
    write_histories,
)
from .embedding import MetapathEmbedder, Node2VecEmbedder
from .errors import (
    ConfigError,
    ConsistencyError,
    InputError,
    JobGraphError,
    NumericError,
    SamplingError,
)
from .evaluation import (
    EdgeSplit,
    ExperimentConfig,
    MetricsReport,
    NodeSplit,
    OPERATORS,
    SplitSpec,
    build_graph_variant,
    compute_auc,
    edge_feature,
    edge_feature_matrix,
    make_edge_splits,
    make_node_splits,
    pca_project_2d,
    report_to_dict,
    run_experiment,
    split_sizes,
    write_per_run_tsv,
    write_projection_tsv,
    write_report_json,
)
from .graphs import (
    EdgeKind,
    GraphStats,
    HeteroGraph,
    NodeKind,
    NodeRef,
    build_enhanced_job_transition,
    build_job_tag,
    build_job_transition,
    build_job_transition_tag,
    graph_stats,
    job,
    read_edge_list,
    tag,
    write_edge_list,
)
from .sgns import (
    EmbeddingMatrix,
    NegativeSampler,
    TrainConfig,
    load_embeddings,
    persist_embeddings,
    sgns_step,
    train_embeddings,
)
from .tagger import (
    TagSet,
    assign_title_tags,
    corpus_title_tags,
    generate_tags,
    load_lexicon,
    write_tags_tsv,
)
from .walks import (
    DEFAULT_METAPATH,
    WalkConfig,
    WalkCorpus,
    metapath_walks,
    node2vec_walks,
    read_walks,
    step_distribution,
    write_walks,
)

__version__ = "0.1.0"
