"""paperrank: rank peer-reviewed submissions from their reviews.

Referee scores become per-referee partial rankings and preference pairs;
papers become feature vectors from score statistics and review-text features;
a sparse variational GP preference learner, two Kemeny-style consensus
solvers and three score-aggregation baselines produce rankings; an evaluation
lab measures effectiveness, fairness under bias/noise perturbations and
efficiency under review sub-sampling.
"""

__version__ = "0.1.0"

from .data import (
    ACL_LIKE_SCALE,
    Dataset,
    DatasetStats,
    Paper,
    Review,
    ScaleSpec,
    dataset_stats,
    load_dataset,
    referee_portfolio,
    write_dataset,
)
from .synthetic import SyntheticConfig, generate_synthetic, synthetic_text_features
from .preferences import (
    PartialRanking,
    PreferencePair,
    filter_pairs,
    partial_ranking,
    preference_pairs,
    write_pairs,
)
from .features import (
    ACCEPT_OPT,
    CITE_OPT,
    SCORE_ONLY,
    FeatureAssembler,
    FeatureConfig,
    FeatureLayout,
    FeatureVector,
    TextFeatureTable,
    assemble,
    feature_matrix,
    read_text_features,
    relatedness_feature,
    score_features,
    validate_text_features,
    write_text_features,
)
from .kernels import gram, kernel_eval
from .gppl import GpplConfig, GpplRanker, fit_gppl, predict_utilities
from .consensus import (
    BranchAndBoundConsensus,
    ConsensusConfig,
    NeighborhoodConsensus,
    ViolationMatrix,
    dcon,
    ncon,
    violations,
)
from .baselines import BaselineSpec, rank_baseline
from .metrics import auroc, prauc, spearman
from .agreement import dataset_alpha, krippendorff_alpha_ordinal
from .ranking import RankingResult, write_ranking
from .evaluation import (
    EvaluationReport,
    GoldStandard,
    MethodSpec,
    PerturbationConfig,
    build_gold,
    comm_weights,
    effectiveness,
    efficiency_curve,
    ncc,
    perturb,
    ranking_consistency,
    run_benchmark,
    run_scenario_suite,
    split,
)
from .errors import (
    ComputationError,
    ConfigError,
    CoverageError,
    DataError,
    IntegrityError,
    PaperRankError,
    ParseError,
    SchemaError,
    TrainingError,
    ValidationError,
)
