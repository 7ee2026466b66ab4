"""smace: feature attributions for composite decision systems.

Explains a single decision made by a pipeline of machine-learning models
whose outputs feed conjunctive threshold rules. Rule sensitivity comes
from scaled distances to the rule's decision boundaries; model outputs
are attributed to their inputs with exact Shapley values, normalized,
and folded back into the rule contributions.
"""

from .aggregate import Explanation, combine_contributions, explain, rank
from .baselines import (
    BaselineConfig,
    BaselineResult,
    LimeConfig,
    run_baseline,
    system_lime,
    system_shapley,
)
from .core import (
    ComparisonOp,
    CompletedInstance,
    Condition,
    DecisionPolicy,
    DecisionSystem,
    ExternalBackend,
    FeatureId,
    FeatureKind,
    Instance,
    LinearBackend,
    Model,
    Rule,
    Stump,
    StumpBackend,
    complete,
    complete_batch,
    evaluate_policy,
)
from .dsl import (
    ParseDiagnostic,
    ParsedRule,
    RuleSyntaxError,
    Severity,
    parse_rule,
    render_rule,
    try_parse_rule,
    validate_system,
)
from .errors import (
    BackendMismatch,
    ConfigError,
    DatasetParseError,
    DimensionError,
    ExternalModelError,
    ExternalTimeoutError,
    ModelEvaluationError,
    NonNumericCell,
    NonZeroExitError,
    ProtocolError,
    RuleNotInPolicy,
    SmaceError,
    TooManyFeatures,
    UnknownFeature,
    UnscaledFeature,
)
from .external import ExternalModelClient, ExternalModelSpec, external_predict
from .io import LoadedSystem, generate_uniform_dataset, load_dataset, load_instance, load_system
from .models_explain import (
    ExactShapleyEngine,
    LinearAttributionEngine,
    ModelAttribution,
    NormalizedModelAttribution,
    linear_attribution,
    make_engine,
    normalize_attribution,
    shapley_exact,
)
from .rules_explain import rule_contribution, rule_contributions
from .scaling import Dataset, Scaler, fit_scaler, identity_scaler, scale

__version__ = "0.1.0"
