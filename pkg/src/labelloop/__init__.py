"""Active-learning orchestration: cold-start seeding from a zero-shot scorer,
uncertainty-sampling annotation loops with pluggable oracles, and
oracle-audited precision estimation."""

from .core import (
    Annotation,
    DataError,
    DataPoint,
    InvariantError,
    LabelLoopError,
    Label,
    LoopConfig,
    OracleProtocolError,
    OracleTransportError,
    Pool,
    RunState,
    ScoredPoint,
    derive_rng,
    ingest_pool,
    load_pool,
    new_rng,
)
from .coldstart import ColdStartPlan, execute_coldstart, plan_coldstart
from .evaluation import (
    EvaluationReport,
    NoPositivesInferred,
    compare_methods,
    estimate_precision,
    evaluate_run,
    infer_positives,
)
from .loop import IterationRecord, LoopController, RunResult, resume, run_loop, should_stop
from .models import (
    AdamState,
    ClassifierParams,
    LexiconScorer,
    ModelScorer,
    PromptTemplate,
    RemoteScorer,
    TrainConfig,
    ZeroShotLexicon,
    adam_step,
    featurize,
    load_lexicon,
    predict_proba,
    render_prompt,
    train,
    zero_shot_score,
)
from .oracles import (
    AnnotationsPending,
    HumanOracle,
    HumanQueue,
    NoisyOracle,
    OracleAnswer,
    OracleRequest,
    RemoteOracle,
    ScriptedOracle,
)
from .store import AnnotationLogRecord, DirectoryStore, MemoryStore
from .strategies import (
    SelectionRequest,
    binary_entropy,
    select_confident_positive,
    select_random,
    select_uncertain,
)
from .synth import default_lexicon, generate_pool

__version__ = "0.1.0"
