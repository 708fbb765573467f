"""gebdkit: event-boundary scoring toolkit.

Soft-label encoding/decoding with sub-bin bias refinement, constrained
boundary alignment, F1@Rel.Dis evaluation, ensemble fusion with easy/hard
routing, pseudo-label generation, a small dual-head scorer, and seeded
synthetic data to exercise all of it end to end.
"""

from .core import (
    AnnotationRecord,
    BoundarySet,
    DataError,
    ScoreCurve,
    SoftTarget,
    VideoMeta,
    read_annotations,
    read_predictions,
    read_scores,
    validate_record,
    write_annotations,
    write_predictions,
    write_scores,
)
from .softlabel import (
    DecodeConfig,
    compute_bias,
    decode_boundaries,
    decode_scored,
    encode_soft_labels,
    find_peaks,
    gaussian_smooth,
)
from .align import AlignConfig, align_boundaries, feasible_band, max_feasible_count
from .metrics import (
    CorpusReport,
    MatchResult,
    corpus_f1,
    f1_against_raters,
    match_boundaries,
)
from .pipeline import (
    EnsembleSpec,
    ensemble_mean,
    kfold_split,
    make_pseudo_labels,
    run_ensemble,
    split_easy_hard,
)
from .scorer import (
    FeatureSequence,
    LossConfig,
    ScorerParams,
    forward,
    grad_check,
    init_params,
    loss,
    predict,
    train,
)
from .synth import SynthConfig, gen_corpus, gen_features, gen_scores

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
