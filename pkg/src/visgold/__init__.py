"""Quality control for variable-effort bounding-box annotation.

Scores submissions against ground truth, schedules visible gold questions
under several issuance policies, applies tiered consequences and payments,
simulates annotator populations for condition comparisons, and serves live
sessions over HTTP.
"""

from .dataset import AnnotationSet, BoxSizeModel, Corpus, Scene, generate_corpus, load_corpus
from .geometry import BoundingBox, iou
from .ledger import BannerState, ConsequenceMode, Tier, TierPolicy, WorkerLedger
from .scheduling import Dynamic, FibRegular, NoGold, Regular, SchedulePolicy, Upfront
from .scoring import MatchResult, ScoreReport, match_boxes, recall_at, score
from .stats import StatResult, mann_whitney

__version__ = "0.1.0"

__all__ = [
    "AnnotationSet",
    "BannerState",
    "BoundingBox",
    "BoxSizeModel",
    "ConsequenceMode",
    "Corpus",
    "Dynamic",
    "FibRegular",
    "MatchResult",
    "NoGold",
    "Regular",
    "Scene",
    "SchedulePolicy",
    "ScoreReport",
    "StatResult",
    "Tier",
    "TierPolicy",
    "Upfront",
    "WorkerLedger",
    "generate_corpus",
    "iou",
    "load_corpus",
    "mann_whitney",
    "match_boxes",
    "recall_at",
    "score",
    "__version__",
]
