"""Community evolution tracking (SGCI and GED) and next-event prediction."""

from ._accel import backend
from .classification import Dataset, cross_validate, make_classifier, stratified_folds
from .correspondence import agreement_report, map_events
from .cpm import Group, detect, detect_bruteforce, enumerate_k_cliques, percolate
from .ged import GedEvent, GedParams, inclusion
from .metrics import GroupProfile, cohesion, density, leadership, node_importance, profile
from .sgci import SgciEvent, SgciParams, dominating_event, ds, mj
from .temporal import FrameSnapshot, FrameSpec, Interaction, InteractionLog, ingest, read_log, slice_log

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "FrameSnapshot",
    "FrameSpec",
    "GedEvent",
    "GedParams",
    "Group",
    "GroupProfile",
    "Interaction",
    "InteractionLog",
    "SgciEvent",
    "SgciParams",
    "agreement_report",
    "backend",
    "cohesion",
    "cross_validate",
    "density",
    "detect",
    "detect_bruteforce",
    "dominating_event",
    "ds",
    "enumerate_k_cliques",
    "inclusion",
    "ingest",
    "leadership",
    "make_classifier",
    "map_events",
    "mj",
    "node_importance",
    "percolate",
    "profile",
    "read_log",
    "slice_log",
    "stratified_folds",
]
