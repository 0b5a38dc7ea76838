"""Stable group changes identification.

Pipeline over per-frame groups:

1. link adjacent frames with the modified Jaccard measure and a size-ratio
   guard (:func:`link_frames`);
2. keep groups lying on a continuation chain spanning enough frames
   (:func:`stable_filter`);
3. label every stable transition and every vanishing stable group
   (:func:`classify_events`);
4. reduce a group's labels to one by fixed priority (:func:`dominating_event`).

Each transition receives one kind of change. Addition and deletion are the
size-extreme cases; merge and split need at least two comparable-size
transitions into (out of) a group; constancy and change_size label the
remaining simple transitions. ``split_merge`` is attached on top of the
others where a splitting group feeds a merging one.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .cpm import Group


class SgciEvent(str, Enum):
    ADDITION = "addition"
    DELETION = "deletion"
    MERGE = "merge"
    SPLIT = "split"
    SPLIT_MERGE = "split_merge"
    CONSTANCY = "constancy"
    CHANGE_SIZE = "change_size"
    DECAY = "decay"

    def __str__(self):
        return self.value


E = SgciEvent

# highest priority first
PRIORITY = (E.CONSTANCY, E.CHANGE_SIZE, E.SPLIT, E.MERGE, E.ADDITION, E.DELETION, E.SPLIT_MERGE, E.DECAY)
_RANK = {e: i for i, e in enumerate(PRIORITY)}
TRANSITION_EVENTS = frozenset(PRIORITY) - {E.DECAY}


@dataclass(frozen=True)
class SgciParams:
    mj_threshold: float = 0.5
    ds_max: float = 50.0
    min_frames: int = 3
    sh: float = 10.0
    dh: float = 0.05

    def __post_init__(self):
        if not (0 < self.mj_threshold <= 1):
            raise ValueError(f"mj threshold must lie in (0, 1], got {self.mj_threshold}")
        if self.ds_max < 1:
            raise ValueError(f"ds_max must be >= 1, got {self.ds_max}")
        if self.min_frames < 1:
            raise ValueError(f"min_frames must be >= 1, got {self.min_frames}")
        if self.sh <= 1:
            raise ValueError(f"sh must be > 1, got {self.sh}")
        if self.dh < 0:
            raise ValueError(f"dh must be >= 0, got {self.dh}")


@dataclass
class Transition:
    source: Group
    target: Group
    mj: float
    ds: float
    events: frozenset = field(default_factory=frozenset)

    @property
    def key(self):
        return (self.source.key, self.target.key)


def _size(x) -> int:
    return len(getattr(x, "members", x))


def mj(a, b) -> float:
    """max(|A & B| / |A|, |A & B| / |B|)."""
    a = frozenset(getattr(a, "members", a))
    b = frozenset(getattr(b, "members", b))
    if not a or not b:
        raise ValueError("modified Jaccard of an empty set")
    inter = len(a & b)
    return max(inter / len(a), inter / len(b))


def ds(a, b) -> float:
    """max(|A| / |B|, |B| / |A|); accepts sets, groups or sizes."""
    na = a if isinstance(a, int) else _size(a)
    nb = b if isinstance(b, int) else _size(b)
    if na <= 0 or nb <= 0:
        raise ValueError("size ratio of an empty group")
    return max(na / nb, nb / na)


def link_frames(groups_t, groups_t1, mj_threshold: float = 0.5, ds_max: float = 50.0) -> list[Transition]:
    """Every pair with mj strictly above the threshold and ds <= ds_max."""
    out = []
    for a in groups_t:
        for b in groups_t1:
            m = mj(a, b)
            if m <= mj_threshold:
                continue
            d = ds(a, b)
            if d <= ds_max:
                out.append(Transition(a, b, m, d))
    return out


def link_all(groups_by_frame, mj_threshold: float = 0.5, ds_max: float = 50.0) -> list[Transition]:
    out = []
    for t in range(len(groups_by_frame) - 1):
        out.extend(link_frames(groups_by_frame[t], groups_by_frame[t + 1], mj_threshold, ds_max))
    return out


def stable_filter(transitions, min_frames: int = 3, groups=()) -> set:
    """Groups on some transition chain touching ``min_frames`` consecutive frames.

    ``groups`` only matters for ``min_frames <= 1``, where groups without any
    transition count as stable too.
    """
    preds = defaultdict(list)
    succs = defaultdict(list)
    nodes = {}
    for tr in transitions:
        preds[tr.target.key].append(tr.source.key)
        succs[tr.source.key].append(tr.target.key)
        nodes[tr.source.key] = tr.source
        nodes[tr.target.key] = tr.target
    for g in groups:
        nodes.setdefault(g.key, g)
    order = sorted(nodes)  # (frame, ordinal): predecessors come first
    back = {}
    for key in order:
        back[key] = 1 + max((back[p] for p in preds[key]), default=0)
    fwd = {}
    for key in reversed(order):
        fwd[key] = 1 + max((fwd[s] for s in succs[key]), default=0)
    return {nodes[k] for k in order if back[k] + fwd[k] - 1 >= min_frames}


def classify_events(stable, transitions, sh: float = 10.0, dh: float = 0.05, last_frame: int | None = None):
    """Label stable transitions and decaying stable groups.

    Returns ``(labelled_transitions, decayed_groups)``. Only transitions
    between two stable groups are kept. A stable group outside the final
    frame with no outgoing transition decays.
    """
    stable_keys = {g.key for g in stable}
    kept = [tr for tr in transitions if tr.source.key in stable_keys and tr.target.key in stable_keys]
    kept.sort(key=lambda tr: tr.key)

    out_sh = defaultdict(int)
    in_sh = defaultdict(int)
    for tr in kept:
        if tr.ds < sh:
            out_sh[tr.source.key] += 1
            in_sh[tr.target.key] += 1

    labels = {}
    for tr in kept:
        a, b = tr.source.n, tr.target.n
        ev = set()
        if b / a >= sh:
            ev.add(E.ADDITION)
        elif a / b >= sh:
            ev.add(E.DELETION)
        else:
            many_in = in_sh[tr.target.key] >= 2
            many_out = out_sh[tr.source.key] >= 2
            if many_in and a < b:
                ev.add(E.MERGE)
            if many_out and a > b:
                ev.add(E.SPLIT)
            if many_in and many_out:
                ev.add(E.SPLIT_MERGE)
            if not ev:
                ev.add(E.CONSTANCY if abs(a - b) / a <= dh else E.CHANGE_SIZE)
        labels[tr.key] = ev

    # coexistence on the source group
    by_source = defaultdict(list)
    for tr in kept:
        by_source[tr.source.key].append(tr.key)
    for keys in by_source.values():
        group_events = set().union(*(labels[k] for k in keys))
        if group_events & {E.MERGE, E.SPLIT}:
            drop = {E.CONSTANCY, E.CHANGE_SIZE}
        elif {E.CONSTANCY, E.CHANGE_SIZE} <= group_events:
            drop = {E.CHANGE_SIZE}
        else:
            continue
        for k in keys:
            labels[k] -= drop

    labelled = [Transition(tr.source, tr.target, tr.mj, tr.ds, frozenset(labels[tr.key])) for tr in kept]
    if last_frame is None:
        last_frame = max((g.frame for g in stable), default=-1)
    has_out = set(by_source)
    decayed = {g for g in stable if g.frame < last_frame and g.key not in has_out}
    return labelled, decayed


def dominating_event(events) -> SgciEvent:
    events = [E(e) for e in events]
    if not events:
        raise ValueError("no events to choose from")
    return min(events, key=_RANK.__getitem__)


def sort_events(events) -> list[SgciEvent]:
    return sorted((E(e) for e in events), key=_RANK.__getitem__)


@dataclass
class SgciResult:
    groups: list  # per frame list of Group
    transitions: list[Transition]
    stable: set
    decayed: set
    params: SgciParams = field(default_factory=SgciParams)

    @property
    def last_frame(self) -> int:
        return len(self.groups) - 1

    def group_events(self) -> dict:
        """``{(frame, ordinal): frozenset of events}`` over stable groups."""
        out = defaultdict(set)
        for tr in self.transitions:
            out[tr.source.key] |= tr.events
        for g in self.decayed:
            out[g.key] = {E.DECAY}
        return {k: frozenset(v) for k, v in out.items()}

    def dominating(self) -> dict:
        return {k: dominating_event(v) for k, v in self.group_events().items() if v}


def track(groups_by_frame, params: SgciParams | None = None) -> SgciResult:
    params = params or SgciParams()
    links = link_all(groups_by_frame, params.mj_threshold, params.ds_max)
    every = [g for frame in groups_by_frame for g in frame]
    stable = stable_filter(links, params.min_frames, groups=every if params.min_frames <= 1 else ())
    labelled, decayed = classify_events(stable, links, params.sh, params.dh, last_frame=len(groups_by_frame) - 1)
    return SgciResult(list(groups_by_frame), labelled, stable, decayed, params)


# --------------------------------------------------------------------------
# persistence: t,from_ordinal,to_ordinal,mj,ds,events
# --------------------------------------------------------------------------

TRANSITION_HEADER = "t,from_ordinal,to_ordinal,mj,ds,events"


def write_transitions(result: SgciResult, path) -> None:
    rows = []
    for tr in result.transitions:
        ev = "+".join(e.value for e in sort_events(tr.events))
        rows.append(((tr.source.frame, tr.source.ordinal, tr.target.ordinal), f"{tr.source.frame},{tr.source.ordinal},{tr.target.ordinal},{tr.mj!r},{tr.ds!r},{ev}"))
    for g in result.decayed:
        rows.append(((g.frame, g.ordinal, -1), f"{g.frame},{g.ordinal},-,-,-,decay"))
    rows.sort(key=lambda r: r[0])
    Path(path).write_text("\n".join([TRANSITION_HEADER] + [r[1] for r in rows]) + "\n", encoding="utf-8")


def read_transitions(path, groups_by_frame, params: SgciParams | None = None) -> SgciResult:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != TRANSITION_HEADER:
        raise ValueError(f"{path}: not an SGCI transition table")
    lookup = {g.key: g for frame in groups_by_frame for g in frame}
    transitions, decayed, stable = [], set(), set()
    for line in lines[1:]:
        if not line:
            continue
        t, a, b, m, d, ev = line.split(",")
        src = lookup[(int(t), int(a))]
        stable.add(src)
        if b == "-":
            decayed.add(src)
            continue
        dst = lookup[(int(t) + 1, int(b))]
        stable.add(dst)
        events = frozenset(E(x) for x in ev.split("+") if x)
        transitions.append(Transition(src, dst, float(m), float(d), events))
    return SgciResult(list(groups_by_frame), transitions, stable, decayed, params or SgciParams())
