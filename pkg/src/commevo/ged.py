"""Group evolution discovery between consecutive frames.

Every overlapping pair (G1 in frame t, G2 in frame t+1) gets at most one
event decided by two inclusion values and the group sizes:

============================  ==================  =========================
forward ``I(G1, G2)``         backward ``I(G2,G1)``  event
============================  ==================  =========================
>= alpha                      >= beta             continuing / growing /
                                                  shrinking (by size)
< alpha                       >= beta             splitting
>= alpha                      < beta              merging
< alpha                       < beta              none
============================  ==================  =========================

A frame-t group left without any event dissolves; a frame-(t+1) group left
without any event is forming.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .cpm import Group
from .metrics import IMPORTANCE_MEASURES, node_importance

GED_THRESHOLD_GRID = (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
RULE_SETS = ("v1",)


class GedEvent(str, Enum):
    CONTINUING = "continuing"
    SHRINKING = "shrinking"
    GROWING = "growing"
    SPLITTING = "splitting"
    MERGING = "merging"
    DISSOLVING = "dissolving"
    FORMING = "forming"

    def __str__(self):
        return self.value


G = GedEvent


@dataclass(frozen=True)
class GedParams:
    alpha: float = 0.7
    beta: float = 0.7
    importance: str = "social_position"
    eps: float = 0.85
    rules: str = "v1"

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (0 < v <= 1):
                raise ValueError(f"{name} must lie in (0, 1], got {v}")
        if self.importance not in IMPORTANCE_MEASURES:
            raise ValueError(f"unknown importance measure {self.importance!r}")
        if self.rules not in RULE_SETS:
            raise ValueError(f"unknown GED rule set {self.rules!r}")


@dataclass(frozen=True)
class GedMatch:
    g1: Group
    g2: Group
    i_fwd: float
    i_bwd: float
    event: GedEvent


def inclusion(g1, g2, importance: dict) -> float:
    """Member overlap share times importance-weighted overlap share of g1."""
    a = frozenset(getattr(g1, "members", g1))
    b = frozenset(getattr(g2, "members", g2))
    if not a:
        raise ValueError("inclusion of an empty group")
    total = math.fsum(importance[x] for x in a)
    if total <= 0:
        raise ValueError("group importance sums to zero")
    common = a & b
    if not common:
        return 0.0
    return (len(common) / len(a)) * (math.fsum(importance[x] for x in common) / total)


def decide(i_fwd: float, i_bwd: float, n1: int, n2: int, alpha: float, beta: float):
    """Rule set v1; ``None`` when the pair is below both thresholds."""
    fwd = i_fwd >= alpha
    bwd = i_bwd >= beta
    if fwd and bwd:
        if n1 == n2:
            return G.CONTINUING
        return G.GROWING if n1 < n2 else G.SHRINKING
    if bwd:
        return G.SPLITTING
    if fwd:
        return G.MERGING
    return None


def assign_events(groups_t, groups_t1, importance: dict, alpha: float = 0.7, beta: float = 0.7):
    """Match two consecutive frames.

    ``importance`` maps each group key to its member importance vector.
    Returns ``(matches, dissolving, forming)``.
    """
    GedParams(alpha=alpha, beta=beta)  # threshold validation
    matches = []
    matched_t, matched_t1 = set(), set()
    for g1 in groups_t:
        for g2 in groups_t1:
            if g1.members.isdisjoint(g2.members):
                continue
            f = inclusion(g1, g2, importance[g1.key])
            b = inclusion(g2, g1, importance[g2.key])
            ev = decide(f, b, g1.n, g2.n, alpha, beta)
            if ev is None:
                continue
            matches.append(GedMatch(g1, g2, f, b, ev))
            matched_t.add(g1.key)
            matched_t1.add(g2.key)
    dissolving = [g for g in groups_t if g.key not in matched_t]
    forming = [g for g in groups_t1 if g.key not in matched_t1]
    return matches, dissolving, forming


def importance_all(groups_by_frame, snapshots, measure: str = "social_position", eps: float = 0.85) -> dict:
    out = {}
    for groups, snap in zip(groups_by_frame, snapshots):
        for g in groups:
            out[g.key] = node_importance(g, snap, measure=measure, eps=eps)
    return out


@dataclass
class GedResult:
    groups: list
    matches: list[GedMatch]
    dissolving: set
    forming: set
    params: GedParams = field(default_factory=GedParams)

    def group_events(self) -> dict:
        """Events per group key: outgoing match events, dissolving, forming."""
        out = defaultdict(set)
        for m in self.matches:
            out[m.g1.key].add(m.event)
        for g in self.dissolving:
            out[g.key].add(G.DISSOLVING)
        for g in self.forming:
            out[g.key].add(G.FORMING)
        return {k: frozenset(v) for k, v in out.items()}


def track(groups_by_frame, snapshots, params: GedParams | None = None, importance: dict | None = None) -> GedResult:
    params = params or GedParams()
    if importance is None:
        importance = importance_all(groups_by_frame, snapshots, params.importance, params.eps)
    matches, dissolving, forming = [], set(), set()
    for t in range(len(groups_by_frame) - 1):
        m, d, f = assign_events(groups_by_frame[t], groups_by_frame[t + 1], importance, params.alpha, params.beta)
        matches.extend(m)
        dissolving.update(d)
        forming.update(f)
    return GedResult(list(groups_by_frame), matches, dissolving, forming, params)


@dataclass(frozen=True)
class ChainLink:
    """How a group was reached: best predecessor and the event into it."""

    predecessor: tuple | None
    event: GedEvent | None


def _pred_rank(m: GedMatch):
    return (-(m.i_fwd + m.i_bwd), -m.g1.n, sorted(m.g1.members))


def build_chains(result: GedResult) -> dict:
    """``{group key: ChainLink}``.

    A group entered by several matches keeps the one with the largest
    ``i_fwd + i_bwd`` (then the larger, then the lexicographically smaller
    predecessor). Forming groups open a chain; groups of the first frame have
    no recorded origin.
    """
    incoming = defaultdict(list)
    for m in result.matches:
        incoming[m.g2.key].append(m)
    links = {}
    for frame in result.groups:
        for g in frame:
            cands = incoming.get(g.key)
            if cands:
                best = min(cands, key=_pred_rank)
                links[g.key] = ChainLink(best.g1.key, best.event)
            elif g in result.forming:
                links[g.key] = ChainLink(None, G.FORMING)
            else:
                links[g.key] = ChainLink(None, None)
    return links


# --------------------------------------------------------------------------
# persistence: t,g1,g2,i_fwd,i_bwd,event
# --------------------------------------------------------------------------

MATCH_HEADER = "t,g1,g2,i_fwd,i_bwd,event"


def write_matches(result: GedResult, path) -> None:
    rows = []
    for m in result.matches:
        rows.append(((m.g1.frame, m.g1.ordinal, m.g2.ordinal), f"{m.g1.frame},{m.g1.ordinal},{m.g2.ordinal},{m.i_fwd!r},{m.i_bwd!r},{m.event.value}"))
    for g in result.dissolving:
        rows.append(((g.frame, g.ordinal, -1), f"{g.frame},{g.ordinal},-,-,-,dissolving"))
    for g in result.forming:
        # t is the earlier frame of the pair, as for matches
        rows.append(((g.frame - 1, -1, g.ordinal), f"{g.frame - 1},-,{g.ordinal},-,-,forming"))
    rows.sort(key=lambda r: r[0])
    Path(path).write_text("\n".join([MATCH_HEADER] + [r[1] for r in rows]) + "\n", encoding="utf-8")


def read_matches(path, groups_by_frame, params: GedParams | None = None) -> GedResult:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != MATCH_HEADER:
        raise ValueError(f"{path}: not a GED match table")
    lookup = {g.key: g for frame in groups_by_frame for g in frame}
    matches, dissolving, forming = [], set(), set()
    for line in lines[1:]:
        if not line:
            continue
        t, a, b, f, bw, ev = line.split(",")
        t = int(t)
        if ev == "dissolving":
            dissolving.add(lookup[(t, int(a))])
        elif ev == "forming":
            forming.add(lookup[(t + 1, int(b))])
        else:
            matches.append(GedMatch(lookup[(t, int(a))], lookup[(t + 1, int(b))], float(f), float(bw), G(ev)))
    return GedResult(list(groups_by_frame), matches, dissolving, forming, params or GedParams())
