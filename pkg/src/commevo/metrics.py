"""Group profile measures and per-node importance inside a group."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .temporal import FrameSnapshot

logger = logging.getLogger(__name__)

COHESION_CAP = 1e6
IMPORTANCE_MEASURES = ("social_position", "degree")


@dataclass(frozen=True)
class GroupProfile:
    size: int
    leadership: float
    density: float
    cohesion: float

    def as_tuple(self):
        return (float(self.size), self.leadership, self.density, self.cohesion)


def _members(group) -> frozenset:
    return frozenset(getattr(group, "members", group))


def leadership(group, snapshot: FrameSnapshot) -> float:
    """Degree centralization of the induced undirected subgraph; 1 on a star."""
    members = _members(group)
    n = len(members)
    if n <= 2:
        return 0.0
    nbrs = snapshot.neighbors
    degrees = [len(nbrs.get(u, set()) & members) for u in members]
    d_max = max(degrees)
    return sum(d_max - d for d in degrees) / ((n - 2) * (n - 1))


def density(group, snapshot: FrameSnapshot) -> float:
    """Fraction of the n(n-1) possible arcs present inside the group."""
    members = _members(group)
    n = len(members)
    if n <= 1:
        return 0.0
    out = snapshot.out_adj
    arcs = sum(1 for u in members for v in out.get(u, ()) if v in members)
    return arcs / (n * (n - 1))


def cohesion(group, snapshot: FrameSnapshot, cap: float = COHESION_CAP, textbook: bool = False) -> float:
    """Internal versus outgoing tie strength.

    Default form::

        (W_in / W_out) * n(n-1) / (N(N-n))

    with ``textbook=True`` the mean-tie form
    ``(W_in / (n(n-1))) / (W_out / (n(N-n)))`` is used instead. ``W_out`` counts
    arcs leaving the group only. Degenerate denominators give ``cap``; the
    result never exceeds ``cap``.
    """
    members = _members(group)
    n = len(members)
    N = snapshot.N
    inside, outside = [], []
    for u in members:
        for v, w in snapshot.out_adj.get(u, {}).items():
            (inside if v in members else outside).append(w)
    # fsum keeps float weights independent of set iteration order
    w_in = math.fsum(inside)
    w_out = math.fsum(outside)
    if w_out == 0 or N <= n:
        return float(cap)
    if textbook:
        if n < 2:
            return 0.0
        value = (w_in / (n * (n - 1))) / (w_out / (n * (N - n)))
    else:
        value = (w_in / w_out) * (n * (n - 1)) / (N * (N - n))
    return float(min(value, cap))


def induced_weights(group, snapshot: FrameSnapshot) -> tuple[list, np.ndarray]:
    """Sorted member list and the dense weight matrix of the induced digraph."""
    order = sorted(_members(group))
    index = {u: i for i, u in enumerate(order)}
    mat = np.zeros((len(order), len(order)))
    out = snapshot.out_adj
    for u in order:
        i = index[u]
        for v, w in out.get(u, {}).items():
            j = index.get(v)
            if j is not None:
                mat[i, j] = w
    return order, mat


def node_importance(
    group,
    snapshot: FrameSnapshot,
    measure: str = "social_position",
    eps: float = 0.85,
    tol: float = 1e-8,
    max_iter: int = 100,
) -> dict:
    """Importance of each member within the group's induced subgraph.

    ``social_position`` is the damped fixed point
    ``SP(x) = (1 - eps) + eps * sum_y SP(y) * w(y, x) / w_out(y)``;
    ``degree`` is in-degree plus out-degree, falling back to all ones when the
    group has no internal arcs.
    """
    if measure not in IMPORTANCE_MEASURES:
        raise ValueError(f"unknown importance measure {measure!r}")
    order, mat = induced_weights(group, snapshot)
    if not order:
        raise ValueError("importance of an empty group")
    if measure == "degree":
        arcs = mat > 0
        scores = arcs.sum(axis=0) + arcs.sum(axis=1)
        if not scores.any():
            scores = np.ones(len(order))
        return {u: float(s) for u, s in zip(order, scores)}
    scores, iters, residual = kernels.social_position(mat, eps, tol, max_iter)
    if residual >= tol:
        logger.warning("social position stopped after %d iterations, residual %.3g", iters, residual)
    return {u: float(s) for u, s in zip(order, scores)}


def profile(group, snapshot: FrameSnapshot, cap: float = COHESION_CAP, textbook: bool = False) -> GroupProfile:
    return GroupProfile(
        size=len(_members(group)),
        leadership=leadership(group, snapshot),
        density=density(group, snapshot),
        cohesion=cohesion(group, snapshot, cap=cap, textbook=textbook),
    )


def profile_all(groups_by_frame, snapshots, cap: float = COHESION_CAP, textbook: bool = False) -> dict:
    """``{(frame, ordinal): GroupProfile}`` for every detected group."""
    out = {}
    for groups, snap in zip(groups_by_frame, snapshots):
        for g in groups:
            out[g.key] = profile(g, snap, cap=cap, textbook=textbook)
    return out


PROFILE_HEADER = "frame,ordinal,size,leadership,density,cohesion"


def write_profiles(profiles: dict, path) -> None:
    rows = [PROFILE_HEADER]
    for (frame, ordinal), p in sorted(profiles.items()):
        rows.append(f"{frame},{ordinal},{p.size},{p.leadership!r},{p.density!r},{p.cohesion!r}")
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def read_profiles(path) -> dict:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != PROFILE_HEADER:
        raise ValueError(f"{path}: not a profile table")
    out = {}
    for line in lines[1:]:
        if not line:
            continue
        f, o, s, l_, d, c = line.split(",")
        out[(int(f), int(o))] = GroupProfile(int(s), float(l_), float(d), float(c))
    return out
