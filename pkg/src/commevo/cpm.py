"""k-clique percolation on the undirected projection of a frame snapshot.

:func:`detect` works from maximal cliques (pivoting Bron-Kerbosch, pruned to
size >= k) and joins two maximal cliques when they share at least k-1 nodes.
:func:`detect_bruteforce` enumerates every k-subset instead and is kept as
an independent oracle for small graphs.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .temporal import FrameSnapshot

BRUTEFORCE_MAX_NODES = 25


@dataclass(frozen=True)
class Group:
    frame: int
    ordinal: int
    members: frozenset

    @property
    def n(self) -> int:
        return len(self.members)

    @property
    def key(self) -> tuple[int, int]:
        return (self.frame, self.ordinal)

    def __repr__(self):
        return f"Group(frame={self.frame}, ordinal={self.ordinal}, n={self.n})"


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        p = self.parent
        while p[i] != i:
            p[i] = p[p[i]]
            i = p[i]
        return i

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _projection(snapshot_or_adj) -> dict:
    if isinstance(snapshot_or_adj, FrameSnapshot):
        return snapshot_or_adj.neighbors
    return snapshot_or_adj


def _kcore(adj: dict, k: int) -> dict:
    """Restrict to the (k-1)-core; nodes outside it sit in no k-clique."""
    adj = {u: set(vs) for u, vs in adj.items()}
    queue = [u for u, vs in adj.items() if len(vs) < k - 1]
    removed = set()
    while queue:
        u = queue.pop()
        if u in removed:
            continue
        removed.add(u)
        for v in adj[u]:
            if v in removed:
                continue
            adj[v].discard(u)
            if len(adj[v]) < k - 1:
                queue.append(v)
        adj[u] = set()
    return {u: vs for u, vs in adj.items() if u not in removed}


def maximal_cliques(adj: dict, min_size: int = 1) -> list[frozenset]:
    """Maximal cliques with at least ``min_size`` nodes (Tomita pivoting)."""
    out = []

    def expand(r, p, x):
        if not p and not x:
            if len(r) >= min_size:
                out.append(frozenset(r))
            return
        if len(r) + len(p) < min_size:
            return
        pivot = max(p | x, key=lambda u: len(p & adj[u]))
        for v in list(p - adj[pivot]):
            nv = adj[v]
            r.append(v)
            expand(r, p & nv, x & nv)
            r.pop()
            p.remove(v)
            x.add(v)

    expand([], set(adj), set())
    return out


def enumerate_k_cliques(snapshot, k: int) -> list[tuple]:
    """All k-cliques of the undirected projection as sorted tuples."""
    if k < 3:
        raise ValueError("k must be >= 3")
    adj = _kcore(_projection(snapshot), k)
    order = {u: i for i, u in enumerate(sorted(adj))}
    out = []

    def extend(clique, cand):
        if len(clique) == k:
            out.append(tuple(clique))
            return
        if len(clique) + len(cand) < k:
            return
        for v in sorted(cand, key=order.__getitem__):
            later = {w for w in cand & adj[v] if order[w] > order[v]}
            clique.append(v)
            extend(clique, later)
            clique.pop()

    for u in sorted(adj):
        extend([u], {w for w in adj[u] if order[w] > order[u]})
    return out


def _canonical(communities: Iterable[frozenset]) -> list[frozenset]:
    return sorted(set(communities), key=lambda c: (-len(c), sorted(c)))


def percolate(cliques: Iterable, k: int) -> list[frozenset]:
    """Union k-cliques that share k-1 nodes into communities.

    Adjacent cliques share a (k-1)-face, so indexing faces finds every
    adjacent pair without a pairwise scan.
    """
    cliques = [tuple(sorted(c)) for c in cliques]
    if not cliques:
        return []
    uf = _UnionFind(len(cliques))
    faces: dict = {}
    for i, c in enumerate(cliques):
        if len(c) != k:
            raise ValueError(f"expected {k}-cliques, got size {len(c)}")
        for face in combinations(c, k - 1):
            j = faces.setdefault(face, i)
            if j != i:
                uf.union(i, j)
    members: dict = {}
    for i, c in enumerate(cliques):
        members.setdefault(uf.find(i), set()).update(c)
    return _canonical(frozenset(m) for m in members.values())


def percolate_maximal(cliques: list[frozenset], k: int) -> list[frozenset]:
    """Communities from maximal cliques (each of size >= k)."""
    if not cliques:
        return []
    nodes = sorted(set().union(*cliques), key=repr)
    col = {u: i for i, u in enumerate(nodes)}
    inc = np.zeros((len(cliques), len(nodes)), dtype=np.int32)
    for i, c in enumerate(cliques):
        inc[i, [col[u] for u in c]] = 1
    adjacent = (inc @ inc.T) >= k - 1
    # connected components by min-label propagation
    n = len(cliques)
    labels = np.arange(n)
    while True:
        nxt = np.where(adjacent, labels[None, :], n).min(axis=1)
        nxt = nxt[nxt]
        if np.array_equal(nxt, labels):
            break
        labels = nxt
    members: dict = {}
    for i, c in enumerate(cliques):
        members.setdefault(int(labels[i]), set()).update(c)
    return _canonical(frozenset(m) for m in members.values())


def _as_groups(communities: list[frozenset], frame: int) -> list[Group]:
    return [Group(frame, i, c) for i, c in enumerate(_canonical(communities))]


def detect(snapshot: FrameSnapshot, k: int = 5) -> list[Group]:
    """CPM communities, numbered by descending size then smallest members."""
    if k < 3:
        raise ValueError("k must be >= 3")
    adj = _kcore(snapshot.neighbors, k)
    cliques = maximal_cliques(adj, min_size=k)
    return _as_groups(percolate_maximal(cliques, k), snapshot.index)


def detect_bruteforce(snapshot: FrameSnapshot, k: int = 5) -> list[Group]:
    """Reference CPM: test every k-subset, compare every clique pair."""
    if k < 3:
        raise ValueError("k must be >= 3")
    adj = snapshot.neighbors
    nodes = sorted(snapshot.nodes)
    if len(nodes) > BRUTEFORCE_MAX_NODES:
        raise ValueError(f"brute force refused: {len(nodes)} nodes > {BRUTEFORCE_MAX_NODES}")
    cliques = [
        frozenset(sub)
        for sub in combinations(nodes, k)
        if all(b in adj[a] for a, b in combinations(sub, 2))
    ]
    n = len(cliques)
    links = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if len(cliques[i] & cliques[j]) == k - 1:
                links[i].append(j)
                links[j].append(i)
    seen = [False] * n
    communities = []
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        stack, comp = [s], set()
        while stack:
            i = stack.pop()
            comp |= cliques[i]
            for j in links[i]:
                if not seen[j]:
                    seen[j] = True
                    stack.append(j)
        communities.append(frozenset(comp))
    return _as_groups(communities, snapshot.index)


Detector = Callable[[FrameSnapshot, int], list]


def detect_all(snapshots: list[FrameSnapshot], k: int = 5, detector: Detector = detect) -> list[list[Group]]:
    return [detector(s, k) for s in snapshots]


# --------------------------------------------------------------------------
# persistence: frame_{index:05}.groups, lines "ordinal: member member ..."
# --------------------------------------------------------------------------

GROUPS_PATTERN = "frame_{index:05}.groups"


def groups_path(directory, index) -> Path:
    return Path(directory) / GROUPS_PATTERN.format(index=index)


def write_groups(groups: list[Group], frame: int, directory) -> Path:
    path = groups_path(directory, frame)
    lines = [f"{g.ordinal}: " + " ".join(str(m) for m in sorted(g.members)) for g in groups]
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


def read_groups(path, frame: int) -> list[Group]:
    groups = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        ordinal, _, rest = line.partition(":")
        groups.append(Group(frame, int(ordinal), frozenset(rest.split())))
    return groups


def read_all_groups(directory, frames: int) -> list[list[Group]]:
    out = []
    for i in range(frames):
        path = groups_path(directory, i)
        if not path.exists():
            raise FileNotFoundError(f"missing groups file {path}")
        out.append(read_groups(path, i))
    return out
