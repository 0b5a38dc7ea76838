"""Interaction logs, time framing and per-frame snapshots."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator

logger = logging.getLogger(__name__)

DAY = 86400


class ParseError(ValueError):
    """A malformed interaction line."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Interaction:
    actor: str
    target: str
    timestamp: float
    weight: int = 1


@dataclass
class InteractionLog:
    records: list[Interaction]
    rejected: int = 0

    def __len__(self):
        return len(self.records)

    def __iter__(self) -> Iterator[Interaction]:
        return iter(self.records)

    @property
    def t_min(self):
        return self.records[0].timestamp

    @property
    def t_max(self):
        return self.records[-1].timestamp

    def summary(self) -> str:
        return f"{len(self.records)} interactions, {self.rejected} rejected"


def _number(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def ingest(lines: Iterable[str], delimiter: str = ",", header: bool = False) -> InteractionLog:
    """Parse ``actor,target,timestamp[,weight]`` lines into a time-sorted log.

    Blank lines and lines starting with ``#`` are skipped. Lines with a
    non-positive weight are dropped and counted in ``rejected``; any other
    malformed line raises :class:`ParseError`.
    """
    records = []
    rejected = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if header and lineno == 1:
            continue
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(delimiter)]
        if len(parts) not in (3, 4):
            raise ParseError(lineno, f"expected 3 or 4 fields, got {len(parts)}")
        actor, target = parts[0], parts[1]
        if not actor or not target:
            raise ParseError(lineno, "empty node id")
        try:
            ts = _number(parts[2])
        except ValueError:
            raise ParseError(lineno, f"bad timestamp {parts[2]!r}") from None
        if isinstance(ts, float) and not math.isfinite(ts):
            raise ParseError(lineno, f"bad timestamp {parts[2]!r}")
        weight = 1
        if len(parts) == 4:
            try:
                weight = int(parts[3])
            except ValueError:
                raise ParseError(lineno, f"bad weight {parts[3]!r}") from None
            if weight <= 0:
                rejected += 1
                continue
        records.append(Interaction(actor, target, ts, weight))
    # sorted() is stable, so equal timestamps keep line order
    records = sorted(records, key=lambda r: r.timestamp)
    if rejected:
        logger.warning("%d lines rejected for non-positive weight", rejected)
    return InteractionLog(records, rejected)


def read_log(path, delimiter: str = ",", header: bool = False) -> InteractionLog:
    with open(path, encoding="utf-8") as fh:
        return ingest(fh, delimiter=delimiter, header=header)


def write_log(log: Iterable[Interaction], path, delimiter: str = ",") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in log:
            fh.write(f"{r.actor}{delimiter}{r.target}{delimiter}{r.timestamp}{delimiter}{r.weight}\n")


@dataclass(frozen=True)
class FrameSpec:
    """Sliding window over the log.

    ``window`` and ``overlap`` are in days. ``origin`` (UTC seconds) defaults
    to the midnight before the first interaction; ``end`` (UTC seconds)
    defaults to the last timestamp and only affects how many frames fit.
    """

    window: float = 7.0
    overlap: float = 4.0
    origin: float | None = None
    end: float | None = None

    def __post_init__(self):
        if not (0 <= self.overlap < self.window):
            raise ValueError(f"need 0 <= overlap < window, got overlap={self.overlap}, window={self.window}")

    @property
    def step(self) -> float:
        return self.window - self.overlap

    @property
    def window_seconds(self):
        return _seconds(self.window)

    @property
    def step_seconds(self):
        return _seconds(self.step)

    def resolve_origin(self, log: InteractionLog):
        if self.origin is not None:
            return self.origin
        return (int(log.t_min) // DAY) * DAY

    def frame_count(self, origin, t_max) -> int:
        if t_max < origin:
            return 0
        w, s = self.window_seconds, self.step_seconds
        if t_max < origin + w:
            return 1
        return int((t_max - origin - w) // s) + 1


def _seconds(days: float):
    sec = days * DAY
    return int(sec) if float(sec).is_integer() else sec


@dataclass
class FrameBucket:
    index: int
    start: float
    end: float
    records: list[Interaction] = field(default_factory=list)


def slice_log(log: InteractionLog, spec: FrameSpec) -> list[FrameBucket]:
    """Distribute interactions over half-open frames ``[start, end)``.

    Frame ``i`` starts at ``origin + i * step``. With overlap an interaction
    lands in every frame whose window covers it.
    """
    if not log.records:
        raise ValueError("empty interaction log")
    origin = spec.resolve_origin(log)
    t_max = spec.end if spec.end is not None else log.t_max
    n = spec.frame_count(origin, t_max)
    if n == 0:
        logger.warning("all timestamps precede origin %s; no frames", origin)
        return []
    w, s = spec.window_seconds, spec.step_seconds
    buckets = [FrameBucket(i, origin + i * s, origin + i * s + w) for i in range(n)]
    for r in log.records:
        rel = r.timestamp - origin
        if rel < 0:
            continue
        hi = min(int(rel // s), n - 1)
        lo = max(int((rel - w) // s), 0)
        for i in range(lo, hi + 1):
            b = buckets[i]
            if b.start <= r.timestamp < b.end:
                b.records.append(r)
    return buckets


@dataclass(frozen=True, eq=False)
class FrameSnapshot:
    """Directed weighted graph of one frame. No self-loops."""

    index: int
    start: float
    end: float
    edges: dict

    @cached_property
    def nodes(self) -> frozenset:
        out = set()
        for u, v in self.edges:
            out.add(u)
            out.add(v)
        return frozenset(out)

    @property
    def N(self) -> int:
        return len(self.nodes)

    @cached_property
    def out_adj(self) -> dict:
        adj = {}
        for (u, v), w in self.edges.items():
            adj.setdefault(u, {})[v] = w
        return adj

    @cached_property
    def neighbors(self) -> dict:
        """Undirected projection: u -- v iff u -> v or v -> u."""
        adj = {}
        for u, v in self.edges:
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
        return adj

    def total_weight(self):
        return sum(self.edges.values())

    @classmethod
    def from_edges(cls, edges, index=0, start=0, end=0) -> "FrameSnapshot":
        """Build from ``(u, v)`` or ``(u, v, w)`` tuples, summing duplicates."""
        agg: dict = {}
        for e in edges:
            u, v = e[0], e[1]
            w = e[2] if len(e) > 2 else 1
            if u == v:
                continue
            agg[(u, v)] = agg.get((u, v), 0) + w
        return cls(index, start, end, agg)


def build_snapshot(bucket: FrameBucket) -> FrameSnapshot:
    edges: dict = {}
    for r in bucket.records:
        if r.actor == r.target:
            continue
        key = (r.actor, r.target)
        edges[key] = edges.get(key, 0) + r.weight
    return FrameSnapshot(bucket.index, bucket.start, bucket.end, edges)


def snapshots_from_log(log: InteractionLog, spec: FrameSpec) -> list[FrameSnapshot]:
    return [build_snapshot(b) for b in slice_log(log, spec)]


# --------------------------------------------------------------------------
# persistence: frame_{index:05}.snap
# --------------------------------------------------------------------------

SNAP_PATTERN = "frame_{index:05}.snap"


def snapshot_path(directory, index) -> Path:
    return Path(directory) / SNAP_PATTERN.format(index=index)


def write_snapshot(snap: FrameSnapshot, directory) -> Path:
    path = snapshot_path(directory, snap.index)
    lines = [
        f"index={snap.index}",
        f"start={snap.start}",
        f"end={snap.end}",
        f"nodes={snap.N}",
        f"edges={len(snap.edges)}",
        "---",
    ]
    for (u, v), w in sorted(snap.edges.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1]))):
        lines.append(f"{u}\t{v}\t{w}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_snapshot(path) -> FrameSnapshot:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    meta = {}
    pos = 0
    for pos, line in enumerate(text):
        if line == "---":
            break
        key, _, value = line.partition("=")
        meta[key.strip()] = value.strip()
    else:
        raise ValueError(f"{path}: missing edge section")
    edges = {}
    for line in text[pos + 1:]:
        if not line:
            continue
        u, v, w = line.split("\t")
        edges[(u, v)] = _number(w)
    snap = FrameSnapshot(int(meta["index"]), _number(meta["start"]), _number(meta["end"]), edges)
    if int(meta.get("edges", len(edges))) != len(edges):
        raise ValueError(f"{path}: edge count mismatch")
    return snap


def read_snapshots(directory) -> list[FrameSnapshot]:
    paths = sorted(Path(directory).glob("frame_*.snap"))
    snaps = [read_snapshot(p) for p in paths]
    for i, s in enumerate(snaps):
        if s.index != i:
            raise ValueError(f"snapshot sequence has a gap before frame {s.index}")
    return snaps
