"""Synthetic temporal interaction logs with planted group evolution.

A :class:`Scenario` is a set of lineages. Each lineage owns a private pool of
nodes arranged in one or more blocks (planted groups) and follows a script
of steps, one step per frame transition:

``hold``        every block keeps its members
``grow n``      the single block gains ``n`` nodes
``shrink n``    the single block loses its ``n`` newest nodes
``split p``     the single block breaks into ``p`` near-equal parts
``merge``       all blocks fuse
``attach``      two blocks [large, small]: the small one joins the large one
``detach n``    the single block sheds its ``n`` newest nodes as a new block
``decay``       all blocks vanish (members fall back to background)
``reform``      a vanished lineage comes back with its previous blocks

Every frame each block becomes a dense random digraph; arcs between nodes
not sharing a block appear with the noise probability. The ground truth
records, per step and source block, the expected label of both trackers.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .classification import Dataset
from .temporal import DAY, FrameSpec, Interaction, InteractionLog

STEP_KINDS = ("hold", "grow", "shrink", "split", "merge", "attach", "detach", "decay", "reform")

# step -> (SGCI label, GED label) of each source block
_TRUTH = {
    "hold": ("constancy", "continuing"),
    "grow": ("change_size", "growing"),
    "shrink": ("change_size", "shrinking"),
    "split": ("split", "splitting"),
    "merge": ("merge", "merging"),
    "attach": ("addition", "merging"),
    "detach": ("deletion", "splitting"),
    "decay": ("decay", "dissolving"),
}


class ScenarioError(ValueError):
    """An infeasible script."""


@dataclass
class Lineage:
    blocks: list
    steps: list
    start: int = 0
    name: str = ""


@dataclass
class Scenario:
    frames: int
    lineages: list
    noise: float = 0.01
    p_internal: float = 0.95
    max_weight: int = 3
    k: int = 5
    sh: float = 10.0
    seed: int = 0
    frame_days: float = 1.0
    origin: int = 0

    def frame_spec(self) -> FrameSpec:
        """Non-overlapping frames aligned with the generated ones."""
        return FrameSpec(window=self.frame_days, overlap=0.0, origin=self.origin,
                         end=self.origin + self.frames * self.frame_days * DAY)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        data = dict(data)
        data["lineages"] = [Lineage(**lin) for lin in data.get("lineages", [])]
        return cls(**data)

    @classmethod
    def load(cls, path) -> "Scenario":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class Plant:
    """One planted event: the block ``members`` at ``frame`` should carry it."""

    frame: int
    lineage: str
    sgci: str | None
    ged: str
    members: frozenset


@dataclass
class Realization:
    membership: list  # per frame: list of blocks (lists of node ids)
    plants: list
    nodes: list


def _parse_step(text: str):
    parts = text.split()
    if not parts or parts[0] not in STEP_KINDS:
        raise ScenarioError(f"unknown step {text!r}")
    kind = parts[0]
    arg = int(parts[1]) if len(parts) > 1 else None
    if kind in ("grow", "shrink", "split", "detach") and (arg is None or arg < 1):
        raise ScenarioError(f"step {text!r} needs a positive count")
    return kind, arg


def plan(scenario: Scenario) -> Realization:
    """Run every script symbolically; raises :class:`ScenarioError` on infeasible steps."""
    F, k, sh = scenario.frames, scenario.k, scenario.sh
    membership = [[] for _ in range(F)]
    plants = []
    counter = 0

    def fresh():
        nonlocal counter
        counter += 1
        return f"v{counter:05d}"

    for li, lin in enumerate(scenario.lineages):
        name = lin.name or f"L{li}"

        def fail(i, step, why):
            raise ScenarioError(f"lineage {name!r} step {i} ({step}): {why}")

        if lin.start < 0 or lin.start + len(lin.steps) > F - 1:
            raise ScenarioError(f"lineage {name!r} does not fit in {F} frames")
        if not lin.blocks:
            raise ScenarioError(f"lineage {name!r} has no blocks")
        for s in lin.blocks:
            if s < k:
                raise ScenarioError(f"lineage {name!r}: initial block of size {s} below k={k}")
        blocks = [[fresh() for _ in range(s)] for s in lin.blocks]
        reserve = []
        present = True
        dormant = None
        f = lin.start
        membership[f].extend(list(b) for b in blocks)
        for i, step in enumerate(lin.steps):
            kind, arg = _parse_step(step)
            if kind != "reform" and not present:
                fail(i, step, "lineage is dissolved")
            if kind in ("grow", "shrink", "split", "detach") and len(blocks) != 1:
                fail(i, step, "needs exactly one block")
            src = [frozenset(b) for b in blocks]
            if kind == "hold":
                new = [list(b) for b in blocks]
            elif kind == "grow":
                add = [reserve.pop() if reserve else fresh() for _ in range(arg)]
                new = [blocks[0] + add]
            elif kind == "shrink":
                if len(blocks[0]) - arg < k:
                    fail(i, step, f"block of size {len(blocks[0]) - arg} below k={k}")
                reserve.extend(reversed(blocks[0][-arg:]))
                new = [blocks[0][:-arg]]
            elif kind == "split":
                b = blocks[0]
                if arg < 2:
                    fail(i, step, "split needs at least 2 parts")
                cuts = np.linspace(0, len(b), arg + 1).round().astype(int)
                new = [b[cuts[j]:cuts[j + 1]] for j in range(arg)]
                if min(len(p) for p in new) < k:
                    fail(i, step, f"part below k={k}")
                if len(b) / min(len(p) for p in new) >= sh:
                    fail(i, step, f"part ratio reaches sh={sh}; use detach")
            elif kind == "merge":
                if len(blocks) < 2:
                    fail(i, step, "merge needs at least 2 blocks")
                union = [u for b in blocks for u in b]
                if len(union) / min(len(b) for b in blocks) >= sh:
                    fail(i, step, f"size ratio reaches sh={sh}; use attach")
                new = [union]
            elif kind == "attach":
                if len(blocks) != 2:
                    fail(i, step, "attach needs blocks [large, small]")
                large, small = blocks
                if (len(large) + len(small)) / len(small) < sh:
                    fail(i, step, f"joined/small ratio below sh={sh}")
                new = [large + small]
            elif kind == "detach":
                b = blocks[0]
                if arg < k:
                    fail(i, step, f"detached block of size {arg} below k={k}")
                if len(b) - arg < k:
                    fail(i, step, "remaining block below k")
                if len(b) / arg < sh:
                    fail(i, step, f"whole/detached ratio below sh={sh}")
                new = [b[:-arg], b[-arg:]]
            elif kind == "decay":
                dormant = blocks
                new = []
                present = False
            else:  # reform
                if present:
                    fail(i, step, "lineage is already present")
                new = [list(b) for b in dormant]
                present = True
            # labels on source blocks of this transition
            if kind == "attach":
                plants.append(Plant(f, name, *_TRUTH[kind], src[1]))
            elif kind == "reform":
                for b in new:
                    plants.append(Plant(f + 1, name, None, "forming", frozenset(b)))
            else:
                for b in src:
                    plants.append(Plant(f, name, *_TRUTH[kind], b))
            blocks = new
            f += 1
            membership[f].extend(list(b) for b in blocks)
    nodes = [f"v{i:05d}" for i in range(1, counter + 1)]
    return Realization(membership, plants, nodes)


def generate(scenario: Scenario) -> tuple[InteractionLog, list[Plant]]:
    """Interaction log plus ground truth; deterministic in ``scenario.seed``."""
    if not (0 <= scenario.noise <= 1) or not (0 < scenario.p_internal <= 1):
        raise ScenarioError("probabilities must lie in [0, 1]")
    if scenario.max_weight < 1:
        raise ScenarioError("max_weight must be >= 1")
    real = plan(scenario)
    rng = np.random.default_rng(scenario.seed)
    nodes = real.nodes
    index = {u: i for i, u in enumerate(nodes)}
    N = len(nodes)
    frame_sec = int(round(scenario.frame_days * DAY))
    records = []
    for f, blocks in enumerate(real.membership):
        label = np.full(N, -1)
        for b_id, b in enumerate(blocks):
            label[[index[u] for u in b]] = b_id
        same = (label[:, None] == label[None, :]) & (label[:, None] >= 0)
        draw = rng.random((N, N))
        weights = rng.integers(1, scenario.max_weight + 1, size=(N, N))
        internal = same & (draw < scenario.p_internal)
        noise = ~same & (draw < scenario.noise)
        arcs = internal | noise
        np.fill_diagonal(arcs, False)
        us, vs = np.nonzero(arcs)
        stamps = rng.integers(0, frame_sec, size=len(us))
        base = scenario.origin + f * frame_sec
        for u, v, ts in zip(us.tolist(), vs.tolist(), stamps.tolist()):
            w = int(weights[u, v]) if internal[u, v] else 1
            records.append(Interaction(nodes[u], nodes[v], base + ts, w))
    records.sort(key=lambda r: r.timestamp)
    return InteractionLog(records), real.plants


# --------------------------------------------------------------------------
# presets
# --------------------------------------------------------------------------


def _alternate(a, b, n):
    return [a if i % 2 == 0 else b for i in range(n)]


def standard_scenario(seed: int = 0, frames: int = 12, noise: float = 0.01, p_internal: float = 0.95) -> Scenario:
    """Every SGCI and GED event planted at least five times (with 12 frames)."""
    t = frames - 1
    blink = (["hold", "hold", "decay", "reform"] * frames)[:t]
    lineages = [
        Lineage([10], ["hold"] * t, name="steady"),
        Lineage([10], _alternate("grow 1", "shrink 1", t), name="pulse_a"),
        Lineage([11], _alternate("shrink 1", "grow 1", t), name="pulse_b"),
        Lineage([20], _alternate("split 2", "merge", t), name="splitter"),
        Lineage([60, 6], _alternate("attach", "detach 6", t), name="satellite"),
        Lineage([10], list(blink), name="blink_a"),
        Lineage([10], list(blink), name="blink_b"),
    ]
    return Scenario(frames, lineages, noise=noise, p_internal=p_internal, seed=seed)


def constancy_scenario(seed: int = 0, frames: int = 10, groups: int = 5, size: int = 10, noise: float = 0.0) -> Scenario:
    lineages = [Lineage([size], ["hold"] * (frames - 1), name=f"steady_{i}") for i in range(groups)]
    return Scenario(frames, lineages, noise=noise, p_internal=1.0, seed=seed)


PRESETS = {"standard": standard_scenario, "constancy": constancy_scenario}


# --------------------------------------------------------------------------
# truth table and scoring
# --------------------------------------------------------------------------

TRUTH_HEADER = "frame,lineage,sgci_event,ged_event,size,members"


def write_truth(plants, path) -> None:
    lines = [TRUTH_HEADER]
    for p in plants:
        lines.append(f"{p.frame},{p.lineage},{p.sgci or '-'},{p.ged},{len(p.members)},{' '.join(sorted(p.members))}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_truth(path) -> list[Plant]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != TRUTH_HEADER:
        raise ValueError(f"{path}: not a truth table")
    out = []
    for line in lines[1:]:
        if not line:
            continue
        f, lin, s, g, _, members = line.split(",")
        out.append(Plant(int(f), lin, None if s == "-" else s, g, frozenset(members.split())))
    return out


def jaccard(a, b) -> float:
    union = len(a | b)
    return len(a & b) / union if union else 0.0


@dataclass
class Recovery:
    hits: dict = field(default_factory=dict)
    totals: dict = field(default_factory=dict)

    @property
    def rates(self) -> dict:
        return {e: self.hits.get(e, 0) / n for e, n in self.totals.items() if n}

    def merge(self, other: "Recovery") -> "Recovery":
        out = Recovery(dict(self.hits), dict(self.totals))
        for e, n in other.totals.items():
            out.totals[e] = out.totals.get(e, 0) + n
            out.hits[e] = out.hits.get(e, 0) + other.hits.get(e, 0)
        return out


def score(plants, groups_by_frame, group_events: dict, method: str, min_jaccard: float = 0.5) -> Recovery:
    """Share of plants whose frame holds a matching group carrying the label.

    ``group_events`` maps ``(frame, ordinal)`` to event names (or enums).
    """
    if method not in ("sgci", "ged"):
        raise ValueError(f"unknown method {method!r}")
    rec = Recovery()
    for p in plants:
        expected = p.sgci if method == "sgci" else p.ged
        if expected is None:
            continue
        rec.totals[expected] = rec.totals.get(expected, 0) + 1
        frame = groups_by_frame[p.frame] if p.frame < len(groups_by_frame) else []
        for g in frame:
            if jaccard(g.members, p.members) < min_jaccard:
                continue
            if expected in {str(e) for e in group_events.get(g.key, ())}:
                rec.hits[expected] = rec.hits.get(expected, 0) + 1
                break
    return rec


# --------------------------------------------------------------------------
# labelled sequence data for classifier checks
# --------------------------------------------------------------------------

SIZE_BINS = ((5.0, 9.0), (10.0, 18.0), (20.0, 36.0), (40.0, 72.0))
DENSITY_BINS = ((0.10, 0.28), (0.30, 0.48), (0.50, 0.68), (0.70, 0.88))


def sequence_dataset(
    n: int = 5000,
    seed: int = 0,
    correlated: bool = True,
    classes=("addition", "change_size", "constancy", "merge", "split", "deletion", "decay"),
    weights=None,
) -> Dataset:
    """Three-state profile sequences whose class is set by the last state.

    The last group size and density each fall in one of four bands; the
    4 x 4 band grid is coloured with the classes so that every class owns
    several disconnected cells. Axis-aligned splits separate the classes
    exactly; a single Gaussian per class cannot. With ``correlated`` the
    earlier states and the remaining measures are noisy functions of the last
    size and density; otherwise they are independent noise.
    """
    rng = np.random.default_rng(seed)
    n_cls = len(classes)
    cells = {c: [] for c in range(n_cls)}
    for i in range(len(SIZE_BINS)):
        for j in range(len(DENSITY_BINS)):
            cells[(3 * i + 2 * j) % n_cls].append((i, j))
    p = np.ones(n_cls) / n_cls if weights is None else np.asarray(weights, dtype=float) / np.sum(weights)
    y = rng.choice(n_cls, size=n, p=p)
    size0 = np.empty(n)
    dens0 = np.empty(n)
    for r in range(n):
        options = cells[int(y[r])]
        i, j = options[rng.integers(len(options))]
        lo, hi = SIZE_BINS[i]
        size0[r] = math.exp(rng.uniform(math.log(lo), math.log(hi)))
        dens0[r] = rng.uniform(*DENSITY_BINS[j])
    X = np.empty((n, 12))
    X[:, 8] = size0
    X[:, 10] = dens0
    if correlated:
        size1 = size0 * np.exp(rng.normal(0, 0.08, n))
        size2 = size1 * np.exp(rng.normal(0, 0.08, n))
        dens1 = np.clip(dens0 + rng.normal(0, 0.03, n), 0, 1)
        dens2 = np.clip(dens1 + rng.normal(0, 0.03, n), 0, 1)
        for base, s, d in ((0, size2, dens2), (4, size1, dens1)):
            X[:, base] = s
            X[:, base + 2] = d
        for base, s, d in ((0, size2, dens2), (4, size1, dens1), (8, size0, dens0)):
            X[:, base + 1] = np.clip(1 - d + rng.normal(0, 0.05, n), 0, 1)
            X[:, base + 3] = d * s / 10 + rng.gamma(2.0, 0.05, n)
    else:
        for base in (0, 4):
            X[:, base] = np.exp(rng.uniform(math.log(5), math.log(72), n))
            X[:, base + 2] = rng.uniform(0.1, 0.88, n)
        for base in (0, 4, 8):
            X[:, base + 1] = rng.uniform(0, 1, n)
            X[:, base + 3] = rng.gamma(2.0, 1.0, n)
    names = [f"{f}_{s}" for s in ("m2", "m1", "0") for f in ("size", "leadership", "density", "cohesion")]
    return Dataset(X, np.zeros((n, 0), dtype=np.int64), y, list(classes), names, [], [])


def gaussian_pair_dataset(n: int, dims: int = 3, separation: float = 1.0, seed: int = 0) -> Dataset:
    """Two equiprobable classes, unit-variance independent Gaussians.

    Class means are ``-separation/2`` and ``+separation/2`` on every axis, so
    the Bayes-optimal accuracy is ``Phi(separation * sqrt(dims) / 2)``.
    """
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=n)
    X = rng.normal(0.0, 1.0, size=(n, dims)) + np.where(y[:, None] == 1, separation / 2, -separation / 2)
    return Dataset(X, np.zeros((n, 0), dtype=np.int64), y, ["neg", "pos"], [f"x{i}" for i in range(dims)], [], [])
