"""Classifier inputs built from tracked group histories.

SGCI rows hold the profiles of a stable group and its two predecessors
(3 x size/leadership/density/cohesion) with the group's dominating next
event as target. GED rows hold four profiles interleaved with the three
events linking them; the target is each next event of the last group.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path

from .classification import Dataset
from .ged import GedEvent, GedResult, build_chains
from .metrics import COHESION_CAP, GroupProfile
from .sgci import SgciEvent, SgciResult, dominating_event

PROFILE_FIELDS = ("size", "leadership", "density", "cohesion")

# class order of the SGCI prediction table
SGCI_CLASSES = ("addition", "change_size", "constancy", "merge", "split", "deletion", "decay")
GED_CLASSES = ("growing", "continuing", "shrinking", "dissolving", "merging", "splitting")

ABSENT = "absent"


def _profile_names(suffixes):
    return [f"{f}_{s}" for s in suffixes for f in PROFILE_FIELDS]


SGCI_NUMERIC = _profile_names(("m2", "m1", "0"))
GED_NUMERIC = _profile_names(("m3", "m2", "m1", "0"))
GED_CATEGORICAL = ["event_m3_m2", "event_m2_m1", "event_m1_0"]


@dataclass(frozen=True)
class SequenceInstance:
    method: str
    frame: int
    ordinal: int
    counterpart: int | None
    numeric: tuple
    categorical: tuple
    target: str

    @property
    def sort_key(self):
        return (self.frame, self.ordinal, -1 if self.counterpart is None else self.counterpart)


@dataclass
class FeatureSet:
    method: str
    instances: list[SequenceInstance]
    skipped: int = 0
    relabeled: int = 0

    def class_counts(self) -> Counter:
        return Counter(i.target for i in self.instances)

    @property
    def numeric_names(self):
        return SGCI_NUMERIC if self.method == "sgci" else GED_NUMERIC

    @property
    def categorical_names(self):
        return [] if self.method == "sgci" else GED_CATEGORICAL

    @property
    def class_order(self):
        return SGCI_CLASSES if self.method == "sgci" else GED_CLASSES

    def to_dataset(self) -> Dataset:
        return Dataset.from_records(
            [i.numeric for i in self.instances],
            [i.categorical for i in self.instances],
            [i.target for i in self.instances],
            numeric_names=self.numeric_names,
            categorical_names=self.categorical_names,
            class_order=self.class_order,
        )


def _clip(p: GroupProfile, cap: float) -> tuple:
    return (float(p.size), p.leadership, p.density, min(p.cohesion, cap))


def _sgci_pred_rank(tr):
    return (-tr.mj, -tr.source.n, sorted(tr.source.members))


def sgci_predecessors(result: SgciResult) -> dict:
    """Best stable predecessor key per group: max MJ, larger, smaller members."""
    incoming = defaultdict(list)
    for tr in result.transitions:
        incoming[tr.target.key].append(tr)
    return {k: min(trs, key=_sgci_pred_rank).source.key for k, trs in incoming.items()}


def sgci_instances(result: SgciResult, profiles: dict, cap: float = COHESION_CAP) -> FeatureSet:
    preds = sgci_predecessors(result)
    fs = FeatureSet("sgci", [])
    for key, events in sorted(result.group_events().items()):
        if not events:
            continue
        chain = [key]
        while len(chain) < 3 and chain[0] in preds:
            chain.insert(0, preds[chain[0]])
        if len(chain) < 3:
            fs.skipped += 1
            continue
        target = dominating_event(events)
        if target == SgciEvent.SPLIT_MERGE:
            target = SgciEvent.SPLIT
            fs.relabeled += 1
        numeric = tuple(v for k in chain for v in _clip(profiles[k], cap))
        fs.instances.append(SequenceInstance("sgci", key[0], key[1], None, numeric, (), target.value))
    fs.instances.sort(key=lambda i: i.sort_key)
    return fs


def ged_instances(result: GedResult, profiles: dict, cap: float = COHESION_CAP) -> FeatureSet:
    links = build_chains(result)
    outgoing = defaultdict(list)
    for m in result.matches:
        outgoing[m.g1.key].append((m.g2.ordinal, m.event))
    for g in result.dissolving:
        outgoing[g.key].append((None, GedEvent.DISSOLVING))

    fs = FeatureSet("ged", [])
    zero = (0.0, 0.0, 0.0, 0.0)
    for key in sorted(outgoing):
        profs = [_clip(profiles[key], cap)]
        events = []
        cur = key
        complete = True
        while len(profs) < 4:
            link = links[cur]
            if link.predecessor is not None:
                events.insert(0, link.event.value)
                cur = link.predecessor
                profs.insert(0, _clip(profiles[cur], cap))
            elif link.event == GedEvent.FORMING:
                events.insert(0, GedEvent.FORMING.value)
                while len(profs) < 4:
                    profs.insert(0, zero)
                    if len(events) < 3:
                        events.insert(0, ABSENT)
            else:
                complete = False
                break
        if not complete:
            fs.skipped += 1
            continue
        numeric = tuple(v for p in profs for v in p)
        for counterpart, ev in outgoing[key]:
            fs.instances.append(SequenceInstance("ged", key[0], key[1], counterpart, numeric, tuple(events), ev.value))
    fs.instances.sort(key=lambda i: i.sort_key)
    return fs


# --------------------------------------------------------------------------
# table export
# --------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def write_features(fs: FeatureSet, path, delimiter: str = ",") -> None:
    if fs.method == "sgci":
        header = ["frame", "ordinal", "counterpart"] + SGCI_NUMERIC + ["target"]
    else:
        header = ["frame", "ordinal", "counterpart"]
        for i in range(4):
            header += GED_NUMERIC[4 * i: 4 * i + 4]
            if i < 3:
                header.append(GED_CATEGORICAL[i])
        header.append("target")
    lines = [delimiter.join(header)]
    for inst in fs.instances:
        row = [str(inst.frame), str(inst.ordinal), "-" if inst.counterpart is None else str(inst.counterpart)]
        if fs.method == "sgci":
            row += [_fmt(v) for v in inst.numeric]
        else:
            for i in range(4):
                row += [_fmt(v) for v in inst.numeric[4 * i: 4 * i + 4]]
                if i < 3:
                    row.append(inst.categorical[i])
        row.append(inst.target)
        lines.append(delimiter.join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_features(path, delimiter: str = ",") -> FeatureSet:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = lines[0].split(delimiter)
    method = "ged" if any(h.startswith("event_") for h in header) else "sgci"
    num_idx = [i for i, h in enumerate(header) if h.split("_")[0] in PROFILE_FIELDS]
    cat_idx = [i for i, h in enumerate(header) if h.startswith("event_")]
    fs = FeatureSet(method, [])
    for line in lines[1:]:
        if not line:
            continue
        cells = line.split(delimiter)
        cp = None if cells[2] == "-" else int(cells[2])
        fs.instances.append(
            SequenceInstance(
                method,
                int(cells[0]),
                int(cells[1]),
                cp,
                tuple(float(cells[i]) for i in num_idx),
                tuple(cells[i] for i in cat_idx),
                cells[-1],
            )
        )
    return fs


def write_manifest(fs: FeatureSet, path) -> None:
    counts = fs.class_counts()
    lines = [
        f"method={fs.method}",
        f"instances={len(fs.instances)}",
        f"skipped={fs.skipped}",
        f"relabeled_split_merge={fs.relabeled}",
    ]
    for c in fs.class_order:
        lines.append(f"class.{c}={counts.get(c, 0)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
