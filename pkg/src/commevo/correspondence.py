"""GED to SGCI event vocabulary mapping and the agreement report."""

from __future__ import annotations

from collections import Counter
from pathlib import Path

from .ged import GedEvent, GedResult
from .sgci import PRIORITY as SGCI_ORDER
from .sgci import SgciEvent, SgciResult

G, S = GedEvent, SgciEvent

CORRESPONDENCE = {
    G.CONTINUING: frozenset({S.CONSTANCY}),
    G.GROWING: frozenset({S.CHANGE_SIZE}),
    G.SHRINKING: frozenset({S.CHANGE_SIZE}),
    G.MERGING: frozenset({S.MERGE, S.ADDITION}),
    G.SPLITTING: frozenset({S.SPLIT, S.DELETION}),
    G.DISSOLVING: frozenset({S.DECAY}),
    G.FORMING: frozenset(),
}

# split_merge has no GED counterpart
UNMAPPED_SGCI = frozenset({S.SPLIT_MERGE})

GED_ORDER = (G.CONTINUING, G.GROWING, G.SHRINKING, G.MERGING, G.SPLITTING, G.DISSOLVING, G.FORMING)


def map_events(ged_event) -> frozenset:
    return CORRESPONDENCE[G(ged_event)]


def agreement_report(sgci: SgciResult, ged: GedResult) -> dict:
    """Co-occurrence counts over group pairs seen by both methods.

    A pair is a transition ``(frame-t group, frame-(t+1) group)``; decay and
    dissolving pair a group with ``None``. Returns ``counts`` keyed by
    ``(ged_event, sgci_event)``, per-GED-event pair totals, and the share of
    those pairs whose SGCI labels intersect the mapped vocabulary.
    """
    sgci_pairs = {tr.key: tr.events for tr in sgci.transitions}
    for g in sgci.decayed:
        sgci_pairs[(g.key, None)] = frozenset({S.DECAY})
    ged_pairs = {(m.g1.key, m.g2.key): m.event for m in ged.matches}
    for g in ged.dissolving:
        ged_pairs[(g.key, None)] = G.DISSOLVING

    counts = Counter()
    totals = Counter()
    agree = Counter()
    for pair, gev in ged_pairs.items():
        sev = sgci_pairs.get(pair)
        if sev is None:
            continue
        totals[gev] += 1
        if not sev:
            counts[(gev, None)] += 1
        for e in sev:
            counts[(gev, e)] += 1
        if sev & CORRESPONDENCE[gev]:
            agree[gev] += 1
    rates = {g: (agree[g] / totals[g] if totals[g] else 0.0) for g in GED_ORDER}
    return {"counts": counts, "totals": totals, "rates": rates}


def write_report(report: dict, path, delimiter: str = ",") -> None:
    cols = list(SGCI_ORDER) + [None]
    header = ["ged\\sgci"] + [c.value if c else "none" for c in cols] + ["pairs", "agreement"]
    lines = [delimiter.join(header)]
    for g in GED_ORDER:
        row = [g.value] + [str(report["counts"].get((g, c), 0)) for c in cols]
        row += [str(report["totals"].get(g, 0)), f"{report['rates'][g]:.6f}"]
        lines.append(delimiter.join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
