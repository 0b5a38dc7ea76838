"""Command line pipeline: ``commevo <stage> [options]``.

Every stage reads its inputs from and writes its outputs under ``--out``.
Parameters resolve as flags > ``--config`` file > built-in defaults; the
resolved values are echoed into each report and into ``manifest.txt``.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import sys
from pathlib import Path

from . import cpm, ged, sgci, synth
from .classification import cross_validate
from .correspondence import agreement_report, write_report
from .features import ged_instances, read_features, sgci_instances, write_features, write_manifest
from .metrics import COHESION_CAP, profile_all, write_profiles
from .temporal import FrameSpec, read_log, read_snapshots, snapshots_from_log, write_log, write_snapshot

logger = logging.getLogger("commevo")

STAGES = ("synth", "slice", "detect", "track", "features", "evaluate", "compare")


class CommandError(Exception):
    """A user-facing failure; printed without a traceback."""


def _bool(text: str) -> bool:
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_float(text):
    return None if text in (None, "", "none", "None") else float(text)


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"{text!r} is not one of {', '.join(options)}")
        return text

    return parse


# name -> (parser, default, stages that use it, help)
PARAMS = {
    "log": (str, None, ("slice",), "interaction log (default: OUT/log.csv)"),
    "delimiter": (str, ",", ("slice",), "log field delimiter"),
    "window": (float, 7.0, ("slice",), "frame length in days"),
    "overlap": (float, 4.0, ("slice",), "overlap of consecutive frames in days"),
    "origin": (_optional_float, None, ("slice",), "first frame start, UTC seconds"),
    "end": (_optional_float, None, ("slice",), "nominal end of the log, UTC seconds"),
    "k": (int, 5, ("detect",), "clique size"),
    "method": (_choice("sgci", "ged", "both"), "sgci", ("track", "features", "evaluate"), "tracking method"),
    "mj": (float, 0.5, ("track",), "SGCI modified Jaccard threshold"),
    "ds_max": (float, 50.0, ("track",), "SGCI maximal size ratio"),
    "min_frames": (int, 3, ("track",), "SGCI stable chain length"),
    "sh": (float, 10.0, ("track",), "SGCI addition/deletion size ratio"),
    "dh": (float, 0.05, ("track",), "SGCI constancy tolerance"),
    "alpha": (float, 0.7, ("track",), "GED forward inclusion threshold"),
    "beta": (float, 0.7, ("track",), "GED backward inclusion threshold"),
    "importance": (_choice("social_position", "degree"), "social_position", ("track",), "GED node importance"),
    "cohesion_cap": (float, COHESION_CAP, ("features",), "cap applied to cohesion"),
    "textbook_cohesion": (_bool, False, ("features",), "use the mean-tie cohesion form"),
    "classifier": (_choice("tree", "forest", "nb", "knn"), "tree", ("evaluate",), "classifier"),
    "folds": (int, 10, ("evaluate",), "cross-validation folds"),
    "seed": (int, 0, ("evaluate", "synth"), "random seed"),
    "trees": (int, 100, ("evaluate",), "random forest size"),
    "neighbors": (int, 1, ("evaluate",), "kNN neighbourhood size"),
    "min_leaf": (int, 2, ("evaluate",), "decision tree minimal leaf size"),
    "preset": (_choice(*synth.PRESETS), "standard", ("synth",), "built-in scenario"),
    "scenario": (str, None, ("synth",), "scenario JSON file (overrides preset)"),
    "frames": (int, None, ("synth",), "frame count of the preset"),
    "noise": (float, None, ("synth",), "background arc probability of the preset"),
}


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    path = Path(path)
    if not path.exists():
        raise CommandError(f"config file not found: {path}")
    out = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise CommandError(f"{path}:{lineno}: expected key = value")
        if key not in PARAMS:
            raise CommandError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def resolve(args: argparse.Namespace, stage: str | None = None) -> dict:
    """Flags, then config file, then defaults."""
    config = read_config(args.config) if args.config else {}
    params = {}
    for name, (parse, default, stages, _) in PARAMS.items():
        flag = getattr(args, name, None)
        if flag is not None:
            value = flag
        elif name in config:
            try:
                value = parse(config[name])
            except ValueError as exc:
                raise CommandError(f"config key {name}: {exc}") from None
        else:
            value = default
        if stage is None or stage in stages:
            params[name] = value
    return params


def _argtype(parse):
    def wrapped(text):
        try:
            return parse(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    wrapped.__name__ = getattr(parse, "__name__", "value")
    return wrapped


# --------------------------------------------------------------------------
# artifact layout
# --------------------------------------------------------------------------


class Layout:
    def __init__(self, root):
        self.root = Path(root)

    log = property(lambda self: self.root / "log.csv")
    truth = property(lambda self: self.root / "truth.csv")
    scenario = property(lambda self: self.root / "scenario.json")
    snapshots = property(lambda self: self.root / "snapshots")
    groups = property(lambda self: self.root / "groups")
    profiles = property(lambda self: self.root / "profiles.csv")
    manifest = property(lambda self: self.root / "manifest.txt")
    correspondence = property(lambda self: self.root / "correspondence.csv")

    def tracks(self, method):
        return self.root / method / ("transitions.csv" if method == "sgci" else "matches.csv")

    def recovery(self, method):
        return self.root / method / "recovery.csv"

    def features(self, method):
        return self.root / f"features_{method}.csv"

    def feature_manifest(self, method):
        return self.root / f"features_{method}.manifest"

    def report(self, method, classifier):
        return self.root / f"report_{method}_{classifier}.txt"

    def report_table(self, method, classifier):
        return self.root / f"report_{method}_{classifier}.csv"

    def rel(self, path) -> str:
        return Path(path).relative_to(self.root).as_posix()


def _require(path: Path, producer: str) -> Path:
    if not path.exists():
        raise CommandError(f"missing upstream artifact {path} (run `{producer}` first)")
    return path


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _expand(paths):
    for p in paths:
        p = Path(p)
        if p.is_dir():
            yield from sorted(q for q in p.iterdir() if q.is_file())
        elif p.exists():
            yield p


def _record(layout: Layout, stage: str, params: dict, inputs, outputs) -> None:
    """Replace ``stage``'s section of the run manifest."""
    sections = {}
    if layout.manifest.exists():
        current = None
        for line in layout.manifest.read_text(encoding="utf-8").splitlines():
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1]
                sections[current] = []
            elif current and line:
                sections[current].append(line)
    body = [f"param.{k}={v}" for k, v in sorted(params.items())]
    for kind, paths in (("input", inputs), ("output", outputs)):
        for p in _expand(paths):
            try:
                rel = layout.rel(p)
            except ValueError:  # outside the run directory
                rel = p.name
            body.append(f"{kind}.{rel}=sha256:{_sha256(p)}")
    sections[stage] = body
    order = {name: i for i, name in enumerate(STAGES)}
    lines = []
    for name in sorted(sections, key=lambda n: (order.get(n.split(":")[0], 99), n)):
        lines.append(f"[{name}]")
        lines.extend(sections[name])
        lines.append("")
    layout.manifest.write_text("\n".join(lines), encoding="utf-8")


def _methods(params) -> list[str]:
    return ["sgci", "ged"] if params["method"] == "both" else [params["method"]]


def _load_snapshots(layout: Layout):
    _require(layout.snapshots, "slice")
    snaps = read_snapshots(layout.snapshots)
    if not snaps:
        raise CommandError(f"no snapshots in {layout.snapshots} (run `slice` first)")
    return snaps


def _load_groups(layout: Layout, frames: int):
    _require(layout.groups, "detect")
    for i in range(frames):
        _require(cpm.groups_path(layout.groups, i), "detect")
    return cpm.read_all_groups(layout.groups, frames)


def _load_track(layout: Layout, method: str, groups, params=None):
    path = _require(layout.tracks(method), f"track --method {method}")
    if method == "sgci":
        return sgci.read_transitions(path, groups, params)
    return ged.read_matches(path, groups, params)


# --------------------------------------------------------------------------
# stages
# --------------------------------------------------------------------------


def run_synth(layout: Layout, params: dict) -> str:
    if params["scenario"]:
        src = Path(params["scenario"])
        if not src.exists():
            raise CommandError(f"scenario file not found: {src}")
        scenario = synth.Scenario.load(src)
        scenario.seed = params["seed"]
    else:
        extra = {k: params[k] for k in ("frames", "noise") if params[k] is not None}
        scenario = synth.PRESETS[params["preset"]](seed=params["seed"], **extra)
    try:
        log, truth = synth.generate(scenario)
    except synth.ScenarioError as exc:
        raise CommandError(f"invalid scenario: {exc}") from None
    layout.root.mkdir(parents=True, exist_ok=True)
    write_log(log, layout.log)
    synth.write_truth(truth, layout.truth)
    layout.scenario.write_text(scenario.to_json() + "\n", encoding="utf-8")
    _record(layout, "synth", params, [], [layout.log, layout.truth, layout.scenario])
    return f"synth: {len(log)} interactions over {scenario.frames} frames, {len(truth)} planted events -> {layout.rel(layout.log)}"


def _frame_spec(layout: Layout, params: dict, explicit: set) -> FrameSpec:
    # synthetic runs default to the generator's own frames
    if layout.scenario.exists() and not explicit & {"window", "overlap", "origin", "end"}:
        spec = synth.Scenario.load(layout.scenario).frame_spec()
        params.update(window=spec.window, overlap=spec.overlap, origin=spec.origin, end=spec.end)
        return spec
    return FrameSpec(params["window"], params["overlap"], params["origin"], params["end"])


def run_slice(layout: Layout, params: dict, explicit: set) -> str:
    src = Path(params["log"]) if params["log"] else _require(layout.log, "synth")
    if not src.exists():
        raise CommandError(f"interaction log not found: {src}")
    log = read_log(src, delimiter=params["delimiter"])
    if not len(log):
        raise CommandError(f"{src}: no interactions")
    spec = _frame_spec(layout, params, explicit)
    snaps = snapshots_from_log(log, spec)
    layout.snapshots.mkdir(parents=True, exist_ok=True)
    for old in layout.snapshots.glob("frame_*.snap"):
        old.unlink()
    for s in snaps:
        write_snapshot(s, layout.snapshots)
    _record(layout, "slice", {k: v for k, v in params.items() if k != "log"}, [src], [layout.snapshots])
    return f"slice: {len(snaps)} frames from {log.summary()} -> {layout.rel(layout.snapshots)}/"


def run_detect(layout: Layout, params: dict) -> str:
    snaps = _load_snapshots(layout)
    groups = cpm.detect_all(snaps, k=params["k"])
    layout.groups.mkdir(parents=True, exist_ok=True)
    for old in layout.groups.glob("frame_*.groups"):
        old.unlink()
    for i, frame in enumerate(groups):
        cpm.write_groups(frame, i, layout.groups)
    total = sum(len(g) for g in groups)
    _record(layout, "detect", params, [layout.snapshots], [layout.groups])
    return f"detect: {total} groups in {len(groups)} frames (k={params['k']}) -> {layout.rel(layout.groups)}/"


def _sgci_params(params):
    return sgci.SgciParams(params["mj"], params["ds_max"], params["min_frames"], params["sh"], params["dh"])


def _ged_params(params):
    return ged.GedParams(alpha=params["alpha"], beta=params["beta"], importance=params["importance"])


def run_track(layout: Layout, params: dict) -> str:
    methods = _methods(params)
    try:
        sp = _sgci_params(params) if "sgci" in methods else None
        gp = _ged_params(params) if "ged" in methods else None
    except ValueError as exc:
        raise CommandError(str(exc)) from None
    snaps = _load_snapshots(layout)
    groups = _load_groups(layout, len(snaps))
    parts = []
    for method in methods:
        out = layout.tracks(method)
        out.parent.mkdir(parents=True, exist_ok=True)
        if method == "sgci":
            result = sgci.track(groups, sp)
            sgci.write_transitions(result, out)
            parts.append(f"sgci {len(result.stable)} stable groups, {len(result.transitions)} transitions, {len(result.decayed)} decays")
        else:
            result = ged.track(groups, snaps, gp)
            ged.write_matches(result, out)
            parts.append(f"ged {len(result.matches)} matches, {len(result.dissolving)} dissolving, {len(result.forming)} forming")
        outputs = [out]
        if layout.truth.exists():
            rec = synth.score(synth.read_truth(layout.truth), groups, result.group_events(), method)
            lines = ["event,planted,recovered,rate"]
            for ev in sorted(rec.totals):
                lines.append(f"{ev},{rec.totals[ev]},{rec.hits.get(ev, 0)},{rec.rates[ev]!r}")
            layout.recovery(method).write_text("\n".join(lines) + "\n", encoding="utf-8")
            outputs.append(layout.recovery(method))
            parts[-1] += f", recovery min {min(rec.rates.values(), default=1.0):.3f}"
        keep = ("mj", "ds_max", "min_frames", "sh", "dh") if method == "sgci" else ("alpha", "beta", "importance")
        _record(layout, f"track:{method}", {k: params[k] for k in keep}, [layout.groups], outputs)
    return "track: " + "; ".join(parts)


def run_features(layout: Layout, params: dict) -> str:
    snaps = _load_snapshots(layout)
    groups = _load_groups(layout, len(snaps))
    profiles = profile_all(groups, snaps, cap=params["cohesion_cap"], textbook=params["textbook_cohesion"])
    write_profiles(profiles, layout.profiles)
    parts = []
    for method in _methods(params):
        result = _load_track(layout, method, groups)
        build = sgci_instances if method == "sgci" else ged_instances
        fs = build(result, profiles, cap=params["cohesion_cap"])
        write_features(fs, layout.features(method))
        write_manifest(fs, layout.feature_manifest(method))
        keep = {k: params[k] for k in ("cohesion_cap", "textbook_cohesion")}
        _record(layout, f"features:{method}", keep, [layout.groups, layout.tracks(method)],
                [layout.profiles, layout.features(method), layout.feature_manifest(method)])
        parts.append(f"{method} {len(fs.instances)} instances ({fs.skipped} skipped)")
    return "features: " + "; ".join(parts)


def _classifier_params(params) -> dict:
    name = params["classifier"]
    if name == "tree":
        return {"min_leaf": params["min_leaf"]}
    if name == "forest":
        return {"trees": params["trees"]}
    if name == "knn":
        return {"k": params["neighbors"]}
    return {}


def run_evaluate(layout: Layout, params: dict, echo: dict) -> str:
    parts = []
    for method in _methods(params):
        fs = read_features(_require(layout.features(method), f"features --method {method}"))
        if not fs.instances:
            raise CommandError(f"{layout.features(method)} holds no instances to evaluate")
        data = fs.to_dataset()
        try:
            report = cross_validate(data, params["classifier"], params["folds"], params["seed"], **_classifier_params(params))
        except ValueError as exc:
            raise CommandError(str(exc)) from None
        skip = ("method", "log", "scenario", "classifier", "folds", "seed")
        header = {"method": method, **{k: v for k, v in sorted(echo.items()) if k not in skip}}
        out = layout.report(method, params["classifier"])
        out.write_text(report.to_text(header), encoding="utf-8")
        table = layout.report_table(method, params["classifier"])
        table.write_text(report.to_table(), encoding="utf-8")
        _record(layout, f"evaluate:{method}:{params['classifier']}", params, [layout.features(method)], [out, table])
        parts.append(f"{method} {params['classifier']} macro-F {report.macro_f:.4f} over {len(data)} instances")
    return "evaluate: " + "; ".join(parts)


def run_compare(layout: Layout, params: dict) -> str:
    snaps = _load_snapshots(layout)
    groups = _load_groups(layout, len(snaps))
    s = _load_track(layout, "sgci", groups)
    g = _load_track(layout, "ged", groups)
    report = agreement_report(s, g)
    write_report(report, layout.correspondence)
    _record(layout, "compare", {}, [layout.tracks("sgci"), layout.tracks("ged")], [layout.correspondence])
    pairs = sum(report["totals"].values())
    return f"compare: {pairs} shared transitions -> {layout.rel(layout.correspondence)}"


def run_pipeline(layout: Layout, args) -> list[str]:
    params = resolve(args)
    explicit = _explicit(args)
    if "method" not in explicit:
        params["method"] = "both"
    lines = []
    if params["log"] is None and (params["scenario"] or not layout.log.exists() or "preset" in explicit):
        lines.append(run_synth(layout, _subset(params, "synth")))
    sliced = _subset(params, "slice")
    lines.append(run_slice(layout, sliced, explicit))
    params.update({k: v for k, v in sliced.items() if k in params})
    lines.append(run_detect(layout, _subset(params, "detect")))
    lines.append(run_track(layout, _subset(params, "track")))
    lines.append(run_features(layout, _subset(params, "features")))
    lines.append(run_evaluate(layout, _subset(params, "evaluate"), params))
    if params["method"] == "both":
        lines.append(run_compare(layout, {}))
    return lines


def _subset(params, stage):
    return {k: v for k, v in params.items() if stage in PARAMS[k][2]}


def _explicit(args) -> set:
    """Parameters set by a flag or by the config file."""
    names = {n for n in PARAMS if getattr(args, n, None) is not None}
    if args.config:
        names |= set(read_config(args.config))
    return names


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def _add_params(parser, stages):
    for name, (parse, default, used, text) in PARAMS.items():
        if set(used) & set(stages):
            flag = "--" + name.replace("_", "-")
            parser.add_argument(flag, dest=name, type=_argtype(parse), default=None,
                                help=text if "default:" in text else f"{text} (default: {default})")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="run", help="artifact directory (default: run)")
    common.add_argument("--config", help="key = value parameter file")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(prog="commevo", description="Group evolution tracking and prediction pipeline.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "synth": "generate a synthetic log with planted events",
        "slice": "cut the interaction log into frame snapshots",
        "detect": "find k-clique communities per frame",
        "track": "link groups across frames and label events",
        "features": "build classifier inputs from tracked groups",
        "evaluate": "cross-validate a classifier on the features",
        "compare": "cross-tabulate SGCI and GED events",
        "pipeline": "run every stage from one configuration",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, parents=[common], help=text, description=text)
        _add_params(p, STAGES if name == "pipeline" else (name,))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    layout = Layout(args.out)
    try:
        if args.command == "pipeline":
            lines = run_pipeline(layout, args)
        else:
            params = resolve(args, args.command)
            layout.root.mkdir(parents=True, exist_ok=True)
            runner = {
                "synth": lambda: run_synth(layout, params),
                "slice": lambda: run_slice(layout, params, _explicit(args)),
                "detect": lambda: run_detect(layout, params),
                "track": lambda: run_track(layout, params),
                "features": lambda: run_features(layout, params),
                "evaluate": lambda: run_evaluate(layout, params, resolve(args)),
                "compare": lambda: run_compare(layout, params),
            }[args.command]
            lines = [runner()]
    except CommandError as exc:
        print(f"commevo: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"commevo: error: {exc}", file=sys.stderr)
        return 1
    for line in lines:
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
