"""Command-line entry point: ``rpmlink {stats,synth,featurize,train,evaluate,compare}``.

Settings come from an optional JSON ``--config`` file, overridden by flags.
Every command that writes an output also writes ``<output>.config.json``,
the fully resolved settings; feeding that file back through ``--config``
reproduces the run.

Exit codes: 0 success, 1 usage or config error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
import warnings
from pathlib import Path

from .classifier import ClassWeightedLinearSVM
from .evaluation import ALL_METHODS, EvaluationError, ExperimentConfig, run_experiment
from .rate_features import FeatureSetKind, build_dataset
from .synthgen import SynthConfig, generate
from .temporal_graph import (build_frames, frame_at, load_edge_list, snapshot_dynamics,
                             write_edge_list)
from .topo_metrics import METRICS, score_all_pairs

logger = logging.getLogger("rpmlink")

COMMANDS = ("stats", "synth", "featurize", "train", "evaluate", "compare")
_CLASSIFIER_FLAGS = {"C": "C", "epochs": "epochs", "learning_rate": "learning_rate",
                     "class_weight": "class_weight", "batch_size": "batch_size",
                     "poly_degree": "poly_degree"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_network_flags(p):
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--input", help="edge list: 'src dst snapshot' per line")
    p.add_argument("--directed", action="store_true", default=None)
    p.add_argument("--output", help="output path")


def _add_experiment_flags(p, with_methods=False):
    p.add_argument("-w", "--window", type=int)
    p.add_argument("-n", "--frames", type=int, help="history frames")
    p.add_argument("--target-frame", type=int, help="1-based frame index to predict (default n+1)")
    p.add_argument("--n-targets", type=int, help="slide the target over this many frames")
    p.add_argument("--neighbor-mode", choices=("union", "out"))
    p.add_argument("--incident", choices=("union", "out"),
                   help="which edges count towards a node's formation rate (directed only)")
    p.add_argument("--model", help="forecaster: mean | ma:N | wma:c1,..,cn | ema:alpha | auto")
    p.add_argument("--cumulative-graph", action="store_true", default=None)
    p.add_argument("--count-deletions", action="store_true", default=None)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--C", type=float, dest="C")
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--class-weight", choices=("balanced", "none"))
    p.add_argument("--batch-size", type=int)
    p.add_argument("--poly-degree", type=int, choices=(1, 2))
    if with_methods:
        p.add_argument("--methods", help=f"comma list from {','.join(ALL_METHODS)}")
        p.add_argument("--folds", type=int)
        p.add_argument("--repeats", type=int)


def build_parser():
    parser = _Parser(prog="rpmlink", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("stats", help="per-snapshot added/dropped edge counts as CSV")
    _add_network_flags(p)

    p = sub.add_parser("synth", help="write a synthetic temporal network")
    p.add_argument("--config")
    p.add_argument("--output")
    for f in dataclasses.fields(SynthConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.type in ("bool", bool):
            p.add_argument(flag, action="store_true", default=None)
        else:
            p.add_argument(flag, type=int if f.type in ("int", int) else float)

    p = sub.add_parser("featurize", help="labelled pair dataset as CSV + schema sidecar")
    _add_network_flags(p)
    _add_experiment_flags(p)
    p.add_argument("--kind", choices=[k.value for k in FeatureSetKind])
    p.add_argument("--scores-only", action="store_true", default=None,
                   help="write raw src,dst,cn,jc,pa,aa scores of the last history frame")

    p = sub.add_parser("train", help="fit the classifier and save it as JSON")
    _add_network_flags(p)
    _add_experiment_flags(p)
    p.add_argument("--kind", choices=[k.value for k in FeatureSetKind])

    for name, helptext in (("evaluate", "cross-validated AUROC of selected methods"),
                           ("compare", "cross-validated AUROC of all seven methods")):
        p = sub.add_parser(name, help=helptext)
        _add_network_flags(p)
        _add_experiment_flags(p, with_methods=True)
    return parser


def _read_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must be a JSON object")
    data.pop("command", None)
    data.pop("derived", None)
    return data


def _experiment_config(args, command):
    data = _read_config(args.config)
    extra = {k: data.pop(k) for k in ("kind", "scores_only") if k in data}
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise UsageError(f"unknown config field(s): {', '.join(unknown)}")
    cfg = ExperimentConfig(**data)
    cfg.classifier = {**ExperimentConfig().classifier, **cfg.classifier}
    if command == "compare" and "methods" not in data:
        cfg.methods = list(ALL_METHODS)
    if command == "evaluate" and "methods" not in data:
        cfg.methods = ["RPM"]

    for name in known:
        value = getattr(args, name, None)
        if value is None or name == "classifier":
            continue
        if name == "methods":
            value = [m.strip() for m in value.split(",") if m.strip()]
        setattr(cfg, name, value)
    for flag, key in _CLASSIFIER_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            cfg.classifier[key] = value
    for key in ("kind", "scores_only"):
        value = getattr(args, key, None)
        if value is not None:
            extra[key] = value
    if not cfg.input:
        raise UsageError(f"{command}: --input (or 'input' in the config) is required")
    try:
        cfg.validate()
    except EvaluationError as exc:
        raise UsageError(str(exc)) from None
    return cfg, extra


def _write_echo(output, command, settings, derived=None):
    if not output:
        return
    echo = {"command": command, **settings}
    if derived:
        echo["derived"] = derived
    with open(f"{output}.config.json", "w", encoding="utf-8") as fh:
        json.dump(echo, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _open_out(path):
    return open(path, "w", newline="", encoding="utf-8") if path else sys.stdout


def cmd_stats(args):
    data = _read_config(args.config)
    path = args.input or data.get("input")
    if not path:
        raise UsageError("stats: --input is required")
    directed = args.directed if args.directed is not None else bool(data.get("directed", False))
    output = args.output or data.get("output")
    net = load_edge_list(path, directed=directed)
    rows = snapshot_dynamics(net)
    fh = _open_out(output)
    try:
        writer = csv.DictWriter(fh, fieldnames=["t", "added", "dropped"], lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if output:
            fh.close()
    _write_echo(output, "stats", {"input": path, "directed": directed, "output": output})


def cmd_synth(args):
    data = _read_config(args.config)
    output = args.output or data.pop("output", None)
    data.pop("output", None)
    known = {f.name for f in dataclasses.fields(SynthConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise UsageError(f"unknown synth config field(s): {', '.join(unknown)}")
    cfg = SynthConfig(**data)
    for name in known:
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    try:
        cfg.validate()
    except ValueError as exc:
        raise UsageError(f"synth config: {exc}") from None
    if not output:
        raise UsageError("synth: --output is required")
    write_edge_list(generate(cfg), output)
    _write_echo(output, "synth", {**cfg.to_dict(), "output": output})


def _history_and_target(net, cfg):
    target_index = cfg.resolved_target()
    fs = build_frames(net, cfg.window, cfg.frames, start=target_index - cfg.frames,
                      neighbor_mode=cfg.neighbor_mode, warn=False)
    return fs, frame_at(net, cfg.window, target_index, cfg.neighbor_mode)


def _resolved_model(cfg, net):
    if cfg.model != "auto":
        return cfg.model
    from .evaluation import choose_forecast_model
    return choose_forecast_model(net, cfg).spec()


def cmd_featurize(args):
    cfg, extra = _experiment_config(args, "featurize")
    if not cfg.output:
        raise UsageError("featurize: --output is required")
    kind = FeatureSetKind.parse(extra.get("kind", "rpm"))
    net = load_edge_list(cfg.input, directed=cfg.directed)
    fs, target = _history_and_target(net, cfg)
    model = _resolved_model(cfg, net)
    if extra.get("scores_only"):
        graph = fs.cumulative() if cfg.cumulative_graph else fs.last
        cols = [score_all_pairs(graph, m) for m in METRICS]
        V = net.num_nodes
        with open(cfg.output, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["src", "dst", *(m.value for m in METRICS)])
            for i in range(V * V):
                writer.writerow([net.labels[i // V], net.labels[i % V],
                                 *(repr(float(c[i])) for c in cols)])
    else:
        ds = build_dataset(fs, target, kind, model, cumulative_graph=cfg.cumulative_graph,
                           count_deletions=cfg.count_deletions, incident=cfg.incident)
        ds.to_csv(cfg.output, labels=net.labels, model=model)
    _write_echo(cfg.output, "featurize", {**dataclasses.asdict(cfg), **extra, "kind": kind.value},
                {"resolved_model": model, "resolved_target_frame": cfg.resolved_target()})


def cmd_train(args):
    cfg, extra = _experiment_config(args, "train")
    if not cfg.output:
        raise UsageError("train: --output is required")
    kind = FeatureSetKind.parse(extra.get("kind", "rpm"))
    net = load_edge_list(cfg.input, directed=cfg.directed)
    fs, target = _history_and_target(net, cfg)
    model = _resolved_model(cfg, net)
    ds = build_dataset(fs, target, kind, model, cumulative_graph=cfg.cumulative_graph,
                       count_deletions=cfg.count_deletions, incident=cfg.incident)
    clf = ClassWeightedLinearSVM(**cfg.classifier, random_state=cfg.seed)
    clf.fit(ds.X, ds.y, feature_names=ds.feature_names)
    clf.save(cfg.output)
    _write_echo(cfg.output, "train", {**dataclasses.asdict(cfg), "kind": kind.value},
                {"resolved_model": model, "resolved_target_frame": cfg.resolved_target(),
                 "positives": ds.positives, "negatives": ds.negatives})


def _run_report(args, command):
    cfg, _ = _experiment_config(args, command)
    net = load_edge_list(cfg.input, directed=cfg.directed)
    report = run_experiment(net, cfg)
    print(report.table())
    if cfg.output:
        out = Path(cfg.output)
        with open(out.with_suffix(".json"), "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        with open(out.with_suffix(".csv"), "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(report.rows()[0]), lineterminator="\n")
            writer.writeheader()
            writer.writerows(report.rows())
        derived = {k: v for k, v in report.config.items() if k.startswith(("resolved_", "repeat_"))}
        _write_echo(cfg.output, command, dataclasses.asdict(cfg), derived)


def cmd_evaluate(args):
    _run_report(args, "evaluate")


def cmd_compare(args):
    _run_report(args, "compare")


_HANDLERS = {
    "stats": cmd_stats, "synth": cmd_synth, "featurize": cmd_featurize,
    "train": cmd_train, "evaluate": cmd_evaluate, "compare": cmd_compare,
}


def run_cli(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError(f"rpmlink: choose a subcommand from {', '.join(COMMANDS)}")
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            _HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - every runtime failure maps to exit 2
        logger.debug("command failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
