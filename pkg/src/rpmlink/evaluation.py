"""AUROC, stratified cross-validation, significance tests and the full comparison experiment."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .classifier import ClassWeightedLinearSVM
from .forecasting import default_candidates, parse_model, select_model
from .rate_features import FeatureSetKind, build_dataset, target_labels
from .temporal_graph import build_frames, frame_at
from .topo_metrics import MetricKind, score_all_pairs

logger = logging.getLogger(__name__)

SUPERVISED_METHODS = ("RPM", "Supervised-MA", "Supervised")
UNSUPERVISED_METHODS = ("CN", "JC", "PA", "AA")
ALL_METHODS = SUPERVISED_METHODS + UNSUPERVISED_METHODS

_KIND_OF = {
    "RPM": FeatureSetKind.RPM,
    "Supervised-MA": FeatureSetKind.SUPERVISED_MA,
    "Supervised": FeatureSetKind.SUPERVISED,
}


class EvaluationError(ValueError):
    pass


def canonical_method(name):
    lookup = {m.lower().replace("-", "_"): m for m in ALL_METHODS}
    key = str(name).lower().replace("-", "_")
    if key not in lookup:
        raise EvaluationError(f"unknown method {name!r}; choose from {', '.join(ALL_METHODS)}")
    return lookup[key]


@dataclass(frozen=True)
class RocResult:
    auroc: float
    positives: int
    negatives: int


def auroc(scores, labels):
    """Mann-Whitney AUROC with average ranks for ties."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise EvaluationError(f"{len(scores)} scores but {len(labels)} labels")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise EvaluationError("AUROC needs both positive and negative examples")
    ranks = stats.rankdata(scores)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return RocResult(float(u / (n_pos * n_neg)), n_pos, n_neg)


def stratified_kfold(labels, k, seed=0):
    """Fold index per row; each class is spread so per-fold counts differ by at most one."""
    labels = np.asarray(labels).ravel()
    if k < 2:
        raise EvaluationError("cross-validation needs k >= 2")
    rng = np.random.default_rng(seed)
    folds = np.empty(len(labels), dtype=np.int64)
    offset = 0
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if len(idx) < k:
            raise EvaluationError(f"class {cls} has {len(idx)} members, fewer than k={k}")
        idx = rng.permutation(idx)
        # rotate the start so leftover rows don't always land in fold 0
        folds[idx] = (np.arange(len(idx)) + offset) % k
        offset += len(idx)
    return folds


def unsupervised_auroc(graph, target, kind):
    scores = score_all_pairs(graph, MetricKind.parse(kind))
    return auroc(scores, target_labels(target))


def paired_t_test(a, b):
    """Two-tailed p-value of the paired t statistic on ``a - b``.

    All-zero differences give 1.0; constant nonzero differences give 0.0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise EvaluationError(f"paired samples differ in length: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise EvaluationError("paired t-test needs at least two pairs")
    d = a - b
    if np.all(d == 0):
        return 1.0
    if np.all(d == d[0]):
        return 0.0
    return float(stats.ttest_rel(a, b).pvalue)


@dataclass
class ExperimentConfig:
    """Every knob of a run; the CLI echoes this back to disk."""

    input: str | None = None
    directed: bool = False
    neighbor_mode: str = "union"
    window: int = 1
    frames: int = 5
    target_frame: int | None = None
    n_targets: int = 1
    methods: list = field(default_factory=lambda: list(ALL_METHODS))
    model: str = "wma:0.2,0.3,0.5"
    classifier: dict = field(default_factory=lambda: {
        "C": 1.0, "epochs": 50, "learning_rate": 0.1, "class_weight": "balanced",
        "batch_size": 1, "poly_degree": 1})
    folds: int = 10
    repeats: int = 10
    seed: int = 0
    threads: int = 1
    cumulative_graph: bool = False
    count_deletions: bool = False
    incident: str = "union"
    output: str | None = None

    def resolved_target(self):
        return self.target_frame if self.target_frame is not None else self.frames + 1

    def validate(self):
        errors = []
        if self.window < 1:
            errors.append("window: must be >= 1")
        if self.frames < 1:
            errors.append("frames: must be >= 1")
        if self.resolved_target() <= self.frames:
            errors.append("target_frame: must come after the history frames")
        if self.n_targets < 1:
            errors.append("n_targets: must be >= 1")
        if self.folds < 2:
            errors.append("folds: must be >= 2")
        if self.repeats < 1:
            errors.append("repeats: must be >= 1")
        if self.threads < 1:
            errors.append("threads: must be >= 1")
        if self.neighbor_mode not in ("union", "out"):
            errors.append("neighbor_mode: must be 'union' or 'out'")
        if self.incident not in ("union", "out"):
            errors.append("incident: must be 'union' or 'out'")
        try:
            self.methods = [canonical_method(m) for m in self.methods]
        except EvaluationError as exc:
            errors.append(f"methods: {exc}")
        if self.model != "auto":
            try:
                parse_model(self.model)
            except ValueError as exc:
                errors.append(f"model: {exc}")
        try:
            ClassWeightedLinearSVM(**self.classifier)._check_params()
        except (TypeError, ValueError) as exc:
            errors.append(f"classifier: {exc}")
        if errors:
            raise EvaluationError("invalid experiment config:\n  " + "\n  ".join(errors))
        return self


@dataclass
class MethodResult:
    name: str
    runs: list
    per_target: list

    @property
    def mean(self):
        return float(np.mean(self.runs))

    @property
    def std(self):
        return float(np.std(self.runs, ddof=1)) if len(self.runs) > 1 else 0.0


@dataclass
class ExperimentReport:
    methods: dict
    t_tests: dict
    config: dict

    def to_dict(self):
        return {
            "methods": {
                name: {"mean_auroc": r.mean, "std_auroc": r.std, "runs": r.runs,
                       "per_target": r.per_target}
                for name, r in self.methods.items()
            },
            "t_tests": self.t_tests,
            "config": self.config,
        }

    def rows(self):
        out = []
        for name, r in self.methods.items():
            t = self.t_tests.get(name, {})
            out.append({"method": name, "mean_auroc": r.mean, "std_auroc": r.std,
                        "runs": len(r.runs), "p_value_vs_rpm": t.get("p_value")})
        return out

    def table(self):
        lines = [f"{'method':<15}{'AUROC':>9}{'std':>9}{'runs':>6}{'p vs RPM':>12}"]
        for row in self.rows():
            p = row["p_value_vs_rpm"]
            ptxt = "" if p is None else f"{p:.3g}"
            lines.append(f"{row['method']:<15}{row['mean_auroc']:>9.4f}{row['std_auroc']:>9.4f}"
                         f"{row['runs']:>6}{ptxt:>12}")
        return "\n".join(lines)


def _cv_fold(X, y, folds, fold, clf_params):
    test = folds == fold
    model = ClassWeightedLinearSVM(**clf_params).fit(X[~test], y[~test])
    return auroc(model.decision_function(X[test]), y[test]).auroc


def _split(net, cfg, target_index, neighbor_mode):
    start = target_index - cfg.frames
    if start < 1:
        raise EvaluationError(f"target frame {target_index} leaves no room for {cfg.frames} history frames")
    if target_index * cfg.window > net.num_snapshots:
        raise EvaluationError(
            f"target frame {target_index} with window {cfg.window} needs "
            f"{target_index * cfg.window} snapshots, network has {net.num_snapshots}")
    fs = build_frames(net, cfg.window, cfg.frames, start=start, neighbor_mode=neighbor_mode,
                      warn=False)
    return fs, frame_at(net, cfg.window, target_index, neighbor_mode)


def _cv_runs(X, y, cfg, pool):
    jobs = []
    for r in range(cfg.repeats):
        folds = stratified_kfold(y, cfg.folds, cfg.seed + r)
        params = dict(cfg.classifier, random_state=cfg.seed + r)
        jobs.extend((folds, f, params) for f in range(cfg.folds))
    return list(pool.map(lambda job: _cv_fold(X, y, *job), jobs))


def run_experiment(net, cfg: ExperimentConfig):
    """Cross-validated AUROC of every configured method, plus paired t-tests against RPM."""
    cfg.validate()
    model = cfg.model
    if model == "auto":
        model = choose_forecast_model(net, cfg).spec()
        logger.info("selected forecast model %s", model)
    runs = {m: [] for m in cfg.methods}
    per_target = {m: [] for m in cfg.methods}
    first = cfg.resolved_target()
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        for target_index in range(first, first + cfg.n_targets):
            fs, target = _split(net, cfg, target_index, cfg.neighbor_mode)
            for method in cfg.methods:
                try:
                    if method in _KIND_OF:
                        ds = build_dataset(fs, target, _KIND_OF[method], model,
                                           cumulative_graph=cfg.cumulative_graph,
                                           count_deletions=cfg.count_deletions,
                                           incident=cfg.incident)
                        values = _cv_runs(ds.X, ds.y, cfg, pool)
                    else:
                        graph = fs.cumulative() if cfg.cumulative_graph else fs.last
                        value = unsupervised_auroc(graph, target, method).auroc
                        values = [value] * (cfg.repeats * cfg.folds)
                except Exception as exc:
                    raise EvaluationError(f"{method} failed on target frame {target_index}: {exc}") from exc
                runs[method].extend(values)
                per_target[method].append(float(np.mean(values)))
                logger.info("target %d %s: mean AUROC %.4f", target_index, method, np.mean(values))

    results = {m: MethodResult(m, runs[m], per_target[m]) for m in cfg.methods}
    t_tests = {}
    if "RPM" in results:
        rpm = results["RPM"]
        for name, res in results.items():
            if name == "RPM":
                continue
            if name in _KIND_OF:
                p, axis, n = paired_t_test(rpm.runs, res.runs), "fold", len(res.runs)
            elif cfg.n_targets >= 2:
                p, axis, n = paired_t_test(rpm.per_target, res.per_target), "snapshot", cfg.n_targets
            else:
                # unsupervised baselines have no folds; one target gives no snapshot axis
                p, axis, n = None, "snapshot", cfg.n_targets
            t_tests[name] = {"p_value": p, "axis": axis, "n": n}
    echo = dict(vars(cfg))
    echo["resolved_model"] = parse_model(model).spec()
    echo["resolved_target_frame"] = first
    echo["repeat_seeds"] = [cfg.seed + r for r in range(cfg.repeats)]
    return ExperimentReport(results, t_tests, echo)


def choose_forecast_model(net, cfg, candidates=None):
    """Pick the forecaster whose RPM variant scores best on a split one frame before the target."""
    candidates = candidates or default_candidates()
    first = cfg.resolved_target()
    train_target = first - 1 if first - 1 - cfg.frames >= 1 else first
    fs, target = _split(net, cfg, train_target, cfg.neighbor_mode)

    def score(model):
        ds = build_dataset(fs, target, FeatureSetKind.RPM, model,
                           cumulative_graph=cfg.cumulative_graph,
                           count_deletions=cfg.count_deletions, incident=cfg.incident)
        folds = stratified_kfold(ds.y, cfg.folds, cfg.seed)
        params = dict(cfg.classifier, random_state=cfg.seed)
        return float(np.mean([_cv_fold(ds.X, ds.y, folds, f, params) for f in range(cfg.folds)]))

    return select_model(candidates, score)
