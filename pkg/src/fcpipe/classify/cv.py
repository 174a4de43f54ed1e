"""Leave-one-out evaluation, ROC sweep and TPR-at-fixed-FPR tables."""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, MalformedReport, SingleClassLabels
from ..features import LabeledDataset, check_loocv_ready
from .config import ClassifierConfig
from .forest import train_random_forest
from .linear import _sigmoid, train_linear_svm, train_logreg

DEFAULT_FPR_TARGETS = (0.1, 0.15, 0.2, 0.3)
FPR_EPS = 1e-12


def train(x, y, cfg: ClassifierConfig):
    if cfg.kind == "logistic_regression":
        return train_logreg(x, y, cfg)
    if cfg.kind == "linear_svm":
        return train_linear_svm(x, y, cfg)
    return train_random_forest(x, y, cfg)


def predict_score(model, x):
    """Continuous score: probability (logistic), raw margin (SVM) or vote share (forest)."""
    x = np.asarray(x, dtype=float)
    if x.ndim not in (1, 2):
        raise DimensionMismatch("x must be a vector or a matrix of row vectors")
    z = model.decision(x)
    if model.kind == "logistic_regression":
        return _sigmoid(z)
    return z


def decision_point(kind: str) -> float:
    return 0.0 if kind == "linear_svm" else 0.5


def predict_label(model, x):
    # ties at the decision point go to class 0
    return (np.asarray(predict_score(model, x)) > decision_point(model.kind)).astype(int)


def model_fingerprint(model) -> str:
    return json.dumps(model.to_dict(), sort_keys=True)


@dataclass
class CvReport:
    per_subject: list
    accuracy: float
    accuracy_dispersion: float
    roc: list
    tpr_at_fpr: dict
    config: dict = field(default_factory=dict)
    run_meta: dict = field(default_factory=dict)
    name: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "per_subject": [
                {"subject_id": s, "true_label": int(t), "score": float(sc), "predicted": int(p)}
                for s, t, sc, p in self.per_subject
            ],
            "accuracy": self.accuracy,
            "accuracy_dispersion": self.accuracy_dispersion,
            "accuracy_dispersion_kind": "binomial_standard_error",
            "roc": [[f, t] for f, t in self.roc],
            "tpr_at_fpr": {repr(float(k)): v for k, v in self.tpr_at_fpr.items()},
            "config": self.config,
            "run_meta": self.run_meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict, source: str = "<report>") -> "CvReport":
        missing = [k for k in ("per_subject", "accuracy", "accuracy_dispersion", "roc", "tpr_at_fpr") if k not in d]
        if missing:
            raise MalformedReport(f"{source}: missing field(s) {', '.join(missing)}")
        try:
            per = [(p["subject_id"], p["true_label"], p["score"], p["predicted"]) for p in d["per_subject"]]
            tpr = {float(k): float(v) for k, v in d["tpr_at_fpr"].items()}
            roc = [(float(a), float(b)) for a, b in d["roc"]]
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise MalformedReport(f"{source}: {exc}") from None
        return cls(per, float(d["accuracy"]), float(d["accuracy_dispersion"]), roc, tpr,
                   d.get("config", {}), d.get("run_meta", {}), d.get("name", ""))


def roc_points(scores, labels) -> list[tuple[float, float]]:
    """ROC sweep over descending unique score thresholds (score >= threshold is positive)."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise SingleClassLabels("ROC needs both classes among the labels")
    points = [(0.0, 0.0)]
    for thr in np.unique(scores)[::-1]:
        pos = scores >= thr
        points.append((int(np.sum(pos & (labels == 0))) / n_neg, int(np.sum(pos & (labels == 1))) / n_pos))
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
    return points


def tpr_at_fpr(roc, targets) -> dict:
    """Step-function read-out: best TPR among ROC points with FPR <= target."""
    out = {}
    for f in targets:
        out[float(f)] = max((t for fpr, t in roc if fpr <= f + FPR_EPS), default=0.0)
    return out


def binomial_se(acc: float, n: int) -> float:
    return math.sqrt(acc * (1.0 - acc) / n)


def report_from_scores(subject_ids, labels, scores, predicted, fpr_targets=DEFAULT_FPR_TARGETS) -> CvReport:
    labels = np.asarray(labels, dtype=int)
    predicted = np.asarray(predicted, dtype=int)
    acc = float(np.mean(predicted == labels))
    roc = roc_points(scores, labels)
    return CvReport(
        per_subject=list(zip(subject_ids, labels.tolist(), [float(s) for s in scores], predicted.tolist())),
        accuracy=acc,
        accuracy_dispersion=binomial_se(acc, len(labels)),
        roc=roc,
        tpr_at_fpr=tpr_at_fpr(roc, fpr_targets),
    )


def fit_fold(ds: LabeledDataset, cfg: ClassifierConfig, held_out: int):
    keep = np.arange(ds.n_subjects) != held_out
    return train(ds.matrix[keep], ds.labels[keep], cfg)


def _score_fold(args):
    ds, cfg, i = args
    model = fit_fold(ds, cfg, i)
    score = float(predict_score(model, ds.matrix[i]))
    return score, int(score > decision_point(cfg.kind))


def loocv(ds: LabeledDataset, cfg: ClassifierConfig, fpr_targets=DEFAULT_FPR_TARGETS, jobs: int = 1) -> CvReport:
    """Hold out each subject once; standardisation and model are fit on the rest."""
    check_loocv_ready(ds)
    tasks = [(ds, cfg, i) for i in range(ds.n_subjects)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_score_fold, tasks))
    else:
        results = [_score_fold(t) for t in tasks]
    scores = [r[0] for r in results]
    predicted = [r[1] for r in results]
    report = report_from_scores(ds.subject_ids, ds.labels, scores, predicted, fpr_targets)
    report.config = cfg.to_dict()
    return report


def tpr_table(reports, names=None) -> str:
    """Plain-text table: FPR rows, one TPR column per report, plus accuracy."""
    names = list(names) if names is not None else [r.name or f"arm{k + 1}" for k, r in enumerate(reports)]
    targets = sorted({f for r in reports for f in r.tpr_at_fpr})
    first = "False Positive Rate"
    acc = [f"{r.accuracy:.2f} +/- {r.accuracy_dispersion:.2f}" for r in reports]
    widths = [max(len(first), 8)] + [max(len(n), len(a), 11) for n, a in zip(names, acc)]
    lines = [
        f"{first:<{widths[0]}}  " + "True Positive Rate",
        " " * widths[0] + "  " + "  ".join(f"{n:<{w}}" for n, w in zip(names, widths[1:])),
    ]
    lines.append("-" * (sum(widths) + 2 * len(names)))
    for f in targets:
        cells = []
        for r, w in zip(reports, widths[1:]):
            v = r.tpr_at_fpr.get(f)
            cells.append(f"{'-' if v is None else format(v, '.2f'):<{w}}")
        lines.append(f"{f:<{widths[0]}g}  " + "  ".join(cells))
    lines.append("-" * (sum(widths) + 2 * len(names)))
    lines.append(f"{'accuracy':<{widths[0]}}  " + "  ".join(f"{a:<{w}}" for a, w in zip(acc, widths[1:])))
    return "\n".join(line.rstrip() for line in lines) + "\n"
