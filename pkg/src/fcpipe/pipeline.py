"""Pipeline configuration and the per-subject chain
denoise -> connectivity -> threshold -> graph metrics -> features."""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from . import __version__
from .classify import DEFAULT_FPR_TARGETS, ClassifierConfig
from .connectivity import density_threshold, pearson_matrix, threshold_graph
from .denoise import DenoiseConfig, run_denoise
from .errors import ConfigError, PipelineError
from .features import FeatureVector, assemble_dataset, build_feature_vector
from .graphmetrics import graph_metrics, node_metrics
from .ingest import check_cohort, load_subject
from .kv import parse_bool, parse_float, parse_floats, parse_int, read_kv

log = logging.getLogger(__name__)

DEFAULT_TAU = 0.3  # arbitrary default; no principled value is known


@dataclass(frozen=True)
class PipelineConfig:
    denoise: DenoiseConfig = field(default_factory=DenoiseConfig)
    threshold_mode: str = "tau"
    threshold_value: float = DEFAULT_TAU
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    fpr_targets: tuple = DEFAULT_FPR_TARGETS

    def __post_init__(self):
        if self.threshold_mode not in ("tau", "density"):
            raise ConfigError(f"threshold mode must be 'tau' or 'density', got {self.threshold_mode!r}")
        targets = tuple(float(f) for f in self.fpr_targets)
        object.__setattr__(self, "fpr_targets", targets)
        if list(targets) != sorted(targets) or any(not 0 <= f <= 1 for f in targets):
            raise ConfigError("fpr_targets must be ascending values in [0, 1]")

    def to_lines(self) -> list[str]:
        c = self.classifier
        lines = self.denoise.to_lines() + [
            f"threshold={self.threshold_mode}:{self.threshold_value!r}",
            f"classifier={c.kind}",
            f"l2_lambda={c.l2_lambda!r}",
            f"epochs={c.epochs}",
            f"learning_rate={c.learning_rate!r}",
            f"trees={c.trees}",
            f"max_depth={'none' if c.max_depth is None else c.max_depth}",
            f"features_per_split={c.features_per_split}",
            f"seed={c.rng_seed}",
            "fpr_targets=" + ",".join(repr(f) for f in self.fpr_targets),
        ]
        return lines

    def to_text(self) -> str:
        return "\n".join(self.to_lines()) + "\n"

    def extraction_lines(self) -> list[str]:
        return self.denoise.to_lines() + [f"threshold={self.threshold_mode}:{self.threshold_value!r}"]


def config_hash(lines) -> str:
    return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()


def run_meta(lines, seed=None) -> dict:
    return {"config_hash": config_hash(lines), "seed": seed, "version": __version__}


_DENOISE_KEYS = {"detrend_order", "detrend", "bandpass", "global_signal"}
_CLASSIFIER_KEYS = {"classifier", "kind", "l2_lambda", "epochs", "learning_rate", "trees", "max_depth",
                    "features_per_split", "seed", "rng_seed"}


def apply_overrides(cfg: PipelineConfig, kv: dict) -> PipelineConfig:
    """Return ``cfg`` with string-valued ``kv`` settings applied (later wins)."""
    den = cfg.denoise
    clf = cfg.classifier
    mode, value, targets = cfg.threshold_mode, cfg.threshold_value, cfg.fpr_targets
    den_kw, clf_kw = {}, {}
    for key, raw in kv.items():
        if key in ("detrend_order", "detrend"):
            den_kw["detrend_order"] = None if raw.lower() in ("none", "off", "") else parse_int(raw, key)
        elif key == "bandpass":
            if raw.lower() in ("none", "off", ""):
                den_kw["bandpass_hz"] = None
            else:
                band = parse_floats(raw, key)
                if len(band) != 2:
                    raise ConfigError("bandpass expects low,high")
                den_kw["bandpass_hz"] = (band[0], band[1])
        elif key == "global_signal":
            den_kw["regress_global_signal"] = parse_bool(raw, key)
        elif key == "threshold":
            m, _, v = raw.partition(":")
            if not v:
                m, v = "tau", m
            mode, value = m.strip(), parse_float(v, key)
        elif key in ("tau", "density"):
            mode, value = key, parse_float(raw, key)
        elif key in ("classifier", "kind"):
            clf_kw["kind"] = raw
        elif key in ("l2_lambda", "learning_rate"):
            clf_kw[key] = parse_float(raw, key)
        elif key in ("epochs", "trees"):
            clf_kw[key] = parse_int(raw, key)
        elif key == "max_depth":
            clf_kw[key] = None if raw.lower() in ("none", "") else parse_int(raw, key)
        elif key == "features_per_split":
            clf_kw[key] = raw if raw == "sqrt" else parse_int(raw, key)
        elif key in ("seed", "rng_seed"):
            clf_kw["rng_seed"] = parse_int(raw, key)
        elif key == "fpr_targets":
            targets = tuple(parse_floats(raw, key))
        else:
            raise ConfigError(f"unknown pipeline setting {key!r}")
    if den_kw:
        den = replace(den, **den_kw)
    if clf_kw:
        clf = replace(clf, **clf_kw)
    return PipelineConfig(den, mode, value, clf, targets)


def load_pipeline_config(path=None, overrides: dict | None = None) -> PipelineConfig:
    cfg = PipelineConfig()
    if path is not None:
        cfg = apply_overrides(cfg, read_kv(path))
    if overrides:
        cfg = apply_overrides(cfg, overrides)
    return cfg


@dataclass(frozen=True)
class SubjectResult:
    subject_id: str
    vector: FeatureVector | None
    density: float | None
    error: str | None = None


def extract_subject(ts, cfg: PipelineConfig):
    """Run the feature chain on one subject; returns ``(FeatureVector, density)``."""
    clean = run_denoise(ts, cfg.denoise)
    cm = pearson_matrix(clean)
    if cfg.threshold_mode == "tau":
        g = threshold_graph(cm, cfg.threshold_value)
    else:
        g = density_threshold(cm, cfg.threshold_value)
    vec = build_feature_vector(node_metrics(g), graph_metrics(g))
    return vec, g.density()


def _extract_task(args) -> SubjectResult:
    entry, tr, cfg = args
    try:
        ts = load_subject(entry, tr)
        vec, dens = extract_subject(ts, cfg)
    except PipelineError as exc:
        return SubjectResult(entry.subject_id, None, None, f"{type(exc).__name__}: {exc}")
    return SubjectResult(entry.subject_id, vec, dens)


class SubjectFailure(PipelineError):
    def __init__(self, subject_id: str, message: str):
        self.subject_id = subject_id
        super().__init__(f"subject {subject_id!r}: {message}")


def extract_dataset(manifest, cfg: PipelineConfig, jobs: int = 1, keep_going: bool = False):
    """Features for every manifest subject, in manifest order.

    With ``keep_going`` failing subjects are logged and dropped; otherwise the
    first failure (in manifest order) is raised as :class:`SubjectFailure`.
    Returns ``(dataset, results)``.
    """
    tasks = [(e, manifest.tr_seconds, cfg) for e in manifest.entries]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_extract_task, tasks))
    else:
        results = []
        for t in tasks:
            res = _extract_task(t)
            results.append(res)
            if res.error and not keep_going:
                break

    vectors = {}
    for res in results:
        if res.error:
            if not keep_going:
                raise SubjectFailure(res.subject_id, res.error)
            log.error("subject %s skipped: %s", res.subject_id, res.error)
            continue
        log.info("subject %s: graph density %.4f", res.subject_id, res.density)
        vectors[res.subject_id] = res.vector

    kept = replace(manifest, entries=tuple(e for e in manifest.entries if e.subject_id in vectors))
    return assemble_dataset(kept, vectors), results


def check_manifest_cohort(manifest) -> None:
    """Load every subject once and verify region labels and TR agree."""
    check_cohort(load_subject(e, manifest.tr_seconds) for e in manifest.entries)
