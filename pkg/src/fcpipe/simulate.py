"""Synthetic two-group ROI cohorts with known connectivity and structured noise.

Each subject's signal is i.i.d. multivariate normal across volumes with the
group covariance. Four additive noise sources are layered on top:

* thermal: independent Gaussian noise per sample;
* drift: a linear ramp shared by all regions plus a half-period cosine whose
  sign is drawn per region;
* motion: sparse volumes where every region jumps by the same signed amount;
* physiological: cardiac and respiratory sinusoids at their aliased
  frequencies, shared across regions with a random gain per region.

Randomness for subject ``(group, index)`` comes from a Philox stream keyed by
``SeedSequence([rng_seed, group, index])``, so subjects can be generated in
any order or in parallel with identical results.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, SpecInvalid
from .ingest import DatasetManifest, ManifestEntry, RoiTimeSeries, write_manifest, write_time_series
from .kv import parse_float, parse_int, read_kv

EIG_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class SimulationSpec:
    n_per_group: int = 15
    regions: int = 20
    timepoints: int = 300
    tr_seconds: float = 2.0
    n_blocks: int = 4
    within_block_corr: float = 0.6
    base_covariance: np.ndarray | None = None
    effect_edges: tuple = ()
    thermal_sigma: float = 0.0
    drift_amplitude: float = 0.0
    spike_rate: float = 0.0
    spike_amplitude: float = 0.0
    cardiac_hz: float = 1.2
    respiratory_hz: float = 0.3
    physio_amplitude: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "effect_edges", tuple(tuple(e) for e in self.effect_edges))
        problems = []
        if self.n_per_group < 1:
            problems.append("n_per_group must be positive")
        if self.regions < 2:
            problems.append("regions must be at least 2")
        if self.timepoints < 2:
            problems.append("timepoints must be at least 2")
        if not self.tr_seconds > 0:
            problems.append("tr_seconds must be positive")
        for name in ("thermal_sigma", "drift_amplitude", "spike_amplitude", "cardiac_hz",
                     "respiratory_hz", "physio_amplitude"):
            if not getattr(self, name) >= 0:
                problems.append(f"{name} must be >= 0")
        if not 0 <= self.spike_rate <= 1:
            problems.append("spike_rate must lie in [0, 1]")
        if not 0 <= int(self.rng_seed) < 2**64:
            problems.append("rng_seed must be an unsigned 64-bit integer")
        if self.base_covariance is None:
            if not 1 <= self.n_blocks <= self.regions:
                problems.append("n_blocks must lie in [1, regions]")
            if not -1 <= self.within_block_corr <= 1:
                problems.append("within_block_corr must lie in [-1, 1]")
        else:
            cov = np.asarray(self.base_covariance, dtype=float)
            object.__setattr__(self, "base_covariance", cov)
            if cov.shape != (self.regions, self.regions):
                problems.append("base_covariance must be regions x regions")
            elif not np.allclose(cov, cov.T, atol=1e-12):
                problems.append("base_covariance must be symmetric")
            elif not np.allclose(np.diag(cov), 1.0):
                problems.append("base_covariance must have unit diagonal")
            elif np.linalg.eigvalsh(cov).min() < -1e-10:
                problems.append("base_covariance is not positive semidefinite")
        for e in self.effect_edges:
            if len(e) != 3:
                problems.append(f"effect edge {e!r} must be (i, j, delta)")
                continue
            i, j, _ = e
            if not (0 <= i < self.regions and 0 <= j < self.regions) or i == j:
                problems.append(f"effect edge ({i}, {j}) is not an off-diagonal region pair")
        if problems:
            raise SpecInvalid("; ".join(problems))

    def blocks(self) -> list[np.ndarray]:
        return np.array_split(np.arange(self.regions), self.n_blocks)


def block_covariance(regions: int, n_blocks: int, within: float) -> np.ndarray:
    cov = np.zeros((regions, regions))
    for blk in np.array_split(np.arange(regions), n_blocks):
        cov[np.ix_(blk, blk)] = within
    np.fill_diagonal(cov, 1.0)
    return cov


def repair_psd(cov: np.ndarray) -> tuple[np.ndarray, bool]:
    """Project onto PSD matrices with unit diagonal when needed.

    Eigenvalues are floored at 1e-10, then the matrix is rescaled to unit
    diagonal. Returns the (possibly unchanged) matrix and whether it changed.
    """
    vals, vecs = np.linalg.eigh(cov)
    if vals.min() >= EIG_FLOOR and np.all(np.abs(cov) <= 1.0):
        return cov, False
    fixed = (vecs * np.maximum(vals, EIG_FLOOR)) @ vecs.T
    d = np.sqrt(np.diag(fixed))
    fixed = fixed / np.outer(d, d)
    fixed = 0.5 * (fixed + fixed.T)
    np.fill_diagonal(fixed, 1.0)
    return fixed, True


def pivoted_cholesky(a: np.ndarray, tol: float = 1e-8):
    """Diagonal-pivoted Cholesky; returns ``(L, perm, rank)``.

    Raises ``ValueError`` if a pivot is significantly negative, i.e. the
    matrix is not positive semidefinite.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    perm = np.arange(n)
    L = np.zeros((n, n))
    scale = max(np.max(np.abs(np.diag(a))), 1.0)
    rank = n
    for k in range(n):
        p = k + int(np.argmax(np.diag(a)[k:]))
        if p != k:
            a[[k, p]] = a[[p, k]]
            a[:, [k, p]] = a[:, [p, k]]
            L[[k, p], :k] = L[[p, k], :k]
            perm[[k, p]] = perm[[p, k]]
        piv = a[k, k]
        if piv < -tol * scale:
            raise ValueError(f"matrix is not positive semidefinite (pivot {piv:.3g})")
        if piv <= tol * scale:
            rank = k
            break
        L[k, k] = math.sqrt(piv)
        L[k + 1:, k] = a[k + 1:, k] / L[k, k]
        a[k + 1:, k + 1:] -= np.outer(L[k + 1:, k], L[k + 1:, k])
    return L, perm, rank


def group_covariances(spec: SimulationSpec) -> tuple[np.ndarray, np.ndarray, bool]:
    if spec.base_covariance is not None:
        base = np.array(spec.base_covariance, dtype=float)
    else:
        base = block_covariance(spec.regions, spec.n_blocks, spec.within_block_corr)
    shifted = base.copy()
    for i, j, delta in spec.effect_edges:
        shifted[i, j] += delta
        shifted[j, i] += delta
    shifted, repaired = repair_psd(shifted)
    return base, shifted, repaired


def aliased_frequency(freq_hz: float, tr_seconds: float) -> float:
    fs = 1.0 / tr_seconds
    return abs(freq_hz - fs * round(freq_hz / fs))


def _factor(cov: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(cov)
    return vecs * np.sqrt(np.maximum(vals, 0.0))


def subject_rng(seed: int, group: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed), int(group), int(index)])
    return np.random.Generator(np.random.Philox(ss))


def subject_id(spec: SimulationSpec, group: int, index: int) -> str:
    return f"sub-{group * spec.n_per_group + index:03d}"


def region_labels(regions: int) -> tuple[str, ...]:
    width = max(3, len(str(regions - 1)))
    return tuple(f"roi{j:0{width}d}" for j in range(regions))


def _generate(spec: SimulationSpec, group: int, index: int, cov: np.ndarray):
    t_count, r = spec.timepoints, spec.regions
    rng = subject_rng(spec.rng_seed, group, index)
    # fixed draw order keeps each component stable when other amplitudes change
    signal = rng.standard_normal((t_count, r)) @ _factor(cov).T
    thermal = rng.standard_normal((t_count, r))
    drift_sign = rng.choice([-1.0, 1.0], size=r)
    spike_mask = rng.random(t_count) < spec.spike_rate
    spike_sign = rng.choice([-1.0, 1.0], size=t_count)
    phase_c, phase_r = rng.uniform(0.0, 2.0 * np.pi, size=2)
    gains = rng.uniform(0.5, 1.5, size=r)

    t = np.arange(t_count, dtype=float)
    data = signal + spec.thermal_sigma * thermal

    ramp = t / t_count
    half_cos = np.cos(np.pi * t / t_count)
    data += spec.drift_amplitude * (ramp[:, None] + drift_sign[None, :] * half_cos[:, None])

    spikes = spec.spike_amplitude * spike_sign * spike_mask
    data += spikes[:, None]

    f_c = aliased_frequency(spec.cardiac_hz, spec.tr_seconds)
    f_r = aliased_frequency(spec.respiratory_hz, spec.tr_seconds)
    physio = spec.physio_amplitude * (
        np.sin(2 * np.pi * f_c * t * spec.tr_seconds + phase_c)
        + np.sin(2 * np.pi * f_r * t * spec.tr_seconds + phase_r)
    )
    data += physio[:, None] * gains[None, :]

    sid = subject_id(spec, group, index)
    ts = RoiTimeSeries(sid, region_labels(r), data, spec.tr_seconds)
    meta = {
        "subject_id": sid,
        "group": group,
        "subject_index": index,
        "drift_signs": drift_sign.astype(int).tolist(),
        "spike_volumes": np.flatnonzero(spike_mask).tolist(),
        "spike_signs": spike_sign[spike_mask].astype(int).tolist(),
        "cardiac_phase": float(phase_c),
        "respiratory_phase": float(phase_r),
        "physio_gains": gains.tolist(),
    }
    return ts, meta


def generate_subject(spec: SimulationSpec, group: int, subject_index: int) -> RoiTimeSeries:
    if group not in (0, 1):
        raise SpecInvalid(f"group must be 0 or 1, got {group}")
    if not 0 <= subject_index < spec.n_per_group:
        raise SpecInvalid(f"subject_index {subject_index} outside [0, {spec.n_per_group})")
    covs = group_covariances(spec)
    return _generate(spec, group, subject_index, covs[group])[0]


def _generate_task(args):
    spec, group, index, cov = args
    return _generate(spec, group, index, cov)


@dataclass
class Cohort:
    series: list
    manifest: DatasetManifest
    ground_truth: dict = field(default_factory=dict)


def simulate_cohort(spec: SimulationSpec, jobs: int = 1) -> Cohort:
    cov0, cov1, repaired = group_covariances(spec)
    tasks = [(spec, g, k, (cov0, cov1)[g]) for g in (0, 1) for k in range(spec.n_per_group)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_generate_task, tasks))
    else:
        results = [_generate_task(t) for t in tasks]
    series = [ts for ts, _ in results]
    entries = tuple(ManifestEntry(ts.subject_id, g, Path(f"{ts.subject_id}.csv"))
                    for ts, (_, g, _, _) in zip(series, tasks))
    manifest = DatasetManifest(entries, {0: "group0", 1: "group1"}, spec.tr_seconds)
    truth = {
        "spec": spec_to_dict(spec),
        "group_covariances": {"0": cov0.tolist(), "1": cov1.tolist()},
        "psd_repaired": repaired,
        "aliased_hz": {
            "cardiac": aliased_frequency(spec.cardiac_hz, spec.tr_seconds),
            "respiratory": aliased_frequency(spec.respiratory_hz, spec.tr_seconds),
        },
        "subjects": [m for _, m in results],
    }
    return Cohort(series, manifest, truth)


def generate_cohort(spec: SimulationSpec, jobs: int = 1):
    cohort = simulate_cohort(spec, jobs=jobs)
    return cohort.series, cohort.manifest


def write_cohort(cohort: Cohort, out_dir, manifest_name: str = "manifest.txt") -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for ts in cohort.series:
        write_time_series(ts, out_dir / f"{ts.subject_id}.csv")
    entries = tuple(replace(e, path=out_dir / e.path) for e in cohort.manifest.entries)
    manifest_path = out_dir / manifest_name
    write_manifest(replace(cohort.manifest, entries=entries), manifest_path)
    with open(out_dir / "ground_truth.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(cohort.ground_truth, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest_path


def spec_to_dict(spec: SimulationSpec) -> dict:
    d = {
        "n_per_group": spec.n_per_group,
        "regions": spec.regions,
        "timepoints": spec.timepoints,
        "tr_seconds": spec.tr_seconds,
        "effect_edges": [[int(i), int(j), float(dl)] for i, j, dl in spec.effect_edges],
        "thermal_sigma": spec.thermal_sigma,
        "drift_amplitude": spec.drift_amplitude,
        "spike_rate": spec.spike_rate,
        "spike_amplitude": spec.spike_amplitude,
        "cardiac_hz": spec.cardiac_hz,
        "respiratory_hz": spec.respiratory_hz,
        "physio_amplitude": spec.physio_amplitude,
        "rng_seed": int(spec.rng_seed),
    }
    if spec.base_covariance is None:
        d["n_blocks"] = spec.n_blocks
        d["within_block_corr"] = spec.within_block_corr
    else:
        d["base_covariance"] = spec.base_covariance.tolist()
    return d


_INT_KEYS = ("n_per_group", "regions", "timepoints", "n_blocks", "rng_seed")
_FLOAT_KEYS = ("tr_seconds", "within_block_corr", "thermal_sigma", "drift_amplitude", "spike_rate",
               "spike_amplitude", "cardiac_hz", "respiratory_hz", "physio_amplitude")


def parse_effect_edges(text: str) -> tuple:
    """``i:j:delta`` triples separated by ``;`` or whitespace."""
    edges = []
    for item in text.replace(";", " ").split():
        parts = item.split(":")
        if len(parts) != 3:
            raise SpecInvalid(f"effect edge {item!r} must look like i:j:delta")
        try:
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError:
            raise SpecInvalid(f"effect edge {item!r} must look like i:j:delta") from None
    return tuple(edges)


def spec_from_kv(kv: dict, base_dir=None) -> SimulationSpec:
    kwargs = {}
    try:
        for key, value in kv.items():
            if key in _INT_KEYS:
                kwargs[key] = parse_int(value, key)
            elif key in _FLOAT_KEYS:
                kwargs[key] = parse_float(value, key)
            elif key == "effect_edges":
                kwargs[key] = parse_effect_edges(value)
            elif key == "base_covariance":
                if value.startswith("block:"):
                    nb, corr = value[len("block:"):].split(",")
                    kwargs["n_blocks"] = parse_int(nb, key)
                    kwargs["within_block_corr"] = parse_float(corr, key)
                else:
                    from .connectivity import read_matrix

                    path = Path(value)
                    if base_dir is not None and not path.is_absolute():
                        path = Path(base_dir) / path
                    kwargs["base_covariance"] = read_matrix(path)[1]
            else:
                raise SpecInvalid(f"unknown simulation key {key!r}")
    except ConfigError as exc:
        raise SpecInvalid(str(exc)) from None
    return SimulationSpec(**kwargs)


def load_spec(path) -> SimulationSpec:
    try:
        kv = read_kv(path)
    except ConfigError as exc:
        raise SpecInvalid(str(exc)) from None
    return spec_from_kv(kv, base_dir=Path(path).parent)


def write_spec(spec: SimulationSpec, path) -> None:
    d = spec_to_dict(spec)
    lines = []
    for key, value in d.items():
        if key == "effect_edges":
            if value:
                lines.append("effect_edges=" + ";".join(f"{i}:{j}:{dl!r}" for i, j, dl in value))
        elif key == "base_covariance":
            raise ValueError("explicit base covariances are written as a matrix file, not inline")
        else:
            lines.append(f"{key}={value!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
