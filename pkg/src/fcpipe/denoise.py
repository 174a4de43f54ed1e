"""Temporal cleaning of ROI time series.

Stages run in a fixed order: polynomial detrend, spectral band-pass, then
nuisance regression (with the global signal appended as a regressor when
requested). Every stage is a linear operator applied column by column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BandOutOfRange,
    ConfigError,
    LengthMismatch,
    OrderTooHigh,
    RankDeficientDesign,
)
from .ingest import RoiTimeSeries

RANK_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class NuisanceSet:
    names: tuple[str, ...]
    regressors: np.ndarray

    def __post_init__(self):
        reg = np.asarray(self.regressors, dtype=float)
        if reg.ndim == 1:
            reg = reg[:, None]
        object.__setattr__(self, "regressors", reg)
        object.__setattr__(self, "names", tuple(self.names))
        if len(self.names) != reg.shape[1]:
            raise LengthMismatch(f"{len(self.names)} names for {reg.shape[1]} regressors")
        if not np.all(np.isfinite(reg)):
            raise ValueError("nuisance regressors must be finite")
        if np.any(np.all(reg == 0, axis=0)):
            raise RankDeficientDesign("nuisance set contains an all-zero regressor")

    @property
    def n_timepoints(self) -> int:
        return self.regressors.shape[0]


@dataclass(frozen=True)
class DenoiseConfig:
    detrend_order: int | None = None
    bandpass_hz: tuple[float, float] | None = None
    regress_global_signal: bool = False
    extra_nuisance: NuisanceSet | None = None

    def __post_init__(self):
        if self.detrend_order is not None and self.detrend_order < 0:
            raise ConfigError("detrend_order must be >= 0")
        if self.bandpass_hz is not None:
            low, high = self.bandpass_hz
            if not (0 <= low < high):
                raise BandOutOfRange(f"invalid band [{low}, {high}]")

    def to_lines(self) -> list[str]:
        lines = []
        if self.detrend_order is not None:
            lines.append(f"detrend_order={self.detrend_order}")
        if self.bandpass_hz is not None:
            lines.append(f"bandpass={self.bandpass_hz[0]!r},{self.bandpass_hz[1]!r}")
        lines.append(f"global_signal={'true' if self.regress_global_signal else 'false'}")
        return lines


def detrend(ts: RoiTimeSeries, order: int) -> RoiTimeSeries:
    """Remove a least-squares polynomial trend of degree `order` from each column."""
    t = ts.n_timepoints
    if order < 0:
        raise OrderTooHigh("order must be non-negative")
    if t <= order + 1:
        raise OrderTooHigh(f"detrend order {order} needs more than {order + 1} timepoints, got {t}")
    # Legendre basis on [-1, 1] spans the same space as raw powers of the
    # time index but stays well conditioned for long series.
    x = np.linspace(-1.0, 1.0, t)
    basis = np.polynomial.legendre.legvander(x, order)
    q, _ = np.linalg.qr(basis)
    resid = ts.data - q @ (q.T @ ts.data)
    return ts.with_data(resid)


def bandpass(ts: RoiTimeSeries, low_hz: float, high_hz: float) -> RoiTimeSeries:
    """Hard spectral mask: zero every DFT bin outside ``[low_hz, high_hz]``."""
    nyquist = 1.0 / (2.0 * ts.tr_seconds)
    if not (0 <= low_hz < high_hz <= nyquist * (1 + 1e-12)):
        raise BandOutOfRange(
            f"band [{low_hz}, {high_hz}] Hz not within [0, {nyquist}] (Nyquist for tr={ts.tr_seconds})"
        )
    t = ts.n_timepoints
    spectrum = np.fft.rfft(ts.data, axis=0)
    freqs = np.fft.rfftfreq(t, d=ts.tr_seconds)
    reject = (freqs < low_hz) | (freqs > high_hz)
    spectrum[reject, :] = 0.0
    return ts.with_data(np.fft.irfft(spectrum, n=t, axis=0))


def global_signal(ts: RoiTimeSeries) -> np.ndarray:
    return ts.data.mean(axis=1)


def nuisance_regress(ts: RoiTimeSeries, nuisance: NuisanceSet) -> RoiTimeSeries:
    """Replace each column by its OLS residual on ``[1 | regressors]``."""
    reg = nuisance.regressors
    t = ts.n_timepoints
    if reg.shape[0] != t:
        raise LengthMismatch(f"nuisance has {reg.shape[0]} rows, series has {t}")
    if reg.shape[1] >= t:
        raise RankDeficientDesign(f"{reg.shape[1]} regressors for {t} timepoints")
    design = np.column_stack([np.ones(t), reg])
    sv = np.linalg.svd(design, compute_uv=False)
    if sv[-1] <= RANK_RTOL * sv[0]:
        raise RankDeficientDesign(
            f"design matrix [1 | {', '.join(nuisance.names)}] is rank deficient"
        )
    coef, *_ = np.linalg.lstsq(design, ts.data, rcond=None)
    return ts.with_data(ts.data - design @ coef)


def run_denoise(ts: RoiTimeSeries, cfg: DenoiseConfig) -> RoiTimeSeries:
    out = ts
    if cfg.detrend_order is not None:
        out = detrend(out, cfg.detrend_order)
    if cfg.bandpass_hz is not None:
        out = bandpass(out, *cfg.bandpass_hz)

    names: list[str] = []
    columns: list[np.ndarray] = []
    if cfg.extra_nuisance is not None:
        names.extend(cfg.extra_nuisance.names)
        columns.extend(cfg.extra_nuisance.regressors.T)
    if cfg.regress_global_signal:
        # computed on the already filtered data so regressor and data share a space
        names.append("global_signal")
        columns.append(global_signal(out))
    if columns:
        out = nuisance_regress(out, NuisanceSet(tuple(names), np.column_stack(columns)))
    return out
