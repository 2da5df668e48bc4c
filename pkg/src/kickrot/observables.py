"""Observables of momentum distributions: moments, localization fits, IPR, harmonics."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

MIN_FIT_POINTS = 16
MIN_R_SQUARED = 0.9


def displacements(N: int, n0: int) -> np.ndarray:
    """Circular displacement of every level from ``n0``, in ``[-N/2, N/2)``."""
    return (np.arange(N) - n0 + N // 2) % N - N // 2


def momentum_moments(probs: np.ndarray, n0: int = 0) -> tuple[float, float]:
    """Mean displacement and variance about ``n0`` on the periodic momentum lattice."""
    probs = np.asarray(probs, dtype=float)
    d = displacements(probs.shape[-1], n0)
    mean = np.sum(probs * d, axis=-1)
    var = np.sum(probs * d * d, axis=-1) - mean**2
    var = np.maximum(var, 0.0)
    if probs.ndim == 1:
        return float(mean), float(var)
    return mean, var


def ipr(probs: np.ndarray) -> float:
    """Inverse participation ratio ``1 / sum P**2``."""
    probs = np.asarray(probs, dtype=float)
    return float(1.0 / np.sum(probs**2))


@dataclass
class LocalizationFit:
    l: float
    slope: float
    r_squared: float
    window: tuple[int, int]
    points: int
    valid: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["r2"] = d.pop("r_squared")
        d["window"] = list(self.window)
        return d


def default_window(probs: np.ndarray, n0: int) -> tuple[int, int]:
    """Tail window ``[2*l_hat, N/2 - N/16]``.

    ``l_hat`` comes from the variance: for ``P ~ exp(-2|d|/l)`` the variance
    is ``l**2 / 2``.
    """
    N = len(probs)
    _, var = momentum_moments(probs, n0)
    l_hat = np.sqrt(2.0 * var)
    return int(np.ceil(2.0 * l_hat)), N // 2 - N // 16


def symmetric_tail(probs: np.ndarray, n0: int) -> np.ndarray:
    """Average of the two tails, ``(P(n0 + d) + P(n0 - d)) / 2`` for ``d = 0..N/2``."""
    N = len(probs)
    d = np.arange(N // 2 + 1)
    return 0.5 * (probs[(n0 + d) % N] + probs[(n0 - d) % N])


def localization_length_fit(probs: np.ndarray, n0: int, window: tuple[int, int] | None = None,
                            floor: float = 0.0) -> LocalizationFit:
    """Least-squares line through ``ln P`` on the tail window; ``l = -2/slope``.

    The two tails are averaged before fitting. Points at or below ``floor``
    are dropped. The fit is flagged invalid when fewer than 16 points remain,
    the slope is not negative, or ``r_squared < 0.9``.
    """
    probs = np.asarray(probs, dtype=float)
    total = probs.sum()
    if total <= 0:
        raise ValueError("distribution has no weight")
    probs = probs / total
    lo, hi = window if window is not None else default_window(probs, n0)
    tail = symmetric_tail(probs, n0)
    lo, hi = max(lo, 0), min(hi, len(tail) - 1)
    if hi < lo:
        raise ValueError(f"empty fit window [{lo}, {hi}]")
    d = np.arange(lo, hi + 1)
    y = tail[lo:hi + 1]
    keep = y > floor
    d, y = d[keep], np.log(y[keep])
    if d.size < 2:
        return LocalizationFit(float("nan"), float("nan"), 0.0, (lo, hi), int(d.size), False)
    slope, icept = np.polyfit(d, y, 1)
    resid = y - (slope * d + icept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 0.0
    valid = d.size >= MIN_FIT_POINTS and slope < 0 and r2 >= MIN_R_SQUARED
    l = -2.0 / slope if slope < 0 else float("inf")
    return LocalizationFit(float(l), float(slope), float(r2), (int(lo), int(hi)), int(d.size), bool(valid))


def time_average(snapshots, fraction: float = 0.2) -> np.ndarray:
    """Mean of ``|psi|**2`` over the last ``fraction`` of the snapshots."""
    snaps = list(snapshots)
    m = max(1, int(round(len(snaps) * fraction)))
    acc = np.zeros(len(snaps[-1]))
    for psi in snaps[-m:]:
        acc += np.abs(psi) ** 2
    return acc / m


def harmonics(probs: np.ndarray, m: int) -> list[tuple[int, complex]]:
    """The ``m`` largest Fourier components ``(1/N) sum_n P(n) exp(-2*pi*i*q*n/N)``.

    Only ``q = 0..N/2`` are considered since ``P`` is real. Ties keep the
    lower index first.
    """
    probs = np.asarray(probs, dtype=float)
    N = len(probs)
    if not 1 <= m <= N // 2:
        raise ValueError(f"m must lie in [1, {N // 2}]")
    F = np.fft.rfft(probs) / N
    order = np.argsort(-np.abs(F), kind="stable")[:m]
    return [(int(q), complex(F[q])) for q in order]


def saturation_ratio(var_series: np.ndarray, window: float = 0.1) -> float:
    """Growth of the variance over the second half of a run.

    Ratio of the variance averaged over the final ``window`` of the series to
    the variance averaged over the same-length window ending at the midpoint.
    Window averages are used because the variance of a localized packet
    fluctuates by tens of percent from kick to kick.
    """
    v = np.asarray(var_series, dtype=float)
    n = len(v)
    w = max(1, int(round(n * window)))
    mid = n // 2
    return float(v[n - w:].mean() / v[max(0, mid - w):mid].mean())
