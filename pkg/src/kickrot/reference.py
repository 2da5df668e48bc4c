"""Split-operator evolution of the quantum kicked rotator.

One period is ``U = exp(-i V(theta)) exp(-i T n**2 / 2)`` on ``N`` momentum
levels with periodic boundary conditions. The angle grid is
``theta_i = 2*pi*i/N`` and the change of representation is

    b_i = N**-0.5 * sum_n exp(+2*pi*i*i*n/N) a_n

i.e. ``numpy.fft.ifft(a, norm="ortho")``; the circuit QFT uses the same kernel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev

from .observables import momentum_moments

# real root of x**3 = x + 1: 1, 1/x and 1/x**2 are rationally independent,
# unlike the golden ratio where 1/x + 1/x**2 = 1
PLASTIC = 1.3247179572447460


@dataclass(frozen=True)
class Cosine:
    """``V = k cos(theta)``."""


@dataclass(frozen=True)
class ArctanBand:
    """``V = 2 arctan(E - 2k cos(theta))``, the nearest-neighbour band model."""

    E: float = 0.0


@dataclass(frozen=True)
class Polynomial:
    """``V = k P(theta)``, ``P`` a Chebyshev series in ``x = theta/pi - 1``."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise ValueError("polynomial needs at least one coefficient")


@dataclass(frozen=True)
class DSum:
    """``k * sum_r cos(theta_r)`` over ``d`` independent angles."""

    d: int = 1

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"only d = 1 or 2 is supported, got d={self.d}")


@dataclass(frozen=True)
class Static:
    pass


@dataclass(frozen=True)
class Quasiperiodic:
    """Band parameter ``E(t) = -2k cos(omega1 t) - 2k cos(omega2 t)``."""

    omega1: float = 2 * math.pi / PLASTIC
    omega2: float = 2 * math.pi / PLASTIC**2


@dataclass(frozen=True)
class QuantumParams:
    k: float
    T: float
    N: int
    potential: object = field(default_factory=Cosine)
    drive: object = field(default_factory=Static)

    def __post_init__(self):
        if self.N < 2 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two, got {self.N}")
        if isinstance(self.drive, Quasiperiodic) and not isinstance(self.potential, ArctanBand):
            raise ValueError("quasiperiodic driving acts on the ArctanBand potential")

    @property
    def K(self) -> float:
        return self.k * self.T

    @property
    def n_q(self) -> int:
        return self.N.bit_length() - 1


def angle_grid(N: int) -> np.ndarray:
    return 2 * np.pi * np.arange(N) / N


def to_angle(a: np.ndarray) -> np.ndarray:
    return np.fft.ifft(a, axis=-1, norm="ortho")


def to_momentum(b: np.ndarray) -> np.ndarray:
    return np.fft.fft(b, axis=-1, norm="ortho")


def basis_state(N: int, n0: int) -> np.ndarray:
    psi = np.zeros(N, dtype=complex)
    psi[n0 % N] = 1.0
    return psi


def quasiperiodic_band_param(k: float, omega1: float, omega2: float, t: int) -> float:
    return -2 * k * math.cos(omega1 * t) - 2 * k * math.cos(omega2 * t)


def potential_eval(kind, theta, k: float):
    """Phase-generating function; the kick is ``exp(-i * potential_eval(...))``."""
    if isinstance(kind, (Cosine, DSum)):
        if isinstance(kind, DSum) and kind.d != 1:
            raise ValueError("a d=2 potential needs two angles; use evolve_2d")
        return k * np.cos(theta)
    if isinstance(kind, ArctanBand):
        return 2 * np.arctan(kind.E - 2 * k * np.cos(theta))
    if isinstance(kind, Polynomial):
        return k * chebyshev.chebval(np.asarray(theta) / np.pi - 1.0, kind.coeffs)
    raise TypeError(f"unknown potential {kind!r}")


def free_phases(N: int, T: float) -> np.ndarray:
    n = np.arange(N, dtype=float)
    return np.exp(-0.5j * T * n * n)


def kick_phases(params: QuantumParams, t_index: int = 0) -> np.ndarray:
    kind = params.potential
    if isinstance(params.drive, Quasiperiodic):
        dr = params.drive
        kind = ArctanBand(quasiperiodic_band_param(params.k, dr.omega1, dr.omega2, t_index))
    return np.exp(-1j * potential_eval(kind, angle_grid(params.N), params.k))


def evolve_step(psi: np.ndarray, params: QuantumParams, t_index: int = 0) -> np.ndarray:
    """One period: free rotation in momentum, kick in angle, back to momentum."""
    b = to_angle(free_phases(params.N, params.T) * psi)
    return to_momentum(kick_phases(params, t_index) * b)


def iter_evolve(psi0: np.ndarray, params: QuantumParams, t: int):
    """Yield ``(s, psi)`` after each kick ``s = 1..t``.

    ``psi0`` may carry leading batch axes. The yielded array is reused by
    the next step, copy it to keep it. Kick ``s`` uses drive time ``s - 1``.
    """
    free = free_phases(params.N, params.T)
    static = not isinstance(params.drive, Quasiperiodic)
    kick = kick_phases(params) if static else None
    psi = np.array(psi0, dtype=complex)
    for s in range(1, t + 1):
        if not static:
            kick = kick_phases(params, s - 1)
        psi = to_momentum(kick * to_angle(free * psi))
        yield s, psi


def evolve(psi0: np.ndarray, params: QuantumParams, t: int, record_every: int = 1) -> list[tuple[int, np.ndarray]]:
    """Snapshots ``(s, psi)`` at ``s = 0``, every ``record_every`` kicks, and ``s = t``."""
    if t < 1:
        raise ValueError("t must be at least 1")
    snaps = [(0, np.array(psi0, dtype=complex))]
    for s, psi in iter_evolve(psi0, params, t):
        if s % record_every == 0 or s == t:
            snaps.append((s, psi.copy()))
    return snaps


def moment_series(psi0: np.ndarray, params: QuantumParams, t: int, n0: int,
                  avg_fraction: float = 0.2):
    """Per-kick ``(mean, var, ipr)`` plus the time-averaged distribution.

    Returns arrays over ``s = 0..t`` and the mean of ``|psi|**2`` over the last
    ``avg_fraction`` of kicks.
    """
    N = params.N
    mean = np.empty(t + 1)
    var = np.empty(t + 1)
    iprs = np.empty(t + 1)
    p0 = np.abs(psi0) ** 2
    mean[0], var[0] = momentum_moments(p0, n0)
    iprs[0] = 1.0 / np.sum(p0**2)
    start = t - max(1, int(round(t * avg_fraction)))
    acc = np.zeros(N)
    for s, psi in iter_evolve(psi0, params, t):
        P = np.abs(psi) ** 2
        mean[s], var[s] = momentum_moments(P, n0)
        iprs[s] = 1.0 / np.sum(P * P)
        if s > start:
            acc += P
    return mean, var, iprs, acc / (t - start)


def quasiperiodic_spreading(k: float, T: float, N: int, times=(1000, 4000), starts: int = 16,
                            spacing: int = 37, drive: Quasiperiodic | None = None) -> dict[int, float]:
    """Ensemble-mean momentum variance of the quasiperiodically driven band model.

    ``starts`` packets begin on single levels ``spacing`` apart around
    ``N/2`` (each sees a different pseudo-random free-rotation phase
    sequence) and are evolved together. Returns ``{t: mean variance}``.
    """
    drive = drive or Quasiperiodic()
    params = QuantumParams(k, T, N, ArctanBand(0.0), drive)
    n0s = (N // 2 + (np.arange(starts) - starts // 2) * spacing) % N
    psi0 = np.zeros((starts, N), dtype=complex)
    psi0[np.arange(starts), n0s] = 1.0
    d = (np.arange(N)[None, :] - n0s[:, None] + N // 2) % N - N // 2
    out = {}
    wanted = set(times)
    for s, psi in iter_evolve(psi0, params, max(times)):
        if s in wanted:
            P = np.abs(psi) ** 2
            m = np.sum(P * d, axis=1)
            out[s] = float(np.mean(np.sum(P * d * d, axis=1) - m * m))
    return out


@dataclass
class Wavefunction2D:
    """Two-particle (or 2D rotor) amplitudes over ``(n1, n2)`` with contact interaction ``g``."""

    amps: np.ndarray
    g: float = 0.0


MAX_2D_LEVELS = 1 << 10


def free_phases_2d(N: int, T: float, g: float) -> np.ndarray:
    n = np.arange(N, dtype=float)
    ph = -0.5 * T * (n[:, None] ** 2 + n[None, :] ** 2)
    ph[np.diag_indices(N)] -= g
    return np.exp(1j * ph)


def evolve_2d(psi0: Wavefunction2D, params: QuantumParams, t: int) -> Wavefunction2D:
    """Split-operator evolution of the d=2 rotor with interaction on the diagonal ``n1 = n2``."""
    if isinstance(params.potential, DSum):
        if params.potential.d != 2:
            raise ValueError("evolve_2d needs a d=2 potential")
    elif not isinstance(params.potential, Cosine):
        raise ValueError("evolve_2d supports the cosine kick only")
    N = params.N
    if N > MAX_2D_LEVELS:
        raise MemoryError(f"N={N} per axis exceeds the 2D limit {MAX_2D_LEVELS}")
    a = np.asarray(psi0.amps, dtype=complex)
    if a.shape != (N, N):
        raise ValueError(f"expected shape {(N, N)}, got {a.shape}")
    th = angle_grid(N)
    kick = np.exp(-1j * params.k * (np.cos(th)[:, None] + np.cos(th)[None, :]))
    free = free_phases_2d(N, params.T, psi0.g)
    for _ in range(t):
        b = np.fft.ifft2(free * a, norm="ortho")
        a = np.fft.fft2(kick * b, norm="ortho")
    return Wavefunction2D(a, psi0.g)
