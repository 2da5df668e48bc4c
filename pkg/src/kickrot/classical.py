"""Classical dynamics: the Chirikov standard map and its symplectic lattice version.

Continuum map on the cylinder::

    n' = n + k sin(theta)
    theta' = theta + T n'   (mod 2 pi)

Lattice map on an ``N x N`` torus with ``S(X) = [N K sin(2 pi X / N) / (2 pi)]``::

    Y' = Y + S(X)   (mod N)
    X' = X + Y'     (mod N)

where ``[.]`` truncates toward zero so that ``S(-X) = -S(X)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class MapParams:
    k: float
    T: float = 1.0

    def __post_init__(self):
        if self.k < 0 or self.T <= 0:
            raise ValueError("need k >= 0 and T > 0")

    @property
    def K(self) -> float:
        return self.k * self.T

    @classmethod
    def from_K(cls, K: float) -> "MapParams":
        return cls(K, 1.0)


@dataclass(frozen=True)
class ClassicalState:
    n: float
    theta: float


def wrap_angle(x: float) -> float:
    x %= TWO_PI
    # a tiny negative x rounds up to exactly 2 pi
    return 0.0 if x >= TWO_PI else x


def standard_map_step(s: ClassicalState, p: MapParams) -> ClassicalState:
    n = s.n + p.k * math.sin(s.theta)
    return ClassicalState(n, wrap_angle(s.theta + p.T * n))


def standard_map_arrays(n: np.ndarray, theta: np.ndarray, p: MapParams):
    """Vectorized step on arrays of orbits."""
    n = n + p.k * np.sin(theta)
    theta = np.mod(theta + p.T * n, TWO_PI)
    theta[theta >= TWO_PI] = 0.0
    return n, theta


def trajectory(s: ClassicalState, p: MapParams, t: int) -> list[ClassicalState]:
    out = [s]
    for _ in range(t):
        s = standard_map_step(s, p)
        out.append(s)
    return out


def uniform_angles(m: int) -> np.ndarray:
    """Midpoint grid on ``[0, 2 pi)``; avoids the fixed points at 0 and pi."""
    return TWO_PI * (np.arange(m) + 0.5) / m


def evolve_ensemble(n0: np.ndarray, theta0: np.ndarray, p: MapParams, t: int,
                    record: np.ndarray | None = None):
    """Moments of the momentum over an ensemble of orbits.

    Returns ``(mean_n, var_n)`` for ``t' = 0..t``, or only at the times in
    ``record`` when given. Each orbit is independent, and the reductions
    are plain numpy sums in index order.
    """
    n = np.array(n0, dtype=float)
    theta = np.array(theta0, dtype=float)
    if n.size == 0:
        raise ValueError("empty ensemble")
    times = np.arange(t + 1) if record is None else np.asarray(record)
    want = set(int(x) for x in times)
    mean, var = [], []

    def rec():
        m = n.mean()
        mean.append(m)
        var.append(np.mean((n - m) ** 2))

    if 0 in want:
        rec()
    for s in range(1, t + 1):
        n, theta = standard_map_arrays(n, theta, p)
        if s in want:
            rec()
    return np.array(mean), np.array(var)


def diffusion_rate(var_n: np.ndarray, times: np.ndarray | None = None) -> float:
    """Least-squares slope of ``var_n`` against ``t`` through the origin."""
    var_n = np.asarray(var_n, dtype=float)
    t = np.arange(len(var_n), dtype=float) if times is None else np.asarray(times, dtype=float)
    return float(np.dot(t, var_n) / np.dot(t, t))


def max_excursion(s: ClassicalState, p: MapParams, t: int) -> float:
    """``max |n(t') - n(0)|`` along one orbit."""
    n, th = s.n, s.theta
    k, T = p.k, p.T
    worst = 0.0
    for _ in range(t):
        n += k * math.sin(th)
        th = (th + T * n) % TWO_PI
        worst = max(worst, abs(n - s.n))
    return worst


class LyapunovResult(NamedTuple):
    exponent: float
    degenerate: bool


def lyapunov_exponent(p: MapParams, t: int, seed: int = 0, renorm_every: int = 10) -> LyapunovResult:
    """Largest Lyapunov exponent from the tangent map, renormalized every ``renorm_every`` steps.

    The tangent map of one step acting on ``(dn, dtheta)`` is
    ``[[1, k cos(theta)], [T, 1 + K cos(theta)]]``. ``degenerate`` is set when
    the orbit sits on a fixed point or the tangent vector collapses, in
    which case the estimate accumulated so far is returned.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    n = float(rng.uniform(-math.pi, math.pi))
    th = float(rng.uniform(0.0, TWO_PI))
    k, T = p.k, p.T
    K = k * T
    dn, dth = 1.0, 0.0
    total = 0.0
    steps = 0
    for s in range(1, t + 1):
        c = math.cos(th)
        dn, dth = dn + k * c * dth, T * dn + (1.0 + K * c) * dth
        n_new = n + k * math.sin(th)
        th_new = (th + T * n_new) % TWO_PI
        if n_new == n and th_new == th:
            return LyapunovResult(total / max(steps, 1), True)
        n, th = n_new, th_new
        if s % renorm_every == 0 or s == t:
            norm = math.hypot(dn, dth)
            if norm == 0.0 or not math.isfinite(norm):
                return LyapunovResult(total / max(steps, 1), True)
            total += math.log(norm)
            steps = s
            dn, dth = dn / norm, dth / norm
    return LyapunovResult(total / t, False)


# lattice map

@dataclass(frozen=True)
class LatticeState:
    X: int
    Y: int
    N: int

    def __post_init__(self):
        if not (0 <= self.X < self.N and 0 <= self.Y < self.N):
            raise ValueError("coordinates outside the lattice")


def lattice_kick(X, N: int, K: float):
    """``S(X)`` with truncation toward zero."""
    v = N * K * np.sin(TWO_PI * np.asarray(X) / N) / TWO_PI
    return np.trunc(v).astype(np.int64)


def symplectic_map_step(s: LatticeState, K: float) -> LatticeState:
    N = s.N
    Y = (s.Y + int(lattice_kick(s.X, N, K))) % N
    return LatticeState((s.X + Y) % N, Y, N)


def symplectic_map_inverse(s: LatticeState, K: float) -> LatticeState:
    N = s.N
    X = (s.X - s.Y) % N
    return LatticeState(X, (s.Y - int(lattice_kick(X, N, K))) % N, N)


def lattice_map_arrays(X: np.ndarray, Y: np.ndarray, N: int, K: float, wrap_y: bool = True):
    """Vectorized lattice step. With ``wrap_y=False`` the momentum is lifted (not reduced)."""
    Y = Y + lattice_kick(X, N, K)
    if wrap_y:
        Y = Y % N
    return (X + Y) % N, Y


def lattice_permutation(N: int, K: float) -> np.ndarray:
    """Flat index ``X*N + Y`` of the image of every cell."""
    X, Y = np.divmod(np.arange(N * N, dtype=np.int64), N)
    X2, Y2 = lattice_map_arrays(X, Y, N, K)
    return X2 * N + Y2


@dataclass
class DensityGrid:
    """Weights on the lattice cells, indexed ``weights[X, Y]``."""

    weights: np.ndarray
    N: int

    def __post_init__(self):
        self.weights = np.asarray(self.weights)
        if self.weights.shape != (self.N, self.N):
            raise ValueError("weights must be N x N")
        if np.any(self.weights < 0):
            raise ValueError("weights must be non-negative")


def _compose(perm_a: np.ndarray, perm_b: np.ndarray) -> np.ndarray:
    # apply a then b
    return perm_b[perm_a]


def density_evolve(d: DensityGrid, K: float, t: int) -> DensityGrid:
    """Move every cell's weight along ``t`` steps of the lattice map.

    The map permutes cells, so weights are only moved, never added, and the
    total is conserved exactly. Long runs use the ``t``-th power of the
    one-step permutation (binary exponentiation).
    """
    N = d.N
    perm = lattice_permutation(N, K)
    if t > 10:
        total = np.arange(N * N, dtype=np.int64)
        base, e = perm, t
        while e:
            if e & 1:
                total = _compose(total, base)
            base = _compose(base, base)
            e >>= 1
        perm = total
        steps = 1
    else:
        steps = t
    w = d.weights.reshape(-1)
    for _ in range(steps):
        new = np.empty_like(w)
        new[perm] = w
        w = new
    return DensityGrid(w.reshape(N, N), N)


def lattice_line_variance(N: int, K: float, t: int) -> np.ndarray:
    """Variance of the lifted momentum ``Y`` for the line density ``Y = 0``.

    The line holds one orbit per ``X``; ``Y`` is tracked without the mod-N
    reduction so spreading beyond the torus stays measurable. Reducing the
    lifted orbit mod N reproduces :func:`density_evolve` exactly.
    """
    X = np.arange(N, dtype=np.int64)
    Y = np.zeros(N, dtype=np.int64)
    var = [0.0]
    for _ in range(t):
        X, Y = lattice_map_arrays(X, Y, N, K, wrap_y=False)
        var.append(float(np.var(Y.astype(float))))
    return np.array(var)
