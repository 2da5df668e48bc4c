import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kickrot import classical as cl


def direct_orbit(n, th, k, T, steps):
    # independent second implementation of the map
    out = [(n, th)]
    for _ in range(steps):
        n = n + k * math.sin(th)
        th = math.fmod(th + T * n, 2 * math.pi)
        if th < 0:
            th += 2 * math.pi
        out.append((n, th))
    return out


def test_step_examples():
    s = cl.standard_map_step(cl.ClassicalState(0.0, math.pi / 2), cl.MapParams(1.3, 1.0))
    assert s.n == pytest.approx(1.3, abs=1e-15)
    assert s.theta == pytest.approx((math.pi / 2 + 1.3) % (2 * math.pi), abs=1e-15)
    s = cl.standard_map_step(cl.ClassicalState(2.5, 0.0), cl.MapParams(4.0, 0.7))
    assert s.n == 2.5
    assert s.theta == pytest.approx(0.7 * 2.5, abs=1e-15)


def test_orbit_matches_direct_iteration():
    p = cl.MapParams.from_K(5.0)
    orbit = cl.trajectory(cl.ClassicalState(0.0, 1.0), p, 100)
    ref = direct_orbit(0.0, 1.0, p.k, p.T, 100)
    for s, (n, th) in zip(orbit, ref):
        assert abs(s.n - n) < 1e-12
        d = abs(s.theta - th)
        assert min(d, 2 * math.pi - d) < 1e-12


def test_params_validation():
    assert cl.MapParams(2.0, 0.5).K == 2.0 * 0.5
    with pytest.raises(ValueError):
        cl.MapParams(-1.0, 1.0)
    with pytest.raises(ValueError):
        cl.MapParams(1.0, 0.0)


def test_angle_stays_reduced():
    assert cl.wrap_angle(-1e-18) == 0.0
    n, th = cl.standard_map_arrays(np.array([0.0, 1.0]), np.array([0.0, 2 * math.pi - 1e-17]), cl.MapParams(1, 1))
    assert np.all((th >= 0) & (th < 2 * math.pi))


@settings(max_examples=50, deadline=None)
@given(st.floats(-10, 10), st.floats(0.01, 6.2), st.floats(0.0, 8.0), st.floats(0.1, 2.0))
def test_area_preservation(n, th, k, T):
    h = 1e-6

    def f(n, th):
        n2 = n + k * math.sin(th)
        return n2, th + T * n2  # unreduced so the derivative is smooth

    a = [(x - y) / (2 * h) for x, y in zip(f(n + h, th), f(n - h, th))]
    b = [(x - y) / (2 * h) for x, y in zip(f(n, th + h), f(n, th - h))]
    det = a[0] * b[1] - a[1] * b[0]
    assert abs(det - 1.0) < 1e-8 * max(1.0, k * T)


def test_single_orbit_has_zero_variance():
    mean, var = cl.evolve_ensemble(np.array([0.3]), np.array([1.0]), cl.MapParams(5, 1), 0)
    assert var.tolist() == [0.0]
    with pytest.raises(ValueError):
        cl.evolve_ensemble(np.array([]), np.array([]), cl.MapParams(5, 1), 3)


def test_ensemble_is_partition_independent():
    p = cl.MapParams(5, 1)
    th = cl.uniform_angles(64)
    n = np.zeros(64)
    full_n, full_th = n.copy(), th.copy()
    halves = [(n[:32].copy(), th[:32].copy()), (n[32:].copy(), th[32:].copy())]
    for _ in range(50):
        full_n, full_th = cl.standard_map_arrays(full_n, full_th, p)
        halves = [cl.standard_map_arrays(a, b, p) for a, b in halves]
    assert np.array_equal(full_n, np.concatenate([h[0] for h in halves]))
    m1 = cl.evolve_ensemble(n, th, p, 50)
    m2 = cl.evolve_ensemble(n, th, p, 50)
    assert np.array_equal(m1[1], m2[1])


def test_diffusion_rate_fit():
    t = np.arange(11)
    assert cl.diffusion_rate(3.0 * t) == pytest.approx(3.0)


def test_regular_region_has_zero_lyapunov():
    assert cl.lyapunov_exponent(cl.MapParams.from_K(1e-3), 100000).exponent < 0.01
    assert cl.lyapunov_exponent(cl.MapParams.from_K(0.1), 100000).exponent < 0.01


def test_lyapunov_reproducible():
    p = cl.MapParams.from_K(5)
    assert cl.lyapunov_exponent(p, 5000, seed=7) == cl.lyapunov_exponent(p, 5000, seed=7)


@pytest.mark.parametrize("K", [5.0, 7.0, 20.0])
def test_lyapunov_tracks_log_half_K(K):
    h = cl.lyapunov_exponent(cl.MapParams.from_K(K), 100000).exponent
    assert abs(h - math.log(K / 2)) < 0.2 * math.log(K / 2)


# lattice map

def test_lattice_examples():
    assert cl.symplectic_map_step(cl.LatticeState(2, 0, 8), 1.0) == cl.LatticeState(3, 1, 8)
    assert cl.symplectic_map_inverse(cl.LatticeState(3, 1, 8), 1.0) == cl.LatticeState(2, 0, 8)
    s = cl.symplectic_map_step(cl.LatticeState(0, 5, 8), 3.3)
    assert s == cl.LatticeState(5, 5, 8)
    assert cl.symplectic_map_inverse(cl.LatticeState(3, 6, 8), 0.0) == cl.LatticeState((3 - 6) % 8, 6, 8)
    with pytest.raises(ValueError):
        cl.LatticeState(8, 0, 8)


def test_kick_is_odd():
    N = 64
    X = np.arange(N)
    assert np.array_equal(cl.lattice_kick((-X) % N, N, 2.7), -cl.lattice_kick(X, N, 2.7))


@pytest.mark.parametrize("N", [2, 8, 37, 64, 128])
@pytest.mark.parametrize("K", [0.0, 0.9716, 2.0, 5.0, -3.0])
def test_lattice_map_is_bijective_and_invertible(N, K):
    perm = cl.lattice_permutation(N, K)
    assert np.array_equal(np.sort(perm), np.arange(N * N))
    X, Y = np.divmod(np.arange(N * N), N)
    X2, Y2 = cl.lattice_map_arrays(X, Y, N, K)
    Yb = (Y2 - cl.lattice_kick((X2 - Y2) % N, N, K)) % N
    assert np.array_equal((X2 - Y2) % N, X) and np.array_equal(Yb, Y)


def test_scalar_inverse_exhaustive_small():
    N, K = 32, 2.0
    for X in range(N):
        for Y in range(N):
            s = cl.LatticeState(X, Y, N)
            assert cl.symplectic_map_inverse(cl.symplectic_map_step(s, K), K) == s


@pytest.mark.parametrize("t", [5, 23])
def test_delta_density_follows_orbit(t):
    N, K = 64, 2.0
    w = np.zeros((N, N))
    w[3, 7] = 1.0
    d = cl.density_evolve(cl.DensityGrid(w, N), K, t)
    s = cl.LatticeState(3, 7, N)
    for _ in range(t):
        s = cl.symplectic_map_step(s, K)
    assert d.weights[s.X, s.Y] == 1.0 and d.weights.sum() == 1.0


def test_uniform_density_is_invariant():
    N = 32
    w = np.full((N, N), 0.25)
    assert np.array_equal(cl.density_evolve(cl.DensityGrid(w, N), 5.0, 17).weights, w)


@pytest.mark.parametrize("t", [3, 40])
def test_density_weight_conserved_exactly(rng, t):
    N = 64
    w = rng.random((N, N))
    d = cl.density_evolve(cl.DensityGrid(w, N), 5.0, t)
    assert np.array_equal(np.sort(d.weights.ravel()), np.sort(w.ravel()))
    with pytest.raises(ValueError):
        cl.DensityGrid(-w, N)


def test_lifted_line_reduces_to_density():
    N, K, t = 64, 5.0, 12
    X = np.arange(N)
    Y = np.zeros(N, dtype=np.int64)
    for _ in range(t):
        X, Y = cl.lattice_map_arrays(X, Y, N, K, wrap_y=False)
    w = np.zeros((N, N))
    w[:, 0] = 1.0
    d = cl.density_evolve(cl.DensityGrid(w, N), K, t).weights
    got = np.zeros((N, N))
    np.add.at(got, (X, Y % N), 1.0)
    assert np.array_equal(got, d)
