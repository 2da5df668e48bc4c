"""Acceptance criteria 1-13, one test each.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary section
at the end lists one PASS/FAIL line per criterion.
"""
import math
import time

import numpy as np
from scipy import special

from kickrot import algorithm as alg
from kickrot import classical as cl
from kickrot import engine as eng
from kickrot import observables as obs
from kickrot import reference as ref


def test_c01_classical_diffusion(acceptance):
    t0 = time.perf_counter()
    p = cl.MapParams(5.0, 1.0)
    m = 10_000
    _, var = cl.evolve_ensemble(np.zeros(m), cl.uniform_angles(m), p, 1000)
    D = cl.diffusion_rate(var)
    dt = time.perf_counter() - t0
    ok = 0.5 <= D / 12.5 <= 2.0 and dt < 10
    acceptance(1, ok, f"D={D:.3f} vs k^2/2=12.5 (ratio {D / 12.5:.3f}, need [0.5, 2]); {dt:.2f}s < 10s")


def test_c02_chaos_border(acceptance):
    t0 = time.perf_counter()
    exc = cl.max_excursion(cl.ClassicalState(0.0, 1.0), cl.MapParams(0.5, 1.0), 100_000)
    m = 100
    _, var = cl.evolve_ensemble(np.zeros(m), cl.uniform_angles(m), cl.MapParams(2.0, 1.0), 100_000,
                                record=[1000, 100_000])
    growth = var[1] / var[0]
    dt = time.perf_counter() - t0
    ok = exc < 50 and growth > 10 and dt < 5
    acceptance(2, ok, f"K=0.5 max|dn|={exc:.3f} < 50; K=2 var(1e5)/var(1e3)={growth:.1f} > 10; {dt:.2f}s < 5s")


def test_c03_lyapunov(acceptance):
    t0 = time.perf_counter()
    h10 = cl.lyapunov_exponent(cl.MapParams(10.0, 1.0), 100_000, seed=0)
    h5 = cl.lyapunov_exponent(cl.MapParams(5.0, 1.0), 100_000, seed=0)
    dt = time.perf_counter() - t0
    e10 = abs(h10.exponent / math.log(5.0) - 1)
    e5 = abs(h5.exponent / math.log(2.5) - 1)
    ok = e10 <= 0.15 and e5 <= 0.20 and not (h10.degenerate or h5.degenerate) and dt < 5
    acceptance(3, ok, f"K=10 h={h10.exponent:.4f} (rel err {e10:.3f} <= 0.15); "
                      f"K=5 h={h5.exponent:.4f} (rel err {e5:.3f} <= 0.20); {dt:.2f}s < 5s")


def test_c04_dynamical_localization(acceptance):
    t0 = time.perf_counter()
    N, n0 = 2048, 1024
    _, var, _, avg = ref.moment_series(ref.basis_state(N, n0), ref.QuantumParams(10.0, 0.5, N), 10_000, n0)
    ratio = obs.saturation_ratio(var)
    fit = obs.localization_length_fit(avg, n0)
    dt = time.perf_counter() - t0
    ok_sat = ratio < 1.3
    ok_l = fit.valid and 12.5 <= fit.l <= 50.0
    acceptance(4, ok_sat and ok_l and dt < 60,
               f"variance ratio over last half {ratio:.3f} < 1.3 ({'ok' if ok_sat else 'no'}); "
               f"l={fit.l:.2f} (r2={fit.r_squared:.3f}) vs k^2/4=25 within x2 ({'ok' if ok_l else 'no'}); {dt:.1f}s < 60s")


def test_c05_one_kick_bessel(acceptance):
    t0 = time.perf_counter()
    N, n0, k = 1024, 512, 2.0
    psi = ref.evolve_step(ref.basis_state(N, n0), ref.QuantumParams(k, 0.0, N))
    P = np.abs(psi) ** 2
    m = np.arange(N) - n0
    err = np.max(np.abs(P - special.jv(m, k) ** 2))
    _, var = obs.momentum_moments(P, n0)
    dt = time.perf_counter() - t0
    ok = err < 1e-10 and abs(var - k * k / 2) < 1e-8 and dt < 1
    acceptance(5, ok, f"max|P - J^2|={err:.2e} < 1e-10; |var - 2|={abs(var - 2):.2e} < 1e-8; {dt:.3f}s < 1s")


def test_c06_circuit_equals_reference(acceptance):
    t0 = time.perf_counter()
    fids = {}
    for n_q in (6, 8, 10):
        cfg = alg.AlgorithmConfig(n_q, 2 * n_q, 5.0, 0.5)
        fids[n_q] = alg.fidelity_series(cfg, cfg.N // 2, 10).min()
    cfg = alg.AlgorithmConfig(8, 16, 5.0, 0.5)
    ph = alg.applied_kick_phases(cfg)
    err = np.abs(np.angle(np.exp(1j * (ph + 5.0 * np.cos(ref.angle_grid(256)))))).max()
    bound = 5.0 * 10 * 2.0**-16
    dt = time.perf_counter() - t0
    ok = min(fids.values()) >= 0.9999 and err <= bound and dt < 60
    f = ", ".join(f"n_q={n}: {v:.8f}" for n, v in fids.items())
    acceptance(6, ok, f"min fidelity over 10 kicks {f} (>= 0.9999); max phase error {err:.2e} <= {bound:.2e}; {dt:.1f}s < 60s")


def test_c07_exact_decompositions(acceptance):
    cfg = alg.AlgorithmConfig(8, 8, 1.0, 0.5)
    s = alg.new_state(cfg)
    s.amplitudes[:] = 1.0
    alg.step_free_rotation(s, cfg)
    n = np.arange(256)
    e2 = np.max(np.abs(s.amplitudes - np.exp(-0.25j * n * n)))
    eq, ei = 0.0, 0.0
    for n_q in range(1, 11):
        N = 1 << n_q
        lay = eng.RegisterLayout({eng.PRIMARY: n_q}, n_q, n_q)
        cols, back = [], []
        for x in range(N):
            st_ = eng.CircuitState.zero(lay, eng.DENSE)
            st_.amplitudes = np.zeros(N, complex)
            st_.amplitudes[x] = 1
            eng.apply_qft(st_)
            cols.append(st_.amplitudes.copy())
            eng.apply_qft(st_, inverse=True)
            back.append(st_.amplitudes)
        eq = max(eq, np.max(np.abs(np.array(cols).T - np.fft.ifft(np.eye(N), axis=0, norm="ortho"))))
        ei = max(ei, np.max(np.abs(np.array(back) - np.eye(N))))
    ok = e2 < 1e-12 and eq < 1e-12 and ei < 1e-12
    acceptance(7, ok, f"Step II diagonal err {e2:.1e}; QFT vs Fourier kernel (n_q<=10, all columns) {eq:.1e}; "
                      f"forward*inverse - I {ei:.1e}; all < 1e-12")


def test_c08_cosine_register_precision(acceptance):
    cfg = alg.AlgorithmConfig(8, 16, 1.0, 0.5)
    v = alg.cosine_register_values(cfg)
    err = np.max(np.abs(v - np.cos(ref.angle_grid(256))))
    bound = 10 * 2.0**-16
    acceptance(8, err <= bound, f"max |fix(cos) - cos| over 256 angles = {err:.3e} <= {bound:.3e}")


def test_c09_gate_scaling(acceptance):
    ns = list(range(4, 13))
    tot = {n: alg.kick_ledger(n, 2 * n)["total"]["elementary_estimate"] for n in ns + [16]}
    X = np.array([[n**3, n**2, n] for n in ns], dtype=float)
    y = np.array([tot[n] for n in ns], dtype=float)
    c, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = np.max(np.abs(X @ c - y) / y)
    ratios = {n: tot[2 * n] / tot[n] for n in (4, 6, 8)}
    v_ok = all(alg.kick_ledger(n, 2 * n)["V"]["one_qubit"] == 2 * n for n in (4, 8, 12))
    ok = resid < 0.05 and all(6 <= r <= 10 for r in ratios.values()) and v_ok
    r = ", ".join(f"{n}:{v:.2f}" for n, v in ratios.items())
    acceptance(9, ok, f"cubic fit c3={c[0]:.1f} max rel residual {resid:.1e} < 0.05; "
                      f"total(2n)/total(n) {r} in [6, 10]; Step V count == p: {v_ok}")


def test_c10_lattice_map(acceptance):
    bij = True
    for N in (8, 16, 32, 64, 128):
        for K in (0.5, 2.0, 5.0):
            perm = cl.lattice_permutation(N, K)
            bij &= np.array_equal(np.sort(perm), np.arange(N * N))
            X, Y = np.divmod(np.arange(N * N), N)
            X2, Y2 = cl.lattice_map_arrays(X, Y, N, K)
            Xb = (X2 - Y2) % N
            bij &= np.array_equal(Xb, X) and np.array_equal((Y2 - cl.lattice_kick(Xb, N, K)) % N, Y)
    rng = np.random.Generator(np.random.Philox(0))
    w = rng.random((128, 128))
    d = cl.density_evolve(cl.DensityGrid(w, 128), 5.0, 37).weights
    conserved = np.array_equal(np.sort(d.ravel()), np.sort(w.ravel()))
    N, K, t = 256, 5.0, 50
    D_lat = cl.diffusion_rate(cl.lattice_line_variance(N, K, t))
    m = 10_000
    _, var = cl.evolve_ensemble(np.zeros(m), cl.uniform_angles(m), cl.MapParams(K, 1.0), t)
    D_cont = cl.diffusion_rate(var) * (N / (2 * math.pi)) ** 2
    r = D_lat / D_cont
    ok = bij and conserved and 0.5 <= r <= 2
    acceptance(10, ok, f"bijective+invertible N<=128: {bij}; weight conserved exactly: {conserved}; "
                       f"D_lattice/D_continuum(rescaled)={r:.3f} in [0.5, 2]")


def test_c11_anderson_transition(acceptance):
    t0 = time.perf_counter()
    lo = ref.quasiperiodic_spreading(0.3, 0.5, 2048)
    hi = ref.quasiperiodic_spreading(0.7, 0.5, 2048)
    r_lo, r_hi = lo[4000] / lo[1000], hi[4000] / hi[1000]
    dt = time.perf_counter() - t0
    ok = r_lo < 1.5 and r_hi > 2.5 and dt < 120
    acceptance(11, ok, f"var(4000)/var(1000): k=0.3 -> {r_lo:.3f} < 1.5, k=0.7 -> {r_hi:.3f} > 2.5; {dt:.1f}s < 120s")


def test_c12_polynomial_kick(acceptance):
    d = alg.degree_for_precision(16)
    err = alg.chebyshev_coeffs(d, 16).max_error
    c = alg.AlgorithmConfig(8, 16, 5.0, 0.5)
    pc = alg.AlgorithmConfig(8, 16, 5.0, 0.5, alg.PolynomialRegister(d))
    a = alg.run_circuit(c, 128, 10).primary_amplitudes()
    b = alg.run_circuit(pc, 128, 10).primary_amplitudes()
    fid = abs(np.vdot(a, b)) ** 2
    ok = d <= 20 and err <= 2.0**-16 and fid >= 0.999
    acceptance(12, ok, f"degree {d} reaches max error {err:.2e} <= 2^-16; "
                       f"polynomial vs cosine register fidelity after 10 kicks {fid:.8f} >= 0.999")


def test_c13_two_dimensional_oracle(acceptance):
    N, k, T, g = 16, 1.0, 0.5, 1.0
    th = ref.angle_grid(N)
    F = np.kron(*(2 * [np.fft.ifft(np.eye(N), axis=0, norm="ortho")]))
    n1, n2 = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    free = np.exp(-0.5j * T * (n1**2 + n2**2) - 1j * g * (n1 == n2)).ravel()
    kick = np.exp(-1j * k * (np.cos(th)[:, None] + np.cos(th)[None, :])).ravel()
    U = F.conj().T @ (kick[:, None] * (F * free[None, :]))
    rng = np.random.Generator(np.random.Philox(5))
    a = rng.normal(size=N * N) + 1j * rng.normal(size=N * N)
    a /= np.linalg.norm(a)
    want = U @ (U @ (U @ a))
    params = ref.QuantumParams(k, T, N, ref.DSum(2))
    got = ref.evolve_2d(ref.Wavefunction2D(a.reshape(N, N), g), params, 3).amps.ravel()
    e_g = np.max(np.abs(got - want))
    u, v = a[:N] / np.linalg.norm(a[:N]), a[N:2 * N] / np.linalg.norm(a[N:2 * N])
    prod = ref.evolve_2d(ref.Wavefunction2D(np.outer(u, v), 0.0), params, 3).amps
    p1 = ref.QuantumParams(k, T, N)
    fac = np.outer(ref.evolve(u, p1, 3)[-1][1], ref.evolve(v, p1, 3)[-1][1])
    e_0 = np.max(np.abs(prod - fac))
    ok = e_g < 1e-10 and e_0 < 1e-10
    acceptance(13, ok, f"g=1 vs dense 256x256 one-period unitary, 3 kicks: {e_g:.1e}; g=0 factorization: {e_0:.1e}; both < 1e-10")


if __name__ == "__main__":
    import sys

    import pytest

    sys.exit(pytest.main([__file__, "-q"]))
