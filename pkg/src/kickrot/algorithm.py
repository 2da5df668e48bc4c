"""Gate-level kicked-rotator circuit: one kick is Steps II-VI.

I    prepare the momentum state on the primary register
II   free rotation ``exp(-i T n**2 / 2)`` from pairwise controlled phases
III  QFT to the angle representation
IV   build ``cos(theta_i)`` in an ancilla register by controlled rotations
V    one phase gate per register qubit gives ``exp(-i k cos(theta_i))``,
     then Step IV is run backwards to clear the ancillas
VI   inverse QFT back to momentum

The polynomial variant replaces Step IV by a Chebyshev recurrence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev
from scipy import special

from . import engine as eng
from . import fixedpoint as fxp
from .reference import ArctanBand, Cosine, QuantumParams, Quasiperiodic, Static, quasiperiodic_band_param


@dataclass(frozen=True)
class CosineRegister:
    pass


@dataclass(frozen=True)
class PolynomialRegister:
    """Kick from a Chebyshev approximation of ``target`` held in a register.

    ``target`` is :class:`Cosine` or :class:`ArctanBand`; the latter is
    stored scaled by ``1/pi`` so it fits the ``[-2, 2)`` register range.
    """

    degree: int
    target: object = field(default_factory=Cosine)

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("polynomial degree must be at least 1")


@dataclass(frozen=True)
class AlgorithmConfig:
    n_q: int
    p: int
    k: float
    T: float
    kick_mode: object = field(default_factory=CosineRegister)
    drive: object = field(default_factory=Static)

    def __post_init__(self):
        if self.n_q < 1:
            raise ValueError("need at least one qubit")
        if self.p < self.n_q:
            raise ValueError(f"precision p={self.p} must be at least n_q={self.n_q}")

    @property
    def N(self) -> int:
        return 1 << self.n_q

    def reference_params(self) -> QuantumParams:
        """The split-operator model this circuit implements."""
        pot = Cosine()
        if isinstance(self.kick_mode, PolynomialRegister):
            pot = self.kick_mode.target
        return QuantumParams(self.k, self.T, self.N, pot, self.drive)


@dataclass
class MeasurementHistogram:
    counts: np.ndarray
    shots: int

    def frequencies(self) -> np.ndarray:
        return self.counts / self.shots

    def top(self, m: int) -> list[tuple[int, int]]:
        order = np.argsort(-self.counts, kind="stable")[:m]
        return [(int(n), int(self.counts[n])) for n in order]


def new_state(cfg: AlgorithmConfig, representation: str = eng.CORRELATED,
              ledger: eng.GateLedger | None = None) -> eng.CircuitState:
    if representation == eng.DENSE:
        if isinstance(cfg.kick_mode, PolynomialRegister):
            raise ValueError("the polynomial register needs the correlated representation")
        layout = eng.RegisterLayout.dense_chain(cfg.n_q, cfg.p)
    else:
        layout = eng.RegisterLayout.standard(cfg.n_q, cfg.p)
    return eng.CircuitState.zero(layout, representation, ledger)


def prepare_initial(cfg: AlgorithmConfig, initial, representation: str = eng.CORRELATED,
                    ledger: eng.GateLedger | None = None) -> eng.CircuitState:
    """Step I: a basis index gets one X per set bit; an amplitude list is loaded directly.

    Loading a general state is counted with the size of a uniformly-controlled
    rotation cascade, ``2**(n+1) - 2`` rotations and ``2**(n+1) - 2n - 2`` CNOTs.
    """
    state = new_state(cfg, representation, ledger)
    N = cfg.N
    with state.ledger.section("I"):
        if np.ndim(initial) == 0:
            n0 = int(initial)
            if not 0 <= n0 < N:
                raise ValueError(f"basis index {n0} outside [0, {N})")
            for j in range(cfg.n_q):
                if n0 >> j & 1:
                    eng.apply_x(state, eng.PRIMARY, j)
        else:
            amps = np.asarray(initial, dtype=complex)
            if amps.shape != (N,):
                raise ValueError(f"expected {N} amplitudes")
            if abs(np.sum(np.abs(amps) ** 2) - 1.0) > 1e-10:
                raise ValueError("amplitude list is not normalized")
            state.amplitudes[:] = 0
            state.amplitudes[:N] = amps
            n = cfg.n_q
            state.ledger.add(one_qubit=2 ** (n + 1) - 2, two_qubit=max(0, 2 ** (n + 1) - 2 * n - 2))
    return state


def step_free_rotation(state: eng.CircuitState, cfg: AlgorithmConfig) -> eng.CircuitState:
    """Step II from ``n**2 = sum_j a_j 4**j + 2 sum_{j1<j2} a_j1 a_j2 2**(j1+j2)``."""
    T = cfg.T
    with state.ledger.section("II"):
        for j in range(cfg.n_q):
            eng.apply_phase(state, eng.PRIMARY, j, -T * 2.0 ** (2 * j - 1))
        for j1 in range(cfg.n_q):
            for j2 in range(j1 + 1, cfg.n_q):
                eng.apply_controlled_phase(state, j1, j2, -T * 2.0 ** (j1 + j2))
    return state


def step_qft(state: eng.CircuitState, inverse: bool = False) -> eng.CircuitState:
    with state.ledger.section("VI" if inverse else "III"):
        eng.apply_qft(state, eng.PRIMARY, inverse=inverse)
    return state


def _neg_angle(entry):
    c, s = entry
    return (c, fxp.FixedPoint(-s.mantissa, s.p))


def step_build_cosine(state: eng.CircuitState, cfg: AlgorithmConfig) -> str:
    """Step IV. Returns the name of the register that now holds ``cos(theta_i)``.

    ``theta_i = sum_j beta_j 2 pi / 2**j`` where ``beta_j`` is primary qubit
    ``n_q - j``, so starting from ``(c, d) = (1, 0)`` one controlled rotation
    per qubit yields ``(cos, sin)``. Every operation is pushed on
    ``state.tape`` so :func:`uncompute` can clear the ancillas.
    """
    n_q, p = cfg.n_q, cfg.p
    table = eng.precompute_rotation_table(n_q, p)
    with state.ledger.section("IV"):
        eng.apply_x(state, "cos", p)
        state.tape.append(lambda: eng.apply_x(state, "cos", p))
        if not state.dense:
            for j in range(1, n_q + 1):
                eng.controlled_rotation(state, n_q - j, ("cos", "sin"), table[j - 1])
                state.tape.append(lambda: eng.restore_rotation(state))
            return "cos"
        cur = ("cos", "sin")
        for j in range(1, n_q + 1):
            ctrl, entry = n_q - j, table[j - 1]
            if j <= 2:
                eng.controlled_rotation(state, ctrl, cur, entry)
                inv = _neg_angle(entry)
                state.tape.append(lambda c=ctrl, r=cur, e=inv: eng.controlled_rotation(state, c, r, e))
                continue
            out = ("cos_out", None) if j == n_q else (f"c{j}", f"s{j}")
            eng.controlled_rotation(state, ctrl, cur, entry, out=out)
            # XOR-computation is its own inverse
            state.tape.append(lambda c=ctrl, r=cur, e=entry, o=out: eng.controlled_rotation(state, c, r, e, out=o))
            cur = out
        return cur[0]


def uncompute(state: eng.CircuitState) -> eng.CircuitState:
    """Replay the tape backwards, returning every ancilla to zero."""
    with state.ledger.section("IV.uncompute"):
        while state.tape:
            state.tape.pop()()
    return state


def apply_register_phase(state: eng.CircuitState, register: str, strength: float) -> eng.CircuitState:
    """Multiply by ``exp(-i * strength * value)`` of a fixed-point register, one gate per qubit.

    Fractional qubit ``b`` gets ``exp(-i strength 2**(b-p))`` (section ``V``);
    the unit and sign qubits of the two's-complement encoding, weights +1 and
    -2, are counted under ``V.signed``.
    """
    p = state.p
    w = fxp.bit_weights(p)
    with state.ledger.section("V"):
        for b in range(p):
            eng.apply_phase(state, register, b, -strength * w[b])
    with state.ledger.section("V.signed"):
        for b in (p, p + 1):
            eng.apply_phase(state, register, b, -strength * w[b])
    return state


def step_kick(state: eng.CircuitState, cfg: AlgorithmConfig, register: str = "cos",
              strength: float | None = None) -> eng.CircuitState:
    """Step V: kick phases read off ``register``, then the ancillas are cleared."""
    apply_register_phase(state, register, cfg.k if strength is None else strength)
    return uncompute(state)


# polynomial variant

@dataclass(frozen=True)
class ChebyshevFit:
    coeffs: np.ndarray
    max_error: float
    mantissas: tuple[int, ...]
    p: int

    def __call__(self, theta):
        return chebyshev.chebval(np.asarray(theta) / np.pi - 1.0, self.coeffs)


DENSE_GRID = 1 << 14


@lru_cache(maxsize=64)
def _series(target) -> np.ndarray:
    if isinstance(target, Cosine):
        # cos(pi (x + 1)) = -J0(pi) - 2 sum_m (-1)^m J_2m(pi) T_2m(x)
        c = np.zeros(41)
        c[0] = -special.jv(0, np.pi)
        for m in range(1, 21):
            c[2 * m] = -2 * (-1) ** m * special.jv(2 * m, np.pi)
        return c
    f = target_function(target)
    return chebyshev.chebinterpolate(lambda x: f(np.pi * (x + 1.0)), 256)


def target_function(target):
    """Register content as a function of theta (before the kick strength)."""
    if isinstance(target, Cosine):
        return np.cos
    if isinstance(target, ArctanBand):
        raise TypeError("ArctanBand needs k; use band_function")
    raise TypeError(f"unsupported polynomial target {target!r}")


def band_function(E: float, k: float):
    # V / pi, inside (-1, 1)
    return lambda th: 2.0 * np.arctan(E - 2.0 * k * np.cos(th)) / np.pi


@dataclass(frozen=True)
class _Band:
    E: float
    k: float


def chebyshev_coeffs(degree: int, p: int, target=None, k: float = 0.0) -> ChebyshevFit:
    """Degree-``degree`` Chebyshev approximation on ``[0, 2 pi)`` in ``x = theta/pi - 1``.

    ``max_error`` is measured on a dense grid for the floating-point
    coefficients; ``mantissas`` are the coefficients rounded to ``p``
    fractional bits as loaded by the circuit. For the cosine the
    coefficients are the exact Bessel expansion, odd terms vanish.
    """
    if degree < 1:
        raise ValueError("degree must be at least 1")
    target = Cosine() if target is None else target
    if isinstance(target, ArctanBand):
        key = _Band(float(target.E), float(k))
        f = band_function(target.E, k)
        full = _band_series(key)
    else:
        f = target_function(target)
        full = _series(target)
    c = np.zeros(degree + 1)
    m = min(degree + 1, len(full))
    c[:m] = full[:m]
    th = np.linspace(0.0, 2 * np.pi, DENSE_GRID + 1)
    err = float(np.max(np.abs(chebyshev.chebval(th / np.pi - 1.0, c) - f(th))))
    mant = tuple(fxp.from_real(v, p) for v in c)
    return ChebyshevFit(c, err, mant, p)


@lru_cache(maxsize=256)
def _band_series(key: _Band) -> np.ndarray:
    f = band_function(key.E, key.k)
    return chebyshev.chebinterpolate(lambda x: f(np.pi * (x + 1.0)), 256)


def degree_for_precision(p: int, target=None, k: float = 0.0, max_degree: int = 64) -> int:
    """Smallest degree whose dense-grid error is at most ``2**-p``."""
    for d in range(1, max_degree + 1):
        if chebyshev_coeffs(d, p, target, k).max_error <= 2.0 ** -p:
            return d
    raise ValueError(f"no degree <= {max_degree} reaches 2**-{p}")


def _kick_target(cfg: AlgorithmConfig, t_index: int):
    target = cfg.kick_mode.target
    if isinstance(target, ArctanBand) and isinstance(cfg.drive, Quasiperiodic):
        target = ArctanBand(quasiperiodic_band_param(cfg.k, cfg.drive.omega1, cfg.drive.omega2, t_index))
    return target


def build_polynomial_register(state: eng.CircuitState, cfg: AlgorithmConfig, t_index: int = 0) -> tuple[str, float]:
    """Replacement for Step IV: ``P(theta_i)`` in the ``cos`` register.

    Registers: ``rot_s`` holds ``x = 2i/N - 1``, ``rot_c``/``power`` the
    previous and current Chebyshev polynomial and ``cos`` the running sum.
    Each degree is one arithmetic block,
    ``T_{m+1} = 2 x T_m - T_{m-1}`` then ``acc += a_m T_m``.
    Returns the register name and the kick strength to apply.
    """
    if state.dense:
        raise ValueError("the polynomial register needs the correlated representation")
    mode = cfg.kick_mode
    target = _kick_target(cfg, t_index)
    fit = chebyshev_coeffs(mode.degree, cfg.p, target, cfg.k)
    strength = math.pi if isinstance(target, ArctanBand) else cfg.k
    n_q, p = cfg.n_q, cfg.p
    a = fit.mantissas
    cost = eng.recurrence_cost(p)
    idx = state.index()
    dt = fxp.mantissa_dtype(p)

    def push(name, fn, writes, gates=None):
        eng.apply_arithmetic(state, name, fn, writes, cost, gates)
        state.tape.append(lambda: eng.restore_arithmetic(state, name, cost, gates))

    one = 1 << p
    with state.ledger.section("IV"):
        # x = 2i/N - 1: CNOT copies of the primary bits, MSB inverted into the integer bits
        push("LOAD_X", lambda s: ((idx.astype(dt) << (p + 1 - n_q)) - one,), ("rot_s",), gates=(2, n_q + 1))
        # T_0 = 1 and acc = a_0 are constants, X gates only
        push("LOAD_T0", lambda s: (np.full(idx.size, one, dtype=dt),
                                   np.full(idx.size, a[0], dtype=dt)),
             ("power", "cos"), gates=(1 + bin(fxp.to_bits(a[0], p)).count("1"), 0))
        for m in range(1, mode.degree + 1):
            if m == 1:
                def fn(s, am=a[1]):
                    x = s.ancillas["rot_s"]
                    return s.ancillas["power"].copy(), x.copy(), s.ancillas["cos"] + fxp.round_shift(am * x, p)
            else:
                def fn(s, am=a[m]):
                    x, prev, cur = s.ancillas["rot_s"], s.ancillas["rot_c"], s.ancillas["power"]
                    nxt = fxp.round_shift(2 * x * cur - (prev << p), p)
                    return cur.copy(), nxt, s.ancillas["cos"] + fxp.round_shift(am * nxt, p)
            push(f"CHEB{m}", fn, ("rot_c", "power", "cos"))
    return "cos", strength


def build_polynomial_kick(state: eng.CircuitState, cfg: AlgorithmConfig, t_index: int = 0) -> eng.CircuitState:
    """Polynomial register, kick phases, uncompute."""
    reg, strength = build_polynomial_register(state, cfg, t_index)
    return step_kick(state, cfg, reg, strength)


def kick_cycle(state: eng.CircuitState, cfg: AlgorithmConfig, t_index: int = 0) -> eng.CircuitState:
    """One kick: Steps II, III, IV, V (with uncompute), VI."""
    step_free_rotation(state, cfg)
    step_qft(state)
    if isinstance(cfg.kick_mode, PolynomialRegister):
        build_polynomial_kick(state, cfg, t_index)
    else:
        reg = step_build_cosine(state, cfg)
        step_kick(state, cfg, reg)
    step_qft(state, inverse=True)
    state.ledger.kicks += 1
    return state


def measure_momentum(state: eng.CircuitState, shots: int, seed: int) -> MeasurementHistogram:
    """Sample the primary register ``shots`` times with a counter-based generator."""
    if shots < 1:
        raise ValueError("need at least one shot")
    probs = state.primary_probabilities()
    probs = probs / probs.sum()
    rng = np.random.Generator(np.random.Philox(seed))
    return MeasurementHistogram(rng.multinomial(shots, probs), shots)


# drivers

def run_circuit(cfg: AlgorithmConfig, initial, t: int, representation: str = eng.CORRELATED,
                callback=None) -> eng.CircuitState:
    """Prepare ``initial`` and apply ``t`` kicks; ``callback(s, state)`` after each kick."""
    state = prepare_initial(cfg, initial, representation)
    for s in range(1, t + 1):
        kick_cycle(state, cfg, s - 1)
        if callback is not None:
            callback(s, state)
    return state


def fidelity_series(cfg: AlgorithmConfig, n0: int, t: int) -> np.ndarray:
    """``|<psi_ref(s)|psi_circ(s)>|**2`` for ``s = 1..t`` from ``|n0>``."""
    from .reference import basis_state, iter_evolve

    ref = iter_evolve(basis_state(cfg.N, n0), cfg.reference_params(), t)
    out = []

    def cb(s, state):
        _, psi = next(ref)
        out.append(abs(np.vdot(psi, state.primary_amplitudes())) ** 2)

    run_circuit(cfg, n0, t, callback=cb)
    return np.array(out)


def cosine_register_values(cfg: AlgorithmConfig) -> np.ndarray:
    """Fixed-point ``cos(theta_i)`` for every angle index after Step IV (correlated run)."""
    state = new_state(cfg)
    reg = step_build_cosine(state, cfg)
    return state.ancillas[reg].astype(float) / (1 << cfg.p)


def applied_kick_phases(cfg: AlgorithmConfig, representation: str = eng.CORRELATED) -> np.ndarray:
    """Diagonal actually applied by Steps IV-V, read off a uniform angle-space state."""
    state = new_state(cfg, representation)
    N = cfg.N
    state.amplitudes[:] = 0
    state.amplitudes[:N] = 1.0 / math.sqrt(N)
    if isinstance(cfg.kick_mode, PolynomialRegister):
        build_polynomial_kick(state, cfg)
    else:
        reg = step_build_cosine(state, cfg)
        step_kick(state, cfg, reg)
    return np.angle(state.primary_amplitudes() * math.sqrt(N))


def kick_ledger(n_q: int, p: int, k: float = 1.0, T: float = 0.5, kick_mode=None) -> dict[str, dict[str, int]]:
    """Gate counts of one kick cycle on a fresh ledger."""
    cfg = AlgorithmConfig(n_q, p, k, T, kick_mode or CosineRegister())
    state = prepare_initial(cfg, 0)
    ledger = eng.GateLedger()
    state.ledger = ledger
    kick_cycle(state, cfg)
    return eng.ledger_report(state)
