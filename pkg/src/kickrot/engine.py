"""Register-level quantum circuit simulator with a gate-count ledger.

Two state representations are supported:

``dense``
    the full tensor-product state over every qubit of the layout. Exact but
    exponential in the total qubit count, so only usable for toy sizes.

``correlated``
    amplitudes over the primary register only; every ancilla register is
    stored as one fixed-point mantissa per primary basis index. This is exact
    as long as ancillas are only ever driven by basis-conditioned reversible
    arithmetic, which is all the kicked-rotator circuit does.

Qubit ``j`` of a register is bit ``offset + j`` of the dense basis index;
the primary register always sits at offset 0 so its basis index equals the
momentum label ``n``.
"""
from __future__ import annotations

import contextlib
import json
import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import fixedpoint as fxp

PRIMARY = "primary"
DENSE = "dense"
CORRELATED = "correlated"

# aux registers of the correlated layout: cos, sin, two rotation scratch, one power scratch
STANDARD_AUX = ("cos", "sin", "rot_c", "rot_s", "power")

MAX_DENSE_QUBITS = 24

COUNTERS = ("one_qubit", "two_qubit", "arithmetic_blocks", "elementary_estimate")


def adder_cost(p: int) -> int:
    """Elementary gates of a ripple-carry adder on ``p``-bit operands."""
    return 4 * p


def multiplier_cost(p: int) -> int:
    """Shift-and-add controlled multiplier, ``p`` additions: O(p**2)."""
    return p * adder_cost(p)


def rotation_cost(p: int) -> int:
    # 4 products and 2 additions per (c, d) update
    return 4 * multiplier_cost(p) + 2 * adder_cost(p)


def recurrence_cost(p: int) -> int:
    # 2*x*T_m - T_{m-1} plus the coefficient accumulate
    return 2 * multiplier_cost(p) + 2 * adder_cost(p)


class GateLedger:
    """Counts gates per algorithm step.

    Gates are attributed to the section opened with :meth:`section`. Every
    counter only ever increases. ``trace`` collects one text line per gate
    when enabled.
    """

    def __init__(self, trace: bool = False):
        self.steps: dict[str, dict[str, int]] = defaultdict(lambda: dict.fromkeys(COUNTERS, 0))
        self._current = "unassigned"
        self.kicks = 0
        self.trace: list[str] | None = [] if trace else None

    @contextlib.contextmanager
    def section(self, name: str):
        prev, self._current = self._current, name
        try:
            yield self
        finally:
            self._current = prev

    def gate(self, name: str, qubits: tuple, angle: float | None = None):
        kind = "one_qubit" if len(qubits) == 1 else "two_qubit"
        row = self.steps[self._current]
        row[kind] += 1
        row["elementary_estimate"] += 1
        if self.trace is not None:
            q = ",".join(f"{r}[{j}]" for r, j in qubits)
            a = "" if angle is None else f" {angle!r}"
            self.trace.append(f"GATE {name} {q}{a}")

    def block(self, name: str, cost: int, qubits: tuple = ()):
        row = self.steps[self._current]
        row["arithmetic_blocks"] += 1
        row["elementary_estimate"] += cost
        if self.trace is not None:
            self.trace.append(f"BLOCK {name} {','.join(map(str, qubits))} {cost}")

    def add(self, one_qubit: int = 0, two_qubit: int = 0):
        """Bulk-count gates whose individual application is not simulated."""
        row = self.steps[self._current]
        row["one_qubit"] += one_qubit
        row["two_qubit"] += two_qubit
        row["elementary_estimate"] += one_qubit + two_qubit

    def report(self) -> dict[str, dict[str, int]]:
        out = {k: dict(v) for k, v in self.steps.items()}
        total = dict.fromkeys(COUNTERS, 0)
        for row in out.values():
            for c in COUNTERS:
                total[c] += row[c]
        out["total"] = total
        return out

    def total(self, counter: str = "elementary_estimate") -> int:
        return sum(row[counter] for row in self.steps.values())

    def to_json(self) -> str:
        return json.dumps({k: v for k, v in self.report().items() if k != "total"}, indent=2, sort_keys=True)


@dataclass
class RegisterLayout:
    """Named registers and their qubit counts, primary first."""

    registers: dict[str, int]
    n_q: int
    p: int

    def __post_init__(self):
        names = list(self.registers)
        if not names or names[0] != PRIMARY:
            raise ValueError("the primary register must come first")
        if self.registers[PRIMARY] != self.n_q:
            raise ValueError("primary register width must equal n_q")
        if not self.n_q <= self.p <= 2 * self.n_q:
            warnings.warn(f"precision p={self.p} outside recommended range [{self.n_q}, {2 * self.n_q}]",
                          stacklevel=3)
        self.offsets = {}
        off = 0
        for name, w in self.registers.items():
            self.offsets[name] = off
            off += w

    @property
    def total_qubits(self) -> int:
        return sum(self.registers.values())

    def position(self, register: str, j: int) -> int:
        if register not in self.registers:
            raise KeyError(f"unknown register {register!r}")
        if not 0 <= j < self.registers[register]:
            raise IndexError(f"qubit {j} outside register {register!r} of width {self.registers[register]}")
        return self.offsets[register] + j

    @classmethod
    def standard(cls, n_q: int, p: int) -> "RegisterLayout":
        w = fxp.width(p)
        return cls({PRIMARY: n_q, **{name: w for name in STANDARD_AUX}}, n_q, p)

    @classmethod
    def dense_chain(cls, n_q: int, p: int) -> "RegisterLayout":
        """Layout used by the dense Step IV: one fresh register pair per rounded rotation.

        Rotations by pi and pi/2 are exact permutations and run in place on
        ``cos``/``sin``; every later rotation writes into new registers, the
        last one only into ``cos_out`` since its sine is never used.
        """
        w = fxp.width(p)
        regs = {PRIMARY: n_q, "cos": w, "sin": w}
        for j in range(3, n_q):
            regs[f"c{j}"] = w
            regs[f"s{j}"] = w
        if n_q >= 3:
            regs["cos_out"] = w
        return cls(regs, n_q, p)


@dataclass
class CircuitState:
    """Quantum state of a register layout in one of the two representations."""

    layout: RegisterLayout
    representation: str
    amplitudes: np.ndarray
    ancillas: dict[str, np.ndarray] = field(default_factory=dict)
    ledger: GateLedger = field(default_factory=GateLedger)
    history: list = field(default_factory=list)
    tape: list = field(default_factory=list)

    @classmethod
    def zero(cls, layout: RegisterLayout, representation: str = CORRELATED,
             ledger: GateLedger | None = None) -> "CircuitState":
        if representation == DENSE:
            if layout.total_qubits > MAX_DENSE_QUBITS:
                raise MemoryError(f"dense state of {layout.total_qubits} qubits is too large")
            amps = np.zeros(1 << layout.total_qubits, dtype=complex)
            amps[0] = 1.0
            anc = {}
        elif representation == CORRELATED:
            N = 1 << layout.n_q
            amps = np.zeros(N, dtype=complex)
            amps[0] = 1.0
            dt = fxp.mantissa_dtype(layout.p)
            anc = {name: np.zeros(N, dtype=dt) for name in layout.registers if name != PRIMARY}
        else:
            raise ValueError(f"unknown representation {representation!r}")
        return cls(layout, representation, amps, anc, ledger or GateLedger())

    @property
    def dense(self) -> bool:
        return self.representation == DENSE

    @property
    def n_q(self) -> int:
        return self.layout.n_q

    @property
    def p(self) -> int:
        return self.layout.p

    def index(self) -> np.ndarray:
        idx = getattr(self, "_index", None)
        if idx is None or idx.size != self.amplitudes.size:
            idx = np.arange(self.amplitudes.size, dtype=np.int64)
            self._index = idx
        return idx

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def register_values(self, register: str) -> np.ndarray:
        """Signed mantissa held by ``register`` on every basis state (dense) or index (correlated)."""
        if not self.dense:
            return self.ancillas[register]
        off = self.layout.offsets[register]
        w = self.layout.registers[register]
        raw = (self.index() >> off) & ((1 << w) - 1)
        return fxp.from_bits(raw, self.p)

    def primary_amplitudes(self) -> np.ndarray:
        """Primary-register amplitudes, requiring every ancilla to be zero."""
        if self.dense:
            N = 1 << self.n_q
            rest = self.amplitudes[N:]
            if rest.size and np.max(np.abs(rest)) > 1e-12:
                raise RuntimeError("ancilla registers are not in the zero state")
            return self.amplitudes[:N].copy()
        if not self.ancillas_clear():
            raise RuntimeError("ancilla registers are not in the zero state")
        return self.amplitudes.copy()

    def primary_probabilities(self) -> np.ndarray:
        N = 1 << self.n_q
        probs = np.abs(self.amplitudes) ** 2
        if self.dense:
            return probs.reshape(-1, N).sum(axis=0)
        return probs

    def ancillas_clear(self) -> bool:
        if self.dense:
            N = 1 << self.n_q
            return bool(np.all(np.abs(self.amplitudes[N:]) <= 1e-12))
        return all(not np.any(v) for v in self.ancillas.values())

    def copy(self) -> "CircuitState":
        return CircuitState(self.layout, self.representation, self.amplitudes.copy(),
                            {k: v.copy() for k, v in self.ancillas.items()}, self.ledger,
                            list(self.history), list(self.tape))


def _bit_mask(state: CircuitState, register: str, j: int) -> np.ndarray:
    pos = state.layout.position(register, j)
    if state.dense or register == PRIMARY:
        return ((state.index() >> pos) & 1).astype(bool)
    raw = fxp.to_bits(state.ancillas[register], state.p)
    return ((raw >> j) & 1).astype(bool)


def _require_primary_only(state: CircuitState, what: str):
    # mixing primary amplitudes is only valid when no ancilla depends on the index
    if not state.dense:
        for name, v in state.ancillas.items():
            if v.size and np.any(v != v[0]):
                raise RuntimeError(f"{what} on the primary register while {name!r} is index-dependent")


def apply_phase(state: CircuitState, register: str, j: int, phi: float) -> CircuitState:
    """Multiply every basis amplitude with qubit ``j`` set by ``exp(i*phi)``."""
    mask = _bit_mask(state, register, j)
    state.amplitudes[mask] *= np.exp(1j * phi)
    state.ledger.gate("P", ((register, j),), phi)
    return state


def apply_controlled_phase(state: CircuitState, j1: int, j2: int, phi: float,
                           register: str = PRIMARY) -> CircuitState:
    """Phase ``exp(i*phi)`` on states where both qubits are set. ``j1 == j2`` is a one-qubit phase."""
    if j1 == j2:
        return apply_phase(state, register, j1, phi)
    mask = _bit_mask(state, register, j1) & _bit_mask(state, register, j2)
    state.amplitudes[mask] *= np.exp(1j * phi)
    state.ledger.gate("CP", ((register, j1), (register, j2)), phi)
    return state


def apply_hadamard(state: CircuitState, j: int) -> CircuitState:
    _require_primary_only(state, "Hadamard")
    pos = state.layout.position(PRIMARY, j)
    v = state.amplitudes.reshape(-1, 2, 1 << pos)
    a0, a1 = v[:, 0, :].copy(), v[:, 1, :].copy()
    s = 1.0 / math.sqrt(2.0)
    v[:, 0, :] = (a0 + a1) * s
    v[:, 1, :] = (a0 - a1) * s
    state.ledger.gate("H", ((PRIMARY, j),))
    return state


def apply_swap(state: CircuitState, j1: int, j2: int) -> CircuitState:
    _require_primary_only(state, "SWAP")
    lo, hi = sorted((state.layout.position(PRIMARY, j1), state.layout.position(PRIMARY, j2)))
    v = state.amplitudes.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)
    state.amplitudes = np.ascontiguousarray(v.swapaxes(1, 3)).reshape(-1)
    state.ledger.gate("SWAP", ((PRIMARY, j1), (PRIMARY, j2)))
    return state


def apply_x(state: CircuitState, register: str, j: int) -> CircuitState:
    """Bit flip. On a correlated ancilla this flips the stored bit for every index."""
    pos = state.layout.position(register, j)
    if state.dense or register == PRIMARY:
        if register == PRIMARY:
            _require_primary_only(state, "X")
        state.amplitudes = state.amplitudes[state.index() ^ (1 << pos)]
    else:
        raw = fxp.to_bits(state.ancillas[register], state.p) ^ (1 << j)
        state.ancillas[register] = fxp.from_bits(raw, state.p)
    state.ledger.gate("X", ((register, j),))
    return state


def qft_gates(n: int, inverse: bool = False) -> list[tuple]:
    """Gate list of the QFT on ``n`` qubits, natural output order.

    The forward transform maps ``|x>`` to ``N**-0.5 * sum_y exp(+2*pi*i*x*y/N) |y>``.
    """
    gates = []
    for q in range(n - 1, -1, -1):
        gates.append(("H", q))
        for m in range(q - 1, -1, -1):
            gates.append(("CP", q, m, math.pi / (1 << (q - m))))
    for q in range(n // 2):
        gates.append(("SWAP", q, n - 1 - q))
    if inverse:
        gates = [(g[0], g[1], g[2], -g[3]) if g[0] == "CP" else g for g in reversed(gates)]
    return gates


def apply_qft(state: CircuitState, register: str = PRIMARY, inverse: bool = False) -> CircuitState:
    if register != PRIMARY:
        raise ValueError("the QFT acts on the primary register only")
    for g in qft_gates(state.n_q, inverse):
        if g[0] == "H":
            apply_hadamard(state, g[1])
        elif g[0] == "CP":
            apply_controlled_phase(state, g[1], g[2], g[3])
        else:
            apply_swap(state, g[1], g[2])
    return state


def precompute_rotation_table(n_q: int, p: int) -> list[tuple[fxp.FixedPoint, fxp.FixedPoint]]:
    """``(cos, sin)`` of ``2*pi/2**j`` for ``j = 1..n_q``, rounded to ``p`` fractional bits."""
    table = []
    for j in range(1, n_q + 1):
        a = 2.0 * math.pi / (1 << j)
        table.append((fxp.FixedPoint.from_real(math.cos(a), p), fxp.FixedPoint.from_real(math.sin(a), p)))
    # j=1, 2 are exact: cos(pi) = -1 and cos(pi/2) = 0 must not pick up libm residue
    if n_q >= 1:
        table[0] = (fxp.FixedPoint(-(1 << p), p), fxp.FixedPoint(0, p))
    if n_q >= 2:
        table[1] = (fxp.FixedPoint(0, p), fxp.FixedPoint(1 << p, p))
    return table


def rotate(c, d, cos_m: int, sin_m: int, p: int):
    """Fixed-point rotation of ``(c, d)``; one round-to-nearest-even per output."""
    return (fxp.round_shift(c * cos_m - d * sin_m, p),
            fxp.round_shift(c * sin_m + d * cos_m, p))


def _trig_mantissas(alpha, p):
    if isinstance(alpha, tuple):
        return int(alpha[0].mantissa), int(alpha[1].mantissa)
    return fxp.from_real(math.cos(alpha), p), fxp.from_real(math.sin(alpha), p)


def controlled_rotation(state: CircuitState, control: int, targets: tuple[str, str], alpha,
                        out: tuple[str, str | None] | None = None) -> CircuitState:
    """Rotate the fixed-point pair held in ``targets`` by ``alpha`` where ``control`` is 1.

    ``alpha`` is an angle or a precomputed ``(cos, sin)`` pair of
    :class:`FixedPoint`. With ``out=None`` the update is in place: in the
    correlated representation the previous values are retained on
    ``state.history`` (the scratch registers of the real circuit) so
    :func:`restore_rotation` can undo it exactly; in the dense
    representation only exact rotations (multiples of pi/2) are bijective
    and may run in place. Otherwise the rotated pair, or the input pair
    where the control is 0, is XOR-ed into the ``out`` registers; a ``None``
    second name drops the sine component.
    """
    p = state.p
    cos_m, sin_m = _trig_mantissas(alpha, p)
    one = 1 << p
    exact = cos_m in (-one, 0, one) and sin_m in (-one, 0, one)
    c_reg, d_reg = targets
    ctrl = _bit_mask(state, PRIMARY, control)
    c = state.register_values(c_reg)
    d = state.register_values(d_reg)
    nc, nd = rotate(c, d, cos_m, sin_m, p)
    nc = np.where(ctrl, nc, c)
    nd = np.where(ctrl, nd, d)
    live = ctrl if not state.dense else ctrl & (np.abs(state.amplitudes) > 0)
    if not (fxp.in_range(nc[live], p) and fxp.in_range(nd[live], p)):
        raise OverflowError("fixed-point rotation left the [-2, 2) range")

    if state.dense:
        idx = state.index()
        w = fxp.width(p)
        mask = (1 << w) - 1
        if out is None:
            if not exact:
                raise ValueError("a rounded rotation is not a permutation; give out= registers")
            new = idx
            for reg, val in ((c_reg, nc), (d_reg, nd)):
                off = state.layout.offsets[reg]
                new = (new & ~(mask << off)) | (fxp.to_bits(val, p).astype(np.int64) << off)
        else:
            new = idx
            for reg, val in zip(out, (nc, nd)):
                if reg is None:
                    continue
                off = state.layout.offsets[reg]
                new = new ^ (fxp.to_bits(val, p).astype(np.int64) << off)
        amps = np.empty_like(state.amplitudes)
        amps[new] = state.amplitudes
        state.amplitudes = amps
    else:
        if out is None:
            state.history.append((c_reg, d_reg, c.copy(), d.copy()))
            state.ancillas[c_reg] = nc
            state.ancillas[d_reg] = nd
        else:
            for reg, val in zip(out, (nc, nd)):
                if reg is not None:
                    raw = fxp.to_bits(state.ancillas[reg], p) ^ fxp.to_bits(val, p)
                    state.ancillas[reg] = fxp.from_bits(raw, p)
    state.ledger.block("CROT", rotation_cost(p), (control, c_reg, d_reg))
    return state


def restore_rotation(state: CircuitState) -> CircuitState:
    """Undo the most recent in-place rotation of a correlated state exactly.

    This replays the retained intermediate values, i.e. the reversed gate
    sequence of the arithmetic block, and is counted as one block.
    """
    if state.dense:
        raise ValueError("dense states are uncomputed by replaying their gate sequence")
    c_reg, d_reg, c, d = state.history.pop()
    state.ancillas[c_reg] = c
    state.ancillas[d_reg] = d
    state.ledger.block("CROT^-1", rotation_cost(state.p), (c_reg, d_reg))
    return state


def apply_arithmetic(state: CircuitState, name: str, fn, writes: tuple[str, ...], cost: int,
                     gates: tuple[int, int] | None = None) -> CircuitState:
    """Generic reversible arithmetic block on correlated ancillas.

    ``fn(state)`` returns the new mantissa arrays for ``writes``; the old
    values are kept on the history so :func:`restore_arithmetic` can erase
    them. Simple loads that are a handful of CNOT/X gates rather than an
    arithmetic block pass ``gates=(one_qubit, two_qubit)`` instead of a cost.
    """
    if state.dense:
        raise ValueError("generic arithmetic blocks need the correlated representation")
    new = fn(state)
    state.history.append(("arith", {w: state.ancillas[w].copy() for w in writes}))
    for w, v in zip(writes, new):
        if not fxp.in_range(v, state.p):
            raise OverflowError(f"{name}: register {w!r} left the [-2, 2) range")
        state.ancillas[w] = v
    if gates is None:
        state.ledger.block(name, cost, writes)
    else:
        state.ledger.add(*gates)
    return state


def restore_arithmetic(state: CircuitState, name: str, cost: int,
                       gates: tuple[int, int] | None = None) -> CircuitState:
    tag, old = state.history.pop()
    if tag != "arith":
        raise RuntimeError("history out of order")
    state.ancillas.update(old)
    if gates is None:
        state.ledger.block(name + "^-1", cost, tuple(old))
    else:
        state.ledger.add(*gates)
    return state


def ledger_report(state: CircuitState) -> dict[str, dict[str, int]]:
    if state.ledger.kicks < 1:
        raise ValueError("no kick has been executed on this state")
    return state.ledger.report()
