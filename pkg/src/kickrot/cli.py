"""Command-line experiment runner.

Every command takes its parameters from flags, from a JSON ``--config``
file, or both (flags win), writes its data files plus ``manifest.json`` to
``--out``, and exits with 0 on success, 2 on a configuration error and 3
when a numerical validity check fails.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import algorithm as alg
from . import classical as cl
from . import engine as eng
from . import io as kio
from . import observables as obs
from . import reference as ref

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
NORM_TOL_PER_STEP = 1e-10


class ConfigError(ValueError):
    pass


class NumericalError(RuntimeError):
    pass


# parameter parsing

def parse_range(text) -> list[int]:
    """``"4..12"`` (inclusive), ``"4,6,8"`` or a single integer."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    s = str(text).strip()
    m = re.fullmatch(r"(-?\d+)\.\.(-?\d+)", s)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if hi < lo:
            raise ConfigError(f"empty range {s!r}")
        return list(range(lo, hi + 1))
    try:
        return [int(v) for v in s.split(",")]
    except ValueError:
        raise ConfigError(f"cannot parse integer range {s!r}") from None


def resolve_precision(value, n_q: int) -> int:
    """``p`` as an integer or as a multiple of ``nq`` such as ``"2nq"``."""
    if isinstance(value, int):
        return value
    s = str(value).strip().replace(" ", "")
    m = re.fullmatch(r"(\d*)\*?nq", s)
    if m:
        return int(m.group(1) or 1) * n_q
    try:
        return int(s)
    except ValueError:
        raise ConfigError(f"cannot parse precision {value!r}") from None


def parse_floats(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",")]
    except ValueError:
        raise ConfigError(f"cannot parse number list {text!r}") from None


def _choice(*options):
    def conv(v):
        if v not in options:
            raise ConfigError(f"{v!r} is not one of {options}")
        return v
    return conv


def _opt(conv):
    return lambda v: None if v is None else conv(v)


# name: (converter, default, help)
CIRCUIT = {
    "nq": (int, 8, "primary qubits"),
    "p": (str, "2nq", "fractional bits, integer or multiple like 2nq"),
    "k": (float, 5.0, "kick strength"),
    "T": (float, 0.5, "period"),
    "t": (int, 10, "kicks"),
    "n0": (_opt(int), None, "initial level (default N/2)"),
    "kick_mode": (_choice("cosine", "polynomial"), "cosine", "how the kick phase register is built"),
    "degree": (int, 0, "polynomial degree, 0 picks the smallest reaching 2**-p"),
    "target": (_choice("cosine", "arctan"), "cosine", "function approximated by the polynomial register"),
    "E": (float, 0.0, "band parameter of the arctan potential"),
    "representation": (_choice(eng.CORRELATED, eng.DENSE), eng.CORRELATED, "state representation"),
}

QUANTUM = {
    "k": (float, 10.0, "kick strength"),
    "T": (float, 0.5, "period"),
    "N": (int, 2048, "momentum levels, power of two"),
    "t": (int, 1000, "kicks"),
    "n0": (_opt(int), None, "initial level (default N/2)"),
    "potential": (_choice("cosine", "arctan"), "cosine", "kick potential"),
    "E": (float, 0.0, "band parameter of the arctan potential"),
    "drive": (_choice("static", "quasiperiodic"), "static", "time dependence of the band parameter"),
    "record_every": (int, 0, "wavefunction snapshot cadence, 0 for the final state only"),
}

COMMANDS: dict[str, dict] = {
    "classical-traj": {
        "help": "single standard-map orbit",
        "params": {"k": (_opt(float), None, "kick strength"), "T": (float, 1.0, "period"),
                   "K": (_opt(float), None, "chaos parameter, sets k = K/T"),
                   "n0": (float, 0.0, "initial momentum"), "theta0": (float, 1.0, "initial angle"),
                   "t": (int, 100, "steps")},
    },
    "classical-diffusion": {
        "help": "ensemble momentum spreading and diffusion rate",
        "params": {"k": (_opt(float), None, "kick strength"), "T": (float, 1.0, "period"),
                   "K": (_opt(float), 5.0, "chaos parameter, sets k = K/T"),
                   "orbits": (int, 10000, "ensemble size"), "t": (int, 1000, "steps")},
    },
    "lyapunov": {
        "help": "largest Lyapunov exponent of the standard map",
        "params": {"k": (_opt(float), None, "kick strength"), "T": (float, 1.0, "period"),
                   "K": (_opt(float), 10.0, "chaos parameter, sets k = K/T"),
                   "t": (int, 100000, "steps"), "renorm": (int, 10, "renormalization interval")},
    },
    "lattice-map": {
        "help": "density transport by the integer lattice map",
        "params": {"N": (int, 256, "lattice size"), "K": (float, 5.0, "chaos parameter"),
                   "t": (int, 50, "steps"),
                   "init": (_choice("line", "delta", "uniform"), "line", "initial density"),
                   "X0": (int, 0, "delta position X"), "Y0": (int, 0, "delta position Y")},
    },
    "quantum-evolve": {"help": "split-operator evolution of the kicked rotator", "params": QUANTUM},
    "localization-fit": {
        "help": "exponential tail fit of a momentum distribution",
        "params": {**QUANTUM, "t": (int, 10000, "kicks"),
                   "probs": (_opt(str), None, "CSV (n, prob) to fit instead of running an evolution"),
                   "avg_fraction": (float, 0.2, "fraction of final kicks averaged before fitting")},
    },
    "anderson": {
        "help": "variance growth under quasiperiodic driving",
        "params": {"k": (parse_floats, "0.3,0.7", "kick strengths, comma separated"),
                   "T": (float, 0.5, "period"), "N": (int, 2048, "levels"),
                   "t1": (int, 1000, "first time"), "t2": (int, 4000, "second time"),
                   "starts": (int, 16, "initial levels averaged over"),
                   "spacing": (int, 37, "distance between initial levels")},
    },
    "evolve-2d": {
        "help": "two coupled rotors with contact interaction",
        "params": {"N": (int, 16, "levels per axis"), "k": (float, 1.0, "kick strength"),
                   "T": (float, 0.5, "period"), "g": (float, 1.0, "interaction on n1 = n2"),
                   "t": (int, 3, "kicks"), "n1": (_opt(int), None, "initial level 1 (default N/2)"),
                   "n2": (_opt(int), None, "initial level 2 (default N/2 + 1)")},
    },
    "circuit-evolve": {"help": "gate-level kicked rotator", "params": CIRCUIT},
    "circuit-compare": {"help": "gate-level circuit against the split-operator reference", "params": CIRCUIT},
    "gate-count": {
        "help": "gate ledger of one kick and its scaling in n_q",
        "params": {"nq": (parse_range, "4..12", "qubit counts, e.g. 4..12 or 4,6,8"),
                   "p": (str, "2nq", "fractional bits, integer or multiple like 2nq"),
                   "k": (float, 5.0, "kick strength"), "T": (float, 0.5, "period")},
    },
    "measure": {
        "help": "momentum measurement shots after a circuit run",
        "params": {**CIRCUIT, "shots": (int, 1000, "number of shots")},
    },
    "harmonics": {
        "help": "largest Fourier components of a momentum distribution",
        "params": {**QUANTUM, "m": (int, 8, "number of components"),
                   "probs": (_opt(str), None, "CSV (n, prob) to analyse instead of running an evolution")},
    },
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kickrot", description="Kicked-rotator laboratory.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")
    for name, cmd in COMMANDS.items():
        sp = sub.add_parser(name, help=cmd["help"], description=cmd["help"],
                            argument_default=argparse.SUPPRESS)
        sp.add_argument("--config", help="JSON file of parameters; flags override it")
        sp.add_argument("--out", help="output directory (default out/<command>)")
        sp.add_argument("--seed", type=int, help="seed for every random draw (default 0)")
        for pname, (_, default, h) in cmd["params"].items():
            flag = "--" + pname.replace("_", "-")
            sp.add_argument(flag, dest=pname, help=f"{h} (default {default})")
    return ap


def resolve_params(command: str, flags: dict) -> tuple[dict, int, Path]:
    """Defaults, then the JSON config, then explicit flags."""
    table = COMMANDS[command]["params"]
    merged = {k: v[1] for k, v in table.items()}
    seed, out = 0, Path("out") / command
    if flags.get("config"):
        try:
            cfg = kio.read_json(flags["config"])
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config: {e}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        cfg = dict(cfg)
        if cfg.pop("command", command) != command:
            raise ConfigError("config was written for a different command")
        seed = cfg.pop("seed", seed)
        out = Path(cfg.pop("out", out))
        cfg = cfg.get("params", cfg)
        unknown = set(cfg) - set(table)
        if unknown:
            raise ConfigError(f"unknown parameters for {command}: {sorted(unknown)}")
        merged.update(cfg)
    for k in table:
        if k in flags:
            merged[k] = flags[k]
    if "seed" in flags:
        seed = flags["seed"]
    if "out" in flags:
        out = Path(flags["out"])
    try:
        params = {k: table[k][0](v) if v is not None else None for k, v in merged.items()}
        seed = int(seed)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from None
    return params, seed, out


def thread_count() -> int:
    env = os.environ.get("KICKROT_THREADS")
    if env is None:
        return 1
    try:
        n = int(env)
    except ValueError:
        raise ConfigError(f"KICKROT_THREADS must be an integer, got {env!r}") from None
    if n < 1:
        raise ConfigError("KICKROT_THREADS must be at least 1")
    return n


# shared builders

def _map_params(P) -> cl.MapParams:
    T = P["T"]
    if P.get("k") is not None:
        k = P["k"]
    elif P.get("K") is not None:
        k = P["K"] / T
    else:
        raise ConfigError("give k or K")
    try:
        return cl.MapParams(k, T)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _quantum_params(P) -> ref.QuantumParams:
    pot = ref.Cosine() if P["potential"] == "cosine" else ref.ArctanBand(P["E"])
    drive = ref.Quasiperiodic() if P["drive"] == "quasiperiodic" else ref.Static()
    try:
        return ref.QuantumParams(P["k"], P["T"], P["N"], pot, drive)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _potential_name(pot) -> str:
    if isinstance(pot, ref.ArctanBand):
        return f"arctan(E={pot.E!r})"
    return "cosine"


def _algorithm_config(P) -> alg.AlgorithmConfig:
    n_q = P["nq"]
    p = resolve_precision(P["p"], n_q)
    if P["kick_mode"] == "polynomial":
        target = ref.Cosine() if P["target"] == "cosine" else ref.ArctanBand(P["E"])
        deg = P["degree"] or alg.degree_for_precision(p, target, P["k"])
        mode = alg.PolynomialRegister(deg, target)
    else:
        if P["target"] != "cosine":
            raise ConfigError("the arctan target needs kick_mode polynomial")
        mode = alg.CosineRegister()
    try:
        return alg.AlgorithmConfig(n_q, p, P["k"], P["T"], mode)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _check_norm(norm: float, steps: int):
    if not abs(norm - 1.0) <= NORM_TOL_PER_STEP * max(1, steps):
        raise NumericalError(f"norm drift {abs(norm - 1.0):.3e} after {steps} steps")


def _reference_run(P):
    """Quantum evolution from ``|n0>``: moments, final state and time-averaged distribution."""
    params = _quantum_params(P)
    N = params.N
    n0 = N // 2 if P["n0"] is None else P["n0"]
    if not 0 <= n0 < N:
        raise ConfigError(f"n0={n0} outside [0, {N})")
    if P["t"] < 1:
        raise ConfigError("t must be at least 1")
    psi0 = ref.basis_state(N, n0)
    snaps = []
    t = P["t"]
    start = t - max(1, int(round(t * P.get("avg_fraction", 0.2))))
    mean = np.empty(t + 1)
    var = np.empty(t + 1)
    iprs = np.empty(t + 1)
    mean[0], var[0], iprs[0] = 0.0, 0.0, 1.0
    acc = np.zeros(N)
    psi = psi0
    cadence = P.get("record_every", 0)
    for s, psi in ref.iter_evolve(psi0, params, t):
        prob = np.abs(psi) ** 2
        mean[s], var[s] = obs.momentum_moments(prob, n0)
        iprs[s] = obs.ipr(prob)
        if s > start:
            acc += prob
        if cadence and s % cadence == 0:
            snaps.append((s, psi.copy()))
    _check_norm(float(np.linalg.norm(psi)), t)
    return params, n0, psi.copy(), (mean, var, iprs), acc / (t - start), snaps


def _load_probs(path):
    try:
        data = kio.read_csv(path)
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from None
    if "prob" not in data:
        raise ConfigError(f"{path}: needs a prob column")
    probs = data["prob"]
    N = len(probs)
    if N < 2 or N & (N - 1):
        raise ConfigError("distribution length must be a power of two")
    return probs


# commands

def cmd_classical_traj(P, seed, out):
    mp = _map_params(P)
    orbit = cl.trajectory(cl.ClassicalState(P["n0"], cl.wrap_angle(P["theta0"])), mp, P["t"])
    kio.write_csv(out / "trajectory.csv", ["t", "n", "theta"],
                  [np.arange(len(orbit)), [s.n for s in orbit], [s.theta for s in orbit]])
    return {"K": mp.K}


def cmd_classical_diffusion(P, seed, out):
    mp = _map_params(P)
    m = P["orbits"]
    if m < 1 or P["t"] < 1:
        raise ConfigError("need orbits >= 1 and t >= 1")
    mean, var = cl.evolve_ensemble(np.zeros(m), cl.uniform_angles(m), mp, P["t"])
    D = cl.diffusion_rate(var)
    kio.write_csv(out / "moments.csv", ["t", "mean_n", "var_n"], [np.arange(P["t"] + 1), mean, var])
    fit = {"D": D, "D_expected": mp.k**2 / 2, "ratio": D / (mp.k**2 / 2) if mp.k else None}
    kio.write_json(out / "diffusion.json", fit)
    return fit


def cmd_lyapunov(P, seed, out):
    mp = _map_params(P)
    res = cl.lyapunov_exponent(mp, P["t"], seed, P["renorm"])
    rep = {"exponent": res.exponent, "degenerate": res.degenerate,
           "ln_K_over_2": math.log(mp.K / 2) if mp.K > 0 else None}
    kio.write_json(out / "lyapunov.json", rep)
    if res.degenerate:
        print("warning: orbit hit a fixed point, estimate is partial", file=sys.stderr)
    return rep


def cmd_lattice_map(P, seed, out):
    N, K, t = P["N"], P["K"], P["t"]
    if N < 1:
        raise ConfigError("N must be positive")
    w = np.zeros((N, N))
    if P["init"] == "line":
        w[:, 0] = 1.0 / N
    elif P["init"] == "delta":
        w[P["X0"] % N, P["Y0"] % N] = 1.0
    else:
        w[:] = 1.0 / (N * N)
    d = cl.density_evolve(cl.DensityGrid(w, N), K, t)
    if np.sort(d.weights.ravel()).tolist() != np.sort(w.ravel()).tolist():
        raise NumericalError("density transport did not conserve the cell weights")
    kio.write_density(out / "density.bin", d.weights, {"N": N, "K": K, "t": t})
    rep = {"total_weight": float(d.weights.sum())}
    if P["init"] == "line":
        var = cl.lattice_line_variance(N, K, t)
        kio.write_csv(out / "variance.csv", ["t", "var_Y"], [np.arange(t + 1), var])
        rep["D_lattice"] = cl.diffusion_rate(var)
        rep["D_expected"] = (N * K / (2 * math.pi)) ** 2 / 2
    return rep


def cmd_quantum_evolve(P, seed, out):
    params, n0, psi, (mean, var, iprs), avg, snaps = _reference_run(P)
    t = P["t"]
    kio.write_csv(out / "moments.csv", ["t", "mean_n", "var_n", "ipr"], [np.arange(t + 1), mean, var, iprs])
    kio.write_csv(out / "probs.csv", ["n", "prob"], [np.arange(params.N), np.abs(psi) ** 2])
    kio.write_csv(out / "avg_probs.csv", ["n", "prob"], [np.arange(params.N), avg])
    meta = {"N": params.N, "k": params.k, "T": params.T, "potential": _potential_name(params.potential)}
    kio.write_wavefunction(out / "psi.bin", psi, {**meta, "t": t})
    for s, snap in snaps:
        kio.write_wavefunction(out / f"psi_{s:08d}.bin", snap, {**meta, "t": s})
    return {"n0": n0, "final_var": var[-1], "saturation_ratio": obs.saturation_ratio(var)}


def cmd_localization_fit(P, seed, out):
    if P["probs"]:
        probs = _load_probs(P["probs"])
        n0 = len(probs) // 2 if P["n0"] is None else P["n0"]
    else:
        _, n0, _, (_, var, _), probs, _ = _reference_run(P)
        kio.write_csv(out / "avg_probs.csv", ["n", "prob"], [np.arange(len(probs)), probs])
    fit = obs.localization_length_fit(probs, n0)
    kio.write_json(out / "fit.json", fit.to_dict())
    return fit.to_dict()


def cmd_anderson(P, seed, out):
    t1, t2 = P["t1"], P["t2"]
    if not 1 <= t1 < t2:
        raise ConfigError("need 1 <= t1 < t2")
    if P["N"] < 2 or P["N"] & (P["N"] - 1):
        raise ConfigError("N must be a power of two")

    def one(k):
        v = ref.quasiperiodic_spreading(k, P["T"], P["N"], (t1, t2), P["starts"], P["spacing"])
        return v[t1], v[t2]

    ks = P["k"]
    with ThreadPoolExecutor(max_workers=min(thread_count(), len(ks))) as ex:
        res = list(ex.map(one, ks))
    v1 = [r[0] for r in res]
    v2 = [r[1] for r in res]
    ratio = [b / a for a, b in res]
    kio.write_csv(out / "anderson.csv", ["k", "var_t1", "var_t2", "ratio"], [ks, v1, v2, ratio])
    return {"ratio": dict(zip(map(str, ks), ratio))}


def cmd_evolve_2d(P, seed, out):
    N = P["N"]
    n1 = N // 2 if P["n1"] is None else P["n1"]
    n2 = (N // 2 + 1) % N if P["n2"] is None else P["n2"]
    try:
        params = ref.QuantumParams(P["k"], P["T"], N, ref.DSum(2))
    except ValueError as e:
        raise ConfigError(str(e)) from None
    a = np.zeros((N, N), dtype=complex)
    a[n1 % N, n2 % N] = 1.0
    try:
        res = ref.evolve_2d(ref.Wavefunction2D(a, P["g"]), params, P["t"])
    except MemoryError as e:
        raise ConfigError(str(e)) from None
    _check_norm(float(np.linalg.norm(res.amps)), P["t"])
    meta = {"N": N, "k": P["k"], "T": P["T"], "g": P["g"], "potential": "dsum(d=2)", "t": P["t"]}
    kio.write_wavefunction(out / "psi2d.bin", res.amps, meta)
    prob = np.abs(res.amps) ** 2
    kio.write_csv(out / "marginals.csv", ["n", "prob1", "prob2"], [np.arange(N), prob.sum(1), prob.sum(0)])
    return {"norm": float(np.linalg.norm(res.amps))}


def _circuit_start(P, cfg):
    n0 = cfg.N // 2 if P["n0"] is None else P["n0"]
    if not 0 <= n0 < cfg.N:
        raise ConfigError(f"n0={n0} outside [0, {cfg.N})")
    return n0


def _run_circuit(P, cfg, n0, callback=None):
    try:
        state = alg.run_circuit(cfg, n0, P["t"], P["representation"], callback)
    except (MemoryError, OverflowError) as e:
        raise NumericalError(str(e)) from None
    except ValueError as e:
        raise ConfigError(str(e)) from None
    if not state.ancillas_clear():
        raise NumericalError("ancilla registers not cleared after the run")
    _check_norm(state.norm(), max(1, P["t"]))
    return state


def _mode_name(cfg) -> dict:
    m = cfg.kick_mode
    if isinstance(m, alg.PolynomialRegister):
        return {"kick_mode": "polynomial", "degree": m.degree, "target": _potential_name(m.target)}
    return {"kick_mode": "cosine"}


def cmd_circuit_evolve(P, seed, out):
    cfg = _algorithm_config(P)
    n0 = _circuit_start(P, cfg)
    state = _run_circuit(P, cfg, n0)
    kio.write_csv(out / "probs.csv", ["n", "prob"], [np.arange(cfg.N), state.primary_probabilities()])
    kio.write_json(out / "ledger.json", state.ledger.report())
    return {"n_q": cfg.n_q, "p": cfg.p, "n0": n0, **_mode_name(cfg), "kicks": state.ledger.kicks}


def cmd_circuit_compare(P, seed, out):
    cfg = _algorithm_config(P)
    n0 = _circuit_start(P, cfg)
    refit = ref.iter_evolve(ref.basis_state(cfg.N, n0), cfg.reference_params(), P["t"])
    fid = []

    def cb(s, state):
        _, psi = next(refit)
        fid.append(abs(np.vdot(psi, state.primary_amplitudes())) ** 2)

    _run_circuit(P, cfg, n0, cb)
    kio.write_csv(out / "fidelity.csv", ["t", "fidelity"], [np.arange(1, P["t"] + 1), fid])
    return {"n_q": cfg.n_q, "p": cfg.p, "n0": n0, **_mode_name(cfg),
            "final_fidelity": fid[-1] if fid else 1.0}


def cubic_fit(ns, totals) -> dict:
    """Least squares ``c3 n**3 + c2 n**2 + c1 n`` with the largest relative residual."""
    ns = np.asarray(ns, dtype=float)
    y = np.asarray(totals, dtype=float)
    X = np.stack([ns**3, ns**2, ns], axis=1)
    c, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = np.abs(X @ c - y) / y
    return {"c3": c[0], "c2": c[1], "c1": c[2], "max_rel_residual": float(resid.max())}


def cmd_gate_count(P, seed, out):
    ns = P["nq"]
    if not ns or min(ns) < 1:
        raise ConfigError("n_q values must be positive")
    reports, totals = {}, {}
    for n in ns:
        p = resolve_precision(P["p"], n)
        if p < n:
            raise ConfigError(f"p={p} below n_q={n}")
        reports[str(n)] = alg.kick_ledger(n, p, P["k"], P["T"])
        totals[n] = reports[str(n)]["total"]["elementary_estimate"]
    kio.write_json(out / "ledger.json", reports)
    rep = {"totals": {str(n): v for n, v in totals.items()},
           "doubling_ratio": {str(n): totals[2 * n] / totals[n] for n in ns if 2 * n in totals}}
    if len(ns) >= 3:
        rep["cubic_fit"] = cubic_fit(ns, [totals[n] for n in ns])
    kio.write_json(out / "scaling.json", rep)
    return rep


def cmd_measure(P, seed, out):
    cfg = _algorithm_config(P)
    n0 = _circuit_start(P, cfg)
    state = _run_circuit(P, cfg, n0)
    if P["shots"] < 1:
        raise ConfigError("shots must be at least 1")
    hist = alg.measure_momentum(state, P["shots"], seed)
    kio.write_csv(out / "histogram.csv", ["n", "count"], [np.arange(cfg.N), hist.counts])
    return {"shots": hist.shots, "top": hist.top(5)}


def cmd_harmonics(P, seed, out):
    if P["probs"]:
        probs = _load_probs(P["probs"])
    else:
        _, _, psi, _, _, _ = _reference_run(P)
        probs = np.abs(psi) ** 2
    try:
        comps = obs.harmonics(probs, P["m"])
    except ValueError as e:
        raise ConfigError(str(e)) from None
    q = [c[0] for c in comps]
    F = np.array([c[1] for c in comps])
    kio.write_csv(out / "harmonics.csv", ["q", "re", "im", "abs"], [q, F.real, F.imag, np.abs(F)])
    return {"m": len(q)}


HANDLERS = {name: globals()["cmd_" + name.replace("-", "_")] for name in COMMANDS}


def run(command: str, params: dict, seed: int = 0, out: Path | str | None = None) -> dict:
    """Execute ``command`` with fully resolved ``params`` and write its manifest."""
    out = Path(out) if out is not None else Path("out") / command
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"cannot create output directory {out}: {e}") from None
    summary = HANDLERS[command](params, seed, out)
    manifest = {"command": command, "params": params, "seed": seed, "version": __version__,
                "summary": summary}
    kio.write_json(out / "manifest.json", manifest)
    return manifest


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    if not args.command:
        ap.print_help()
        return EXIT_CONFIG
    flags = {k: v for k, v in vars(args).items() if k != "command"}
    try:
        params, seed, out = resolve_params(args.command, flags)
        manifest = run(args.command, params, seed, out)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    print(json.dumps(kio.to_jsonable(manifest["summary"]), sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
