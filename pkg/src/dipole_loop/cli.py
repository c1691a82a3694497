"""Batch front end: config parsing, command dispatch, CSV emission.

Usage:
    dipole-loop <command> --config <path> [--out <dir>]
                [--lambda-grid start:stop:count,log]

Commands: jc-evolve, jc-rabi, nr-reduce, loop-selfenergy, loop-vertex,
loop-polarization, report-counterterms, check-dims, oracle-verify.

Configuration is line-oriented "section.key = value" with '#' comments.
All config problems are collected and reported together with line
numbers; unknown keys are rejected. Exit codes: 0 success, 2 config
error, 3 numeric/domain error, 4 failed internal cross-check.

Every CSV starts with the full resolved configuration echoed as
'#'-prefixed comments, then a header row naming columns and units, then
data rows with floats printed to 17 significant digits. Identical
config and command produce byte-identical CSVs.

With units.mode = SI the apparatus keys (atoms.*, dipole.*, cavity.*)
are read as SI values (kg, C m, rad/s, m^3, m, s) and converted to
natural units once at this boundary; regulator and sweep keys are
always natural-unit numbers, and all outputs are in natural units.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import jc as jcmod
from . import nr as nrmod
from . import renorm
from .core import (
    AtomPair,
    classify_renormalizability,
    contractions,
    dipole_from_moment,
    engineering_dimension,
)
from .errors import (
    ConfigError,
    DipoleLoopError,
    OracleError,
)
from .loops import (
    MasterIntegralKind,
    RegScheme,
    feynman_identity_check,
    master_integral,
    radial_quadrature,
    symmetric_integration_check,
)
from .units import HBAR_SI, UnitSystem

__all__ = ["COMMANDS", "RunConfig", "parse_config", "parse_grid", "dispatch", "main"]

COMMANDS = (
    "jc-evolve",
    "jc-rabi",
    "nr-reduce",
    "loop-selfenergy",
    "loop-vertex",
    "loop-polarization",
    "report-counterterms",
    "check-dims",
    "oracle-verify",
)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def parse_grid(spec: str) -> np.ndarray:
    """Parse "start:stop:count,log|lin" into a 1-d grid."""
    spec = spec.strip()
    parts = spec.rsplit(",", 1)
    if len(parts) != 2 or parts[1] not in ("log", "lin"):
        raise ValueError(f"grid {spec!r} must end in ',log' or ',lin'")
    pieces = parts[0].split(":")
    if len(pieces) != 3:
        raise ValueError(f"grid {spec!r} must be start:stop:count")
    try:
        start, stop = float(pieces[0]), float(pieces[1])
        count = int(pieces[2])
    except ValueError:
        raise ValueError(f"grid {spec!r} has unparsable numbers") from None
    if count < 2:
        raise ValueError(f"grid {spec!r} needs count >= 2")
    if parts[1] == "log":
        if start <= 0 or stop <= 0:
            raise ValueError(f"log grid {spec!r} needs positive endpoints")
        return np.geomspace(start, stop, count)
    return np.linspace(start, stop, count)


def _parse_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("true", "false"):
        return low == "true"
    raise ValueError(f"expected true or false, got {s!r}")


def _parse_int_list(s: str) -> tuple:
    try:
        return tuple(int(tok) for tok in s.split(","))
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {s!r}") from None


def _opt(parser):
    """Value parser that maps an empty string to None."""

    def parse(s: str):
        return None if s.strip() == "" else parser(s)

    return parse


def _choice(*allowed: str):
    def parse(s: str):
        s = s.strip()
        if s not in allowed:
            raise ValueError(f"expected one of {allowed}, got {s!r}")
        return s

    return parse


def _positive(v, key):
    if not (isinstance(v, (int, float)) and np.isfinite(v) and v > 0):
        raise ValueError(f"{key} must be a positive finite number")


def _finite(v, key):
    if not np.isfinite(v):
        raise ValueError(f"{key} must be finite")


# key -> (default, value parser). Defaults are the resolved values used
# when a key is absent; empty-string defaults mean "derived at dispatch".
_REGISTRY = {
    "atoms.m1": (1.0, float),
    "atoms.m2": (0.95, float),
    "dipole.dx": (0.01, float),
    "dipole.dy": (0.0, float),
    "dipole.dz": (0.0, float),
    "cavity.omega": (0.05, float),
    "cavity.volume": (1.0, float),
    "cavity.z": (None, _opt(float)),
    "jc.level_init": ("upper", _choice("upper", "lower")),
    "jc.n_init": (0, int),
    "jc.n_max": (8, int),
    "jc.rwa": (True, _parse_bool),
    "jc.leak_threshold": (1e-8, float),
    "jc.t_max": (None, _opt(float)),
    "jc.n_times": (401, int),
    "jc.n_list": ((0, 1, 5), _parse_int_list),
    "regulator.lambda": (100.0, float),
    "regulator.quad_tol": (1e-10, float),
    "regulator.lambda_grid": (None, _opt(str.strip)),
    "selfenergy.level": (1, int),
    "selfenergy.path": ("expansion", _choice("expansion", "exact")),
    "selfenergy.b_order": (0, int),
    "selfenergy.s_max": (None, _opt(float)),
    "selfenergy.s_count": (9, int),
    "vertex.q0": (0.25, float),
    "vertex.q1": (0.25, float),
    "vertex.q2": (0.0, float),
    "vertex.q3": (0.0, float),
    "vertex.symmetric_masses": (True, _parse_bool),
    "polarization.q0": (0.0, float),
    "polarization.q1": (0.3, float),
    "polarization.q2": (0.0, float),
    "polarization.q3": (0.0, float),
    "nr.lambda_grid": ("1e-4:1e-2:9,log", str.strip),
    "nr.lambda3_ratio": (0.7, float),
    "units.mode": ("natural", _choice("natural", "SI")),
    "units.base_energy_ev": (1.0, float),
}


class RunConfig:
    """Resolved, validated configuration (attribute access by key)."""

    def __init__(self, values: dict):
        self._values = dict(values)

    def __getitem__(self, key: str):
        return self._values[key]

    def items(self):
        return self._values.items()

    def echo_lines(self) -> list:
        """Deterministic '#'-prefixed provenance block."""
        lines = []
        for key in sorted(self._values):
            lines.append(f"# {key} = {_format_value(self._values[key])}")
        return lines


def _format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "%.17e" % v
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    return str(v)


def _validate(values: dict, where: dict) -> list:
    """Cross-field constraint checks; returns a list of problems."""

    def loc(key):
        return f"line {where[key]}: " if key in where else ""

    problems = []

    def check(key, fn):
        try:
            fn(values[key], key)
        except ValueError as exc:
            problems.append(f"{loc(key)}{exc}")

    for key in ("atoms.m1", "atoms.m2", "cavity.omega", "cavity.volume",
                "regulator.lambda", "units.base_energy_ev", "nr.lambda3_ratio"):
        check(key, _positive)
    for key in ("dipole.dx", "dipole.dy", "dipole.dz", "vertex.q0", "vertex.q1",
                "vertex.q2", "vertex.q3", "polarization.q0", "polarization.q1",
                "polarization.q2", "polarization.q3"):
        check(key, _finite)

    if not problems and values["atoms.m1"] < values["atoms.m2"]:
        problems.append(f"{loc('atoms.m2')}atoms.m1 must be >= atoms.m2 (level 1 is the upper level)")

    if not (0 < values["regulator.quad_tol"] < 1e-2):
        problems.append(f"{loc('regulator.quad_tol')}regulator.quad_tol must be in (0, 1e-2)")
    if not (0 < values["jc.leak_threshold"] < 1):
        problems.append(f"{loc('jc.leak_threshold')}jc.leak_threshold must be in (0, 1)")
    if values["jc.n_init"] < 0:
        problems.append(f"{loc('jc.n_init')}jc.n_init must be >= 0")
    if values["jc.n_max"] < values["jc.n_init"] + 2:
        problems.append(
            f"{loc('jc.n_max')}jc.n_max must be >= jc.n_init + 2 to monitor truncation leakage"
        )
    if values["jc.n_times"] < 2:
        problems.append(f"{loc('jc.n_times')}jc.n_times must be >= 2")
    if values["jc.t_max"] is not None and not values["jc.t_max"] > 0:
        problems.append(f"{loc('jc.t_max')}jc.t_max must be positive when given")
    if values["cavity.z"] is not None and not np.isfinite(values["cavity.z"]):
        problems.append(f"{loc('cavity.z')}cavity.z must be finite when given")
    for n in values["jc.n_list"]:
        if n < 0 or n + 2 > values["jc.n_max"]:
            problems.append(
                f"{loc('jc.n_list')}jc.n_list entry {n} needs 0 <= n <= jc.n_max - 2"
            )
    if values["selfenergy.level"] not in (1, 2):
        problems.append(f"{loc('selfenergy.level')}selfenergy.level must be 1 or 2")
    if values["selfenergy.b_order"] not in (0, 1):
        problems.append(f"{loc('selfenergy.b_order')}selfenergy.b_order must be 0 or 1")
    if values["selfenergy.s_count"] < 2:
        problems.append(f"{loc('selfenergy.s_count')}selfenergy.s_count must be >= 2")
    if values["selfenergy.s_max"] is not None and not np.isfinite(values["selfenergy.s_max"]):
        problems.append(f"{loc('selfenergy.s_max')}selfenergy.s_max must be finite when given")

    for key in ("regulator.lambda_grid", "nr.lambda_grid"):
        if values[key] is None:
            continue
        try:
            grid = parse_grid(values[key])
            if key == "regulator.lambda_grid" and np.any(grid <= 0):
                raise ValueError("cutoff grid values must be positive")
            if key == "nr.lambda_grid" and np.any(grid <= 0):
                raise ValueError("small-parameter grid values must be positive")
        except ValueError as exc:
            problems.append(f"{loc(key)}{key}: {exc}")
    return problems


def parse_config(text: str) -> RunConfig:
    """Parse and validate key = value configuration text.

    Collects every problem (unknown key, unparsable value, constraint
    violation) with its line number before raising ConfigError.
    """
    values = {key: default for key, (default, _) in _REGISTRY.items()}
    where: dict = {}
    problems = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected key = value, got {raw.strip()!r}")
            continue
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _REGISTRY:
            problems.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in where:
            problems.append(f"line {lineno}: duplicate key {key!r} (first set on line {where[key]})")
            continue
        where[key] = lineno
        _, parser = _REGISTRY[key]
        try:
            values[key] = parser(val)
        except (ValueError, TypeError) as exc:
            problems.append(f"line {lineno}: {key}: {exc}")
    # constraint checks run on the merged values even when some lines
    # failed to parse (those keys keep defaults, so no cascades)
    problems.extend(_validate(values, where))
    if problems:
        raise ConfigError(problems)
    return RunConfig(values)


# ---------------------------------------------------------------------------
# physics assembly (single unit-conversion boundary)
# ---------------------------------------------------------------------------


def _physics(cfg: RunConfig) -> dict:
    """Build natural-unit model objects from the resolved config."""
    units = UnitSystem(mode=cfg["units.mode"], base_energy_ev=cfg["units.base_energy_ev"])
    si = cfg["units.mode"] == "SI"

    def conv(value, quantity):
        return units.to_natural(value, quantity) if si and value is not None else value

    m1 = conv(cfg["atoms.m1"], "mass")
    m2 = conv(cfg["atoms.m2"], "mass")
    atoms = AtomPair(m1=m1, m2=m2)
    d = np.array([
        conv(cfg["dipole.dx"], "dipole_moment"),
        conv(cfg["dipole.dy"], "dipole_moment"),
        conv(cfg["dipole.dz"], "dipole_moment"),
    ])
    gamma = dipole_from_moment(d, atoms)
    omega = conv(cfg["cavity.omega"], "angular_frequency")
    volume = conv(cfg["cavity.volume"], "volume")
    z = conv(cfg["cavity.z"], "length")
    if z is None:
        z = np.pi / (2.0 * omega)  # antinode of sin(K z) with K = Omega
    cavity = jcmod.CavityMode(Omega=omega, V=volume, z=z)
    reg = RegScheme(Lambda=cfg["regulator.lambda"], quad_tol=cfg["regulator.quad_tol"])
    return {
        "atoms": atoms,
        "gamma": gamma,
        "cavity": cavity,
        "reg": reg,
        "t_max": conv(cfg["jc.t_max"], "time"),
        "units": units,
    }


def _lambda_values(cfg: RunConfig) -> np.ndarray:
    spec = cfg["regulator.lambda_grid"]
    if spec is None:
        return np.array([cfg["regulator.lambda"]])
    return parse_grid(spec)


def _thread_count(n_items: int) -> int:
    raw = os.environ.get("DIPOLE_LOOP_THREADS", "0").strip()
    try:
        n = int(raw)
        if n < 0:
            raise ValueError
    except ValueError:
        raise ConfigError([f"DIPOLE_LOOP_THREADS must be a non-negative integer, got {raw!r}"]) from None
    if n == 0:
        n = os.cpu_count() or 1
    return max(1, min(n, n_items))


def _pmap(fn, items):
    """Order-preserving map over a sweep, capped by DIPOLE_LOOP_THREADS."""
    items = list(items)
    n = _thread_count(len(items))
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return "%.17e" % float(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _write_csv(path: str, cfg: RunConfig, command: str, header: list, rows: list) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# command = {command}\n")
        for line in cfg.echo_lines():
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------


def _jc_params(cfg: RunConfig, phys: dict, Omega: float | None = None) -> jcmod.JCParams:
    atoms, cavity = phys["atoms"], phys["cavity"]
    g = jcmod.rabi_coupling(phys["gamma"], cavity, atoms)
    return jcmod.JCParams(
        g=g,
        omega12=atoms.omega12,
        Omega=cavity.Omega if Omega is None else Omega,
        n_max=cfg["jc.n_max"],
        rwa=cfg["jc.rwa"],
        leak_threshold=cfg["jc.leak_threshold"],
    )


def _cmd_jc_evolve(cfg: RunConfig, phys: dict):
    params = _jc_params(cfg, phys)
    if abs(params.g) < 1e-300:
        raise ConfigError(["jc-evolve: coupling g vanishes (dipole zero or node of the mode); set jc.t_max"])
    state = jcmod.JCState.basis(cfg["jc.level_init"], cfg["jc.n_init"], cfg["jc.n_max"])
    t_max = phys["t_max"]
    if t_max is None:
        t_max = 2.0 * np.pi / (abs(params.g) * np.sqrt(cfg["jc.n_init"] + 1.0))
    dt = t_max / (cfg["jc.n_times"] - 1)
    result = jcmod.evolve(state, params, t_max, dt)
    rows = [
        (t, pe, inv, nrm, top)
        for t, pe, inv, nrm, top in zip(
            result.times, result.p_excited, result.inversion, result.norms, result.top_band
        )
    ]
    header = ["time[natural]", "p_excited[1]", "inversion[1]", "norm[1]", "top_band[1]"]
    drift = float(np.max(np.abs(result.norms - 1.0)))
    summary = (
        f"jc-evolve: {len(rows)} samples to t = {t_max:.6g}, "
        f"norm drift {drift:.3e}, max top-band {float(result.top_band.max()):.3e}"
    )
    return header, rows, summary


def _cmd_jc_rabi(cfg: RunConfig, phys: dict):
    atoms = phys["atoms"]
    if atoms.omega12 <= 0:
        raise ConfigError(["jc-rabi: needs atoms.m1 > atoms.m2 (resonance tunes the mode to omega12)"])
    params = _jc_params(cfg, phys, Omega=atoms.omega12)  # exact resonance
    if abs(params.g) < 1e-300:
        raise ConfigError(["jc-rabi: coupling g vanishes (dipole zero or node of the mode)"])

    def one(n: int):
        measured = jcmod.measure_resonant_period(params, n)
        predicted = np.pi / (abs(params.g) * np.sqrt(n + 1.0))
        return (n, measured, predicted, abs(measured - predicted) / predicted)

    rows = _pmap(one, cfg["jc.n_list"])
    header = ["n[1]", "period_measured[natural]", "period_predicted[natural]", "rel_err[1]"]
    worst = max(r[3] for r in rows)
    summary = f"jc-rabi: {len(rows)} photon numbers, worst period error {worst:.3e}"
    return header, rows, summary


def _cmd_nr_reduce(cfg: RunConfig, phys: dict):
    atoms = phys["atoms"]
    targets = parse_grid(cfg["nr.lambda_grid"])
    ratio = cfg["nr.lambda3_ratio"]

    def one(target: float):
        k = atoms.m1 * np.sqrt(target)
        gdotF = ratio * target * atoms.m_bar * np.sqrt(atoms.m1 * atoms.m2)
        res = nrmod.decoupling_residual(k, gdotF, atoms)
        blk = nrmod.reduced_block_error(k, gdotF, atoms)
        return (
            target,
            res["lambda_max"],
            res["r_before"],
            res["r_after"],
            blk["error"],
            blk["h_norm"],
        )

    rows = _pmap(one, targets)
    header = [
        "lambda_target[1]",
        "lambda_max[1]",
        "residual_before[natural]",
        "residual_after[natural]",
        "reduced_block_error[natural]",
        "h_norm[natural]",
    ]
    lam = np.array([r[1] for r in rows])
    after = np.array([r[3] for r in rows])
    slope = float(np.polyfit(np.log(lam), np.log(after), 1)[0])
    summary = f"nr-reduce: {len(rows)} points, post-transform residual slope {slope:.4f} (target 2)"
    return header, rows, summary


def _cmd_loop_selfenergy(cfg: RunConfig, phys: dict):
    atoms, gamma = phys["atoms"], phys["gamma"]
    level = cfg["selfenergy.level"]
    path = cfg["selfenergy.path"]
    b_order = cfg["selfenergy.b_order"]
    m_sq = atoms.mass(level) ** 2
    lambdas = _lambda_values(cfg)
    s_max = cfg["selfenergy.s_max"]
    if s_max is None:
        s_max = 1e-3 * atoms.M2
    s_grid = np.linspace(0.0, s_max, cfg["selfenergy.s_count"])

    def one(point):
        lam, s = point
        reg = RegScheme(Lambda=lam, quad_tol=cfg["regulator.quad_tol"])
        res = renorm.self_energy(level, s - m_sq, None, atoms, gamma, reg, path=path, b_order=b_order)
        subtracted = res.total - res.on_shell_value
        return (lam, s, res.p_sq, res.sigma_I, res.sigma_II, res.total, subtracted)

    points = [(lam, s) for lam in lambdas for s in s_grid]
    rows = _pmap(one, points)
    header = [
        "lambda[natural]",
        "s[natural^2]",
        "p_sq[natural^2]",
        "sigma_I[natural^2]",
        "sigma_II[natural^2]",
        "sigma_total[natural^2]",
        "sigma_subtracted[natural^2]",
    ]
    summary = (
        f"loop-selfenergy: level {level}, {path} path, {len(lambdas)} cutoff(s) x "
        f"{len(s_grid)} offsets, Sigma(-m^2) = {rows[0][5]:.9e}"
    )
    return header, rows, summary


def _cmd_loop_vertex(cfg: RunConfig, phys: dict):
    atoms, gamma = phys["atoms"], phys["gamma"]
    q = np.array([cfg["vertex.q0"], cfg["vertex.q1"], cfg["vertex.q2"], cfg["vertex.q3"]])
    m1 = atoms.m1
    p_prime = np.array([m1, 0.0, 0.0, 0.0])
    p_in = p_prime - q

    def one(lam: float):
        reg = RegScheme(Lambda=lam, quad_tol=cfg["regulator.quad_tol"])
        v = renorm.vertex_one_loop(
            p_in, p_prime, q, atoms, gamma, reg,
            symmetric_masses=cfg["vertex.symmetric_masses"],
        )
        return (lam, v["q_sq"], v["J"], v["K0"], v["K1"], v["K2"], v["Gamma_I_coeff"], v["Z1_inv"])

    rows = _pmap(one, _lambda_values(cfg))
    header = [
        "lambda[natural]",
        "q_sq[natural^2]",
        "J[1]",
        "K0[natural^-2]",
        "K1[natural^-2]",
        "K2[natural^-2]",
        "Gamma_I_coeff[1]",
        "Z1_inv[1]",
    ]
    summary = f"loop-vertex: {len(rows)} cutoff(s), Z1_inv = {rows[-1][7]:.12e} at lambda = {rows[-1][0]:.6g}"
    return header, rows, summary


def _cmd_loop_polarization(cfg: RunConfig, phys: dict):
    atoms, gamma = phys["atoms"], phys["gamma"]
    q = np.array([
        cfg["polarization.q0"], cfg["polarization.q1"],
        cfg["polarization.q2"], cfg["polarization.q3"],
    ])

    def one(lam: float):
        reg = RegScheme(Lambda=lam, quad_tol=cfg["regulator.quad_tol"])
        pol = renorm.photon_polarization(q, atoms, gamma, reg)
        row = [lam, pol["q_sq"], pol["P_coeff"], pol["transversality"]]
        row.extend(pol["Pi"].reshape(-1))
        return tuple(row)

    rows = _pmap(one, _lambda_values(cfg))
    header = ["lambda[natural]", "q_sq[natural^2]", "P_coeff[1]", "transversality[1]"]
    header.extend(f"Pi_{mu}{nu}[natural^2]" for mu in range(4) for nu in range(4))
    summary = (
        f"loop-polarization: {len(rows)} cutoff(s), P = {rows[-1][2]:.12e}, "
        f"transversality {rows[-1][3]:.3e}"
    )
    return header, rows, summary


def _cmd_report_counterterms(cfg: RunConfig, phys: dict):
    rep = renorm.counterterm_report(
        phys["atoms"], phys["gamma"], phys["reg"], b_order=cfg["selfenergy.b_order"]
    )
    rows = []
    for level in (1, 2):
        dm = rep.delta_m_sq[level]
        rows.append((f"delta_m_sq.{level}.total", dm["total"], dm["operator_class"]))
        rows.append((f"delta_m_sq.{level}.scalar", dm["scalar"], dm["operator_class"]))
        rows.append((f"delta_m_sq.{level}.tensor", dm["tensor"], dm["operator_class"]))
        z = rep.Z_phi_inv[level]
        rows.append((f"Z_phi_inv.{level}.scalar", z["scalar"], z["operator_class"]))
        rows.append((f"Z_phi_inv.{level}.tensor_coeff", z["tensor_coeff"], z["operator_class"]))
    rows.append(("Z1_inv.scalar", rep.Z1_inv["scalar"], rep.Z1_inv["operator_class"]))
    rows.append(("Z1_inv.tensor_contracted", rep.Z1_inv["tensor_contracted"], rep.Z1_inv["operator_class"]))
    rows.append(("Z1_inv.total", rep.Z1_inv["total"], rep.Z1_inv["operator_class"]))
    for name, entry in sorted(rep.induced_couplings.items()):
        rows.append((f"induced.{name}", entry["coefficient"], entry["operator_class"]))
    rows.append(("prefactor.measured", rep.prefactor_measured, "report"))
    rows.append(("prefactor.ratio_to_printed", rep.prefactor_ratio_to_printed, "report"))
    header = ["quantity[name]", "value[natural]", "operator_class[name]"]
    summary = (
        f"report-counterterms: measured loop prefactor {rep.prefactor_measured:.12e}, "
        f"ratio to printed 1/(2 pi)^3 = {rep.prefactor_ratio_to_printed:.9f}"
    )
    return header, rows, summary


def _cmd_check_dims(cfg: RunConfig, phys: dict):
    rows = []
    for interaction in ("P_tilde", "P"):
        for n in (3, 2):
            dim = engineering_dimension(interaction, n)
            rows.append((
                interaction,
                n,
                f"{Fraction(dim)}",
                float(dim),
                classify_renormalizability(interaction, n),
            ))
    header = [
        "interaction[name]",
        "n_spatial[1]",
        "dimension[exact]",
        "dimension[1]",
        "classification[name]",
    ]
    summary = "check-dims: 4 interaction/dimension assignments tabulated"
    return header, rows, summary


def _cmd_oracle_verify(cfg: RunConfig, phys: dict):
    """Closed forms vs adaptive quadrature, plus the measure checks."""
    tol = cfg["regulator.quad_tol"]
    kinds = list(MasterIntegralKind)
    # g(u) such that the master integral is (1/16 pi^2) int u g(u) du,
    # the weight radial_quadrature applies
    integrands = {
        MasterIntegralKind.I_A: lambda u, s: u / (u + s) ** 2,
        MasterIntegralKind.I_B: lambda u, s: 1.0 / (u + s),
        MasterIntegralKind.I_C: lambda u, s: 1.0 / (u + s) ** 3,
        MasterIntegralKind.I_D: lambda u, s: u / (u + s) ** 3,
        MasterIntegralKind.I_E: lambda u, s: 1.0 / (u + s) ** 2,
    }

    def one(case):
        kind, ratio, lam = case
        s = (ratio * lam) ** 2
        closed = master_integral(kind, s, lam)
        quad = radial_quadrature(lambda u: integrands[kind](u, s), lam, tol)
        rel = abs(closed - quad) / max(abs(closed), abs(quad))
        return (kind.name, ratio, lam, closed, quad, rel)

    cases = [
        (kind, ratio, lam)
        for kind in kinds
        for ratio in (1e-3, 1e-2, 0.1, 0.3)
        for lam in (1.0, 10.0, 100.0)
    ]
    rows = _pmap(one, cases)
    header = [
        "kind[name]",
        "scale_over_lambda[1]",
        "lambda[natural]",
        "closed_form[natural]",
        "quadrature[natural]",
        "rel_err[1]",
    ]
    worst = max(r[5] for r in rows)
    failures = [r for r in rows if r[5] > 1e-10]

    fey = feynman_identity_check(1.3, 0.7)
    fey3 = feynman_identity_check(1.3, 0.7, 2.1)
    rows.append(("feynman_identity_2", 0.0, 0.0, fey, 0.0, fey))
    rows.append(("feynman_identity_3", 0.0, 0.0, fey3, 0.0, fey3))
    sym = symmetric_integration_check()
    rows.append(("symmetric_offdiag_z", 0.0, 0.0, sym["max_offdiag_z"], 0.0, 0.0))
    rows.append(("symmetric_diag_z", 0.0, 0.0, sym["max_diag_z"], 0.0, 0.0))

    problems = []
    if failures:
        problems.append(f"{len(failures)} closed-form cases off by more than 1e-10 (worst {worst:.3e})")
    if fey > 1e-11 or fey3 > 1e-11:
        problems.append(f"Feynman identity residuals {fey:.3e}, {fey3:.3e} exceed 1e-11")
    if sym["max_offdiag_z"] > 5.0 or sym["max_diag_z"] > 5.0:
        problems.append(
            f"angular second-moment z-scores {sym['max_offdiag_z']:.2f}/{sym['max_diag_z']:.2f} exceed 5"
        )
    summary = f"oracle-verify: {len(cases)} closed-form cases, worst rel err {worst:.3e}"
    return header, rows, summary, problems


# ---------------------------------------------------------------------------
# dispatch and entry point
# ---------------------------------------------------------------------------

_HANDLERS = {
    "jc-evolve": _cmd_jc_evolve,
    "jc-rabi": _cmd_jc_rabi,
    "nr-reduce": _cmd_nr_reduce,
    "loop-selfenergy": _cmd_loop_selfenergy,
    "loop-vertex": _cmd_loop_vertex,
    "loop-polarization": _cmd_loop_polarization,
    "report-counterterms": _cmd_report_counterterms,
    "check-dims": _cmd_check_dims,
    "oracle-verify": _cmd_oracle_verify,
}


def dispatch(command: str, cfg: RunConfig, out_dir: str = ".") -> str:
    """Run one command, write its CSV, print the one-line summary.

    Returns the CSV path. Raises the package error types; exit-code
    mapping happens in main().
    """
    if command not in _HANDLERS:
        raise ConfigError([f"unknown command {command!r}; expected one of {COMMANDS}"])
    phys = _physics(cfg)
    result = _HANDLERS[command](cfg, phys)
    if len(result) == 4:
        header, rows, summary, problems = result
    else:
        header, rows, summary = result
        problems = []
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, command.replace("-", "_") + ".csv")
    _write_csv(path, cfg, command, header, rows)
    print(summary)
    if problems:
        raise OracleError("; ".join(problems))
    return path


def main(argv: list | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="dipole-loop",
        description="Two-state dipole field theory workbench: JC dynamics, "
        "non-relativistic reduction, one-loop renormalization.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="key = value configuration file")
    parser.add_argument("--out", default=".", help="output directory for CSV artifacts")
    parser.add_argument(
        "--lambda-grid",
        default=None,
        help="override regulator.lambda_grid (start:stop:count,log|lin)",
    )
    args = parser.parse_args(argv)
    try:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError([f"cannot read config file: {exc}"]) from None
        cfg = parse_config(text)
        if args.lambda_grid is not None:
            try:
                grid = parse_grid(args.lambda_grid)
                if np.any(grid <= 0):
                    raise ValueError("cutoff grid values must be positive")
            except ValueError as exc:
                raise ConfigError([f"--lambda-grid: {exc}"]) from None
            cfg = RunConfig({**dict(cfg.items()), "regulator.lambda_grid": args.lambda_grid.strip()})
        dispatch(args.command, cfg, args.out)
        return 0
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 2
    except OracleError as exc:
        print(f"oracle check failed: {exc}", file=sys.stderr)
        return 4
    except (DipoleLoopError, ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
