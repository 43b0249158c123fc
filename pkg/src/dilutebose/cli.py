"""Command-line front end: every computation as a CSV or JSON dataset.

Each dataset starts with ``#`` header lines (package version, command,
parameters, units, timestamp).  Numbers are written with 17 significant
digits so that files round-trip exactly.  The timestamp sits on its own
line so that reruns can be compared after dropping it.

Exit status: 0 on success, 2 for invalid arguments, 3 for numerical failures.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__, critical, freegas, functional, integrals, scattering, thermo
from .errors import ConvergenceError, DomainError, QuadratureError, RegimeError

UNITS = "hbar=2m=kB=1"
OUTPUT_DIR_ENV = "DILUTEBOSE_OUTPUT_DIR"
EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

COMMANDS = ("constants", "integrals", "scattering", "critical-temp", "maxwell",
            "free-energy", "phase-diagram", "momentum-dist", "figure1", "figure2", "lhy")

# Config-file keys and the argparse destinations they map to.
CONFIG_KEYS = {
    "nu": "nu", "T": "T", "rho": "rho", "a": "a", "potential": "potential",
    "out": "out", "format": "format", "grid": "grid", "tol": "tol",
    "sigma": "sigma", "theta": "theta", "s": "s", "d_max": "d_max",
    "t0": "t0", "delta": "delta", "p_max": "p_max", "table": "table",
}


class UsageError(Exception):
    pass


@dataclass
class Dataset:
    columns: List[str]
    rows: List[Sequence[Any]]
    meta: Dict[str, Any] = field(default_factory=dict)


def parse_nu(text: str) -> float:
    """Accept a number or the symbolic forms ``8pi`` / ``8*pi``."""
    t = str(text).strip().lower().replace("*", "").replace(" ", "")
    if t.endswith("pi"):
        coeff = t[:-2]
        value = (float(coeff) if coeff else 1.0) * math.pi
    else:
        value = float(t)
    return value


def _format_value(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v: Any) -> Any:
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    return v


def _range(text: Optional[str], n: int, name: str) -> np.ndarray:
    if text is None:
        raise UsageError(f"--{name} is required")
    if ":" in text:
        lo, hi = (float(x) for x in text.split(":", 1))
        return np.linspace(lo, hi, n)
    return np.array([float(text)])


def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise UsageError(f"--{n} is required for {args.command}")


def _positive(args, *names):
    for n in names:
        v = getattr(args, n)
        if v is not None and not v > 0:
            raise UsageError(f"--{n} must be positive, got {v}")


# --- commands -----------------------------------------------------------------

def cmd_constants(args) -> Dataset:
    c = freegas.free_gas_constants()
    rows = [
        ("n_fc", c.n_fc),
        ("f_min", c.f_min),
        ("zeta_3_2", freegas.zeta(1.5)),
        ("zeta_5_2", freegas.zeta(2.5)),
        ("lhy_coefficient", 512 * math.sqrt(math.pi) / 15),
        ("depletion_coefficient", 8 / (3 * math.sqrt(math.pi))),
    ]
    return Dataset(["name", "value"], rows)


def cmd_integrals(args) -> Dataset:
    n = args.grid or 11
    d_max = 10.0 if args.d_max is None else args.d_max
    sigma = 8 * math.pi if args.sigma is None else args.sigma
    theta = 0.0 if args.theta is None else args.theta
    s = 1.0 if args.s is None else args.s
    rel = args.tol or integrals.REL_TOL
    rows = []
    for d in np.linspace(0.0, d_max, n):
        p = integrals.ReducedParams(float(d), sigma, theta, s)
        rows.append([d] + [integrals.reduced_integral(k, p, abs_tol=integrals.ABS_TOL, rel_tol=rel)
                           for k in integrals.Kind])
    return Dataset(["d", "I1", "I2", "I3", "I4"], rows,
                   {"sigma": sigma, "theta": theta, "s": s})


def cmd_scattering(args) -> Dataset:
    _need(args, "potential")
    pot = scattering.parse_potential(args.potential)
    res = scattering.solve_scattering(pot)
    meta = {"a": res.a, "v_hat_zero": res.v_hat_zero, "nu": res.nu,
            "vw_hat_zero": scattering.vw_kernel(res, 0.0),
            "refinement_error": res.refinement_error,
            "thermo_admissible": res.thermo_admissible}
    table = args.table or "summary"
    if table == "summary":
        return Dataset(["name", "value"], [(k, v) for k, v in meta.items()])
    n = args.grid or 201
    if table == "w":
        idx = np.unique(np.linspace(0, res.r.size - 1, n).round().astype(int))
        return Dataset(["r", "w"], [(res.r[i], res.w[i]) for i in idx], meta)
    if table == "vw":
        p_max = 10.0 / pot.R if args.p_max is None else args.p_max
        ps = np.linspace(0.0, p_max, n)
        return Dataset(["p", "vw_hat"], list(zip(ps, scattering.vw_kernel(res, ps))), meta)
    raise UsageError(f"--table must be summary, w or vw, got {table!r}")


def cmd_critical_temp(args) -> Dataset:
    nu = args.nu
    rows = [("k_c", critical.critical_k(nu)),
            ("sigma_c", critical.critical_sigma(nu)),
            ("density_shift_coefficient", critical.density_shift_coefficient(nu)),
            ("h1", critical.h1(nu))]
    if args.rho is not None and args.a is not None:
        rows.append(("T_c", thermo.critical_temperature(args.rho, args.a, nu)))
    return Dataset(["name", "value"], rows)


def cmd_maxwell(args) -> Dataset:
    nu = args.nu
    mx = critical.maxwell_construction(nu)
    rows = [("c", mx.c), ("k_minus", mx.k_minus), ("k_plus", mx.k_plus),
            ("g_min", mx.g_min), ("sigma_plus", mx.sigma_plus), ("h2", critical.h2(nu))]
    if args.T is not None and args.a is not None:
        shift = critical.h2_and_mu_c(nu, args.T, args.a)
        rows += [("mu_c", shift.mu_c), ("expansion_valid", shift.valid)]
    return Dataset(["name", "value"], rows)


def cmd_free_energy(args) -> Dataset:
    _need(args, "T", "rho", "a")
    point = thermo.GasPoint(args.T, args.rho, args.a, args.nu)
    r = thermo.free_energy_canonical(point)
    rows = [("F", r.F), ("rho0", r.rho0), ("d_star", r.d_star), ("branch", r.branch.value),
            ("representation", r.representation), ("k", point.k),
            ("rho_fc", point.rho_fc), ("T_c", thermo.critical_temperature(point.rho, point.a, point.nu)),
            ("diluteness", point.diluteness), ("dilute_warning", point.dilute_warning)]
    try:
        F_mod, d_mod = thermo.free_energy_moderate(point)
        rows += [("F_moderate", F_mod), ("d_star_moderate", d_mod)]
    except RegimeError:
        pass
    return Dataset(["name", "value"], rows)


def cmd_phase_diagram(args) -> Dataset:
    _need(args, "T", "rho", "a")
    n = args.grid or 5
    Ts = _range(args.T, n, "T")
    rhos = _range(args.rho, n, "rho")
    rows = thermo.phase_diagram(Ts, rhos, args.a, args.nu)
    return Dataset(["T", "rho", "k", "F", "rho0", "d_star", "branch", "coexistence_band", "error"],
                   [(r.T, r.rho, r.k, r.F, r.rho0, r.d_star, r.branch,
                     r.in_coexistence_band, r.error) for r in rows])


def cmd_momentum_dist(args) -> Dataset:
    _need(args, "T", "rho")
    if args.potential:
        res = scattering.solve_scattering(scattering.parse_potential(args.potential))
        kernel = scattering.scattering_kernel(res)
    else:
        _need(args, "a")
        kernel = functional.ideal_kernel(args.a)
    t0 = 0.0 if args.t0 is None else args.t0
    delta = 0.0 if args.delta is None else args.delta
    ctx = functional.SimplifiedContext(args.rho, t0, delta, args.T, kernel)
    gamma, alpha = functional.minimizer_profiles(ctx)
    beta = functional.beta_profile(ctx)
    n = args.grid or 200
    p_max = 5 * math.sqrt(args.T) if args.p_max is None else args.p_max
    ps = np.linspace(p_max / n, p_max, n)
    return Dataset(["p", "gamma", "alpha", "beta", "G"],
                   list(zip(ps, gamma(ps), alpha(ps), beta(ps), functional.dispersion_G(ps, ctx))))


def cmd_figure1(args) -> Dataset:
    nu = args.nu
    sig = np.round(np.arange(0, 601) * 0.01, 10)
    rows = []
    for k in (-1.35, -1.28, -1.20):
        vals = critical._f(k, sig, nu)
        rows += [(k, s, v) for s, v in zip(sig, vals)]
    return Dataset(["k", "sigma", "f"], rows)


def cmd_figure2(args) -> Dataset:
    nu = args.nu
    mx = critical.maxwell_construction(nu)
    ks = np.round(np.arange(-600, 601) * 0.01, 10)
    g = critical.grand_canonical_curve(ks, nu, mx.c)
    hull = np.where((ks > mx.k_minus) & (ks < mx.k_plus), mx.g_min, g)
    return Dataset(["k", "g", "hull"], list(zip(ks, g, hull)),
                   {"c": mx.c, "k_minus": mx.k_minus, "k_plus": mx.k_plus})


def cmd_lhy(args) -> Dataset:
    nu = args.nu
    rows = [("g_extrapolated", thermo.lhy_coefficient(nu)),
            ("g_limit", thermo.lhy_limit(nu)),
            ("lhy_constant", 512 * math.sqrt(math.pi) / 15)]
    return Dataset(["name", "value"], rows)


HANDLERS: Dict[str, Tuple[Callable, str]] = {
    "constants": (cmd_constants, "freegas.free_gas_constants"),
    "integrals": (cmd_integrals, "integrals.reduced_integral"),
    "scattering": (cmd_scattering, "scattering.solve_scattering"),
    "critical-temp": (cmd_critical_temp, "critical.critical_k"),
    "maxwell": (cmd_maxwell, "critical.maxwell_construction"),
    "free-energy": (cmd_free_energy, "thermo.free_energy_canonical"),
    "phase-diagram": (cmd_phase_diagram, "thermo.phase_diagram"),
    "momentum-dist": (cmd_momentum_dist, "functional.minimizer_profiles"),
    "figure1": (cmd_figure1, "critical.reduced_free_energy"),
    "figure2": (cmd_figure2, "critical.grand_canonical_curve"),
    "lhy": (cmd_lhy, "thermo.lhy_coefficient"),
}


# --- argument handling --------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dilutebose",
                     description="Dilute Bose gas free energies and critical constants "
                                 f"(units {UNITS}).")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="key=value file; command-line flags take precedence")
    parser.add_argument("--nu", help="nu = V^(0)/a, a number or '8pi' (default 8pi)")
    parser.add_argument("--T", help="temperature (phase-diagram: lo:hi)")
    parser.add_argument("--rho", help="density (phase-diagram: lo:hi; momentum-dist: rho0)")
    parser.add_argument("--a", help="scattering length")
    parser.add_argument("--potential", help="square:V0,R or gaussian:V0,R")
    parser.add_argument("--out", help="output path (default: stdout, or $%s/<command>.<format>)"
                        % OUTPUT_DIR_ENV)
    parser.add_argument("--format", help="csv or json (default csv)")
    parser.add_argument("--grid", help="number of grid points")
    parser.add_argument("--tol", help="relative quadrature tolerance (integrals)")
    parser.add_argument("--sigma", help="integrals: sigma (default 8pi)")
    parser.add_argument("--theta", help="integrals: theta (default 0)")
    parser.add_argument("--s", help="integrals: s (default 1)")
    parser.add_argument("--d-max", dest="d_max", help="integrals: largest d (default 10)")
    parser.add_argument("--t0", help="momentum-dist: pairing shift t0 (default 0)")
    parser.add_argument("--delta", help="momentum-dist: Lagrange multiplier (default 0)")
    parser.add_argument("--p-max", dest="p_max", help="largest momentum in sampled tables")
    parser.add_argument("--table", help="scattering: summary, w or vw")
    return parser


def read_config(path: str) -> Dict[str, str]:
    values: Dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[CONFIG_KEYS[key]] = value
    return values


_FLOAT_KEYS = ("a", "tol", "sigma", "theta", "s", "d_max", "t0", "delta", "p_max")


def normalise(args: argparse.Namespace) -> argparse.Namespace:
    """Merge config values under flags and convert strings to numbers."""
    if args.config:
        for key, value in read_config(args.config).items():
            if getattr(args, key) is None:
                setattr(args, key, value)
    try:
        args.nu = parse_nu(args.nu) if args.nu is not None else critical.EIGHT_PI
        for key in _FLOAT_KEYS:
            v = getattr(args, key)
            if v is not None:
                setattr(args, key, float(v))
        if args.grid is not None:
            args.grid = int(args.grid)
        if args.command != "phase-diagram":
            for key in ("T", "rho"):
                v = getattr(args, key)
                if v is not None:
                    setattr(args, key, float(v))
    except ValueError as exc:
        raise UsageError(f"invalid number: {exc}") from exc
    if not args.nu >= critical.EIGHT_PI * (1 - 1e-12):
        raise UsageError(f"--nu must be >= 8pi, got {args.nu}")
    if args.format is None:
        args.format = "csv"
    if args.format not in ("csv", "json"):
        raise UsageError(f"--format must be csv or json, got {args.format!r}")
    if args.grid is not None and args.grid < 1:
        raise UsageError("--grid must be at least 1")
    _positive(args, "a", "tol")
    if args.command != "phase-diagram":
        _positive(args, "rho")
        if args.T is not None and args.T < 0:
            raise UsageError("--T must be non-negative")
    return args


def _parameters(args) -> Dict[str, Any]:
    keys = ["nu", "T", "rho", "a", "potential", "grid", "tol", "sigma", "theta", "s",
            "d_max", "t0", "delta", "p_max", "table"]
    return {k: getattr(args, k) for k in keys if getattr(args, k) is not None}


def render(ds: Dataset, args, timestamp: str) -> str:
    params = _parameters(args)
    if args.format == "json":
        doc = {
            "program": "dilutebose",
            "version": __version__,
            "command": args.command,
            "units": UNITS,
            "parameters": {k: _json_value(v) for k, v in params.items()},
            "meta": {k: _json_value(v) for k, v in ds.meta.items()},
            "columns": ds.columns,
            "rows": [[_json_value(v) for v in row] for row in ds.rows],
        }
        body = json.dumps(doc, indent=None, separators=(",", ":"))
        # Timestamp on its own line so reruns can be diffed without it.
        return "{\"generated\":%s,\n%s\n" % (json.dumps(timestamp), body[1:])
    lines = [f"# dilutebose {__version__}",
             f"# command: {args.command}",
             "# parameters: " + " ".join(f"{k}={_format_value(v)}" for k, v in params.items()),
             f"# units: {UNITS}"]
    for k, v in ds.meta.items():
        lines.append(f"# {k}: {_format_value(v)}")
    lines.append(f"# generated: {timestamp}")
    lines.append("# columns: " + ",".join(ds.columns))
    lines += [",".join(_format_value(v) for v in row) for row in ds.rows]
    return "\n".join(lines) + "\n"


def _destination(args) -> Optional[str]:
    if args.out:
        return args.out
    directory = os.environ.get(OUTPUT_DIR_ENV)
    if directory:
        return os.path.join(directory, f"{args.command}.{args.format}")
    return None


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    handler, operation = HANDLERS[args.command]
    try:
        args = normalise(args)
        ds = handler(args)
    except (UsageError, DomainError, RegimeError) as exc:
        print(f"error: {exc}".replace("\n", " "), file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, QuadratureError, ArithmeticError) as exc:
        print(f"error: {operation}: {exc}".replace("\n", " "), file=sys.stderr)
        return EXIT_NUMERIC
    stamp = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
    text = render(ds, args, stamp)
    dest = _destination(args)
    if dest is None:
        sys.stdout.write(text)
    else:
        try:
            parent = os.path.dirname(dest)
            if parent:
                os.makedirs(parent, exist_ok=True)
            with open(dest, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {dest}: {exc.strerror}", file=sys.stderr)
            return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
