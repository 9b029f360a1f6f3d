"""Command-line front end.

Every subcommand takes ``key = value`` settings from an optional config file
and from ``--key value`` flags (flags win), validates all of them before any
computation, and writes CSV or JSON. Exit codes: 0 ok, 2 bad parameters,
3 convergence/resolution failure, 4 capacity exceeded.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from math import pi

import numpy as np

from . import __version__
from .coulombgas import CapacitorSpec, XYLatticeSpec, capacitor_energy_coulomb, capacitor_energy_exact, xy_relax_pair_energy
from .devices import (
    ChargeQubitParams,
    GateSpec,
    OscillatorParams,
    SquidParams,
    charge_qubit_voltage,
    conditional_oscillator_evolution,
    oscillator_lc,
    parity_bias,
    parity_measurement,
    ring_toy_spectrum,
    squid_energy,
)
from .errors import CapacityError, ConvergenceError, ParameterError, VortexionError
from .kernel import DEFAULT_TOL, anisotropy_ratio, cached_kernel_table, interaction_kernel
from .spectra import LadderSpec, ladder_ground_band, phase_slip_band, phase_slip_gap

SCHEMA_VERSION = 1
CACHE_ENV = "VORTEXION_CACHE_DIR"
GLOBAL_KEYS = ("format", "output", "cache_dir")


class ConfigError(ParameterError):
    """A config line or flag could not be accepted."""


# -- parameter declarations ---------------------------------------------------

@dataclass(frozen=True)
class Param:
    key: str
    kind: str  # float | int | str | ints | choice
    default: object
    unit: str
    help: str
    check: object = None  # callable(value) -> error text or None
    choices: tuple = ()

    def convert(self, raw):
        raw = raw.strip()
        try:
            if self.kind == "float":
                val = float(raw)
                if not math.isfinite(val):
                    raise ValueError
            elif self.kind == "int":
                val = int(raw)
            elif self.kind == "ints":
                val = tuple(int(p) for p in raw.split(",") if p.strip())
                if not val:
                    raise ValueError
            elif self.kind == "choice":
                if raw not in self.choices:
                    raise ValueError
                val = raw
            else:
                val = raw
        except ValueError:
            want = f"one of {', '.join(self.choices)}" if self.kind == "choice" else self.kind
            raise ConfigError(f"{self.key}: malformed value {raw!r} (expected {want})") from None
        return val

    def validate(self, val):
        if self.check is not None:
            msg = self.check(val)
            if msg:
                raise ConfigError(f"{self.key} = {val!r}: {msg}")


def positive(v):
    return None if v > 0 else "must be > 0"


def nonneg(v):
    return None if v >= 0 else "must be >= 0"


def at_least(k):
    return lambda v: None if v >= k else f"must be >= {k}"


def all_at_least(k):
    return lambda v: None if all(x >= k for x in v) else f"every entry must be >= {k}"


def _tol():
    return Param("tol", "float", DEFAULT_TOL, "dimensionless", "absolute quadrature tolerance", positive)


def _ladder_params():
    return [
        Param("beta", "float", 1e6, "dimensionless", "anisotropy E_J^y/E_J^x", positive),
        Param("ejy", "float", 1.0, "energy", "vertical Josephson energy E_J^y", positive),
        Param("hop_fraction", "float", 0.03, "dimensionless",
              "vortex hop (2/pi^2)E_C^y in units of the horizontal exciton energy", nonneg),
        Param("v_max", "int", 1, "count", "per-site vorticity cutoff", at_least(1)),
        Param("self_energy", "str", "auto", "dimensionless",
              "net-vorticity penalty kappa (auto = 2|I'(1,0)|)"),
        Param("samples", "int", 32, "count", "theta samples on [0, 2pi); must be even", at_least(4)),
        _tol(),
    ]


COMMANDS = {
    "kernel-table": [
        Param("beta", "float", 1.0, "dimensionless", "anisotropy E_J^y/E_J^x", positive),
        Param("max_range", "int", 4, "lattice units", "largest |dx|, |dy| tabulated", at_least(1)),
        _tol(),
    ],
    "ratio-curve": [
        Param("beta_min", "float", 1.0, "dimensionless", "first anisotropy", positive),
        Param("beta_max", "float", 8.0, "dimensionless", "last anisotropy", positive),
        Param("steps", "int", 8, "count", "number of beta points", at_least(1)),
        Param("spacing", "choice", "linear", "-", "beta grid spacing", choices=("linear", "log")),
        _tol(),
    ],
    "capacitor": [
        Param("L", "int", 20, "lattice units", "plate length", at_least(1)),
        Param("ej", "float", 1.0, "energy", "isotropic Josephson energy", positive),
        _tol(),
    ],
    "landscape": [Param("n_sites", "int", 3, "count", "ladder rungs N", at_least(1))] + _ladder_params(),
    "splitting-scan": [Param("n_list", "ints", (2, 3, 4), "count", "ladder lengths", all_at_least(1))]
    + _ladder_params(),
    "barrier-scan": [Param("n_list", "ints", (2, 3, 4), "count", "ladder lengths", all_at_least(1))]
    + _ladder_params(),
    "phase-slip": [
        Param("ej", "float", 1.0, "energy", "chain Josephson energy", positive),
        Param("ec", "float", 1.0, "energy", "charging energy (validity only)", positive),
        Param("n", "int", 10, "count", "junctions in the chain", at_least(1)),
        Param("t_slip", "float", 0.05, "energy", "phase-slip amplitude (< ej)", nonneg),
        Param("gamma_min", "float", 0.0, "rad", "first phase drop", None),
        Param("gamma_max", "float", 4 * pi, "rad", "last phase drop", None),
        Param("samples", "int", 65, "count", "gamma samples", at_least(2)),
    ],
    "sawtooth": [
        Param("ec", "float", 1.0, "energy", "charging energy E_C", positive),
        Param("ej", "float", 0.1, "energy", "Josephson energy E_J", positive),
        Param("n_cut", "int", 12, "count", "charge-basis cutoff", at_least(5)),
        Param("samples", "int", 101, "count", "n_g samples on [0, 1]", at_least(2)),
    ],
    "parity": [
        Param("ec", "float", 100.0, "energy", "charging energy E_C", positive),
        Param("ej", "float", 1.0, "energy", "Josephson energy E_J", positive),
        Param("n_cut", "int", 12, "count", "charge-basis cutoff", at_least(5)),
        Param("n_min", "int", -8, "count", "first charge parity probe", None),
        Param("n_max", "int", 8, "count", "last charge parity probe", None),
    ],
    "squid": [
        Param("ec", "float", 1.0, "energy", "junction charging energy E_C", positive),
        Param("dtheta", "float", 0.0, "rad", "dual phase difference", None),
        Param("q_min", "float", 0.0, "2e", "first island charge", None),
        Param("q_max", "float", 1.0, "2e", "last island charge", None),
        Param("steps", "int", 21, "count", "charge samples", at_least(2)),
    ],
    "oscillator": [
        Param("m_tracks", "int", 100, "count", "junctions per track M", at_least(1)),
        Param("n_rungs", "int", 10, "count", "capacitor length N", at_least(1)),
        Param("ej", "float", 1.0, "energy", "Josephson energy E_J", positive),
        Param("ecr", "float", 1.0, "energy", "rung charging energy E_C^r", positive),
    ],
    "ring-toy": [
        Param("ec", "float", 1.0, "energy", "charging energy E_C", positive),
        Param("ej", "float", 1e4, "energy", "Josephson energy E_J", positive),
        Param("n_ring", "int", 10, "count", "junctions in the ring", at_least(1)),
        Param("levels", "int", 4, "count", "levels to report", at_least(2)),
    ],
    "gate-sim": [
        Param("coupling", "float", 1.0, "energy", "switch coupling E_C", positive),
        Param("m_tracks", "int", 10, "count", "junctions per track M", at_least(1)),
        Param("n_rungs", "int", 10, "count", "capacitor length N", at_least(1)),
        Param("ej", "float", 1.0, "energy", "Josephson energy E_J", positive),
        Param("ecr", "float", 1.0, "energy", "rung charging energy E_C^r", positive),
        Param("fock_cut", "int", 64, "count", "oscillator Fock cutoff", at_least(4)),
        Param("periods", "float", 1.0, "periods", "final time in oscillator periods", nonneg),
        Param("steps", "int", 17, "count", "time samples", at_least(1)),
    ],
    "xy-oracle": [
        Param("width", "int", 48, "sites", "lattice width", at_least(4)),
        Param("height", "int", 48, "sites", "lattice height", at_least(4)),
        Param("ejx", "float", 1.0, "energy", "horizontal Josephson energy", positive),
        Param("ejy", "float", 1.0, "energy", "vertical Josephson energy", positive),
        Param("separations", "ints", (4, 8), "lattice units", "pair separations", all_at_least(1)),
        Param("axis", "choice", "x", "-", "pair orientation", choices=("x", "y")),
        Param("relax_tol", "float", 1e-10, "rad", "largest phase update at convergence", positive),
        Param("max_iters", "int", 200000, "sweeps", "sweep limit", at_least(1)),
        _tol(),
    ],
    "regime-check": [
        Param("ejy", "float", 1e9, "energy", "vertical Josephson energy", positive),
        Param("ejx", "float", 1.0, "energy", "horizontal Josephson energy", positive),
        Param("ecy", "float", 14734.30283501605, "energy", "vertical charging energy", positive),
        Param("ecx", "float", 0.01, "energy", "horizontal charging energy", positive),
        Param("search", "choice", "no", "-", "also run the log-grid search", choices=("yes", "no")),
        _tol(),
    ],
}

GLOBAL_PARAMS = [
    Param("format", "choice", "csv", "-", "output format", choices=("csv", "json")),
    Param("output", "str", "", "-", "output file (empty = stdout)"),
    Param("cache_dir", "str", "", "-", f"kernel cache directory (empty = ${CACHE_ENV} or none)"),
]


def accepted_keys(command):
    return [p.key for p in COMMANDS[command]] + [p.key for p in GLOBAL_PARAMS]


@dataclass
class RunConfig:
    command: str
    parameters: dict
    output_format: str = "csv"
    output_path: str = None
    cache_dir: str = None
    sources: dict = field(default_factory=dict)


def _declared(command):
    return {p.key: p for p in COMMANDS[command] + GLOBAL_PARAMS}


def parse_pairs(text):
    """Split ``key = value`` lines; returns ``[(lineno, key, value)]``."""
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        pairs.append((lineno, key.strip(), value.strip()))
    return pairs


def resolve(command, file_pairs=(), flags=None, env=None):
    """Merge defaults < file < flags and validate every value."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}")
    decl = _declared(command)
    values = {k: p.default for k, p in decl.items()}
    seen = {}
    for lineno, key, raw in file_pairs:
        if key == "command":
            continue
        if key not in decl:
            raise ConfigError(f"line {lineno}: unknown key {key!r} for command {command}")
        try:
            values[key] = decl[key].convert(raw)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
        seen[key] = lineno
    for key, raw in (flags or {}).items():
        if key not in decl:
            raise ConfigError(f"unknown key {key!r} for command {command}")
        values[key] = decl[key].convert(str(raw))
        seen[key] = "flag"
    for key, p in decl.items():
        try:
            p.validate(values[key])
        except ConfigError as exc:
            where = seen.get(key)
            prefix = f"line {where}: " if isinstance(where, int) else ""
            raise ConfigError(prefix + str(exc)) from None
    _cross_checks(command, values)
    env = os.environ if env is None else env
    cache = values["cache_dir"] or env.get(CACHE_ENV, "") or None
    params = {k: values[k] for k in (p.key for p in COMMANDS[command])}
    return RunConfig(command, params, values["format"], values["output"] or None, cache, seen)


def _cross_checks(command, v):
    if command == "ratio-curve" and v["beta_max"] < v["beta_min"]:
        raise ConfigError("beta_max must be >= beta_min")
    if command == "phase-slip" and not v["t_slip"] < v["ej"]:
        raise ConfigError("t_slip must be < ej")
    if command in ("landscape", "splitting-scan", "barrier-scan"):
        if v["samples"] % 2:
            raise ConfigError("samples must be even so that theta + pi is sampled")
        if v["self_energy"] != "auto":
            try:
                if float(v["self_energy"]) < 0:
                    raise ValueError
            except ValueError:
                raise ConfigError("self_energy must be 'auto' or a number >= 0") from None
        if command != "landscape" and len(v["n_list"]) < 3 and command == "barrier-scan":
            raise ConfigError("barrier-scan needs at least three lengths")
    if command == "parity" and v["n_max"] < v["n_min"]:
        raise ConfigError("n_max must be >= n_min")
    if command == "squid" and v["q_max"] < v["q_min"]:
        raise ConfigError("q_max must be >= q_min")


def parse_config(text, flags=None, env=None):
    pairs = parse_pairs(text)
    commands = [(n, v) for n, k, v in pairs if k == "command"]
    if len(commands) != 1:
        raise ConfigError("config must contain exactly one 'command = <name>' line")
    lineno, command = commands[0]
    if command not in COMMANDS:
        raise ConfigError(f"line {lineno}: unknown command {command!r}")
    return resolve(command, pairs, flags, env)


# -- runners ------------------------------------------------------------------

def _ladder_spec(p, n_sites, table_cache):
    beta, ejy = p["beta"], p["ejy"]
    i10 = -interaction_kernel(1, 0, beta, p["tol"])
    t = p["hop_fraction"] * 2 * pi * ejy * i10
    kappa = None if p["self_energy"] == "auto" else float(p["self_energy"])
    spec = LadderSpec(n_sites, ejy, beta, t * pi**2 / 2, v_max=p["v_max"], self_energy=kappa)
    table = cached_kernel_table(beta, max(n_sites - 1, 1), p["tol"], table_cache)
    return spec, table


def _thetas(samples):
    return [2 * pi * k / samples for k in range(samples)]


def run_kernel_table(p, cache):
    table = cached_kernel_table(p["beta"], p["max_range"], p["tol"], cache)
    rows = [(a, b, table.values[(a, b)]) for a, b in sorted(table.values)]
    return ["dx", "dy", "value"], rows, [f"entries={len(rows)}"]


def run_ratio_curve(p, cache):
    lo, hi, n = p["beta_min"], p["beta_max"], p["steps"]
    if n == 1:
        betas = [lo]
    elif p["spacing"] == "log":
        betas = [float(b) for b in np.geomspace(lo, hi, n)]
    else:
        betas = [float(b) for b in np.linspace(lo, hi, n)]
    rows = [(b, anisotropy_ratio(b, p["tol"])) for b in betas]
    return ["beta", "ratio"], rows, []


def run_capacitor(p, cache):
    spec = CapacitorSpec(p["L"], 1, p["ej"])
    table = cached_kernel_table(1.0, p["L"] + 1, p["tol"], cache)
    exact = capacitor_energy_exact(spec, table)
    coul = capacitor_energy_coulomb(spec)
    return ["L", "energy_exact", "energy_coulomb", "ratio"], [(p["L"], exact, coul, coul / exact)], []


def _band_diagnostics(band):
    return [
        f"well_asymmetry={band.well_asymmetry!r}",
        f"barrier={band.barrier!r}",
        f"periodicity_defect={band.periodicity_defect!r}",
        f"minimum_at_0={band.is_local_minimum(0.0)}",
        f"minimum_at_pi={band.is_local_minimum(pi)}",
    ]


def run_landscape(p, cache):
    spec, table = _ladder_spec(p, p["n_sites"], cache)
    band = ladder_ground_band(spec, _thetas(p["samples"]), table)
    return ["theta", "energy"], list(band.samples), _band_diagnostics(band)


def _ladder_scan(p, cache):
    out = []
    for n in p["n_list"]:
        spec, table = _ladder_spec(p, n, cache)
        out.append((n, ladder_ground_band(spec, _thetas(p["samples"]), table)))
    return out


def run_splitting_scan(p, cache):
    bands = _ladder_scan(p, cache)
    rows = [(n, b.well_asymmetry, b.periodicity_defect) for n, b in bands]
    diags = []
    ns = np.array([n for n, _ in bands], dtype=float)
    asym = np.array([b.well_asymmetry for _, b in bands])
    if len(ns) >= 2 and np.all(asym > 0):
        slope, icpt = np.polyfit(ns, np.log(asym), 1)
        pred = slope * ns + icpt
        ss = np.sum((np.log(asym) - np.log(asym).mean()) ** 2)
        r2 = 1 - np.sum((np.log(asym) - pred) ** 2) / ss if ss > 0 else 1.0
        diags += [f"log_slope={float(slope)!r}", f"r_squared={float(r2)!r}"]
    return ["n_sites", "well_asymmetry", "periodicity_defect"], rows, diags


def run_barrier_scan(p, cache):
    bands = _ladder_scan(p, cache)
    rows = [(n, b.barrier, b.barrier * n) for n, b in bands]
    prod = [r[2] for r in rows]
    diags = [f"product_spread={max(prod) / min(prod)!r}"] if min(prod) > 0 else []
    return ["n_sites", "barrier", "barrier_times_n"], rows, diags


def run_phase_slip(p, cache):
    n = p["samples"]
    gammas = [float(g) for g in np.linspace(p["gamma_min"], p["gamma_max"], n)]
    band = phase_slip_band(p["ej"], p["ec"], p["n"], p["t_slip"], gammas)
    gap = phase_slip_gap(p["ej"], p["n"], p["t_slip"])
    return ["gamma", "energy"], list(band.samples), [f"gap_at_pi={gap!r}"]


def run_sawtooth(p, cache):
    q = ChargeQubitParams(p["ec"], p["ej"], p["n_cut"])
    ngs = [float(x) for x in np.linspace(0.0, 1.0, p["samples"])]
    return ["ng", "voltage"], [(ng, charge_qubit_voltage(q, ng)) for ng in ngs], []


def run_parity(p, cache):
    q = ChargeQubitParams(p["ec"], p["ej"], p["n_cut"])
    rows = []
    for n in range(p["n_min"], p["n_max"] + 1):
        bias = parity_bias(n)
        rows.append((n, bias, charge_qubit_voltage(q, bias), parity_measurement(q, n)))
    return ["n", "ng", "voltage", "parity"], rows, []


def run_squid(p, cache):
    qs = [float(x) for x in np.linspace(p["q_min"], p["q_max"], p["steps"])]
    rows = [(q, squid_energy(SquidParams(p["ec"], q), p["dtheta"])) for q in qs]
    return ["q", "energy"], rows, []


def run_oscillator(p, cache):
    lc = oscillator_lc(OscillatorParams(p["m_tracks"], p["n_rungs"], p["ej"], p["ecr"]))
    return (["capacitance", "inductance", "impedance", "frequency"],
            [(lc.capacitance, lc.inductance, lc.impedance, lc.frequency)], [])


def run_ring_toy(p, cache):
    levels = ring_toy_spectrum(p["ec"], p["ej"], p["n_ring"], p["levels"])
    omega = math.sqrt(8 * p["ec"] * p["ej"] / p["n_ring"])
    spacing = levels[1] - levels[0]
    return (["level", "energy"], list(enumerate(levels)),
            [f"harmonic_spacing={omega!r}", f"spacing={spacing!r}"])


def run_gate_sim(p, cache):
    osc = OscillatorParams(p["m_tracks"], p["n_rungs"], p["ej"], p["ecr"])
    lc = oscillator_lc(osc)
    period = 2 * pi / lc.frequency
    if p["steps"] == 1:
        times = [p["periods"] * period]
    else:
        times = [float(t) for t in np.linspace(0.0, p["periods"] * period, p["steps"])]
    spec = GateSpec(p["coupling"], 0.0, osc, p["fock_cut"])
    rows = [(s.t, s.relative_phase, s.entanglement_entropy, s.oscillator_return_fidelity)
            for s in conditional_oscillator_evolution(spec, times)]
    return ["t", "phase", "entropy", "fidelity"], rows, [f"period={period!r}"]


def run_xy_oracle(p, cache):
    spec = XYLatticeSpec(p["width"], p["height"], p["ejx"], p["ejy"], p["relax_tol"], p["max_iters"])
    rows = []
    beta = p["ejy"] / p["ejx"]
    for r in p["separations"]:
        sep = (r, 0) if p["axis"] == "x" else (0, r)
        energy = xy_relax_pair_energy(spec, sep)
        # dipole energy in x-bond units; pi E_J^y (-2) I'
        pred = -2 * pi * p["ejy"] * interaction_kernel(sep[0], sep[1], beta, p["tol"])
        rows.append((sep[0], sep[1], energy, pred))
    return ["dx", "dy", "xy_energy", "kernel_energy"], rows, []


def run_regime_check(p, cache):
    from .kernel import build_kernel_table
    from .spectra import regime_check, regime_search

    table = build_kernel_table(p["ejy"] / p["ejx"], 1, p["tol"])
    reports = [("input", regime_check(p["ejy"], p["ejx"], p["ecy"], p["ecx"], table))]
    if p["search"] == "yes":
        found = regime_search(tol=p["tol"])
        if found is not None:
            reports.append(("search", found))
    header = ["source", "beta", "ejy", "ejx", "ecy", "ecx", "superfluid_margin", "projection_margin",
              "josephson_anisotropic", "charging_anisotropic", "josephson_dominates_x",
              "josephson_dominates_y", "satisfied"]
    rows = []
    for name, r in reports:
        q = r.parameters
        rows.append((name, r.beta, q["ejy"], q["ejx"], q["ecy"], q["ecx"], r.superfluid_margin,
                     r.projection_margin, r.josephson_anisotropic, r.charging_anisotropic,
                     r.josephson_dominates_x, r.josephson_dominates_y, r.satisfied))
    return header, rows, []


RUNNERS = {
    "kernel-table": run_kernel_table,
    "ratio-curve": run_ratio_curve,
    "capacitor": run_capacitor,
    "landscape": run_landscape,
    "splitting-scan": run_splitting_scan,
    "barrier-scan": run_barrier_scan,
    "phase-slip": run_phase_slip,
    "sawtooth": run_sawtooth,
    "parity": run_parity,
    "squid": run_squid,
    "oscillator": run_oscillator,
    "ring-toy": run_ring_toy,
    "gate-sim": run_gate_sim,
    "xy-oracle": run_xy_oracle,
    "regime-check": run_regime_check,
}


# -- output -----------------------------------------------------------------

def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, tuple):
        return [_json_value(x) for x in v]
    return v


def envelope(config, header, rows, diagnostics):
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": config.command,
        "parameters_echo": {
            **{k: _json_value(v) for k, v in config.parameters.items()},
            "format": config.output_format,
            "output": config.output_path or "",
            "cache_dir": config.cache_dir or "",
        },
        "columns": header,
        "rows": [[_json_value(x) for x in r] for r in rows],
        "diagnostics": list(diagnostics),
    }


def render(config, header, rows, diagnostics):
    if config.output_format == "json":
        return json.dumps(envelope(config, header, rows, diagnostics), indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(x) for x in r])
    return buf.getvalue()


def run(config, stdout=None, stderr=None):
    """Execute a resolved config; returns the process exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        header, rows, diags = RUNNERS[config.command](config.parameters, config.cache_dir)
        text = render(config, header, rows, diags)
    except ParameterError as exc:
        print(f"{type(exc).__name__}: {exc}", file=stderr)
        return 2
    except ConvergenceError as exc:
        print(f"{type(exc).__name__}: {exc}", file=stderr)
        return 3
    except CapacityError as exc:
        print(f"{type(exc).__name__}: {exc}", file=stderr)
        return 4
    except VortexionError as exc:
        print(f"{type(exc).__name__}: {exc}", file=stderr)
        return 1
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if config.output_format == "csv":
        for d in diags:
            print(f"# {d}", file=stderr)
    return 0


# -- argument parsing -----------------------------------------------------------

def _describe(p):
    default = ",".join(map(str, p.default)) if isinstance(p.default, tuple) else p.default
    extra = f" [{'|'.join(p.choices)}]" if p.choices else ""
    return f"{p.help}{extra}; unit: {p.unit}; default: {default}"


def build_parser():
    parser = argparse.ArgumentParser(prog="vortexion", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"vortexion {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    for name, params in COMMANDS.items():
        sp = sub.add_parser(name, help=f"run {name}", description=f"vortexion {name}")
        sp.add_argument("--config", metavar="FILE", help="key = value settings file")
        for p in params + GLOBAL_PARAMS:
            sp.add_argument(f"--{p.key}", dest=p.key, metavar=p.kind.upper(), default=None,
                            help=_describe(p))
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config") and v is not None}
    try:
        pairs = []
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
            pairs = parse_pairs(text)
            named = [v for _, k, v in pairs if k == "command"]
            if named and named[-1] != args.command:
                raise ConfigError(f"config names command {named[-1]!r} but {args.command!r} was invoked")
        config = resolve(args.command, pairs, flags)
    except OSError as exc:
        print(f"ConfigError: cannot read config: {exc}", file=sys.stderr)
        return 2
    except ParameterError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
