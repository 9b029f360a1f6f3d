"""Acceptance criteria, one test per criterion, each logged as a PASS/FAIL line."""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from vortexion.coulombgas import XYLatticeSpec, capacitor_ratio, xy_relax_pair_energy
from vortexion.devices import (
    ChargeQubitParams,
    GateSpec,
    OscillatorParams,
    SquidParams,
    charge_qubit_voltage,
    charge_qubit_voltage_fd,
    conditional_oscillator_evolution,
    displaced_mean_gamma,
    equal_up_to_phase,
    oscillator_lc,
    parity_measurement,
    phase_rotation,
    ring_toy_spectrum,
    rz_gate,
    squid_energy,
)
from vortexion.kernel import (
    anisotropy_ratio,
    build_kernel_table,
    cache_roundtrip,
    interaction_kernel,
    kernel_oracle_trapezoid,
)
from vortexion.spectra import (
    ChainSpec,
    LadderSpec,
    chain_hamiltonian,
    dense_lowest,
    ecy_for_separation,
    effective_chain_spec,
    effective_vs_full_check,
    ladder_ground_band,
    ladder_hamiltonian,
    lowest_eigenvalue,
    phase_slip_band,
    phase_slip_energy,
    phase_slip_gap,
)

PI = math.pi
THETAS = [2 * PI * k / 32 for k in range(32)]


def check(record, label, parts, detail=""):
    ok = all(parts.values())
    failed = ", ".join(k for k, v in parts.items() if not v)
    record(label, ok, detail + (f" failed: {failed}" if failed else ""))
    assert ok, f"{label}: {failed} ({detail})"


def test_c01_capacitor_ratio(acceptance):
    start = time.perf_counter()
    table = build_kernel_table(1.0, 41)
    r10, r20, r40 = (capacitor_ratio(L, table) for L in (10, 20, 40))
    elapsed = time.perf_counter() - start
    check(acceptance, "1 capacitor ratio", {
        "ratio(20) in [1.1, 1.3]": 1.1 <= r20 <= 1.3,
        "ratio(40) < ratio(20) < ratio(10)": r40 < r20 < r10,
        "runtime < 10 s": elapsed < 10,
    }, f"r10={r10:.4f} r20={r20:.4f} r40={r40:.4f} t={elapsed:.1f}s")


def test_c02_anisotropy_ratio(acceptance):
    start = time.perf_counter()
    betas = (1.0, 1.5, 2.0, 4.0, 8.0, 16.0)
    ratios = [anisotropy_ratio(b) for b in betas]
    oracle = [kernel_oracle_trapezoid(1, 0, b) / kernel_oracle_trapezoid(0, 1, b) for b in betas]
    worst = max(abs(a - b) for a, b in zip(ratios, oracle))
    elapsed = time.perf_counter() - start
    check(acceptance, "2 anisotropy ratio", {
        "|R(1)-1| < 1e-8": abs(ratios[0] - 1) < 1e-8,
        "strictly increasing": all(b > a for a, b in zip(ratios, ratios[1:])),
        "oracle within 1e-6": worst < 1e-6,
        "runtime < 30 s": elapsed < 30,
    }, f"R={[round(r, 4) for r in ratios]} oracle_dev={worst:.1e} t={elapsed:.1f}s")


def test_c03_phase_slips(acceptance):
    ej, n = 1.0, 10
    degeneracy = abs(phase_slip_energy(0, PI, ej, n) - phase_slip_energy(1, PI, ej, n))
    gammas = np.linspace(0, 2 * PI, 33)
    lo = phase_slip_band(ej, 1.0, n, 0.05, gammas).energies
    hi = phase_slip_band(ej, 1.0, n, 0.05, gammas + 2 * PI).energies
    period = float(np.max(np.abs(lo - hi)))
    gap = phase_slip_gap(ej, n, 0.05)
    check(acceptance, "3 phase-slip structure", {
        "degeneracy exact": degeneracy <= 4 * np.finfo(float).eps,
        "2pi periodic to 1e-9": period < 1e-9,
        "gap = 2 t_slip within 5%": abs(gap - 0.1) < 0.05 * 0.1,
    }, f"degeneracy={degeneracy:.1e} periodicity={period:.1e} gap={gap:.5f}")


def ladder_runs(beta, hop_fraction=0.03):
    i10 = -interaction_kernel(1, 0, beta)
    t = hop_fraction * 2 * PI * i10
    table = build_kernel_table(beta, 3)
    bands = {}
    start = time.perf_counter()
    for n in (2, 3, 4):
        spec = LadderSpec(n, 1.0, beta, t * PI**2 / 2, v_max=1)
        bands[n] = ladder_ground_band(spec, THETAS, table)
    return bands, time.perf_counter() - start


def landscape_parts(bands, elapsed):
    ns = np.array([2, 3, 4], dtype=float)
    asym = np.array([bands[n].well_asymmetry for n in (2, 3, 4)])
    logs = np.log(asym)
    fit = np.polyval(np.polyfit(ns, logs, 1), ns)
    r2 = 1 - np.sum((logs - fit) ** 2) / np.sum((logs - logs.mean()) ** 2)
    prod = [bands[n].barrier * n for n in (2, 3, 4)]
    spread = max(prod) / min(prod) if min(prod) > 0 else math.inf
    parts = {
        "minima at 0": all(bands[n].is_local_minimum(0.0) for n in (2, 3, 4)),
        "minima at pi": all(bands[n].is_local_minimum(PI) for n in (2, 3, 4)),
        "asymmetry decreasing": bool(asym[0] > asym[1] > asym[2]),
        "log-linear R2 > 0.9": r2 > 0.9,
        "barrier*N within factor 2": spread < 2,
        "runtime < 10 min": elapsed < 600,
    }
    detail = f"asym={[f'{a:.2e}' for a in asym]} R2={r2:.4f} barrier*N={[f'{p:.2e}' for p in prod]} t={elapsed:.0f}s"
    return parts, detail


def test_c04_ladder_landscape(acceptance):
    bands, elapsed = ladder_runs(4.0)
    parts, detail = landscape_parts(bands, elapsed)
    check(acceptance, "4 ladder landscape (beta=4)", parts, detail)


def test_c04_supplement_deep_anisotropy(acceptance):
    bands, elapsed = ladder_runs(1e6)
    parts, detail = landscape_parts(bands, elapsed)
    check(acceptance, "4+ ladder landscape (supplement, beta=1e6)", parts, detail)


def test_c05_effective_model(acceptance):
    beta = 1e6
    table = build_kernel_table(beta, 3)
    grid = [2 * PI * k / 16 for k in range(16)]
    devs = {}
    for n in (2, 3):
        for factor in (5.0, 20.0):
            lad = LadderSpec(n, 1.0, beta, ecy_for_separation(factor, 1.0, table))
            rep = effective_vs_full_check(effective_chain_spec(lad, table), lad, grid, table)
            devs[(n, factor)] = rep.normalized_deviation
    h_lad = ladder_hamiltonian(LadderSpec(3, 1.0, beta, ecy_for_separation(5.0, 1.0, table)), 0.7, table)
    h_chain = chain_hamiltonian(ChainSpec(2, 0.3, 1.0, n_max=20), 0.7)
    brute = max(
        abs(lowest_eigenvalue(h_lad, dense_limit=0) - dense_lowest(h_lad)),
        abs(lowest_eigenvalue(h_chain) - dense_lowest(h_chain)),
    )
    check(acceptance, "5 effective-model oracle", {
        "N=2 deviation smaller at factor 20": devs[(2, 20.0)] < devs[(2, 5.0)],
        "N=3 deviation smaller at factor 20": devs[(3, 20.0)] < devs[(3, 5.0)],
        "dense vs main solver 1e-9": brute < 1e-9,
    }, " ".join(f"N{n}/x{int(f)}={d:.3f}" for (n, f), d in devs.items()) + f" brute={brute:.1e}")


def test_c06_duality_oracle(acceptance):
    start = time.perf_counter()
    iso = XYLatticeSpec(48, 48, 1.0, 1.0)
    e4, e8 = xy_relax_pair_energy(iso, (4, 0)), xy_relax_pair_energy(iso, (8, 0))
    predicted = -2 * PI * (interaction_kernel(8, 0, 1.0) - interaction_kernel(4, 0, 1.0))
    rel = abs((e8 - e4) - predicted) / abs(predicted)
    ani = XYLatticeSpec(48, 48, 1.0, 4.0)
    ex, ey = xy_relax_pair_energy(ani, (4, 0)), xy_relax_pair_energy(ani, (0, 4))
    elapsed = time.perf_counter() - start
    check(acceptance, "6 duality oracle", {
        "difference within 5%": rel < 0.05,
        "x-pair costlier at beta=4": (ex > ey) == (anisotropy_ratio(4.0) > 1),
        "runtime < 5 min": elapsed < 300,
    }, f"xy={e8 - e4:.4f} kernel={predicted:.4f} rel={rel:.2%} ex={ex:.2f} ey={ey:.2f} t={elapsed:.1f}s")


def test_c07_readout(acceptance):
    p = ChargeQubitParams(1.0, 0.3)
    grid = np.linspace(-1.0, 1.0, 101)
    periodic = max(abs(charge_qubit_voltage(p, g) - charge_qubit_voltage(p, g + 1)) for g in grid)
    hf = max(abs(charge_qubit_voltage(p, g) - charge_qubit_voltage_fd(p, g)) for g in grid)
    q = ChargeQubitParams(100.0, 1.0)
    parity_ok = all(parity_measurement(q, n) == ("even" if n % 2 == 0 else "odd") for n in range(-8, 9))
    check(acceptance, "7 charge-qubit readout", {
        "unit periodic 1e-8": periodic < 1e-8,
        "Hellmann-Feynman vs FD 1e-6": hf < 1e-6,
        "parity for n in [-8, 8]": parity_ok,
    }, f"periodicity={periodic:.1e} hf={hf:.1e}")


def test_c08_devices(acceptance):
    off = abs(squid_energy(SquidParams(1.0, 0.5), 0.3))
    lcs = [oscillator_lc(OscillatorParams(m, 10, 1.0, 1.0)) for m in (10, 100, 1000)]
    exact = all(lc.inductance / lc.capacitance == 2 * PI**2 * m * 1.0 / (10 * 11 * 1.0)
                or math.isclose(lc.inductance / lc.capacitance, 2 * PI**2 * m / 110, rel_tol=4e-16)
                for lc, m in zip(lcs, (10, 100, 1000)))
    sqrt_m = all(math.isclose(b.impedance / a.impedance, math.sqrt(10), rel_tol=1e-14) for a, b in zip(lcs, lcs[1:]))
    levels = ring_toy_spectrum(1.0, 1e4, 10)
    omega = math.sqrt(8 * 1e4 / 10)
    spacing = levels[1] - levels[0]
    check(acceptance, "8 SQUID/oscillator/ring", {
        "squid off at q=1/2": off <= 1e-12,
        "L/C formula": exact,
        "impedance ~ sqrt(M)": sqrt_m,
        "ring spacing 1%": abs(spacing - omega) < 0.01 * omega,
    }, f"squid={off:.1e} spacing={spacing:.3f} omega={omega:.3f}")


def test_c09_gates(acceptance):
    ec = 1.7
    r8 = rz_gate(ec, PI / (8 * ec))
    exact = np.array_equal(r8, phase_rotation(PI / 8))
    compose = equal_up_to_phase(r8 @ r8, phase_rotation(PI / 4))
    g = GateSpec(1.0, 0.0, OscillatorParams(10, 10), 64)
    lc = oscillator_lc(g.oscillator)
    period = 2 * PI / lc.frequency
    times = list(np.linspace(0.0, period, 33))
    out = conditional_oscillator_evolution(g, times)
    norm = max(abs(s.norm - 1) for s in out)
    traj = max(abs(s.mean_gamma_1 - displaced_mean_gamma(lc, s.t)) for s in out)
    fid = out[-1].oscillator_return_fidelity
    check(acceptance, "9 gates", {
        "R(pi/8) exact": exact,
        "R(pi/8)^2 = R(pi/4)": compose,
        "norm 1e-10": norm < 1e-10,
        "return fidelity > 1-1e-6": fid > 1 - 1e-6,
        "closed-form trajectory 1e-6": traj < 1e-6,
    }, f"norm={norm:.1e} fidelity={fid:.12f} trajectory={traj:.1e}")


SUBCOMMANDS = {
    "kernel-table": ["--beta", "2", "--max_range", "3"],
    "ratio-curve": ["--steps", "4"],
    "capacitor": ["--L", "10"],
    "landscape": ["--n_sites", "2", "--samples", "8"],
    "splitting-scan": ["--n_list", "2,3", "--samples", "8"],
    "barrier-scan": ["--n_list", "2,3,4", "--samples", "4", "--beta", "4"],
    "phase-slip": ["--samples", "9"],
    "sawtooth": ["--samples", "11"],
    "parity": [],
    "squid": [],
    "oscillator": [],
    "ring-toy": [],
    "gate-sim": ["--steps", "5"],
    "xy-oracle": ["--width", "24", "--height", "24", "--separations", "4"],
    "regime-check": ["--search", "yes"],
}


def test_c10_cli_determinism(acceptance, tmp_path):
    mismatched = []
    for name, args in SUBCOMMANDS.items():
        outputs = []
        for fmt in ("csv", "json"):
            for _ in range(2):
                res = subprocess.run([sys.executable, "-m", "vortexion.cli", name, *args, "--format", fmt],
                                     capture_output=True, env={"PATH": "/usr/bin:/bin"})
                outputs.append((res.returncode, res.stdout))
        if outputs[0] != outputs[1] or outputs[2] != outputs[3] or outputs[0][0] != 0:
            mismatched.append(name)
    table = build_kernel_table(2.0, 6)
    back = cache_roundtrip(table, tmp_path / "cache.txt")
    bit_exact = all(np.float64(back.values[k]).tobytes() == np.float64(v).tobytes() for k, v in table.values.items())
    check(acceptance, "10 CLI determinism", {
        "byte-identical reruns": not mismatched,
        "cache roundtrip bit-exact": bit_exact,
    }, f"subcommands={len(SUBCOMMANDS)}" + (f" mismatched={mismatched}" if mismatched else ""))
