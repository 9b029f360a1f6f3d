import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from vortexion.errors import CapacityError, CoverageError, ParameterError, ResolutionError
from vortexion.kernel import build_kernel_table, interaction_kernel
from vortexion.spectra import (
    BandCurve,
    ChainSpec,
    LadderSpec,
    barrier_scaling,
    chain_ground_band,
    chain_hamiltonian,
    dense_lowest,
    double_well_levels,
    double_well_spectrum,
    ecy_for_separation,
    effective_chain_spec,
    effective_vs_full_check,
    exciton_coupling,
    ladder_bulk_hamiltonian,
    ladder_ground_band,
    ladder_hamiltonian,
    ladder_table,
    lowest_eigenvalue,
    map_kcmq_params,
    phase_slip_band,
    phase_slip_energy,
    phase_slip_gap,
    regime_check,
    regime_search,
    wkb_splitting,
)

PI = math.pi
GRID16 = [2 * PI * k / 16 for k in range(16)]


def jacobi_lowest(a, sweeps=100):
    """Minimal cyclic Jacobi eigenvalue routine for small Hermitian matrices (oracle)."""
    a = np.array(a, dtype=complex)
    n = len(a)
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2))
        if off < 1e-14:
            break
        for p in range(n):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-300:
                    continue
                phase = a[p, q] / abs(a[p, q])
                theta = 0.5 * math.atan2(2 * abs(a[p, q]), (a[q, q] - a[p, p]).real)
                c, s = math.cos(theta), math.sin(theta)
                rot = np.eye(n, dtype=complex)
                rot[p, p], rot[q, q] = c, c
                rot[p, q], rot[q, p] = s * phase, -s * np.conj(phase)
                a = rot.conj().T @ a @ rot
    return float(np.min(np.diag(a).real))


# -- phase slips --------------------------------------------------------------

def test_phase_slip_parabolas():
    assert phase_slip_energy(0, 0.0, 3.0, 5) == 0.0
    assert phase_slip_energy(0, PI, 1.0, 7) == phase_slip_energy(1, PI, 1.0, 7)
    assert phase_slip_energy(1, 2 * PI, 1.0, 10) == 0.0
    with pytest.raises(ParameterError):
        phase_slip_energy(0, 0.0, 1.0, 0)


def test_phase_slip_band_without_tunnelling():
    gammas = np.linspace(0, 2 * PI, 41)
    band = phase_slip_band(1.0, 1.0, 10, 0.0, gammas)
    expect = [min(phase_slip_energy(m, g, 1.0, 10) for m in range(-3, 4)) for g in gammas]
    assert np.allclose(band.energies, expect, atol=1e-14)


def test_phase_slip_periodicity_and_gap():
    gammas = np.linspace(-PI, 3 * PI, 33)
    band = phase_slip_band(1.0, 1.0, 10, 0.05, list(gammas) + list(gammas + 2 * PI))
    e = band.energies
    lo = phase_slip_band(1.0, 1.0, 10, 0.05, gammas).energies
    hi = phase_slip_band(1.0, 1.0, 10, 0.05, gammas + 2 * PI).energies
    assert np.max(np.abs(lo - hi)) < 1e-9
    assert e.size == 66
    # two-level oracle on m = 0, 1 at gamma = pi
    two = np.linalg.eigvalsh(np.array([[PI**2 / 20, -0.05], [-0.05, PI**2 / 20]]))
    assert abs(phase_slip_gap(1.0, 10, 0.05) - (two[1] - two[0])) < 0.05 * 0.1


def test_phase_slip_precondition():
    with pytest.raises(ParameterError):
        phase_slip_band(1.0, 1.0, 10, 1.5, [0.0])


# -- coupling maps and regime --------------------------------------------------

def test_kcmq_mapping():
    m = map_kcmq_params(1.0, 100.0, 0.001)
    assert math.isclose(m.hop, 0.01) and math.isclose(m.charging, 0.004)
    m = map_kcmq_params(1.0, 1.0, 0.25)
    assert m.hop == 1.0 and m.charging == 1.0 and not m.condensate
    assert map_kcmq_params(1.0, 1.0, 0.001).condensate
    assert m.chain(3).n_sites == 3


def test_exciton_coupling():
    t = build_kernel_table(1.0, 1)
    base = exciton_coupling(1.0, 1.0, 1.0, t)
    assert math.isclose(base, 4 / (PI**4 * -t(1, 0)), rel_tol=1e-14)
    assert math.isclose(exciton_coupling(2.0, 1.0, 1.0, t), 4 * base, rel_tol=1e-14)
    # |I'(1,0)| shrinks roughly as 2/sqrt(beta), so the coupling grows with beta.
    vals = [exciton_coupling(1.0, 1.0, b, build_kernel_table(b, 1)) for b in (1.0, 4.0, 16.0)]
    assert vals[0] < vals[1] < vals[2]
    assert abs(-interaction_kernel(1, 0, 1e4) * 100 - 2) < 1e-3


def test_regime_equal_parameters():
    r = regime_check(1.0, 1.0, 1.0, 1.0, build_kernel_table(1.0, 1))
    assert r.superfluid_margin > 0 and r.projection_margin > 0
    assert not (r.josephson_anisotropic or r.charging_anisotropic or r.josephson_dominates_x)
    assert not r.satisfied


@settings(max_examples=10, deadline=None)
@given(st.floats(1e-3, 1e3))
def test_regime_margins_are_scale_free(scale):
    t = build_kernel_table(4.0, 1)
    a = regime_check(4.0, 1.0, 0.7, 0.2, t)
    b = regime_check(4.0 * scale, scale, 0.7 * scale, 0.2 * scale, t)
    assert math.isclose(a.superfluid_margin, b.superfluid_margin, rel_tol=1e-9)
    assert math.isclose(a.projection_margin, b.projection_margin, rel_tol=1e-9)


def test_regime_search_finds_a_window():
    r = regime_search()
    assert r is not None and r.satisfied
    assert r.superfluid_margin > 10 and r.projection_margin > 10


def test_regime_beta_mismatch():
    with pytest.raises(ParameterError):
        regime_check(2.0, 1.0, 1.0, 1.0, build_kernel_table(1.0, 1))


# -- chain -------------------------------------------------------------------

def test_chain_flat_without_hopping():
    band = chain_ground_band(ChainSpec(3, 0.0, 1.0), GRID16)
    assert np.ptp(band.energies) == 0.0


def hand_chain(U, hop, twist):
    states = [(a, b) for b in (-1, 0, 1) for a in (-1, 0, 1)]
    index = {s: i for i, s in enumerate(states)}
    h = np.zeros((9, 9), dtype=complex)
    for (a, b), i in index.items():
        h[i, i] = U * (a * a + b * b)
        if a < 1 and b > -1:  # move one unit from site 2 to site 1
            j = index[(a + 1, b - 1)]
            h[j, i] += -hop / 2
            h[i, j] += -hop / 2
        if a > -1:
            j = index[(a - 1, b)]
            h[j, i] += -hop / 2
            h[i, j] += -hop / 2
        if b > -1:
            j = index[(a, b - 1)]
            h[j, i] += -hop / 2 * np.exp(1j * twist)
            h[i, j] += -hop / 2 * np.exp(-1j * twist)
    return h


def test_chain_matches_hand_matrix():
    spec = ChainSpec(2, 0.3, 1.0)
    for tw in (0.0, 0.7, PI):
        ours = chain_ground_band(spec, [tw]).energies[0]
        assert np.allclose(chain_hamiltonian(spec, tw).toarray(), hand_chain(1.0, 0.3, tw))
        assert abs(ours - jacobi_lowest(hand_chain(1.0, 0.3, tw))) < 1e-10


def test_chain_even_and_periodic():
    spec = ChainSpec(3, 0.4, 1.0)
    th = np.array(GRID16)
    band = chain_ground_band(spec, th)
    neg = chain_ground_band(spec, -th)
    for t in th:
        e = band.energy_at(t)
        assert abs(e - neg.energy_at(-t)) < 1e-9
        assert abs(e - chain_ground_band(spec, [t + 2 * PI]).energies[0]) < 1e-9


@pytest.mark.parametrize("n", [2, 3])
def test_chain_amplitude_order(n):
    hops = np.array([0.01, 0.02, 0.04])
    amps = []
    for h in hops:
        e = chain_ground_band(ChainSpec(n, h, 1.0), [0.0, PI]).energies
        amps.append(e[1] - e[0])
    slope = np.polyfit(np.log(hops), np.log(amps), 1)[0]
    assert abs(slope - (n + 1)) < 0.1


def test_chain_bulk_conserves_number():
    spec = ChainSpec(3, 0.5, 1.0, boundary_hop=0.0)
    h = chain_hamiltonian(spec, 0.4).toarray()
    idx = np.arange(27)
    n = np.array([(idx // 3**k) % 3 - 1 for k in range(3)]).sum(axis=0)
    assert np.all(h[n[:, None] != n[None, :]] == 0)


def test_chain_capacity():
    with pytest.raises(CapacityError):
        chain_ground_band(ChainSpec(14, 0.1, 1.0), [0.0])


def test_sparse_path_matches_dense():
    spec = ChainSpec(2, 0.3, 1.0, n_max=20)  # dimension 1681
    h = chain_hamiltonian(spec, 0.9)
    assert abs(lowest_eigenvalue(h) - dense_lowest(h)) < 1e-9


# -- ladder ------------------------------------------------------------------

BETA = 1e6


def deep_spec(n, frac=0.03, **kw):
    i10 = -interaction_kernel(1, 0, BETA)
    t = frac * 2 * PI * i10
    return LadderSpec(n, 1.0, BETA, t * PI**2 / 2, **kw)


@pytest.fixture(scope="module")
def deep_table():
    return build_kernel_table(BETA, 4)


def test_ladder_flat_without_tunnelling(deep_table):
    band = ladder_ground_band(LadderSpec(2, 1.0, BETA, 0.0), GRID16, deep_table)
    assert np.all(band.energies == 0.0)


def test_ladder_leg_swap(deep_table):
    a = ladder_ground_band(deep_spec(3), GRID16, deep_table).energies
    b = ladder_ground_band(deep_spec(3, twist_pattern=(1, 0, 1, 0)), GRID16, deep_table).energies
    assert np.max(np.abs(a - b)) < 1e-9


def test_ladder_charge_conjugation(deep_table):
    spec = deep_spec(2, corner_phases=(0.3, -0.2, 0.1, 0.5))
    conj = deep_spec(2, corner_phases=(-0.3, 0.2, -0.1, -0.5), twist_pattern=(0, -1, 0, -1))
    a = ladder_ground_band(spec, GRID16, deep_table).energies
    b = ladder_ground_band(conj, GRID16, deep_table).energies
    assert np.max(np.abs(a - b)) < 1e-9


def test_ladder_bulk_block_structure(deep_table):
    h, total = ladder_bulk_hamiltonian(deep_spec(2), deep_table)
    coo = sp.coo_matrix(h)
    assert np.all(total[coo.row] == total[coo.col])
    full = sp.coo_matrix(ladder_hamiltonian(deep_spec(2), 0.3, deep_table))
    assert np.any(total[full.row] != total[full.col])


def test_ladder_dense_vs_iterative(deep_table):
    h = ladder_hamiltonian(deep_spec(3), 0.4, deep_table)
    assert abs(lowest_eigenvalue(h, dense_limit=0) - dense_lowest(h)) < 1e-9


def test_ladder_defect_falls_with_length(deep_table):
    defects = [ladder_ground_band(deep_spec(n), GRID16, deep_table).periodicity_defect for n in (2, 3)]
    assert defects[1] < defects[0]


def test_ladder_capacity_and_coverage(deep_table):
    with pytest.raises(CapacityError):
        ladder_ground_band(deep_spec(7, max_dimension=10**5), [0.0], deep_table)
    with pytest.raises(CoverageError):
        ladder_ground_band(deep_spec(4), [0.0], build_kernel_table(BETA, 1))


def test_barrier_scaling_without_hopping(deep_table):
    specs = [LadderSpec(n, 1.0, BETA, 0.0) for n in (2, 3, 4)]
    assert [b for _, b in barrier_scaling(specs, GRID16, deep_table)] == [0.0, 0.0, 0.0]
    with pytest.raises(ParameterError):
        barrier_scaling(specs[:2], GRID16)
    with pytest.raises(ParameterError):
        barrier_scaling([specs[0], specs[1], LadderSpec(4, 2.0, BETA, 0.0)], GRID16)


def test_effective_chain_tracks_ladder(deep_table):
    devs = []
    for factor in (5.0, 20.0):
        lad = LadderSpec(2, 1.0, BETA, ecy_for_separation(factor, 1.0, deep_table))
        rep = effective_vs_full_check(effective_chain_spec(lad, deep_table), lad, GRID16, deep_table)
        assert math.isclose(rep.scale_separation, factor, rel_tol=1e-12)
        devs.append(rep.normalized_deviation)
    assert devs[1] < devs[0]


def test_effective_small_tunnelling_limit(deep_table):
    lad = LadderSpec(2, 1.0, BETA, 1e-6)
    rep = effective_vs_full_check(effective_chain_spec(lad, deep_table), lad, GRID16, deep_table)
    assert max(map(abs, rep.ladder_centered)) < 1e-12
    assert max(map(abs, rep.chain_centered)) < 1e-12
    assert rep.max_deviation < 1e-12


def test_effective_grid_must_be_closed(deep_table):
    lad = deep_spec(2)
    with pytest.raises(ParameterError):
        effective_vs_full_check(effective_chain_spec(lad, deep_table), lad, [0.0, 1.0, 2.0], deep_table)


# -- band curve and double well ---------------------------------------------------

def test_band_curve_csv_roundtrip():
    band = BandCurve.from_samples([PI, 0.0, PI / 2, 3 * PI / 2], [1.0, 0.5, 2.0, 2.0])
    assert band.thetas.tolist() == sorted(band.thetas)
    assert band.well_asymmetry == 0.5 and band.barrier == 1.0 and band.periodicity_defect == 0.5
    again = BandCurve.from_csv(band.to_csv())
    assert again == band
    with pytest.raises(ParameterError):
        BandCurve.from_csv("x,y\n1,2\n")
    with pytest.raises(ParameterError):
        BandCurve.from_samples([0.0], [float("nan")])


def cosine_band(depth, n=64):
    th = [2 * PI * k / n for k in range(n)]
    return BandCurve.from_samples(th, [-depth * math.cos(2 * t) for t in th])


def test_free_rotor():
    levels, split = double_well_spectrum(cosine_band(0.0), 2.0, 256, levels=5)
    expect = [0.0, 0.25, 0.25, 1.0, 1.0]
    assert np.allclose(levels, expect, rtol=2e-3, atol=1e-12)
    assert abs(split - 0.25) < 1e-3


def test_symmetric_wells_split_evenly():
    grid, vals, vecs = double_well_levels(cosine_band(5.0), 4.0, 256, levels=2)
    half = grid < PI
    for k in range(2):
        w = vecs[:, k] ** 2
        assert abs(w[half].sum() - w[~half].sum()) < 1e-6


def test_deep_well_against_oracles():
    band = cosine_band(2.0)
    _, split = double_well_spectrum(band, 4.0, 256)
    _, fine = double_well_spectrum(band, 4.0, 1024)
    assert abs(split - fine) < 1e-2 * fine
    wkb = wkb_splitting(band, 4.0)
    assert 0.1 < split / wkb < 10
    _, heavy = double_well_spectrum(band, 16.0, 1024)
    assert heavy <= 0.5 * split


def test_resolution_guard():
    with pytest.raises(ResolutionError):
        double_well_spectrum(cosine_band(200.0), 50.0, 64)
    with pytest.raises(ParameterError):
        double_well_spectrum(cosine_band(1.0), 1.0, 32)
