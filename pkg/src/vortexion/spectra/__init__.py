"""Exact diagonalisation of the chain, ladder and phase-slip models."""

from .bands import (
    BandCurve,
    band_potential,
    double_well_levels,
    double_well_spectrum,
    phase_slip_band,
    phase_slip_energy,
    phase_slip_gap,
    wkb_splitting,
)
from .chain import ChainSpec, KCMQMapping, chain_ground_band, chain_hamiltonian, map_kcmq_params
from .eigen import dense_lowest, lowest_eigenvalue
from .ladder import (
    EffectiveComparison,
    LadderSpec,
    RegimeReport,
    barrier_scaling,
    effective_chain_spec,
    effective_vs_full_check,
    ecy_for_separation,
    exciton_coupling,
    ladder_bulk_hamiltonian,
    ladder_ground_band,
    ladder_hamiltonian,
    ladder_table,
    regime_check,
    regime_search,
    scale_separation,
)
