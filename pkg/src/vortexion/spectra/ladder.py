"""Two-leg vortex ladder, its effective exciton chain and regime diagnostics.

Sites are ``(x, leg)`` with vorticity ``V in [-v_max, v_max]``. The diagonal
energy is

    pi E_J^y [ sum_{i,j} V_i I'_ij V_j + kappa (sum_i V_i)^2 ],

where ``kappa`` prices net vorticity drawn from the reservoirs (the pair
kernel alone is unbounded below outside the neutral sector). Each leg
carries nearest-neighbour vortex hopping of amplitude ``t/2`` with
``t = (2/pi^2) E_C^y``, and each leg end exchanges vortices with a reservoir
at the adjacent corner phase: leg 0 joins corners 1 (left) and 4 (right),
leg 1 joins corners 2 (left) and 3 (right).
"""

from dataclasses import asdict, dataclass, field, replace
from math import pi, sqrt

import numpy as np
import scipy.sparse as sp

from ..errors import CoverageError, ParameterError
from ..kernel import DEFAULT_TOL, build_kernel_table, interaction_kernel
from .bands import TWO_PI, BandCurve
from .chain import ChainSpec, chain_ground_band
from .eigen import MAX_DIMENSION, check_dimension, digits, hop_operator, lower_operator, lowest_eigenvalue

FLAG_FACTOR = 10.0


def dual_hop(ecy):
    """Vortex hopping scale t = (2/pi^2) E_C^y."""
    return 2.0 * ecy / pi**2


@dataclass(frozen=True)
class LadderSpec:
    n_sites: int
    ejy: float
    beta: float
    ecy: float
    v_max: int = 1
    kernel_range: int = None
    corner_phases: tuple = (0.0, 0.0, 0.0, 0.0)
    twist_pattern: tuple = (0, 1, 0, 1)
    self_energy: float = None
    max_dimension: int = MAX_DIMENSION

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise ParameterError("n_sites must be a positive integer")
        if not (self.ejy > 0 and self.beta > 0):
            raise ParameterError("ejy and beta must be positive")
        if self.ecy < 0:
            raise ParameterError("ecy must be >= 0")
        if int(self.v_max) != self.v_max or self.v_max < 1:
            raise ParameterError("v_max must be a positive integer")
        if self.kernel_range is not None and self.kernel_range < 1:
            raise ParameterError("kernel_range must be >= 1")
        if len(self.corner_phases) != 4 or len(self.twist_pattern) != 4:
            raise ParameterError("corner_phases and twist_pattern need four entries")
        if self.self_energy is not None and self.self_energy < 0:
            raise ParameterError("self_energy must be >= 0")

    @property
    def dimension(self):
        return (2 * self.v_max + 1) ** (2 * self.n_sites)

    @property
    def range(self):
        return self.n_sites - 1 if self.kernel_range is None else min(self.kernel_range, self.n_sites - 1)

    def kappa(self, tol=DEFAULT_TOL):
        if self.self_energy is not None:
            return self.self_energy
        return -2.0 * interaction_kernel(1, 0, self.beta, tol)

    def corners(self, theta):
        return tuple(c + p * theta for c, p in zip(self.corner_phases, self.twist_pattern))


def ladder_table(spec, tol=DEFAULT_TOL):
    return build_kernel_table(spec.beta, max(spec.range, 1), tol)


class _LadderOperators:
    def __init__(self, spec, table):
        if table.beta != float(spec.beta):
            raise ParameterError(f"table beta {table.beta} differs from ladder beta {spec.beta}")
        check_dimension(spec.dimension, spec.max_dimension)
        reach = max(spec.range, 1)
        if not table.covers(reach, 1):
            raise CoverageError(f"kernel table range {table.max_range} < required {reach}")
        n, v = spec.n_sites, spec.v_max
        base = 2 * v + 1
        occ = digits(spec.dimension, base, 2 * n)
        V = (occ - v).astype(float)
        pos = [(k % n, k // n) for k in range(2 * n)]  # site k = leg * n + x
        K = np.zeros((2 * n, 2 * n))
        for i, (xi, li) in enumerate(pos):
            for j, (xj, lj) in enumerate(pos):
                if abs(xi - xj) <= spec.range:
                    K[i, j] = table(xi - xj, li - lj)
        K += spec.kappa(table.tol)
        self.diag = pi * spec.ejy * np.einsum("ai,ij,aj->a", V, K, V)
        t = dual_hop(spec.ecy)
        bulk = sp.csr_matrix((spec.dimension, spec.dimension))
        for leg in range(2):
            for x in range(n - 1):
                move = hop_operator(occ, base, leg * n + x, leg * n + x + 1, v)
                bulk = bulk + move + move.T
        self.bulk = -0.5 * t * bulk
        # corner order: top-left, bottom-left, bottom-right, top-right
        self.corner_ops = (
            lower_operator(occ, base, 0),
            lower_operator(occ, base, n),
            lower_operator(occ, base, 2 * n - 1),
            lower_operator(occ, base, n - 1),
        )
        self.t = t
        self.total = V.sum(axis=1)
        self.spec = spec

    def hamiltonian(self, theta):
        ends = sum(np.exp(-1j * p) * op for p, op in zip(self.spec.corners(theta), self.corner_ops))
        h = sp.diags(self.diag) + self.bulk - 0.5 * self.t * (ends + ends.conj().T)
        return sp.csr_matrix(h)

    def bulk_hamiltonian(self):
        return sp.csr_matrix(sp.diags(self.diag) + self.bulk)


def ladder_hamiltonian(spec, theta, table):
    return _LadderOperators(spec, table).hamiltonian(theta)


def ladder_bulk_hamiltonian(spec, table):
    """Reservoir-free part; conserves total vorticity."""
    ops = _LadderOperators(spec, table)
    return ops.bulk_hamiltonian(), ops.total


def ladder_ground_band(spec, thetas, table):
    ops = _LadderOperators(spec, table)
    energies = [lowest_eigenvalue(ops.hamiltonian(float(t))) for t in thetas]
    return BandCurve.from_samples(thetas, energies)


def barrier_scaling(specs, thetas, table=None):
    """``[(N, barrier(N))]`` for ladders that differ only in their length."""
    specs = list(specs)
    if len(specs) < 3:
        raise ParameterError("barrier scaling needs at least three ladder lengths")
    ref = replace(specs[0], n_sites=1, kernel_range=None)
    for s in specs[1:]:
        if replace(s, n_sites=1, kernel_range=None) != ref:
            raise ParameterError("ladder specs must differ only in n_sites")
    out = []
    for s in specs:
        tab = table if table is not None and table.covers(max(s.range, 1), 1) else ladder_table(s)
        out.append((s.n_sites, ladder_ground_band(s, thetas, tab).barrier))
    return out


# -- couplings and regime -----------------------------------------------------

def exciton_coupling(ecy, ejy, beta, table):
    """E_C^ex = (4/pi^4) E_C^y^2 / (-I'(1,0) E_J^y)."""
    if not (ecy > 0 and ejy > 0 and beta > 0):
        raise ParameterError("ecy, ejy and beta must be positive")
    if table.beta != float(beta):
        raise ParameterError(f"table beta {table.beta} differs from beta {beta}")
    return 4.0 / pi**4 * ecy * ecy / (-table(1, 0) * ejy)


@dataclass(frozen=True)
class RegimeReport:
    beta: float
    superfluid_margin: float
    projection_margin: float
    josephson_anisotropic: bool
    charging_anisotropic: bool
    josephson_dominates_x: bool
    josephson_dominates_y: bool
    parameters: dict = field(default_factory=dict)

    @property
    def satisfied(self):
        return self.superfluid_margin > FLAG_FACTOR and self.projection_margin > FLAG_FACTOR

    def as_dict(self):
        d = asdict(self)
        d["satisfied"] = self.satisfied
        return d


def regime_check(ejy, ejx, ecy, ecx, table):
    """Margins of the superfluid and projection inequalities plus hierarchy flags.

    superfluid_margin = (E_C^y/E_J^y)^2 / (pi^4 |I'(0,1)| |I'(1,0)|)
    projection_margin = |I'(1,0)| E_J^y / ((4/pi^2) E_C^y)
    """
    if not all(v > 0 for v in (ejy, ejx, ecy, ecx)):
        raise ParameterError("all energies must be positive")
    beta = ejy / ejx
    if abs(table.beta - beta) > 1e-12 * beta:
        raise ParameterError(f"table beta {table.beta} differs from ejy/ejx = {beta}")
    i10, i01 = -table(1, 0), -table(0, 1)
    return RegimeReport(
        beta=beta,
        superfluid_margin=(ecy / ejy) ** 2 / (pi**4 * i01 * i10),
        projection_margin=i10 * ejy / (4.0 / pi**2 * ecy),
        josephson_anisotropic=ejy >= FLAG_FACTOR * ejx,
        charging_anisotropic=ecy >= FLAG_FACTOR * ecx,
        josephson_dominates_x=ejx >= FLAG_FACTOR * ecx,
        josephson_dominates_y=ejy >= FLAG_FACTOR * ecy,
        parameters={"ejy": ejy, "ejx": ejx, "ecy": ecy, "ecx": ecx},
    )


def regime_search(log10_beta_max=12.0, step=0.25, ejx=1.0, ecx_ratio=0.01, tol=DEFAULT_TOL):
    """Scan beta on a log grid and return the first report meeting both margins.

    At each beta the charging ratio E_C^y/E_J^y is set to the geometric mean
    of the window the two inequalities allow; ``None`` if no beta qualifies.
    """
    for k in np.arange(0.0, log10_beta_max + 0.5 * step, step):
        beta = float(10.0**k)
        i10 = -interaction_kernel(1, 0, beta, tol)
        i01 = -interaction_kernel(0, 1, beta, tol)
        lo = pi**2 * sqrt(FLAG_FACTOR * i01 * i10)
        hi = pi**2 * i10 / (4.0 * FLAG_FACTOR)
        if hi <= lo:
            continue
        ejy = beta * ejx
        ecy = sqrt(lo * hi) * ejy
        table = build_kernel_table(beta, 1, tol)
        report = regime_check(ejy, ejx, ecy, ecx_ratio * ejx, table)
        if report.satisfied:
            return report
    return None


# -- ladder to chain projection ---------------------------------------------

def effective_chain_spec(ladder, table, mapping="perturbative"):
    """Exciton chain derived from a ladder.

    ``perturbative``: second-order hops through the intermediate states,
    ``hop = t^2/dE`` with ``dE = 2 pi E_J^y (|I'(1,1)| - |I'(0,1)|)`` the cost of
    shearing a vertical pair, exciton cost ``U = 2 pi E_J^y |I'(0,1)|`` and a
    reservoir hop through a lone vortex of cost ``pi E_J^y kappa``.
    ``coefficient``: ``hop = E_C^ex``, ``U = 4 pi E_J^y |I'(0,1)|``.
    """
    if not table.covers(1, 1):
        raise CoverageError("effective mapping needs I'(1,1)")
    e = ladder.ejy
    i01, i10, i11 = -table(0, 1), -table(1, 0), -table(1, 1)
    t = dual_hop(ladder.ecy)
    if mapping == "coefficient":
        hop = exciton_coupling(ladder.ecy, e, ladder.beta, table) if ladder.ecy > 0 else 0.0
        return ChainSpec(ladder.n_sites, hop, 4.0 * pi * e * i01, n_max=1)
    if mapping != "perturbative":
        raise ParameterError(f"unknown mapping {mapping!r}")
    u = 2.0 * pi * e * i01
    shear = 2.0 * pi * e * (i11 - i01)
    lone = pi * e * ladder.kappa(table.tol)
    if shear <= 0 or lone <= u:
        raise ParameterError("ladder is outside the exciton-projection regime")
    hop = t * t / shear
    end = 0.5 * t * t * (1.0 / lone + 1.0 / (lone - u))
    return ChainSpec(ladder.n_sites, hop, u, n_max=1, boundary_hop=end)


def scale_separation(ladder, table):
    """|I'(1,0)| E_J^y / ((4/pi^2) E_C^y)."""
    return -table(1, 0) * ladder.ejy / (4.0 / pi**2 * ladder.ecy) if ladder.ecy > 0 else float("inf")


def ecy_for_separation(factor, ejy, table):
    return -table(1, 0) * ejy * pi**2 / (4.0 * factor)


@dataclass(frozen=True)
class EffectiveComparison:
    thetas: tuple
    ladder_centered: tuple
    chain_centered: tuple
    max_deviation: float
    chain_amplitude: float
    normalized_deviation: float
    scale_separation: float


def pi_periodic_part(band):
    """(E(theta) + E(theta + pi)) / 2 on a grid closed under theta -> theta + pi."""
    th, en = band.thetas, band.energies
    out = []
    for t, e in zip(th, en):
        d = np.abs(np.angle(np.exp(1j * (th - t - pi))))
        j = int(np.argmin(d))
        if d[j] > 1e-9:
            raise ParameterError("theta grid must be closed under theta -> theta + pi")
        out.append(0.5 * (e + en[j]))
    return np.array(out)


def effective_vs_full_check(chain, ladder, thetas, table):
    """Compare the ladder's pi-periodic band with the chain band at Theta' = 2 Theta.

    The single-vortex part of the ladder band (odd under theta -> theta + pi)
    has no counterpart in the exciton chain and is averaged out first.
    """
    full = ladder_ground_band(ladder, thetas, table)
    eff = chain_ground_band(chain, [2.0 * t for t in full.thetas])
    lad = pi_periodic_part(full)
    i0 = int(np.argmin(np.abs(np.angle(np.exp(1j * full.thetas)))))
    lad = lad - lad[i0]
    ch = eff.energies - eff.energies[i0]
    dev = float(np.max(np.abs(lad - ch)))
    amp = float(ch.max() - ch.min())
    norm = dev / amp if amp > 0 else (0.0 if dev == 0 else float("inf"))
    return EffectiveComparison(
        tuple(float(t) for t in full.thetas), tuple(float(v) for v in lad), tuple(float(v) for v in ch),
        dev, amp, norm, scale_separation(ladder, table),
    )
