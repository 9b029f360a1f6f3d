"""Open exciton chain with end reservoirs, and the current-mirror parameter map."""

from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from ..errors import ParameterError
from .bands import BandCurve
from .eigen import MAX_DIMENSION, check_dimension, digits, hop_operator, lower_operator, lowest_eigenvalue


@dataclass(frozen=True)
class ChainSpec:
    """Exciton chain ``U sum n^2 - (hop/2) sum (b+_x b_{x+1} + h.c.)`` plus end terms.

    ``boundary_hop`` sets the reservoir coupling at both ends and defaults
    to ``hop``.
    """

    n_sites: int
    hop: float
    charging: float
    n_max: int = 1
    boundary_phase: float = 0.0
    boundary_hop: float = None
    max_dimension: int = MAX_DIMENSION

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise ParameterError("n_sites must be a positive integer")
        if self.hop < 0 or not self.charging > 0:
            raise ParameterError("hop must be >= 0 and charging > 0")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ParameterError("n_max must be a positive integer")
        if self.boundary_hop is not None and self.boundary_hop < 0:
            raise ParameterError("boundary_hop must be >= 0")

    @property
    def dimension(self):
        return (2 * self.n_max + 1) ** self.n_sites

    @property
    def end_hop(self):
        return self.hop if self.boundary_hop is None else self.boundary_hop


@dataclass(frozen=True)
class KCMQMapping:
    hop: float
    charging: float

    @property
    def condensate(self):
        """Excitons condense when their tunnelling beats charging by 10x."""
        return self.hop >= 10.0 * self.charging

    def chain(self, n_sites, n_max=1, boundary_phase=0.0):
        return ChainSpec(n_sites, self.hop, self.charging, n_max, boundary_phase)


def map_kcmq_params(ej, e1, ei):
    if not (ej > 0 and e1 > 0 and ei > 0):
        raise ParameterError("ej, e1 and ei must be positive")
    return KCMQMapping(hop=ej * ej / e1, charging=4.0 * ei)


class _ChainOperators:
    def __init__(self, spec):
        check_dimension(spec.dimension, spec.max_dimension)
        base = 2 * spec.n_max + 1
        occ = digits(spec.dimension, base, spec.n_sites)
        n = occ - spec.n_max
        self.diag = spec.charging * (n * n).sum(axis=1).astype(float)
        bulk = sp.csr_matrix((spec.dimension, spec.dimension))
        for x in range(spec.n_sites - 1):
            move = hop_operator(occ, base, x + 1, x, spec.n_max)  # b+_x b_{x+1}
            bulk = bulk + move + move.T
        self.bulk = -0.5 * spec.hop * bulk
        self.left = lower_operator(occ, base, 0)
        self.right = lower_operator(occ, base, spec.n_sites - 1)
        self.number = n.sum(axis=1)
        self.spec = spec

    def hamiltonian(self, twist):
        s = self.spec
        ends = self.left + np.exp(1j * twist) * self.right
        h = sp.diags(self.diag) + self.bulk - 0.5 * s.end_hop * (ends + ends.conj().T)
        return sp.csr_matrix(h)

    def bulk_hamiltonian(self):
        return sp.csr_matrix(sp.diags(self.diag) + self.bulk)


def chain_hamiltonian(spec, twist):
    return _ChainOperators(spec).hamiltonian(twist)


def chain_ground_band(spec, thetas):
    """Lowest eigenvalue versus the end twist Theta'."""
    ops = _ChainOperators(spec)
    energies = [lowest_eigenvalue(ops.hamiltonian(float(t))) for t in thetas]
    return BandCurve.from_samples(thetas, energies)


def chain_ground_energy(spec):
    return chain_ground_band(spec, [spec.boundary_phase]).energies[0]


def with_sites(spec, n_sites):
    return replace(spec, n_sites=n_sites)
