"""Device-level models: charge-qubit readout, vortex SQUID, vortex oscillator, gates.

Units: hbar = 1 and 2e = 1, so a voltage is dE/dn_g and charges are in
Cooper-pair units.
"""

from dataclasses import dataclass, field
from math import pi, sqrt

import numpy as np
import scipy.linalg as la

from .errors import AmbiguousReadoutError, ParameterError, ResolutionError, TruncationError

AMBIGUITY_FLOOR = 1e-9
LEAKAGE_LIMIT = 1e-8


# -- charge qubit -----------------------------------------------------------

@dataclass(frozen=True)
class ChargeQubitParams:
    ec: float
    ej: float
    n_cut: int = 12

    def __post_init__(self):
        if not (self.ec > 0 and self.ej >= 0):
            raise ParameterError("ec must be positive and ej non-negative")
        if int(self.n_cut) != self.n_cut or self.n_cut < 5:
            raise ParameterError("n_cut must be an integer >= 5")


def _charge_eigh(ec, ej, n_cut, ng, count=1):
    k = np.arange(-n_cut, n_cut + 1) + round(ng)
    diag = 4.0 * ec * (k - ng) ** 2
    off = np.full(2 * n_cut, -0.5 * ej)
    vals, vecs = la.eigh_tridiagonal(diag, off, select="i", select_range=(0, count - 1))
    return k, vals, vecs


def _converged_cut(p, ng):
    # Raise the cutoff by 2 until E0 moves by less than 1e-10.
    n_cut = p.n_cut
    e0 = _charge_eigh(p.ec, p.ej, n_cut, ng)[1][0]
    for _ in range(20):
        e1 = _charge_eigh(p.ec, p.ej, n_cut + 2, ng)[1][0]
        if abs(e1 - e0) < 1e-10:
            return n_cut
        n_cut, e0 = n_cut + 2, e1
    raise ResolutionError(f"charge basis not converged up to n_cut={n_cut}", iterations=n_cut)


def charge_qubit_levels(p, ng, count=2):
    n_cut = _converged_cut(p, ng)
    return [float(v) for v in _charge_eigh(p.ec, p.ej, n_cut, ng, count)[1]]


def charge_qubit_ground_energy(p, ng):
    """Lowest eigenvalue of 4 E_C (N - n_g)^2 - E_J cos(phi) in the charge basis."""
    return charge_qubit_levels(p, ng, 1)[0]


def charge_qubit_voltage(p, ng):
    """Ground-state <dH/dn_g> = <-8 E_C (N - n_g)>."""
    n_cut = _converged_cut(p, ng)
    k, vals, vecs = _charge_eigh(p.ec, p.ej, n_cut, ng, 2)
    if p.ej == 0 and abs(vals[1] - vals[0]) < 1e-12:
        raise ParameterError(f"ground state is degenerate at ng={ng!r}; voltage is undefined")
    psi = vecs[:, 0]
    return float(np.sum(psi * psi * (-8.0 * p.ec * (k - ng))))


def charge_qubit_voltage_fd(p, ng, step=1e-5):
    """Centred finite-difference dE0/dn_g (oracle)."""
    return (charge_qubit_ground_energy(p, ng + step) - charge_qubit_ground_energy(p, ng - step)) / (2 * step)


def parity_bias(n):
    return 0.25 + 0.5 * n


def parity_measurement(p, n):
    """'even' if the voltage at n_g = 1/4 + n/2 is positive, else 'odd'."""
    v = charge_qubit_voltage(p, parity_bias(int(n)))
    if abs(v) < AMBIGUITY_FLOOR:
        raise AmbiguousReadoutError(f"voltage {v!r} too small to read parity")
    return "even" if v > 0 else "odd"


# -- interference and SQUID --------------------------------------------------

def ac_interference_current(q_ext, qubit_phase):
    """Two-path vortex current cos(pi q_ext + phase), unit amplitude."""
    return float(np.cos(pi * q_ext + qubit_phase))


@dataclass(frozen=True)
class SquidParams:
    ec: float
    q: float = 0.0

    def __post_init__(self):
        if not self.ec > 0:
            raise ParameterError("ec must be positive")


def squid_energy(p, dtheta):
    """-E_C cos(pi q) cos(dtheta); switches off exactly at q = 1/2."""
    # cos(pi q) vanishes exactly on half-odd-integers; numpy leaves ~6e-17.
    twice = 2.0 * p.q
    mod = 0.0 if twice == round(twice) and round(twice) % 2 == 1 else np.cos(pi * p.q)
    return float(-p.ec * mod * np.cos(dtheta)) + 0.0  # no negative zero


# -- oscillator ---------------------------------------------------------------

@dataclass(frozen=True)
class OscillatorParams:
    m_tracks: int
    n_rungs: int
    ej: float = 1.0
    ecr: float = 1.0

    def __post_init__(self):
        if self.m_tracks < 1 or self.n_rungs < 1 or not (self.ej > 0 and self.ecr > 0):
            raise ParameterError("oscillator parameters must all be positive")


@dataclass(frozen=True)
class OscillatorLC:
    capacitance: float
    inductance: float
    impedance: float
    frequency: float


def oscillator_lc(p):
    c = p.n_rungs / (2.0 * pi * pi * p.ej)
    ind = p.m_tracks / ((p.n_rungs + 1) * p.ecr)
    return OscillatorLC(c, ind, sqrt(ind / c), 1.0 / sqrt(ind * c))


def ring_toy_spectrum(ec, ej, n_ring, levels=4, grid_points=None):
    """Levels of 4 E_C n^2 + (E_J / 2 N_ring) theta^2 on a finite-difference phase grid.

    The grid spans 12 oscillator lengths around the minimum; refinement is
    checked by doubling and a >1% change of the lowest spacing raises.
    """
    if not (ec > 0 and ej > 0) or n_ring < 1 or levels < 2:
        raise ParameterError("ec, ej, n_ring must be positive and levels >= 2")
    k = ej / n_ring
    width = (8.0 * ec / k) ** 0.25  # ground-state spread in theta
    half = 12.0 * width
    n = int(grid_points or max(256, 40 * levels))

    def solve(points):
        h = 2 * half / (points - 1)
        th = np.linspace(-half, half, points)
        kin = 4.0 * ec / (h * h)
        diag = 2 * kin + 0.5 * k * th * th
        return la.eigh_tridiagonal(diag, np.full(points - 1, -kin), eigvals_only=True,
                                   select="i", select_range=(0, levels - 1))

    coarse, fine = solve(n), solve(2 * n)
    s0, s1 = coarse[1] - coarse[0], fine[1] - fine[0]
    if abs(s0 - s1) > 0.01 * s1:
        raise ResolutionError(f"ring-toy spacing changed by {abs(s0 - s1) / s1:.2%} on refinement",
                              iterations=n)
    return [float(v) for v in fine]


# -- gates ---------------------------------------------------------------------

def rz_gate(coupling, duration):
    """Evolution under -E_C Z: diag(exp(i E_C t), exp(-i E_C t))."""
    if not coupling > 0 or duration < 0:
        raise ParameterError("coupling must be positive and duration non-negative")
    a = coupling * duration
    return np.diag([np.exp(1j * a), np.exp(-1j * a)])


def phase_rotation(angle):
    """R(angle) = diag(exp(i angle), exp(-i angle))."""
    return np.diag([np.exp(1j * angle), np.exp(-1j * angle)])


def equal_up_to_phase(a, b, atol=1e-12):
    i = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(a[i]) == 0:
        return False
    ph = b[i] / a[i]
    return abs(abs(ph) - 1) < atol and np.allclose(a * ph, b, atol=atol, rtol=0)


@dataclass(frozen=True)
class GateSpec:
    coupling: float
    duration: float
    oscillator: OscillatorParams = field(default_factory=lambda: OscillatorParams(10, 10))
    fock_cut: int = 64

    def __post_init__(self):
        if not self.coupling > 0 or self.duration < 0 or self.fock_cut < 4:
            raise ParameterError("coupling > 0, duration >= 0 and fock_cut >= 4 required")


@dataclass(frozen=True)
class ConditionalSample:
    t: float
    relative_phase: float
    entanglement_entropy: float
    fidelity_0: float
    fidelity_1: float
    mean_gamma_1: float
    norm: float

    @property
    def oscillator_return_fidelity(self):
        return min(self.fidelity_0, self.fidelity_1)


def _branch_hamiltonian(lc, fock_cut, shift):
    # gamma = sqrt(Z/2)(a + a^dag), q = i sqrt(1/2Z)(a^dag - a)
    n = np.arange(1, fock_cut)
    a = np.diag(np.sqrt(n), 1)
    z = lc.impedance
    gamma = sqrt(z / 2.0) * (a + a.T)
    q = 1j * sqrt(1.0 / (2.0 * z)) * (a.T - a)
    eye = np.eye(fock_cut)
    g = gamma - shift * eye
    h = (q @ q).real / (2 * lc.capacitance) + g @ g / (2 * lc.inductance)
    return h, gamma


def conditional_oscillator_evolution(g, times):
    """Evolve |+> (x) |vac> with the qubit shifting the well minimum to 0 or pi.

    Each branch is diagonalised once and propagated exactly in its eigenbasis.
    """
    lc = oscillator_lc(g.oscillator)
    out = []
    vac = np.zeros(g.fock_cut)
    vac[0] = 1.0
    branches = []
    for shift in (0.0, pi):
        h, gamma = _branch_hamiltonian(lc, g.fock_cut, shift)
        w, v = la.eigh(h)
        branches.append((w, v, v.T @ vac, gamma))
    for t in times:
        if t < 0:
            raise ParameterError("times must be non-negative")
        states = []
        for w, v, c0, _ in branches:
            states.append(v @ (np.exp(-1j * w * t) * c0))
        for s in states:
            leak = float(np.sum(np.abs(s[-4:]) ** 2))
            if leak > LEAKAGE_LIMIT:
                raise TruncationError(f"Fock cutoff {g.fock_cut} leaks {leak:.2e} at t={t!r}",
                                      iterations=g.fock_cut, residual=leak)
        s0, s1 = states
        overlap = np.vdot(s0, s1)
        mag = min(abs(overlap), 1.0)
        probs = np.array([(1 + mag) / 2, (1 - mag) / 2])
        probs = probs[probs > 1e-300]
        entropy = float(-np.sum(probs * np.log2(probs)))
        norm = 0.5 * (np.vdot(s0, s0).real + np.vdot(s1, s1).real)
        out.append(ConditionalSample(
            t=float(t),
            relative_phase=float(np.angle(overlap)) if mag > 1e-14 else 0.0,
            entanglement_entropy=max(entropy, 0.0),
            fidelity_0=float(abs(s0[0]) ** 2),
            fidelity_1=float(abs(s1[0]) ** 2),
            mean_gamma_1=float(np.vdot(s1, branches[1][3] @ s1).real),
            norm=float(norm),
        ))
    return out


def displaced_mean_gamma(lc, t, shift=pi):
    """Closed form <gamma>(t) for the vacuum released into a well centred at ``shift``."""
    return shift * (1.0 - np.cos(lc.frequency * t))
