"""Band curves, phase-slip bands and the one-dimensional double-well problem."""

import csv
import io
from dataclasses import dataclass
from math import pi

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as sla
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from ..errors import ParameterError, ResolutionError, TruncationError

TWO_PI = 2.0 * pi
_MATCH = 1e-9


def _find(thetas, target):
    """Index of the sample equal to ``target`` modulo 2 pi, or None."""
    d = np.abs(np.angle(np.exp(1j * (np.asarray(thetas) - target))))
    i = int(np.argmin(d))
    return i if d[i] < _MATCH else None


@dataclass(frozen=True)
class BandCurve:
    """Sampled lowest-eigenvalue curve with derived well diagnostics.

    Diagnostics that need a sample at 0, pi or a shifted partner are NaN
    when the grid lacks it.
    """

    samples: tuple
    periodicity_defect: float
    well_asymmetry: float
    barrier: float

    @classmethod
    def from_samples(cls, thetas, energies):
        th = np.asarray(thetas, dtype=float)
        en = np.asarray(energies, dtype=float)
        if th.shape != en.shape or th.ndim != 1 or th.size == 0:
            raise ParameterError("thetas and energies must be equal-length, non-empty sequences")
        if not np.all(np.isfinite(en)) or not np.all(np.isfinite(th)):
            raise ParameterError("band samples must be finite")
        order = np.argsort(th, kind="stable")
        th, en = th[order], en[order]
        pairs = [(i, _find(th, t + pi)) for i, t in enumerate(th)]
        diffs = [abs(en[i] - en[j]) for i, j in pairs if j is not None]
        defect = max(diffs) if diffs else float("nan")
        i0, ipi = _find(th, 0.0), _find(th, pi)
        asym = abs(en[i0] - en[ipi]) if i0 is not None and ipi is not None else float("nan")
        barrier = float(en.max() - max(en[i0], en[ipi])) if i0 is not None and ipi is not None else float("nan")
        samples = tuple((float(a), float(b)) for a, b in zip(th, en))
        return cls(samples, float(defect), float(asym), barrier)

    @property
    def thetas(self):
        return np.array([s[0] for s in self.samples])

    @property
    def energies(self):
        return np.array([s[1] for s in self.samples])

    def energy_at(self, theta):
        i = _find(self.thetas, theta)
        if i is None:
            raise ParameterError(f"theta={theta!r} was not sampled")
        return self.samples[i][1]

    def is_local_minimum(self, theta):
        """True if the sample at ``theta`` lies strictly below both periodic neighbours."""
        th = self.thetas
        i = _find(th, theta)
        if i is None:
            raise ParameterError(f"theta={theta!r} was not sampled")
        # neighbours on the circle
        phase = np.mod(th - th[i], TWO_PI)
        order = np.argsort(phase, kind="stable")
        nxt, prv = order[1], order[-1]
        e = self.energies
        return bool(e[i] < e[nxt] and e[i] < e[prv])

    def centered(self):
        return self.energies - self.energy_at(0.0)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "energy"])
        for t, e in self.samples:
            w.writerow([repr(t), repr(e)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["theta", "energy"]:
            raise ParameterError("band CSV must start with header 'theta,energy'")
        try:
            data = [(float(a), float(b)) for a, b in rows[1:]]
        except ValueError as exc:
            raise ParameterError(f"malformed band CSV row: {exc}") from exc
        return cls.from_samples([d[0] for d in data], [d[1] for d in data])


# -- phase slips ------------------------------------------------------------

def phase_slip_energy(m, gamma, ej, n):
    if n < 1:
        raise ParameterError("chain length n must be >= 1")
    return ej * (gamma - TWO_PI * m) ** 2 / (2.0 * n)


def _slip_ground(gamma, ej, n, t_slip, M):
    m0 = round(gamma / TWO_PI)
    ms = np.arange(m0 - M, m0 + M + 1)
    diag = ej * (gamma - TWO_PI * ms) ** 2 / (2.0 * n)
    off = np.full(2 * M, -float(t_slip))
    return float(la.eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, 0))[0])


def phase_slip_band(ej, ec, n, t_slip, gammas, max_slips=4096):
    """Tight-binding band over slip index m with nearest-neighbour tunnelling.

    ``ec`` only enters the validity check; the slip amplitude ``t_slip``
    is an input. The slip window is centred on the nearest parabola and
    grown until the ground energy moves by less than 1e-10.
    """
    if not (ej > 0 and ec > 0) or n < 1:
        raise ParameterError("ej, ec must be positive and n >= 1")
    if not 0 <= t_slip < ej:
        raise ParameterError(f"t_slip must satisfy 0 <= t_slip < ej, got {t_slip!r}")
    energies = []
    for g in gammas:
        M = 4
        prev = _slip_ground(g, ej, n, t_slip, M)
        while True:
            M *= 2
            if M > max_slips:
                raise TruncationError(
                    f"slip window did not converge at gamma={g!r}", iterations=M, residual=None
                )
            cur = _slip_ground(g, ej, n, t_slip, M)
            if abs(cur - prev) < 1e-10:
                break
            prev = cur
        energies.append(cur)
    return BandCurve.from_samples(gammas, energies)


def phase_slip_gap(ej, n, t_slip, gamma=pi, M=16):
    """E1 - E0 of the slip Hamiltonian at ``gamma``."""
    m0 = round(gamma / TWO_PI)
    ms = np.arange(m0 - M, m0 + M + 1)
    diag = ej * (gamma - TWO_PI * ms) ** 2 / (2.0 * n)
    w = la.eigh_tridiagonal(diag, np.full(2 * M, -float(t_slip)), eigvals_only=True,
                            select="i", select_range=(0, 1))
    return float(w[1] - w[0])


# -- double well ------------------------------------------------------------

def band_potential(band):
    """Periodic cubic spline through the band samples folded into [0, 2 pi)."""
    th = np.mod(band.thetas, TWO_PI)
    en = band.energies
    order = np.argsort(th, kind="stable")
    th, en = th[order], en[order]
    keep = np.concatenate([[True], np.diff(th) > _MATCH])
    th, en = th[keep], en[keep]
    if th.size < 4:
        raise ParameterError("band needs at least 4 distinct samples on the circle")
    gaps = np.diff(np.concatenate([th, [th[0] + TWO_PI]]))
    if gaps.max() > pi / 2:
        raise ParameterError("band samples leave a gap wider than pi/2 on [0, 2 pi)")
    return CubicSpline(np.concatenate([th, [th[0] + TWO_PI]]), np.concatenate([en, [en[0]]]),
                       bc_type="periodic")


def _rotor_levels(pot, mass, n, levels):
    h = TWO_PI / n
    grid = h * np.arange(n)
    f = pot(grid)
    k = 1.0 / (2.0 * mass * h * h)
    if n <= 2048:
        mat = np.diag(f + 2 * k) - k * (np.eye(n, k=1) + np.eye(n, k=-1))
        mat[0, -1] = mat[-1, 0] = -k
        vals, vecs = la.eigh(mat, subset_by_index=[0, levels - 1])
    else:
        mat = sp.diags([f + 2 * k, -k * np.ones(n - 1), -k * np.ones(n - 1)], [0, 1, -1]).tolil()
        mat[0, n - 1] = mat[n - 1, 0] = -k
        v0 = np.ones(n)
        vals, vecs = sla.eigsh(mat.tocsc(), k=levels, sigma=float(f.min()) - 1.0, which="LM", v0=v0)
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    return grid, vals, vecs


def double_well_levels(band_or_potential, mass, grid_points, levels=4):
    """Levels and eigenvectors of -(1/2 mass) d^2/dtheta^2 + F on a periodic grid."""
    if not mass > 0:
        raise ParameterError("mass must be positive")
    if grid_points < 64:
        raise ParameterError("grid_points must be >= 64")
    pot = band_potential(band_or_potential) if isinstance(band_or_potential, BandCurve) else band_or_potential
    return _rotor_levels(pot, mass, int(grid_points), levels)


def double_well_spectrum(band, mass, grid_points, levels=4, resolution_tol=0.01):
    """Return ``(levels, splitting)`` and refuse grids that are not converged.

    The check doubles the grid; a relative change of the splitting above
    ``resolution_tol`` raises a resolution error.
    """
    pot = band_potential(band) if isinstance(band, BandCurve) else band
    _, vals, _ = double_well_levels(pot, mass, grid_points, levels)
    _, fine, _ = double_well_levels(pot, mass, 2 * grid_points, levels)
    split, split_fine = vals[1] - vals[0], fine[1] - fine[0]
    scale = max(abs(split_fine), np.finfo(float).tiny)
    if abs(split - split_fine) / scale > resolution_tol:
        raise ResolutionError(
            f"splitting changed by {abs(split - split_fine) / scale:.2%} when doubling {grid_points} grid points",
            iterations=grid_points,
            residual=abs(split - split_fine),
        )
    return [float(v) for v in vals], float(split)


def wkb_splitting(band, mass, samples=4096):
    """Instanton-style estimate (omega/pi) sum_b exp(-S_b) for a two-well landscape."""
    pot = band_potential(band) if isinstance(band, BandCurve) else band
    grid = np.linspace(0.0, TWO_PI, samples, endpoint=False)
    f = pot(grid)
    mins = [i for i in range(samples) if f[i] < f[i - 1] and f[i] <= f[(i + 1) % samples]]
    if len(mins) != 2:
        raise ParameterError(f"expected two wells, found {len(mins)}")
    i0 = min(mins, key=lambda i: f[i])
    curv = float(pot(grid[i0], 2))
    if curv <= 0:
        raise ParameterError("well curvature must be positive")
    omega = np.sqrt(curv / mass)
    e0 = f[i0] + 0.5 * omega
    a, b = grid[mins[0]], grid[mins[1]]
    total = 0.0
    for lo, hi in ((a, b), (b, a + TWO_PI)):
        action = quad(lambda x: np.sqrt(2 * mass * max(float(pot(x % TWO_PI)) - e0, 0.0)), lo, hi, limit=400)[0]
        total += np.exp(-action)
    return float(omega / pi * total)
