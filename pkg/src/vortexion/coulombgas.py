"""Classical Coulomb-gas energetics of vortices on a finite dual lattice.

Energies follow ``pi * E_J^y * sum_{i,j} V_i I'_ij V_j`` over ordered pairs,
so a +1/-1 dipole at displacement r costs ``-2 pi E_J^y I'(r)``. The XY
relaxation at the bottom of the module is an independent check of that
duality: it never touches the kernel.
"""

from dataclasses import dataclass, field
from math import pi, sqrt
from types import MappingProxyType

import numpy as np
from numba import njit

from .errors import ConvergenceError, CoverageError, NeutralityError, ParameterError
from .kernel import DEFAULT_TOL, KernelTable, interaction_kernel


@dataclass(frozen=True)
class VortexConfiguration:
    width: int
    height: int
    vorticity: MappingProxyType = field(default_factory=lambda: MappingProxyType({}))

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ParameterError("lattice extent must be positive")
        clean = {}
        for (x, y), v in dict(self.vorticity).items():
            x, y, v = int(x), int(y), int(v)
            if not (0 <= x < self.width and 0 <= y < self.height):
                raise ParameterError(f"site ({x}, {y}) outside {self.width}x{self.height} lattice")
            if v:
                clean[(x, y)] = v
        object.__setattr__(self, "vorticity", MappingProxyType(dict(sorted(clean.items()))))

    @classmethod
    def from_charges(cls, width, height, charges):
        """Build from an iterable of ``(x, y, charge)``; repeated sites add up."""
        acc = {}
        for x, y, v in charges:
            acc[(x, y)] = acc.get((x, y), 0) + v
        return cls(width, height, acc)

    def total_charge(self):
        return sum(self.vorticity.values())

    def charges(self):
        return [(x, y, v) for (x, y), v in self.vorticity.items()]

    def translated(self, dx, dy):
        return VortexConfiguration(
            self.width, self.height, {(x + dx, y + dy): v for (x, y), v in self.vorticity.items()}
        )

    def conjugated(self):
        return VortexConfiguration(self.width, self.height, {k: -v for k, v in self.vorticity.items()})

    # plain-text rows "x y charge"
    def to_text(self):
        lines = [f"# width={self.width} height={self.height}"]
        lines += [f"{x} {y} {v}" for x, y, v in self.charges()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text, width=None, height=None):
        rows = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if line.startswith("#"):
                for item in line[1:].split():
                    key, _, val = item.partition("=")
                    if key == "width" and width is None:
                        width = int(val)
                    elif key == "height" and height is None:
                        height = int(val)
                continue
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ParameterError(f"line {lineno}: expected 'x y charge', got {raw!r}")
            try:
                rows.append(tuple(int(p) for p in parts))
            except ValueError as exc:
                raise ParameterError(f"line {lineno}: non-integer field in {raw!r}") from exc
        if width is None or height is None:
            xs = [r[0] for r in rows] or [0]
            ys = [r[1] for r in rows] or [0]
            width = width if width is not None else max(xs) + 1
            height = height if height is not None else max(ys) + 1
        return cls.from_charges(width, height, rows)


def pair_sum(config, table):
    """sum_{i,j} V_i I'(r_i - r_j) V_j over ordered pairs."""
    items = config.charges()
    if len(items) < 2:
        return 0.0
    xy = np.array([(x, y) for x, y, _ in items])
    v = np.array([c for _, _, c in items], dtype=float)
    dx = np.abs(xy[:, 0, None] - xy[None, :, 0])
    dy = np.abs(xy[:, 1, None] - xy[None, :, 1])
    if dx.max() > table.max_range or dy.max() > table.max_range:
        raise CoverageError(
            f"configuration spans ({dx.max()}, {dy.max()}) but kernel table covers {table.max_range}"
        )
    kern = table.as_array()[dx, dy]
    return float(v @ kern @ v)


def config_energy(config, ejy, table):
    if config.total_charge() != 0:
        raise NeutralityError(
            f"configuration carries net vorticity {config.total_charge()}; only neutral ones are allowed"
        )
    if not ejy > 0:
        raise ParameterError("ejy must be positive")
    return pi * ejy * pair_sum(config, table)


def dipole_energy(orientation, ejy, beta, tol=DEFAULT_TOL):
    """Energy of a nearest-neighbour vortex-antivortex pair."""
    if orientation == "horizontal":
        k = interaction_kernel(1, 0, beta, tol)
    elif orientation == "vertical":
        k = interaction_kernel(0, 1, beta, tol)
    else:
        raise ParameterError(f"orientation must be 'horizontal' or 'vertical', got {orientation!r}")
    return -2.0 * pi * ejy * k


# -- two-dimensional vortex capacitor ---------------------------------------

@dataclass(frozen=True)
class CapacitorSpec:
    plate_length: int
    separation: int = 1
    ej: float = 1.0

    def __post_init__(self):
        if int(self.plate_length) != self.plate_length or self.plate_length < 1:
            raise ParameterError(f"plate_length must be a positive integer, got {self.plate_length!r}")
        if self.separation != 1:
            raise ParameterError("only plate separation 1 is supported")
        if not self.ej > 0:
            raise ParameterError("ej must be positive")


def vortex_charge_unit(ej, eps0=1.0):
    """m = sqrt(2 pi^2 eps0 E_J)."""
    return sqrt(2.0 * pi * pi * eps0 * ej)


def capacitor_configuration(spec):
    n = spec.plate_length + 1
    charges = [(x, 0, 1) for x in range(n)] + [(x, spec.separation, -1) for x in range(n)]
    return VortexConfiguration.from_charges(n, spec.separation + 1, charges)


def capacitor_energy_exact(spec, table):
    """Lattice energy of the two charged plates, each pair counted once.

    Pair counting, ``pi E_J sum_{i<j}``, is the normalisation in which the
    charge unit ``m`` reproduces the 2D Coulomb law, so this is the quantity
    that ``Q^2 / 2C`` approaches for long plates.
    """
    if table.beta != 1.0:
        raise ParameterError(f"capacitor energies use an isotropic table (beta=1), got beta={table.beta}")
    if table.max_range < spec.plate_length + 1:
        raise CoverageError(
            f"kernel table range {table.max_range} < plate_length + 1 = {spec.plate_length + 1}"
        )
    return 0.5 * config_energy(capacitor_configuration(spec), spec.ej, table)


def capacitor_energy_coulomb(spec):
    L = spec.plate_length
    return pi * pi * spec.ej * (L + 1) ** 2 / L


def capacitor_ratio(plate_length, table, ej=1.0):
    spec = CapacitorSpec(plate_length, 1, ej)
    return capacitor_energy_coulomb(spec) / capacitor_energy_exact(spec, table)


# -- XY relaxation oracle ---------------------------------------------------

@dataclass(frozen=True)
class XYLatticeSpec:
    width: int
    height: int
    ejx: float = 1.0
    ejy: float = 1.0
    relax_tol: float = 1e-10
    max_iters: int = 200_000
    over_relaxation: float = 1.9

    def __post_init__(self):
        if self.width < 4 or self.height < 4:
            raise ParameterError("XY lattice must be at least 4x4")
        if not (self.ejx > 0 and self.ejy > 0):
            raise ParameterError("ejx and ejy must be positive")
        if not self.relax_tol > 0 or self.max_iters < 1:
            raise ParameterError("relax_tol and max_iters must be positive")
        if not 0 < self.over_relaxation < 2:
            raise ParameterError("over_relaxation must lie in (0, 2)")


@njit(cache=False)
def _sweep_until(phi, pinned, ejx, ejy, tol, max_iters, omega):
    # Raster-order local minimisation (over-relaxed); returns (sweeps, last max update).
    h, w = phi.shape
    largest = 0.0
    for it in range(max_iters):
        largest = 0.0
        for y in range(h):
            for x in range(w):
                if pinned[y, x]:
                    continue
                p = phi[y, x]
                s = 0.0
                c = 0.0
                if x > 0:
                    s += ejx * np.sin(phi[y, x - 1] - p)
                    c += ejx * np.cos(phi[y, x - 1] - p)
                if x < w - 1:
                    s += ejx * np.sin(phi[y, x + 1] - p)
                    c += ejx * np.cos(phi[y, x + 1] - p)
                if y > 0:
                    s += ejy * np.sin(phi[y - 1, x] - p)
                    c += ejy * np.cos(phi[y - 1, x] - p)
                if y < h - 1:
                    s += ejy * np.sin(phi[y + 1, x] - p)
                    c += ejy * np.cos(phi[y + 1, x] - p)
                step = omega * np.arctan2(s, c)
                phi[y, x] = p + step
                if abs(step) > largest:
                    largest = abs(step)
        if largest < tol:
            return it + 1, largest
    return -1, largest


def xy_energy(phi, ejx, ejy):
    """sum over links of E_J^dir (1 - cos dphi), free boundaries."""
    return float(
        ejx * np.sum(1.0 - np.cos(np.diff(phi, axis=1)))
        + ejy * np.sum(1.0 - np.cos(np.diff(phi, axis=0)))
    )


def plaquette_vorticity(phi):
    """Integer winding around each plaquette; array indexed [y, x]."""
    wrap = lambda a: np.angle(np.exp(1j * a))
    right = wrap(np.diff(phi, axis=1))
    up = wrap(np.diff(phi, axis=0))
    circ = right[:-1, :] + up[:, 1:] - right[1:, :] - up[:, :-1]
    return np.rint(circ / (2 * pi)).astype(int)


@dataclass(frozen=True)
class XYRelaxation:
    energy: float
    sweeps: int
    residual: float
    phases: np.ndarray = field(repr=False)
    cores: tuple


def xy_relax_pair(spec, separation):
    """Relax a vortex/antivortex pair and return the full relaxation record.

    The +1 core sits in a plaquette near the lattice centre and the -1 core at
    the displaced plaquette. The four islands around each core keep their
    initial phases so that the local minimiser cannot annihilate the pair.
    """
    dx, dy = (int(s) for s in separation)
    w, h = spec.width, spec.height
    y, x = np.mgrid[0:h, 0:w].astype(float)
    phi = np.zeros((h, w))
    pinned = np.zeros((h, w), dtype=np.bool_)
    cores = ()
    if (dx, dy) != (0, 0):
        px = (w - 2) // 2 - dx // 2
        py = (h - 2) // 2 - dy // 2
        qx, qy = px + dx, py + dy
        margin = min(px, py, qx, qy, w - 2 - px, h - 2 - py, w - 2 - qx, h - 2 - qy)
        if margin < min(w, h) / 4:
            raise ParameterError(
                f"separation ({dx}, {dy}) leaves margin {margin} < lattice extent/4 on {w}x{h}"
            )
        cx, cy = px + 0.5, py + 0.5
        phi = np.arctan2(y - cy, x - cx) - np.arctan2(y - cy - dy, x - cx - dx)
        for ax, ay in ((px, py), (qx, qy)):
            pinned[ay:ay + 2, ax:ax + 2] = True
        cores = ((px, py, 1), (qx, qy, -1))
    sweeps, residual = _sweep_until(
        phi, pinned, spec.ejx, spec.ejy, spec.relax_tol, spec.max_iters, spec.over_relaxation
    )
    if sweeps < 0:
        raise ConvergenceError(
            f"XY relaxation not converged after {spec.max_iters} sweeps (max update {residual:.3e})",
            iterations=spec.max_iters,
            residual=residual,
        )
    return XYRelaxation(xy_energy(phi, spec.ejx, spec.ejy), sweeps, residual, phi, cores)


def xy_relax_pair_energy(spec, separation):
    return xy_relax_pair(spec, separation).energy
