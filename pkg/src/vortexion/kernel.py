"""Anisotropic vortex-vortex interaction kernel.

The subtracted kernel

    I'(dx, dy; beta) = int_0^pi dq [exp(-|dx| s) cos(dy q) - 1] / sinh(s),
    sinh(s) = sqrt((1 + beta (1 - cos q))**2 - 1),

is integrated as a single expression. Its integrand tends to ``-|dx|`` as
``q -> 0``; the two pieces it is built from diverge separately there.
"""

from dataclasses import dataclass, field
from math import pi
from pathlib import Path
from types import MappingProxyType
import threading

import numpy as np

from .errors import CacheIntegrityError, CoverageError, ParameterError
from .quadrature import adaptive_integrate, trapezoid_fixed

DEFAULT_TOL = 1e-10
CACHE_HEADER = "VORTEXION-KERNEL v1"

_cache = {}
_cache_lock = threading.Lock()


def _check_beta_tol(beta, tol):
    if not (np.isfinite(beta) and beta > 0):
        raise ParameterError(f"anisotropy beta must be positive, got {beta!r}")
    if not (np.isfinite(tol) and tol > 0):
        raise ParameterError(f"tolerance must be positive, got {tol!r}")


def kernel_integrand(q, dx, dy, beta):
    """Integrand of I'(dx, dy; beta), with the q = 0 value set to its limit."""
    q = np.asarray(q, dtype=float)
    a = abs(int(dx))
    b = abs(int(dy))
    half = np.sin(0.5 * q)
    u = 2.0 * half * half  # 1 - cos q without cancellation
    sinh_s = np.sqrt(beta * u * (2.0 + beta * u))
    s = np.arcsinh(sinh_s)
    hb = np.sin(0.5 * b * q)
    numer = np.expm1(-a * s) * np.cos(b * q) - 2.0 * hb * hb
    with np.errstate(invalid="ignore", divide="ignore"):
        out = numer / sinh_s
    return np.where(q == 0.0, -float(a), out)


def interaction_kernel(dx, dy, beta, tol=DEFAULT_TOL):
    """Return I'(dx, dy; beta) to absolute accuracy ``tol``.

    Values are memoised on ``(beta, tol, |dx|, |dy|)``, so reflected
    displacements and repeated calls return bit-identical floats.
    """
    beta = float(beta)
    tol = float(tol)
    _check_beta_tol(beta, tol)
    a, b = abs(int(dx)), abs(int(dy))
    if a == 0 and b == 0:
        return 0.0
    key = (beta, tol, a, b)
    hit = _cache.get(key)
    if hit is not None:
        return hit
    value, _ = adaptive_integrate(lambda q: kernel_integrand(q, a, b, beta), 0.0, pi, tol)
    with _cache_lock:
        _cache.setdefault(key, value)
    return _cache[key]


def kernel_oracle_trapezoid(dx, dy, beta, points=1_000_000):
    """Independent fixed-grid trapezoid estimate of I' (test oracle)."""
    return trapezoid_fixed(lambda q: kernel_integrand(q, dx, dy, beta), 0.0, pi, points)


def anisotropy_ratio(beta, tol=DEFAULT_TOL):
    """R(beta) = I'(1,0;beta) / I'(0,1;beta); exceeds 1 when beta > 1."""
    return interaction_kernel(1, 0, beta, tol) / interaction_kernel(0, 1, beta, tol)


def clear_kernel_cache():
    with _cache_lock:
        _cache.clear()


@dataclass(frozen=True)
class KernelTable:
    """Tabulated kernel for all |dx|, |dy| <= max_range.

    Only the non-negative quadrant is stored; lookups fold signs.
    """

    beta: float
    max_range: int
    tol: float
    values: MappingProxyType = field(repr=False)

    def __call__(self, dx, dy):
        a, b = abs(int(dx)), abs(int(dy))
        if a > self.max_range or b > self.max_range:
            raise CoverageError(
                f"displacement ({dx}, {dy}) outside kernel table range {self.max_range}"
            )
        return self.values[(a, b)]

    def covers(self, dx, dy):
        return abs(dx) <= self.max_range and abs(dy) <= self.max_range

    def as_array(self):
        """Quadrant array ``A[dx, dy]`` for 0 <= dx, dy <= max_range."""
        n = self.max_range + 1
        arr = np.empty((n, n))
        for (a, b), v in self.values.items():
            arr[a, b] = v
        return arr

    def __eq__(self, other):
        if not isinstance(other, KernelTable):
            return NotImplemented
        return (self.beta, self.max_range, self.tol) == (other.beta, other.max_range, other.tol) \
            and dict(self.values) == dict(other.values)

    def __hash__(self):
        return hash((self.beta, self.max_range, self.tol))


def build_kernel_table(beta, max_range, tol=DEFAULT_TOL):
    beta = float(beta)
    tol = float(tol)
    _check_beta_tol(beta, tol)
    if int(max_range) != max_range or max_range < 1:
        raise ParameterError(f"max_range must be a positive integer, got {max_range!r}")
    max_range = int(max_range)
    values = {
        (a, b): interaction_kernel(a, b, beta, tol)
        for a in range(max_range + 1)
        for b in range(max_range + 1)
    }
    return KernelTable(beta, max_range, tol, MappingProxyType(values))


# -- cache file -------------------------------------------------------------

def save_kernel_table(table, path):
    lines = [
        CACHE_HEADER,
        f"beta={table.beta!r} tol={table.tol!r} max_range={table.max_range}",
    ]
    for (a, b) in sorted(table.values):
        lines.append(f"{a} {b} {table.values[(a, b)]:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_kernel_table(path, beta=None, tol=None, max_range=None):
    """Read a cache file; optional arguments must match its metadata."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CacheIntegrityError(f"cannot read kernel cache {path}: {exc}") from exc
    lines = text.splitlines()
    if len(lines) < 2 or lines[0].strip() != CACHE_HEADER:
        raise CacheIntegrityError(f"{path}: missing or wrong header (expected {CACHE_HEADER!r})")
    try:
        meta = dict(item.split("=", 1) for item in lines[1].split())
        f_beta = float(meta["beta"])
        f_tol = float(meta["tol"])
        f_range = int(meta["max_range"])
    except (ValueError, KeyError) as exc:
        raise CacheIntegrityError(f"{path}: malformed metadata line {lines[1]!r}") from exc
    for name, want, got in (("beta", beta, f_beta), ("tol", tol, f_tol), ("max_range", max_range, f_range)):
        if want is not None and want != got:
            raise CacheIntegrityError(f"{path}: {name} mismatch (file {got}, requested {want})")
    values = {}
    for lineno, line in enumerate(lines[2:], start=3):
        parts = line.split()
        if len(parts) != 3:
            raise CacheIntegrityError(f"{path}:{lineno}: malformed row {line!r}")
        try:
            a, b, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise CacheIntegrityError(f"{path}:{lineno}: malformed row {line!r}") from exc
        values[(a, b)] = v
    expected = {(a, b) for a in range(f_range + 1) for b in range(f_range + 1)}
    if set(values) != expected:
        raise CacheIntegrityError(f"{path}: table is truncated or has unexpected rows")
    return KernelTable(f_beta, f_range, f_tol, MappingProxyType(values))


def cache_path(cache_dir, beta, tol, max_range):
    return Path(cache_dir) / f"kernel_b{beta!r}_t{tol!r}_r{max_range}.txt"


def cached_kernel_table(beta, max_range, tol=DEFAULT_TOL, cache_dir=None):
    """Load a table from ``cache_dir`` if present and intact, else build and store it."""
    if cache_dir is None:
        return build_kernel_table(beta, max_range, tol)
    path = cache_path(cache_dir, float(beta), float(tol), int(max_range))
    if path.exists():
        try:
            return load_kernel_table(path, float(beta), float(tol), int(max_range))
        except CacheIntegrityError:
            pass
    table = build_kernel_table(beta, max_range, tol)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_kernel_table(table, path)
    return table


def cache_roundtrip(table, path):
    save_kernel_table(table, path)
    return load_kernel_table(path, table.beta, table.tol, table.max_range)
