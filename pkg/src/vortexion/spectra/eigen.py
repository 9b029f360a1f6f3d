"""Lowest-eigenvalue extraction shared by the lattice models."""

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from ..errors import CapacityError, ConvergenceError

DENSE_LIMIT = 1500
MAX_DIMENSION = 10**6
RESIDUAL_TOL = 1e-10


def check_dimension(dim, limit=MAX_DIMENSION):
    if dim > limit:
        raise CapacityError(f"Hilbert dimension {dim} exceeds the configured limit {limit}")


def lowest_eigenvalue(h, dense_limit=DENSE_LIMIT, tol=RESIDUAL_TOL):
    """Smallest eigenvalue of a Hermitian matrix (dense array or sparse)."""
    dim = h.shape[0]
    if dim <= dense_limit:
        dense = h.toarray() if sp.issparse(h) else np.asarray(h)
        return float(la.eigh(dense, eigvals_only=True, subset_by_index=[0, 0])[0])
    h = sp.csr_matrix(h)
    # Fixed start vector keeps ARPACK deterministic.
    v0 = np.linspace(1.0, 2.0, dim).astype(h.dtype)
    vals, vecs = sla.eigsh(h, k=1, which="SA", v0=v0, tol=tol * 1e-3, maxiter=50 * dim)
    lam = float(vals[0])
    vec = vecs[:, 0]
    residual = float(np.linalg.norm(h @ vec - lam * vec))
    if residual > tol * max(1.0, abs(lam)):
        raise ConvergenceError(
            f"iterative eigensolver residual {residual:.3e} above {tol:.1e}", residual=residual
        )
    return lam


def dense_lowest(h):
    """Brute-force reference: full dense spectrum via numpy."""
    dense = h.toarray() if sp.issparse(h) else np.asarray(h)
    return float(np.linalg.eigvalsh(dense)[0])


def digits(dim, base, sites):
    """Per-site occupation digits (shifted to start at 0) for every basis index."""
    idx = np.arange(dim)
    return np.stack([(idx // base**k) % base for k in range(sites)], axis=1)


def hop_operator(occ, base, src_site, dst_site, cutoff):
    """Sparse 0/1 matrix moving one unit from ``src_site`` to ``dst_site``."""
    dim = occ.shape[0]
    idx = np.arange(dim)
    ok = (occ[:, src_site] > 0) & (occ[:, dst_site] < 2 * cutoff)
    src = idx[ok]
    dst = src - base**src_site + base**dst_site
    return sp.csr_matrix((np.ones(len(src)), (dst, src)), shape=(dim, dim))


def lower_operator(occ, base, site):
    """Sparse 0/1 matrix removing one unit at ``site``."""
    dim = occ.shape[0]
    idx = np.arange(dim)
    src = idx[occ[:, site] > 0]
    return sp.csr_matrix((np.ones(len(src)), (src - base**site, src)), shape=(dim, dim))
