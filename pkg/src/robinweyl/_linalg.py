"""Lowest eigenpairs of sparse symmetric-definite pencils."""

from __future__ import annotations

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import SolverError

DENSE_LIMIT = 600


def lowest_eigenpairs(K, M, k, sigma, dense_limit=DENSE_LIMIT):
    """Return the ``k`` lowest eigenpairs of ``K x = lam M x``.

    ``sigma`` must lie below the bottom of the spectrum: shift-invert then
    returns the eigenvalues nearest to it, which are the lowest ones.
    Eigenvectors are M-orthonormal.
    """
    n = K.shape[0]
    if k < 1 or k > n:
        raise ValueError(f"cannot compute {k} eigenpairs of a {n}x{n} pencil")
    if n <= dense_limit or k >= n - 1:
        Kd = K.toarray() if sp.issparse(K) else np.asarray(K)
        Md = M.toarray() if sp.issparse(M) else np.asarray(M)
        vals, vecs = la.eigh(Kd, Md, subset_by_index=[0, k - 1])
        return vals, vecs
    try:
        vals, vecs = eigsh(sp.csc_matrix(K), k=k, M=sp.csc_matrix(M), sigma=sigma, which="LM")
    except ArpackNoConvergence as exc:
        raise SolverError(f"shift-invert Lanczos did not converge ({len(exc.eigenvalues)} of {k} pairs)") from exc
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    # ARPACK returns M-orthogonal vectors only up to its tolerance
    norms = np.sqrt(np.einsum("ij,ij->j", vecs, M @ vecs))
    return vals, vecs / norms


def residuals(K, M, vals, vecs):
    """Relative residuals ``|K v - lam M v| / (1 + |lam|)`` for each column."""
    r = K @ vecs - (M @ vecs) * vals[None, :]
    return np.linalg.norm(r, axis=0) / (1.0 + np.abs(vals))
