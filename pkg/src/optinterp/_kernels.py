"""Hot numeric kernels: basis-matrix evaluation, Newton-type elimination,
absolute row sums.

Each kernel exists twice, as a numba @njit function and as a pure-numpy
fallback.  The active backend is fixed at import time from the
OPTINTERP_BACKEND environment variable:

    OPTINTERP_BACKEND=numpy   force the pure-numpy path
    OPTINTERP_BACKEND=numba   force JIT kernels (ImportError if numba missing)
    unset / auto              numba when importable, else numpy

Both implementations stay importable (``*_numpy`` / ``*_numba``) so the
benchmark in benchmarks/bench_kernels.py can time them side by side.
Within one backend all kernels are sequential and run-to-run deterministic.
"""

import os

import numpy as np

ENV_VAR = "OPTINTERP_BACKEND"

CHEBYSHEV = 0
MONOMIAL = 1


def _pick_backend() -> str:
    choice = os.environ.get(ENV_VAR, "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy", ""):
        raise ValueError(f"{ENV_VAR} must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = _pick_backend()


# ---------------------------------------------------------------------------
# pure-numpy implementations

def basis_matrix_numpy(points: np.ndarray, exponents: np.ndarray, kind: int) -> np.ndarray:
    """Evaluate the graded tensor basis at `points`.

    points: (P, d) float64, exponents: (N, d) int64.  Returns (P, N) with
    entry [p, j] = prod_i T_{a_ji}(x_pi) (Chebyshev) or prod_i x_pi^a_ji
    (monomial).
    """
    P, d = points.shape
    N = exponents.shape[0]
    nmax = int(exponents.max()) if N else 0
    T = np.empty((P, d, nmax + 1))
    T[:, :, 0] = 1.0
    if nmax >= 1:
        T[:, :, 1] = points
    if kind == CHEBYSHEV:
        for k in range(2, nmax + 1):
            T[:, :, k] = 2.0 * points * T[:, :, k - 1] - T[:, :, k - 2]
    else:
        for k in range(2, nmax + 1):
            T[:, :, k] = points * T[:, :, k - 1]
    B = np.ones((P, N))
    for i in range(d):
        B *= T[:, i, exponents[:, i]]
    return B


def newton_eliminate_numpy(B: np.ndarray, blocks: np.ndarray, pivot_tol: float):
    """Gauss-Jordan style elimination of the working basis at the points.

    B[i, j] = phi_j(xi_i).  At step k the pivot is chosen in the lowest
    degree block holding a working polynomial whose value at xi_k exceeds
    pivot_tol (largest such value within the block); the pivot is normalised
    to 1 at xi_k and multiples of it are subtracted from every other working
    polynomial so they vanish there.  Only addition, scalar multiplication
    and point evaluation are used; no linear system is solved.

    Returns (W, perm, fail): on success fail == -1 and W[perm[k]] holds the
    coefficients of the fundamental polynomial of point k; otherwise fail is
    the step at which every candidate pivot fell below pivot_tol.
    """
    N = B.shape[0]
    W = np.eye(N)
    V = np.ascontiguousarray(B.T)  # V[j, k] = w_j(xi_k)
    taken = np.zeros(N, dtype=bool)
    perm = np.empty(N, dtype=np.int64)
    for k in range(N):
        vals = np.abs(V[:, k])
        viable = ~taken & (vals > pivot_tol)
        if not viable.any():
            return W, perm, k
        blk = np.where(viable, blocks, np.iinfo(np.int64).max)
        low = blk.min()
        in_block = viable & (blk == low)
        best = int(np.argmax(np.where(in_block, vals, -1.0)))
        c = V[best, k]
        W[best] /= c
        V[best] /= c
        f = V[:, k].copy()
        f[best] = 0.0
        W -= np.outer(f, W[best])
        V -= np.outer(f, V[best])
        taken[best] = True
        perm[k] = best
    return W, perm, -1


def abs_row_sums_numpy(M: np.ndarray) -> np.ndarray:
    return np.abs(M).sum(axis=1)


# ---------------------------------------------------------------------------
# numba implementations

if BACKEND == "numba":
    from numba import njit

    @njit(cache=True)
    def basis_matrix_numba(points, exponents, kind):
        P, d = points.shape
        N = exponents.shape[0]
        nmax = 0
        for j in range(N):
            for i in range(d):
                if exponents[j, i] > nmax:
                    nmax = exponents[j, i]
        B = np.empty((P, N))
        T = np.empty((d, nmax + 1))
        for p in range(P):
            for i in range(d):
                T[i, 0] = 1.0
                if nmax >= 1:
                    T[i, 1] = points[p, i]
                if kind == 0:
                    for k in range(2, nmax + 1):
                        T[i, k] = 2.0 * points[p, i] * T[i, k - 1] - T[i, k - 2]
                else:
                    for k in range(2, nmax + 1):
                        T[i, k] = points[p, i] * T[i, k - 1]
            for j in range(N):
                v = 1.0
                for i in range(d):
                    v *= T[i, exponents[j, i]]
                B[p, j] = v
        return B

    @njit(cache=True)
    def newton_eliminate_numba(B, blocks, pivot_tol):
        N = B.shape[0]
        W = np.eye(N)
        V = np.ascontiguousarray(B.T)
        taken = np.zeros(N, dtype=np.bool_)
        perm = np.empty(N, dtype=np.int64)
        for k in range(N):
            best = -1
            bestblock = np.int64(1) << 62
            bestval = 0.0
            for j in range(N):
                if not taken[j]:
                    v = abs(V[j, k])
                    if v > pivot_tol:
                        b = blocks[j]
                        if b < bestblock or (b == bestblock and v > bestval):
                            bestblock = b
                            bestval = v
                            best = j
            if best < 0:
                return W, perm, k
            c = V[best, k]
            for t in range(N):
                W[best, t] /= c
                V[best, t] /= c
            for j in range(N):
                if j != best:
                    f = V[j, k]
                    if f != 0.0:
                        for t in range(N):
                            W[j, t] -= f * W[best, t]
                            V[j, t] -= f * V[best, t]
            taken[best] = True
            perm[k] = best
        return W, perm, -1

    @njit(cache=True)
    def abs_row_sums_numba(M):
        P, N = M.shape
        out = np.empty(P)
        for p in range(P):
            s = 0.0
            for j in range(N):
                s += abs(M[p, j])
            out[p] = s
        return out

    basis_matrix = basis_matrix_numba
    newton_eliminate = newton_eliminate_numba
    abs_row_sums = abs_row_sums_numba
else:
    basis_matrix = basis_matrix_numpy
    newton_eliminate = newton_eliminate_numpy
    abs_row_sums = abs_row_sums_numpy
