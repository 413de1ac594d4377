"""Cyclic Jacobi eigendecomposition for small symmetric matrices."""

from __future__ import annotations

import numpy as np


class JacobiNonConvergence(ArithmeticError):
    def __init__(self, sweeps: int, off_norm: float):
        super().__init__(f"Jacobi did not converge in {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")
        self.sweeps = sweeps
        self.off_norm = off_norm


def _off_max(A: np.ndarray) -> float:
    off = np.abs(A - np.diag(np.diag(A)))
    return float(off.max()) if off.size else 0.0


def jacobi_eigh(S, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigenvalues (descending) and unit eigenvectors (columns) of symmetric ``S``.

    Sweeps every (p, q) pair in row order, annihilating ``S[p, q]`` with a
    plane rotation, until every off-diagonal magnitude is below ``tol``.
    """
    A = np.array(S, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    A = (A + A.T) / 2
    n = A.shape[0]
    V = np.eye(n)

    for sweep in range(max_sweeps + 1):
        if _off_max(A) < tol:
            break
        if sweep == max_sweeps:
            off = A - np.diag(np.diag(A))
            raise JacobiNonConvergence(max_sweeps, float(np.linalg.norm(off)))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                app, aqq = A[p, p], A[q, q]
                # negligible next to both diagonal entries: rounding noise
                if sweep > 3 and abs(app) + 100 * abs(apq) == abs(app) and abs(aqq) + 100 * abs(apq) == abs(aqq):
                    A[p, q] = A[q, p] = 0.0
                    continue
                diff = aqq - app
                if abs(diff) * 1e-150 > abs(2.0 * apq):
                    t = apq / diff  # theta would overflow; t ~ 1/(2 theta)
                else:
                    theta = diff / (2.0 * apq)
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p, col_q = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p, row_q = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0

                v_p, v_q = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * v_p - s * v_q
                V[:, q] = s * v_p + c * v_q

    eigvals = np.diag(A).copy()
    order = np.argsort(-eigvals, kind="stable")
    return eigvals[order], V[:, order]


def orient(vectors: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-magnitude entry is positive."""
    out = np.array(vectors, dtype=float)
    for i, row in enumerate(out):
        if row[np.argmax(np.abs(row))] < 0:
            out[i] = -row
    return out
