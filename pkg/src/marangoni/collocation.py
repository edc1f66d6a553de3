"""Chebyshev collocation of the linear problem, used as an independent check
on the closed-form growth rates and to seed complex roots."""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

# spurious infinite eigenvalues from the boundary rows come out huge
_SPURIOUS = 1e6


def chebyshev_matrix(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Differentiation matrix on z in [0, 1]; node 0 is z = 1, node N is z = 0."""
    x = np.cos(np.pi * np.arange(N + 1) / N)
    c = np.hstack([2.0, np.ones(N - 1), 2.0]) * (-1.0) ** np.arange(N + 1)
    X = np.tile(x, (N + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    return 2.0 * D, (x + 1.0) / 2.0


def collocation_spectrum(alpha: float, lam: float, Pr: float, Bi: float, N: int = 64) -> np.ndarray:
    """Growth rates of the collocated problem, sorted by decreasing real part.

    Written with the auxiliary field Omega = (D^2 - alpha^2) W so that only
    second derivatives appear, which keeps the matrices well conditioned.
    """
    D, _ = chebyshev_matrix(N)
    n = N + 1
    Id = np.eye(n)
    D2 = D @ D
    L = D2 - alpha**2 * Id
    A = np.zeros((3 * n, 3 * n))
    B = np.zeros((3 * n, 3 * n))
    W, Om, Th = slice(0, n), slice(n, 2 * n), slice(2 * n, 3 * n)
    A[W, W] = L                         # L W - Omega = 0
    A[W, Om] = -Id
    A[Om, Om] = Pr * L                  # Pr L Omega = beta Omega
    B[Om, Om] = Id
    A[Th, Th] = L                       # L Theta + W = beta Theta
    A[Th, W] = Id
    B[Th, Th] = Id
    for r in (0, N, n, n + N, 2 * n, 2 * n + N):
        A[r] = 0.0
        B[r] = 0.0
    A[0, 0] = 1.0                       # W(1) = 0
    A[N, N] = 1.0                       # W(0) = 0
    A[n, W] = D2[0]                     # D^2W(1) + alpha^2 lam Theta(1) = 0
    A[n, 2 * n] = alpha**2 * lam
    A[n + N, W] = D[N]                  # DW(0) = 0
    A[2 * n, Th] = D[0]                 # DTheta(1) + Bi Theta(1) = 0
    A[2 * n, 2 * n] += Bi
    A[2 * n + N, 2 * n + N] = 1.0       # Theta(0) = 0
    # rows without beta (the W block and the boundary rows) are constraints:
    # restrict the pencil to their null space
    alg = np.r_[np.arange(n), [n, n + N, 2 * n, 2 * n + N]]
    dyn = np.setdiff1d(np.arange(3 * n), alg)
    Z = sla.null_space(A[alg])
    ev = sla.eig(A[dyn] @ Z, B[dyn] @ Z, right=False)
    ev = ev[np.isfinite(ev)]
    ev = ev[np.abs(ev) < _SPURIOUS * max(1.0, Pr)]
    return ev[np.lexsort((-ev.imag, -ev.real))]
