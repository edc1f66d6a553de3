"""Boundary matrices whose singularity defines the growth rates.

For fixed (alpha, lambda, Pr, Bi) the forward and adjoint vertical problems
reduce, after imposing the conditions at z = 0 through the divided-difference
basis, to 3x3 systems at z = 1.  Growth rates are the beta where these
matrices are singular; the entries are entire functions of beta.
"""

from __future__ import annotations

import numpy as np

from .basis import divided_difference

_ONE = np.array([1.0])


def _g(kind: str, power: int, nodes) -> complex:
    return complex(divided_difference(kind, power, nodes, _ONE)[0])


def node_values(alpha: float, beta: complex, Pr: float) -> tuple[complex, complex, complex]:
    """(alpha^2, eta^2, mu^2) with eta^2 = alpha^2 + beta/Pr, mu^2 = alpha^2 + beta."""
    a2 = complex(alpha * alpha)
    beta = complex(beta)
    return a2, a2 + beta / Pr, a2 + beta


def forward_matrix(beta: complex, alpha: float, lam: float, Pr: float, Bi: float) -> np.ndarray:
    """Rows: W(1) = 0, DTheta(1) + Bi Theta(1) = 0, D^2W(1) + alpha^2 lam Theta(1) = 0.

    Columns are the coefficients (a, b, d) of
    W = a C[a2, e2] + b S[a2, e2],  Theta = -a C[m2, a2, e2] - b S[m2, a2, e2] + d S(m2).
    """
    a2, e2, m2 = node_values(alpha, beta, Pr)
    N2, N3 = (a2, e2), (m2, a2, e2)
    C3, S3 = _g("C", 0, N3), _g("S", 0, N3)
    Cm, Sm = _g("C", 0, (m2,)), _g("S", 0, (m2,))
    al = a2 * lam
    return np.array(
        [
            [_g("C", 0, N2), _g("S", 0, N2), 0.0],
            [-(_g("S", 1, N3) + Bi * C3), -(C3 + Bi * S3), Cm + Bi * Sm],
            [_g("C", 1, N2) - al * C3, _g("S", 1, N2) - al * S3, al * Sm],
        ],
        dtype=complex,
    )


def adjoint_matrix(beta: complex, alpha: float, lam: float, Pr: float, Bi: float) -> np.ndarray:
    """Rows: W*(1) = 0, D^2W*(1) = 0, DTheta*(1) + Bi Theta*(1) + lam Pr DW*(1) = 0.

    Columns are the coefficients (a, b, e) of
    W* = a C[a2, e2] + b S[a2, e2] + (a2 e / Pr) S[a2, e2, m2],  Theta* = e S(m2).
    """
    a2, e2, m2 = node_values(alpha, beta, Pr)
    N2, N3 = (a2, e2), (a2, e2, m2)
    c = a2 / Pr
    return np.array(
        [
            [_g("C", 0, N2), _g("S", 0, N2), c * _g("S", 0, N3)],
            [_g("C", 1, N2), _g("S", 1, N2), c * _g("S", 1, N3)],
            [
                lam * Pr * _g("S", 1, N2),
                lam * Pr * _g("C", 0, N2),
                _g("C", 0, (m2,)) + Bi * _g("S", 0, (m2,)) + lam * a2 * _g("C", 0, N3),
            ],
        ],
        dtype=complex,
    )


def _growth_scale(alpha: float, beta: complex, Pr: float) -> float:
    # removes the exponential growth of the entries with |beta|
    _, e2, m2 = node_values(alpha, beta, Pr)
    return float(np.exp(-(abs(np.sqrt(e2).real) + abs(np.sqrt(m2).real) + alpha)))


def secular_determinant(beta: complex, alpha: float, lam: float, Pr: float, Bi: float) -> complex:
    """Scaled determinant of the forward matrix; zero exactly at growth rates.

    The positive scale factor does not move roots and keeps values finite
    for large |beta|.  For real beta the value is real.
    """
    M = forward_matrix(beta, alpha, lam, Pr, Bi)
    return complex(np.linalg.det(M)) * _growth_scale(alpha, beta, Pr)


def singularity(M: np.ndarray) -> float:
    """Smallest over largest singular value."""
    s = np.linalg.svd(M, compute_uv=False)
    return float(s[-1] / s[0]) if s[0] > 0 else 0.0


def null_vector(M: np.ndarray) -> np.ndarray:
    _, _, vh = np.linalg.svd(M)
    return vh[-1].conj()


def marangoni_from_growth(beta: complex, alpha: float, Pr: float, Bi: float) -> complex:
    """The lambda for which beta is a growth rate: -D^2W(1) / (alpha^2 Theta(1)).

    W is built to satisfy W(1) = 0 and Theta the Robin condition, leaving the
    Marangoni condition to fix lambda.
    """
    a2, e2, m2 = node_values(alpha, beta, Pr)
    N2, N3 = (a2, e2), (m2, a2, e2)
    a, b = _g("S", 0, N2), -_g("C", 0, N2)
    C3, S3 = _g("C", 0, N3), _g("S", 0, N3)
    Cm, Sm = _g("C", 0, (m2,)), _g("S", 0, (m2,))
    robin = a * (_g("S", 1, N3) + Bi * C3) + b * (C3 + Bi * S3)
    d = robin / (Cm + Bi * Sm)
    theta1 = -a * C3 - b * S3 + d * Sm
    d2w1 = a * _g("C", 1, N2) + b * _g("S", 1, N2)
    return -d2w1 / (a2 * theta1)
