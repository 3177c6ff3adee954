"""Truncated Fock-space operator algebra and the special functions it needs.

Everything here is pure and deterministic.  Polynomials are evaluated by
three-term recurrences (factorial-ratio forms overflow past degree ~20);
factorial ratios that do appear downstream go through log-gamma.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

__all__ = [
    "FockOperator",
    "laguerre",
    "hermite",
    "taylor_f",
    "quadrature_operators",
    "coherent_overlap",
    "coherent_state_vector",
    "displaced_thermal_matrix",
    "thermal_matrix",
    "hermitian_sqrt",
    "hermitian_log",
    "sqrt_factorial_ratio",
]

# Relative eigenvalue floor used by the matrix log (and, mirrored at zero, by
# the matrix sqrt).  Mirrors the usual perturbation trick for relative
# entropies of rank-deficient states.
CLAMP_REL = 1e-12


@dataclass
class FockOperator:
    """A complex square matrix on the truncated basis {|0>, ..., |N>}.

    ``hermitian=True`` enforces exact Hermiticity at construction: the input
    must be Hermitian up to round-off and is symmetrized, so that
    ``entries == entries.conj().T`` holds exactly afterwards.
    """

    entries: np.ndarray
    hermitian: bool = False
    dim: int = field(init=False)

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.entries, dtype=complex))
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if self.hermitian:
            asym = np.max(np.abs(m - m.conj().T))
            scale = max(1.0, float(np.max(np.abs(m))))
            if asym > 1e-8 * scale:
                raise ValueError(f"matrix tagged hermitian is not (asymmetry {asym:.3e})")
            m = 0.5 * (m + m.conj().T)
        self.entries = m
        self.dim = m.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is not None:
            return self.entries.astype(dtype)
        return self.entries


def laguerre(k: int, j: int, x: float) -> float:
    """Generalized Laguerre polynomial L_k^(j)(x) by the stable recurrence.

    Raises ValueError for negative degree or parameter.
    """
    if k < 0 or j < 0:
        raise ValueError(f"laguerre needs k >= 0 and j >= 0, got k={k}, j={j}")
    if k == 0:
        return 1.0
    prev = 1.0
    cur = 1.0 + j - x
    for i in range(1, k):
        prev, cur = cur, ((2 * i + 1 + j - x) * cur - (i + j) * prev) / (i + 1)
    return cur


def hermite(ell: int, z: complex) -> complex:
    """Physicists' Hermite polynomial H_ell(z), complex argument allowed."""
    if ell < 0:
        raise ValueError(f"hermite needs ell >= 0, got {ell}")
    if ell == 0:
        return 1.0 + 0.0j
    prev = 1.0 + 0.0j
    cur = 2.0 * z
    for i in range(1, ell):
        prev, cur = cur, 2.0 * z * cur - 2.0 * i * prev
    return cur


def _binomial_series(s: float, n: int) -> np.ndarray:
    # Coefficients of (1-t)^(-s) up to t^n: c_m = C(s+m-1, m), by recurrence.
    c = np.empty(n + 1)
    c[0] = 1.0
    for m in range(1, n + 1):
        c[m] = c[m - 1] * (s + m - 1) / m
    return c


def taylor_f(n: int, a: float, alpha: float, k: float) -> float:
    """Coefficient of t^n in (1-t)^(-alpha+k) * (1-(1+1/a)t)^(-(k+1)).

    Computed as the Cauchy product of the two binomial series.
    """
    if n < 0:
        raise ValueError(f"taylor_f needs n >= 0, got {n}")
    if a <= 0:
        raise ValueError(f"taylor_f needs a > 0, got {a}")
    c1 = _binomial_series(alpha - k, n)
    c2 = _binomial_series(k + 1.0, n) * (1.0 + 1.0 / a) ** np.arange(n + 1)
    return float(np.dot(c1, c2[::-1]))


def quadrature_operators(N: int) -> tuple[FockOperator, FockOperator, FockOperator, FockOperator]:
    """Truncated q, p, photon-number and d = a^2 + a+^2 matrices at cutoff N.

    The annihilation operator has <n-1|a|n> = sqrt(n).  The truncated
    commutator [q, p] - i*identity is nonzero only in the last row/column.
    """
    if N < 1:
        raise ValueError("cutoff N must be >= 1; quadratures degenerate at N = 0")
    a = np.diag(np.sqrt(np.arange(1, N + 1)).astype(complex), k=1)
    ad = a.conj().T
    q = (ad + a) / np.sqrt(2.0)
    p = 1j * (ad - a) / np.sqrt(2.0)
    n_op = ad @ a
    d = a @ a + ad @ ad
    return (
        FockOperator(q, hermitian=True),
        FockOperator(p, hermitian=True),
        FockOperator(n_op, hermitian=True),
        FockOperator(d, hermitian=True),
    )


def coherent_overlap(a: complex, b: complex) -> complex:
    """Overlap <b|a> of two coherent states."""
    return np.exp(-0.5 * (abs(a) ** 2 + abs(b) ** 2) + np.conj(b) * a)


def coherent_state_vector(alpha: complex, N: int) -> np.ndarray:
    """Amplitudes <n|alpha> for n = 0..N (not renormalized after truncation)."""
    n = np.arange(N + 1)
    logmag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1) if alpha != 0 else None
    if alpha == 0:
        v = np.zeros(N + 1, dtype=complex)
        v[0] = 1.0
        return v
    phase = np.exp(1j * n * np.angle(alpha))
    return np.exp(logmag) * phase


def sqrt_factorial_ratio(m: int, n: int) -> float:
    """sqrt(m!/n!) via log-gamma; exact factorials overflow at the cutoffs used."""
    return float(np.exp(0.5 * (gammaln(m + 1) - gammaln(n + 1))))


def thermal_matrix(nbar: float, N: int) -> np.ndarray:
    """Truncated thermal state diag(nbar^n / (1+nbar)^(n+1))."""
    if nbar < 0:
        raise ValueError(f"mean photon number must be >= 0, got {nbar}")
    if nbar == 0:
        rho = np.zeros((N + 1, N + 1), dtype=complex)
        rho[0, 0] = 1.0
        return rho
    n = np.arange(N + 1)
    return np.diag(np.exp(n * np.log(nbar) - (n + 1) * np.log1p(nbar))).astype(complex)


def displaced_thermal_matrix(alpha: complex, nbar: float, N: int) -> np.ndarray:
    """Photon-number matrix of D(alpha) rho_th(nbar) D(alpha)+, truncated at N.

    For m <= n the entry is
        exp(-|alpha|^2/(1+nbar)) * nbar^m/(1+nbar)^(n+1) * conj(alpha)^(n-m)
        * sqrt(m!/n!) * L_m^(n-m)(-|alpha|^2/(nbar(1+nbar))),
    the rest by Hermiticity.  nbar -> 0 reduces to the coherent projector.
    """
    if nbar < 0:
        raise ValueError(f"mean photon number must be >= 0, got {nbar}")
    if nbar < 1e-12:
        v = coherent_state_vector(alpha, N)
        return np.outer(v, v.conj())
    rho = np.zeros((N + 1, N + 1), dtype=complex)
    aa = abs(alpha) ** 2
    larg = -aa / (nbar * (1.0 + nbar))
    for m in range(N + 1):
        for n in range(m, N + 1):
            logmag = (
                -aa / (1.0 + nbar)
                + m * np.log(nbar)
                - (n + 1) * np.log1p(nbar)
                + 0.5 * (gammaln(m + 1) - gammaln(n + 1))
            )
            val = np.exp(logmag) * np.conj(alpha) ** (n - m) * laguerre(m, n - m, larg)
            rho[m, n] = val
            rho[n, m] = np.conj(val)
    return rho


def _eig_hermitian(M: FockOperator | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = np.asarray(M, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if np.max(np.abs(m - m.conj().T)) > 1e-8 * max(1.0, float(np.max(np.abs(m)))):
        raise ValueError("matrix function of a non-Hermitian input")
    return np.linalg.eigh(0.5 * (m + m.conj().T))


def hermitian_sqrt(M: FockOperator | np.ndarray) -> FockOperator:
    """PSD square root by eigendecomposition; eigenvalues below the clamp
    threshold go to zero first."""
    w, U = _eig_hermitian(M)
    floor = CLAMP_REL * max(float(w[-1]), 0.0)
    w = np.where(w < floor, 0.0, w)
    return FockOperator((U * np.sqrt(w)) @ U.conj().T, hermitian=True)


def hermitian_log(M: FockOperator | np.ndarray) -> FockOperator:
    """Matrix log by eigendecomposition with eigenvalues clamped to
    CLAMP_REL * lambda_max before the log."""
    w, U = _eig_hermitian(M)
    if w[-1] <= 0:
        raise ValueError("matrix log needs at least one positive eigenvalue")
    w = np.maximum(w, CLAMP_REL * float(w[-1]))
    return FockOperator((U * np.log(w)) @ U.conj().T, hermitian=True)
