"""Region operators and moment observables of the noisy heterodyne detector.

Region operator R_j integrates the POVM over the angular sector
[(2j-1)pi/4, (2j+1)pi/4) outside a central disk of radius delta_a; the
first/second-moment observables integrate the POVM against
sqrt(2)Re(y), sqrt(2)Im(y) and their squares.  Identical detector arms get
closed forms (angular integrals are elementary, radial integrals reduce to a
gamma function times a Taylor coefficient); the ideal detector reduces to
quadrature operators and incomplete-gamma radial masses; distinct arms fall
back to per-entry 2-D quadrature, which is capped at small cutoffs because it
costs O(N^2) double integrals.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gamma as gamma_fn

import numpy as np
from scipy import integrate
from scipy.special import gammaincc, gammainc, gammaln

from .detector import DetectorModel, povm_element_general
from .fock import FockOperator, laguerre, quadrature_operators, taylor_f

__all__ = [
    "ObservableSet",
    "RegionSet",
    "region_operators",
    "region_complement",
    "moment_observables",
    "observable_set",
    "NUMERIC_CUTOFF_LIMIT",
]

# The distinct-arm fallback performs one adaptive 2-D quadrature per matrix
# entry; past this cutoff the cost is prohibitive without an explicit opt-in.
NUMERIC_CUTOFF_LIMIT = 10

_RADIAL_TOL = 1e-12


@dataclass(frozen=True)
class RegionSet:
    """The four key-map region operators plus how they were obtained."""

    ops: tuple[FockOperator, FockOperator, FockOperator, FockOperator]
    method: str

    def __iter__(self):
        return iter(self.ops)

    def __getitem__(self, j):
        return self.ops[j]

    def __len__(self):
        return 4


@dataclass(frozen=True)
class ObservableSet:
    """First/second-moment observables and region operators for one detector."""

    fq: FockOperator
    fp: FockOperator
    sq: FockOperator
    sp: FockOperator
    regions: RegionSet | None = None
    method: str = "closed-form"


def _sector_phase(k: int, j: int) -> complex:
    # Integral of e^{ik theta} over [(2j-1)pi/4, (2j+1)pi/4), k != 0.
    return 1j * (np.exp(1j * k * (2 * j - 1) * np.pi / 4) - np.exp(1j * k * (2 * j + 1) * np.pi / 4)) / k


def _log_cmn(m: int, n: int, eta: float, nbar: float) -> float:
    # C_{m,n} = (1/(pi eta^{(n-m)/2+1})) sqrt(m!/n!) nbar^m/(1+nbar)^{n+1}
    return (
        -np.log(np.pi)
        - ((n - m) / 2 + 1) * np.log(eta)
        + 0.5 * (gammaln(m + 1) - gammaln(n + 1))
        + m * np.log(nbar)
        - (n + 1) * np.log1p(nbar)
    )


def _radial_tail(m: int, n: int, eta: float, nbar: float, delta_a: float) -> float:
    """integral_{delta_a}^inf exp(-r^2/A) L_m^{(n-m)}(-r^2/B) r^{n-m+1} dr
    with A = eta(1+nbar), B = eta nbar (1+nbar), for m <= n."""
    A = eta * (1.0 + nbar)
    B = eta * nbar * (1.0 + nbar)
    k = n - m
    full = 0.5 * A ** (k / 2 + 1) * gamma_fn(k / 2 + 1) * taylor_f(m, nbar, k, k / 2)
    if delta_a == 0.0:
        return full
    head, _ = integrate.quad(
        lambda r: np.exp(-r * r / A) * laguerre(m, k, -r * r / B) * r ** (k + 1),
        0.0,
        delta_a,
        epsabs=_RADIAL_TOL,
    )
    return full - head


def _ideal_regions(delta_a: float, N: int) -> tuple[FockOperator, ...]:
    ops = []
    x = delta_a * delta_a
    for j in range(4):
        R = np.zeros((N + 1, N + 1), dtype=complex)
        for m in range(N + 1):
            R[m, m] = 0.25 * gammaincc(m + 1, x)
            for n in range(m + 1, N + 1):
                s = (m + n) / 2 + 1
                radial = 0.5 * gamma_fn(s) * gammaincc(s, x)
                val = (
                    _sector_phase(m - n, j)
                    * radial
                    * np.exp(-np.log(np.pi) - 0.5 * (gammaln(m + 1) + gammaln(n + 1)))
                )
                R[m, n] = val
                R[n, m] = np.conj(val)
        ops.append(FockOperator(R, hermitian=True))
    return tuple(ops)


def _simple_regions(det: DetectorModel, delta_a: float, N: int) -> tuple[FockOperator, ...]:
    eta, nbar = det.eta_d, det.nbar_d
    A = eta * (1.0 + nbar)
    B = eta * nbar * (1.0 + nbar)
    radial = {}
    for m in range(N + 1):
        for n in range(m + 1, N + 1):
            radial[(m, n)] = _radial_tail(m, n, eta, nbar, delta_a)
    diag_corr = np.zeros(N + 1)
    if delta_a > 0.0:
        for m in range(N + 1):
            head, _ = integrate.quad(
                lambda r: r * np.exp(-r * r / A) * laguerre(m, 0, -r * r / B),
                0.0,
                delta_a,
                epsabs=_RADIAL_TOL,
            )
            diag_corr[m] = np.exp(m * np.log(nbar) - (m + 1) * np.log1p(nbar)) * head / (2 * eta)
    ops = []
    for j in range(4):
        R = np.zeros((N + 1, N + 1), dtype=complex)
        for m in range(N + 1):
            R[m, m] = 0.25 - diag_corr[m]
            for n in range(m + 1, N + 1):
                val = np.exp(_log_cmn(m, n, eta, nbar)) * _sector_phase(m - n, j) * radial[(m, n)]
                R[m, n] = val
                R[n, m] = np.conj(val)
        ops.append(FockOperator(R, hermitian=True))
    return tuple(ops)


def _polar_grid_integral(det: DetectorModel, N: int, weights, r_lo, r_hi, th_lo, th_hi, n_r, n_th):
    # Tensor Gauss-Legendre integral of weight(y) G_y over the polar patch,
    # done for all weights and all matrix entries in one POVM pass per node.
    xr, wr = np.polynomial.legendre.leggauss(n_r)
    xt, wt = np.polynomial.legendre.leggauss(n_th)
    r = 0.5 * (r_hi - r_lo) * (xr + 1.0) + r_lo
    wr = wr * 0.5 * (r_hi - r_lo)
    th = 0.5 * (th_hi - th_lo) * (xt + 1.0) + th_lo
    wt = wt * 0.5 * (th_hi - th_lo)
    out = [np.zeros((N + 1, N + 1), dtype=complex) for _ in weights]
    for ri, rwi in zip(r, wr):
        for ti, twi in zip(th, wt):
            y = ri * np.exp(1j * ti)
            g = povm_element_general(y, det, N).entries
            base = rwi * twi * ri
            for acc, w in zip(out, weights):
                acc += (base * w(y)) * g
    return out


def _polar_integral_refined(det: DetectorModel, N: int, weights, r_lo, r_hi, th_lo, th_hi, tol=1e-8):
    # Nested Gauss rule: refine the node counts until two levels agree.
    n_r, n_th = 48, 24
    prev = _polar_grid_integral(det, N, weights, r_lo, r_hi, th_lo, th_hi, n_r, n_th)
    err = np.inf
    for _ in range(3):
        n_r, n_th = n_r + 24, n_th + 12
        cur = _polar_grid_integral(det, N, weights, r_lo, r_hi, th_lo, th_hi, n_r, n_th)
        err = max(float(np.max(np.abs(c - p))) for c, p in zip(cur, prev))
        if err < tol:
            return cur
        prev = cur
    raise RuntimeError(f"polar quadrature did not converge (last refinement change {err:.2e})")


def _numeric_box(det: DetectorModel) -> float:
    return 6.0 * np.sqrt(1.0 + max(det.nu1, det.nu2)) + 4.0


def _general_regions(det: DetectorModel, delta_a: float, N: int) -> tuple[FockOperator, ...]:
    r_hi = _numeric_box(det)
    ops = []
    for j in range(4):
        th_lo, th_hi = (2 * j - 1) * np.pi / 4, (2 * j + 1) * np.pi / 4
        (R,) = _polar_integral_refined(det, N, [lambda y: 1.0], delta_a, r_hi, th_lo, th_hi)
        ops.append(FockOperator(0.5 * (R + R.conj().T), hermitian=True))
    return tuple(ops)


def region_operators(
    det: DetectorModel, delta_a: float, N: int, allow_large_numeric: bool = False
) -> RegionSet:
    """Key-map region operators R_0..R_3 in the truncated photon-number basis.

    With delta_a = 0 the four operators resolve the identity exactly at every
    truncation (diagonals are 1/4 each; off-diagonal sector phases telescope).
    """
    if delta_a < 0:
        raise ValueError(f"postselection radius must be >= 0, got {delta_a}")
    if N < 1:
        raise ValueError("cutoff N must be >= 1")
    if det.is_ideal():
        return RegionSet(_ideal_regions(delta_a, N), "ideal")
    if det.simple_case():
        return RegionSet(_simple_regions(det, delta_a, N), "closed-form")
    if N > NUMERIC_CUTOFF_LIMIT and not allow_large_numeric:
        raise ValueError(
            f"distinct detector arms use per-entry 2-D quadrature; N={N} exceeds the "
            f"cap {NUMERIC_CUTOFF_LIMIT} (pass allow_large_numeric=True to override)"
        )
    return RegionSet(_general_regions(det, delta_a, N), "numeric")


def region_complement(det: DetectorModel, delta_a: float, N: int) -> FockOperator:
    """Operator of the discarded central disk |y| < delta_a; diagonal, since
    the full-circle angular integral kills every off-diagonal entry."""
    if delta_a < 0:
        raise ValueError(f"postselection radius must be >= 0, got {delta_a}")
    if det.is_ideal():
        diag = gammainc(np.arange(N + 1) + 1, delta_a * delta_a)
        return FockOperator(np.diag(diag).astype(complex), hermitian=True)
    if not det.simple_case():
        raise ValueError("disk complement implemented for identical arms only")
    eta, nbar = det.eta_d, det.nbar_d
    A, B = eta * (1 + nbar), eta * nbar * (1 + nbar)
    diag = np.zeros(N + 1)
    for m in range(N + 1):
        head, _ = integrate.quad(
            lambda r: r * np.exp(-r * r / A) * laguerre(m, 0, -r * r / B),
            0.0,
            delta_a,
            epsabs=_RADIAL_TOL,
        )
        diag[m] = np.exp(m * np.log(nbar) - (m + 1) * np.log1p(nbar)) * head * 2 / eta
    return FockOperator(np.diag(diag).astype(complex), hermitian=True)


def _ideal_moments(N: int) -> tuple[FockOperator, FockOperator, FockOperator, FockOperator]:
    q, p, n_op, d = quadrature_operators(N)
    eye = np.eye(N + 1)
    sq = FockOperator(n_op.entries + d.entries / 2 + eye, hermitian=True)
    sp = FockOperator(n_op.entries - d.entries / 2 + eye, hermitian=True)
    return q, p, sq, sp


def _simple_moments(det: DetectorModel, N: int):
    eta, nbar = det.eta_d, det.nbar_d
    A = eta * (1.0 + nbar)
    fq = np.zeros((N + 1, N + 1), dtype=complex)
    fp = np.zeros((N + 1, N + 1), dtype=complex)
    sq = np.zeros((N + 1, N + 1), dtype=complex)
    sp = np.zeros((N + 1, N + 1), dtype=complex)
    for m in range(N + 1):
        diag = np.pi * np.exp(_log_cmn(m, m, eta, nbar)) * A**2 * taylor_f(m, nbar, 0.0, 1.0)
        sq[m, m] = diag
        sp[m, m] = diag
        if m + 1 <= N:
            first = (np.pi / np.sqrt(2)) * np.exp(_log_cmn(m, m + 1, eta, nbar)) * A**2 * taylor_f(m, nbar, 1.0, 1.0)
            fq[m, m + 1] = first
            fq[m + 1, m] = first
            fp[m, m + 1] = -1j * first
            fp[m + 1, m] = 1j * first
        if m + 2 <= N:
            second = np.pi * np.exp(_log_cmn(m, m + 2, eta, nbar)) * A**3 * taylor_f(m, nbar, 2.0, 2.0)
            sq[m, m + 2] = second
            sq[m + 2, m] = second
            sp[m, m + 2] = -second
            sp[m + 2, m] = -second
    return tuple(FockOperator(x, hermitian=True) for x in (fq, fp, sq, sp))


def _general_moments(det: DetectorModel, N: int):
    r_hi = _numeric_box(det)
    weights = [
        lambda y: np.sqrt(2.0) * y.real,
        lambda y: np.sqrt(2.0) * y.imag,
        lambda y: 2.0 * y.real**2,
        lambda y: 2.0 * y.imag**2,
    ]
    mats = _polar_integral_refined(det, N, weights, 0.0, r_hi, 0.0, 2 * np.pi)
    return tuple(FockOperator(0.5 * (M + M.conj().T), hermitian=True) for M in mats)


def moment_observables(
    det: DetectorModel, N: int, allow_large_numeric: bool = False
) -> ObservableSet:
    """First-moment (F_Q, F_P) and second-moment (S_Q, S_P) observables.

    For identical arms F_Q and F_P live on the first off-diagonals and
    S_Q/S_P on the main and second off-diagonals; an ideal detector gives
    exactly q, p, n + d/2 + 1 and n - d/2 + 1.
    """
    if N < 2:
        raise ValueError("cutoff N must be >= 2 for second-moment observables")
    if det.is_ideal():
        fq, fp, sq, sp = _ideal_moments(N)
        return ObservableSet(fq, fp, sq, sp, method="ideal")
    if det.simple_case():
        fq, fp, sq, sp = _simple_moments(det, N)
        return ObservableSet(fq, fp, sq, sp, method="closed-form")
    if N > NUMERIC_CUTOFF_LIMIT and not allow_large_numeric:
        raise ValueError(
            f"distinct detector arms use per-entry 2-D quadrature; N={N} exceeds the "
            f"cap {NUMERIC_CUTOFF_LIMIT} (pass allow_large_numeric=True to override)"
        )
    fq, fp, sq, sp = _general_moments(det, N)
    return ObservableSet(fq, fp, sq, sp, method="numeric")


def observable_set(
    det: DetectorModel, delta_a: float, N: int, allow_large_numeric: bool = False
) -> ObservableSet:
    """Moment observables plus region operators for one detector and radius."""
    base = moment_observables(det, N, allow_large_numeric)
    regions = region_operators(det, delta_a, N, allow_large_numeric)
    return ObservableSet(base.fq, base.fp, base.sq, base.sp, regions, base.method)
