"""Noisy-heterodyne detector model and its POVM in the photon-number basis.

The detector is two homodyne detectors behind a 50:50 splitter, each modeled
as a beam-splitter of transmittance eta_j with a thermal state on the idle
port.  Each POVM element G_y is a scaled projection onto a displaced
(squeezed, if the two arms differ) thermal state; its matrix elements have
closed forms that are built here.  The Wigner-quadrature route in
`povm_oracle_entry` double-checks them without sharing any code path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .fock import FockOperator, coherent_state_vector, displaced_thermal_matrix, hermite
from .wigner import overlap_integral_complex, povm_wigner_gaussian, transition_wigner

__all__ = [
    "DetectorModel",
    "GeneralPovmParams",
    "povm_element_simple",
    "povm_element_general",
    "povm_oracle_entry",
    "IDEAL_NBAR_THRESHOLD",
]

# Below this effective thermal occupation the coherent-projector branch is
# used: the Laguerre arguments contain 1/nbar_d and become numerically
# treacherous, and the ideal limit is exact anyway.
IDEAL_NBAR_THRESHOLD = 1e-12

# lambda_1 == lambda_2 collapses the squeezing of the general POVM; at this
# gap the B-tilde powers in the general formula degenerate and the simple
# displaced-thermal formula takes over.
DEGENERATE_LAMBDA_GAP = 1e-12


@dataclass(frozen=True)
class DetectorModel:
    """Efficiencies and electronic noises (SNU) of the two homodyne arms."""

    eta1: float
    eta2: float
    nu1: float
    nu2: float

    def __post_init__(self):
        for eta in (self.eta1, self.eta2):
            if not 0.0 < eta <= 1.0:
                raise ValueError(f"detector efficiency must be in (0, 1], got {eta}")
        for nu in (self.nu1, self.nu2):
            if nu < 0.0:
                raise ValueError(f"electronic noise must be >= 0, got {nu}")

    @classmethod
    def simple(cls, eta_d: float, nu_el: float) -> "DetectorModel":
        return cls(eta_d, eta_d, nu_el, nu_el)

    @classmethod
    def ideal(cls) -> "DetectorModel":
        return cls(1.0, 1.0, 0.0, 0.0)

    def simple_case(self) -> bool:
        return self.eta1 == self.eta2 and self.nu1 == self.nu2

    @property
    def eta_d(self) -> float:
        if not self.simple_case():
            raise ValueError("eta_d is only defined for the simple (identical-arm) case")
        return self.eta1

    @property
    def nu_el(self) -> float:
        if not self.simple_case():
            raise ValueError("nu_el is only defined for the simple (identical-arm) case")
        return self.nu1

    @property
    def nbar_d(self) -> float:
        """Thermal occupation (1 - eta_d + nu_el)/eta_d of the displaced
        thermal state each G_y projects onto, simple case only."""
        return (1.0 - self.eta_d + self.nu_el) / self.eta_d

    def is_ideal(self) -> bool:
        return self.simple_case() and self.nbar_d < IDEAL_NBAR_THRESHOLD

    def lambdas(self) -> tuple[float, float]:
        """lambda_j = (1 - eta_j + nu_j)/eta_j for the two arms."""
        return (
            (1.0 - self.eta1 + self.nu1) / self.eta1,
            (1.0 - self.eta2 + self.nu2) / self.eta2,
        )

    def ancilla_nbar(self, arm: int) -> float:
        """Mean photon number nu_j / (2(1 - eta_j)) of the thermal state on
        arm j's idle port; only defined for eta_j < 1."""
        eta, nu = (self.eta1, self.nu1) if arm == 1 else (self.eta2, self.nu2)
        if eta >= 1.0:
            if nu == 0.0:
                return 0.0
            raise ValueError("ancilla occupation undefined at eta = 1 with nu > 0")
        return nu / (2.0 * (1.0 - eta))


@dataclass(frozen=True)
class GeneralPovmParams:
    """Displaced-squeezed-thermal parameters of a general-case POVM element."""

    lambda1: float
    lambda2: float
    nbar_het: float
    xi_het: float
    alpha_het: complex

    @classmethod
    def from_detector(cls, det: DetectorModel, y: complex) -> "GeneralPovmParams":
        lam1, lam2 = det.lambdas()
        nbar = (np.sqrt((1 + 2 * lam1) * (1 + 2 * lam2)) - 1) / 2
        xi = 0.25 * np.log((1 + 2 * lam2) / (1 + 2 * lam1))
        alpha = y.real / np.sqrt(det.eta1) + 1j * y.imag / np.sqrt(det.eta2)
        return cls(lam1, lam2, nbar, xi, alpha)


def povm_element_simple(y: complex, det: DetectorModel, N: int) -> FockOperator:
    """G_y in the photon-number basis for identical detector arms:
    (1/(eta_d pi)) times a displaced thermal state at y/sqrt(eta_d) with
    occupation nbar_d.  The near-ideal detector branches to the coherent
    projector (1/pi)|y><y|."""
    if N < 1:
        raise ValueError("cutoff N must be >= 1")
    if not det.simple_case():
        raise ValueError("detector arms differ; use povm_element_general")
    eta = det.eta_d
    rho = displaced_thermal_matrix(y / np.sqrt(eta), det.nbar_d, N)
    return FockOperator(rho / (eta * np.pi), hermitian=True)


def _btilde_sqrt(lam1: float, lam2: float) -> complex:
    # Square-root branch of B-tilde = -|lam1-lam2| / (2(lam1+1)(lam2+1)).
    # The branch must pair with the quadrature axes so that the matrix
    # elements reproduce the detector's two-quadrature Gaussian Wigner form
    # (Re axis governed by lam1, Im by lam2); that fixes i|B|^(1/2) for
    # lam1 > lam2 and -|B|^(1/2) otherwise, verified against the quadrature
    # oracle for both orderings.
    mag = np.sqrt(abs(lam1 - lam2) / (2 * (lam1 + 1) * (lam2 + 1)))
    return 1j * mag if lam1 > lam2 else -mag


def povm_element_general(y: complex, det: DetectorModel, N: int) -> FockOperator:
    """G_y in the photon-number basis for arbitrary (eta_1, nu_1, eta_2, nu_2):
    the displaced-squeezed-thermal matrix elements, prefactor
    1/sqrt(eta_1 eta_2).  Degenerate squeezing routes to the simple formula."""
    if N < 1:
        raise ValueError("cutoff N must be >= 1")
    lam1, lam2 = det.lambdas()
    params = GeneralPovmParams.from_detector(det, y)
    if abs(lam1 - lam2) < DEGENERATE_LAMBDA_GAP:
        # B-tilde -> 0: Hermite terms collapse; the element is a scaled
        # displaced thermal state with the general displacement alpha_het.
        rho = displaced_thermal_matrix(params.alpha_het, params.nbar_het, N)
        return FockOperator(rho / (np.sqrt(det.eta1 * det.eta2) * np.pi), hermitian=True)

    a_t = 1.0 - (lam1 + lam2 + 2.0) / (2.0 * (lam1 + 1) * (lam2 + 1))
    b_sqrt = _btilde_sqrt(lam1, lam2)
    bs_sqrt = np.conj(b_sqrt)
    # The Re axis of the outcome plane belongs to arm 1 and the Im axis to
    # arm 2, matching the Gaussian Wigner form of G_y.
    c_t = params.alpha_het.real / (lam1 + 1) + 1j * params.alpha_het.imag / (lam2 + 1)
    q0 = (
        (1.0 / np.pi)
        / np.sqrt((lam1 + 1) * (lam2 + 1))
        * np.exp(-params.alpha_het.real ** 2 / (lam1 + 1) - params.alpha_het.imag ** 2 / (lam2 + 1))
    )
    herm_arg = c_t / (np.sqrt(2.0) * b_sqrt)
    herm_arg_c = np.conj(c_t) / (np.sqrt(2.0) * bs_sqrt)

    g = np.zeros((N + 1, N + 1), dtype=complex)
    # Bounded lookups; degree <= N.
    herm = [hermite(ell, herm_arg) for ell in range(N + 1)]
    herm_c = [hermite(ell, herm_arg_c) for ell in range(N + 1)]
    pow_b = (b_sqrt / np.sqrt(2.0)) ** np.arange(N + 1)
    pow_bc = (bs_sqrt / np.sqrt(2.0)) ** np.arange(N + 1)
    lg = gammaln(np.arange(N + 2))
    for m in range(N + 1):
        for n in range(m, N + 1):
            acc = 0.0 + 0.0j
            for k in range(m + 1):
                logw = lg[k + 1] + (lg[m + 1] - lg[k + 1] - lg[m - k + 1]) + (
                    lg[n + 1] - lg[k + 1] - lg[n - k + 1]
                )
                acc += np.exp(logw) * a_t**k * pow_b[m - k] * pow_bc[n - k] * herm[m - k] * herm_c[n - k]
            val = acc * q0 * np.exp(-0.5 * (lg[m + 1] + lg[n + 1]))
            g[m, n] = val
            g[n, m] = np.conj(val)
    return FockOperator(g / np.sqrt(det.eta1 * det.eta2), hermitian=True)


def povm_element(y: complex, det: DetectorModel, N: int) -> FockOperator:
    """G_y by whichever closed form applies to the detector."""
    if det.is_ideal():
        v = coherent_state_vector(y, N)
        return FockOperator(np.outer(v, v.conj()) / np.pi, hermitian=True)
    if det.simple_case():
        return povm_element_simple(y, det, N)
    return povm_element_general(y, det, N)


def povm_oracle_entry(m: int, n: int, y: complex, det: DetectorModel, tol: float = 1e-10) -> complex:
    """<m|G_y|n> by phase-space quadrature: the overlap of the transition
    Wigner function of |n><m| with the Gaussian Wigner function of G_y.
    Oracle only; not used by any production path."""
    if m < 0 or n < 0:
        raise ValueError("Fock indices must be >= 0")
    if max(m, n) > 20:
        raise ValueError("oracle entries limited to m, n <= 20")
    wg = povm_wigner_gaussian(y, det.eta1, det.nu1, det.eta2, det.nu2)
    return overlap_integral_complex(transition_wigner(n, m), wg, tol=tol)
