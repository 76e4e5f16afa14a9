"""Semi-analytic profiles in the auxiliary variable p.

A profile is a finite sum v(p) = Σ_k e^{-|p - s_k|} c_k of warped kinks with
vector coefficients. Transport by -H1 ∂_p moves each eigencomponent of a
kink rigidly by λ_i·Δt, so the representation stays exact in continuous p.
Shifts are tracked as integer step counts per eigenvalue, which keeps equal
shifts merged exactly.
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from linear_core import SpectralData

type ComplexVector = NDArray[np.complex128]
type Counts = tuple[int, ...]


@dataclass(frozen=True)
class PiecewiseProfile:
    spectral: SpectralData
    unit: float
    terms: dict[Counts, ComplexVector]

    @property
    def n(self) -> int:
        return int(self.spectral.eigenvalues.size)

    def shift(self, counts: Counts) -> float:
        return self.unit * float(np.dot(counts, self.spectral.eigenvalues))

    def shifts(self) -> NDArray[np.float64]:
        return np.array([self.shift(key) for key in self.terms], dtype=np.float64)

    def coefficients(self) -> NDArray[np.complex128]:
        return np.array(list(self.terms.values()), dtype=np.complex128)


def warped_profile(
    u0: ComplexVector, spectral: SpectralData, unit: float
) -> PiecewiseProfile:
    """Profile of the warped initial data e^{-|p|}·u0."""
    zero: Counts = (0,) * int(spectral.eigenvalues.size)
    return PiecewiseProfile(
        spectral=spectral,
        unit=unit,
        terms={zero: np.asarray(u0, dtype=np.complex128).copy()},
    )


def transport(profile: PiecewiseProfile) -> PiecewiseProfile:
    """Advance by one ``unit`` of the transport equation v_t = -H1 v_p."""
    Q = profile.spectral.eigenvectors
    new_terms: dict[Counts, ComplexVector] = {}
    for counts, vector in profile.terms.items():
        components = Q.conj().T @ vector
        for i in range(profile.n):
            moved = counts[:i] + (counts[i] + 1,) + counts[i + 1 :]
            contribution = Q[:, i] * components[i]
            if moved in new_terms:
                new_terms[moved] = new_terms[moved] + contribution
            else:
                new_terms[moved] = contribution
    return PiecewiseProfile(profile.spectral, profile.unit, new_terms)


def rotate(
    profile: PiecewiseProfile, unitary: NDArray[np.complex128]
) -> PiecewiseProfile:
    """Apply a p-independent matrix to every coefficient."""
    return PiecewiseProfile(
        profile.spectral,
        profile.unit,
        {counts: unitary @ vector for counts, vector in profile.terms.items()},
    )


def evaluate(
    profile: PiecewiseProfile, p: float | NDArray[np.float64]
) -> NDArray[np.complex128]:
    """v(p) with shape (n,) for scalar p, (n, len(p)) for an array."""
    points = np.atleast_1d(np.asarray(p, dtype=np.float64))
    kinks = np.exp(-np.abs(points[np.newaxis, :] - profile.shifts()[:, np.newaxis]))
    values = profile.coefficients().T @ kinks
    return values[:, 0] if np.ndim(p) == 0 else values


def _pair_integrals(
    a: NDArray[np.float64], b: NDArray[np.float64], lower: float
) -> NDArray[np.float64]:
    # ∫_lower^∞ e^{-|p-a| - |p-b|} dp, elementwise for a <= b
    left = np.where(
        lower < a, (np.exp(a - b) - np.exp(np.minimum(2 * lower - a - b, 0.0))) / 2, 0.0
    )
    middle = np.exp(a - b) * np.clip(b - np.maximum(a, lower), 0.0, None)
    right = np.exp(a + b - 2 * np.maximum(b, lower)) / 2
    return left + middle + right


def norm_integral(profile: PiecewiseProfile, lower: float = -np.inf) -> float:
    """∫_lower^∞ ‖v(p)‖² dp in closed form."""
    shifts = profile.shifts()
    coefficients = profile.coefficients()
    gram = coefficients.conj() @ coefficients.T
    a = np.minimum.outer(shifts, shifts)
    b = np.maximum.outer(shifts, shifts)
    return float(np.real(np.sum(gram * _pair_integrals(a, b, lower))))
