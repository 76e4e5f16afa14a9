"""Square complex linear systems du/dt = Au.

Hermitian splitting A = H1 + iH2, spectral data of the Hermitian part, the
dense matrix-exponential oracle and the exponential stabilization shift.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from decorators import complex_arrays_decorator
from errors import DimensionError, EvolutionOverflowError, NumericalError

type ComplexMatrix = NDArray[np.complex128]
type ComplexVector = NDArray[np.complex128]
type RealVector = NDArray[np.float64]

logger = logging.getLogger(__name__)

ABSOLUTE_FLOOR = 1e-14
SPLIT_TOL = 1e-12
SPECTRAL_TOL = 1e-10


@dataclass(frozen=True)
class HermitianSplit:
    A: ComplexMatrix
    H1: ComplexMatrix
    H2: ComplexMatrix
    n: int

    def reconstruct(self) -> ComplexMatrix:
        return self.H1 + 1j * self.H2


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: RealVector
    eigenvectors: ComplexMatrix
    lambda_plus: float
    lambda_min: float


def tolerance(reference: NDArray[np.complex128], relative: float) -> float:
    """Tolerance relative to the Frobenius norm of ``reference`` with a floor."""
    return max(relative * float(np.linalg.norm(reference)), ABSOLUTE_FLOOR)


def _frozen(array: NDArray[np.complex128]) -> NDArray[np.complex128]:
    array.setflags(write=False)
    return array


@complex_arrays_decorator
def hermitian_split(A: ComplexMatrix) -> HermitianSplit:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"matrix must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DimensionError("matrix has non-finite entries")
    adjoint = A.conj().T
    H1 = (A + adjoint) / 2
    H2 = (A - adjoint) / 2j
    return HermitianSplit(
        A=_frozen(A.copy()), H1=_frozen(H1), H2=_frozen(H2), n=A.shape[0]
    )


def _canonical_phase(vectors: ComplexMatrix) -> ComplexMatrix:
    # first nonzero component of every column made real and positive
    fixed = vectors.copy()
    for j in range(fixed.shape[1]):
        column = fixed[:, j]
        nonzero = np.flatnonzero(np.abs(column) > SPECTRAL_TOL)
        if nonzero.size:
            pivot = column[nonzero[0]]
            fixed[:, j] = column * (abs(pivot) / pivot)
    return fixed


def _eigen_order(eigenvalues: RealVector, vectors: ComplexMatrix) -> list[int]:
    def sort_key(j: int) -> tuple[float, tuple[float, ...]]:
        column = vectors[:, j]
        pivot = int(np.flatnonzero(np.abs(column) > SPECTRAL_TOL)[0])
        return (
            round(float(eigenvalues[j]), 10),
            (float(pivot), -round(float(abs(column[pivot])), 10)),
        )

    return sorted(range(eigenvalues.size), key=sort_key)


def spectral_data(split: HermitianSplit) -> SpectralData:
    try:
        eigenvalues, vectors = scipy.linalg.eigh(split.H1)
    except np.linalg.LinAlgError as error:
        residual = float(np.linalg.norm(split.H1 - split.H1.conj().T))
        raise NumericalError("eigensolver did not converge", residual) from error
    vectors = _canonical_phase(vectors.astype(np.complex128))
    order = _eigen_order(eigenvalues, vectors)
    eigenvalues = np.asarray(eigenvalues[order], dtype=np.float64)
    vectors = vectors[:, order]

    residual = float(
        np.linalg.norm(split.H1 @ vectors - vectors * eigenvalues[np.newaxis, :])
    )
    if residual > tolerance(split.H1, SPECTRAL_TOL):
        raise NumericalError("eigen-decomposition residual too large", residual)

    # roundoff above zero, as left by stabilize, counts as stable
    top = float(eigenvalues[-1])
    eigenvalues.setflags(write=False)
    return SpectralData(
        eigenvalues=eigenvalues,
        eigenvectors=_frozen(vectors),
        lambda_plus=top if top > tolerance(split.H1, SPECTRAL_TOL) else 0.0,
        lambda_min=float(eigenvalues[0]),
    )


def is_normal(A: ComplexMatrix) -> bool:
    adjoint = A.conj().T
    return bool(
        np.linalg.norm(A @ adjoint - adjoint @ A) <= tolerance(A @ adjoint, SPLIT_TOL)
    )


def _checked(result: NDArray[np.complex128]) -> NDArray[np.complex128]:
    if not np.all(np.isfinite(result)):
        raise EvolutionOverflowError("matrix exponential overflowed")
    return result


def normal_exponential(A: ComplexMatrix, t: float) -> ComplexMatrix:
    """e^{At} for a normal A through its unitary (complex Schur) diagonalization."""
    schur_form, unitary = scipy.linalg.schur(A, output="complex")
    with np.errstate(over="ignore", invalid="ignore"):
        phases = np.exp(np.diag(schur_form) * t)
        return _checked((unitary * phases[np.newaxis, :]) @ unitary.conj().T)


def eigen_exponential(A: ComplexMatrix, t: float) -> ComplexMatrix:
    """e^{At} through a general eigendecomposition V e^{Λt} V^{-1}."""
    eigenvalues, vectors = scipy.linalg.eig(A)
    with np.errstate(over="ignore", invalid="ignore"):
        scaled = vectors * np.exp(eigenvalues * t)[np.newaxis, :]
        return _checked(scipy.linalg.solve(vectors.T, scaled.T).T)


def matrix_exponential(A: ComplexMatrix, t: float) -> ComplexMatrix:
    if is_normal(A):
        return normal_exponential(A, t)
    with np.errstate(over="ignore", invalid="ignore"):
        return _checked(scipy.linalg.expm(A * t))


@complex_arrays_decorator
def reference_evolve(A: ComplexMatrix, u0: ComplexVector, t: float) -> ComplexVector:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"matrix must be square, got shape {A.shape}")
    if u0.shape != (A.shape[0],):
        raise DimensionError(f"vector length {u0.shape} does not match {A.shape}")
    if not np.isfinite(t):
        raise EvolutionOverflowError("evolution time must be finite")
    with np.errstate(over="ignore", invalid="ignore"):
        return _checked(matrix_exponential(A, float(t)) @ u0)


def stabilize(split: HermitianSplit, c: float) -> HermitianSplit:
    if c == 0:
        return split
    logger.debug("stabilizing with shift c=%s", c)
    return hermitian_split(split.A - c * np.eye(split.n))
