"""Shift operators, finite-difference Laplacians and a statevector emulator.

Qubit 0 is the most significant bit of a basis index. The quantum Fourier
transform follows F|j⟩ = Σ_k e^{2πijk/M}|k⟩/√M, so F†·U_{P,±}·F is the
cyclic shift |j⟩ → |j±1 mod M⟩.
"""

import logging
import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.fft
from numpy.typing import NDArray

from errors import DimensionError, NumericalError, ParameterError, ResourceError
from schrod_engine import PGrid, Representation, SchrodState, to_fourier, to_physical

type ComplexVector = NDArray[np.complex128]
type ComplexMatrix = NDArray[np.complex128]
type RealMatrix = NDArray[np.float64]
type StateTransformer = Callable[[QuantumState], QuantumState]

logger = logging.getLogger(__name__)

MAX_QUBITS = 14
NORM_TOL = 1e-12
ANGLE_FORMAT = ".17g"

Variant = Enum("Variant", ["CYCLIC", "DIRICHLET_TRUNCATED"])
Direction = Enum("Direction", ["PLUS", "MINUS"])
Boundary = Enum("Boundary", ["DIRICHLET", "NEUMANN", "PERIODIC"])

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
_NOT = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_ARITY = {"H": 1, "X": 1, "P": 1, "CP": 2, "SWAP": 2}
_ANGLED = {"P", "CP"}


@dataclass(frozen=True)
class QuantumState:
    amplitudes: ComplexVector
    n_qubits: int


@dataclass(frozen=True)
class Gate:
    name: str
    target: int
    control: int | None = None
    angle: float | None = None


@dataclass(frozen=True)
class ShiftOperator:
    M: int
    variant: Variant
    direction: Direction

    def matrix(self) -> RealMatrix:
        return build_shift(self.M, self.variant, self.direction)


def _is_power_of_two(M: int) -> bool:
    return M > 0 and M & (M - 1) == 0


def _check_qubits(n_qubits: int) -> None:
    if n_qubits > MAX_QUBITS:
        raise ResourceError(
            f"{n_qubits} qubits exceed the {MAX_QUBITS}-qubit statevector cap"
        )


def quantum_state(amplitudes: ComplexVector) -> QuantumState:
    """Normalized statevector; the length must be a power of two."""
    amplitudes = np.asarray(amplitudes, dtype=np.complex128)
    if amplitudes.ndim != 1 or not _is_power_of_two(amplitudes.size):
        raise DimensionError(f"statevector length {amplitudes.size} is not 2^n")
    n_qubits = amplitudes.size.bit_length() - 1
    _check_qubits(n_qubits)
    norm = float(np.linalg.norm(amplitudes))
    if norm == 0:
        raise ParameterError("statevector has zero norm")
    return QuantumState(amplitudes=amplitudes / norm, n_qubits=n_qubits)


def basis_state(n_qubits: int, index: int) -> QuantumState:
    _check_qubits(n_qubits)
    amplitudes = np.zeros(2**n_qubits, dtype=np.complex128)
    amplitudes[index] = 1
    return QuantumState(amplitudes=amplitudes, n_qubits=n_qubits)


def fidelity(first: QuantumState, second: QuantumState) -> float:
    return float(abs(np.vdot(first.amplitudes, second.amplitudes)) ** 2)


def _shift_matrix(M: int, variant: Variant, direction: Direction) -> RealMatrix:
    step = 1 if direction is Direction.PLUS else -1
    S = np.zeros((M, M))
    for j in range(M):
        image = j + step
        if variant is Variant.CYCLIC:
            S[image % M, j] = 1
        elif 0 <= image < M:
            S[image, j] = 1
    return S


def build_shift(M: int, variant: Variant, direction: Direction) -> RealMatrix:
    """Shift |j⟩ → |j±1⟩; the truncated variant drops what leaves the grid."""
    if not _is_power_of_two(M):
        raise ParameterError(f"M must be a power of two, got {M}")
    return _shift_matrix(M, variant, direction)


def build_fd_laplacian(M: int, h: float, bc: Boundary) -> RealMatrix:
    """(S⁻ + S⁺ - 2I)/h² with ghost values fixed by the boundary condition."""
    if h <= 0:
        raise ParameterError(f"h must be positive, got {h}")
    variant = Variant.CYCLIC if bc is Boundary.PERIODIC else Variant.DIRICHLET_TRUNCATED
    laplacian = (
        _shift_matrix(M, variant, Direction.PLUS)
        + _shift_matrix(M, variant, Direction.MINUS)
        - 2 * np.eye(M)
    )
    if bc is Boundary.NEUMANN:
        # ghost values copy the boundary samples
        laplacian[0, 0] += 1
        laplacian[-1, -1] += 1
    return laplacian / h**2


def periodic_laplacian_eigenvalues(M: int, h: float) -> NDArray[np.float64]:
    return -4 / h**2 * np.sin(np.pi * np.arange(M) / M) ** 2


def _apply_single(
    tensor: ComplexMatrix, matrix: ComplexMatrix, target: int
) -> ComplexMatrix:
    return np.moveaxis(np.tensordot(matrix, tensor, axes=([1], [target])), 0, target)


def _selector(n_qubits: int, fixed: dict[int, int]) -> tuple[slice | int, ...]:
    return tuple(fixed.get(qubit, slice(None)) for qubit in range(n_qubits))


def apply_gate(state: QuantumState, gate: Gate) -> QuantumState:
    n = state.n_qubits
    if gate.name not in _ARITY:
        raise ParameterError(f"unknown gate {gate.name!r}")
    qubits = [gate.target] if gate.control is None else [gate.target, gate.control]
    if len(qubits) != _ARITY[gate.name] or len(set(qubits)) != len(qubits):
        arity = _ARITY[gate.name]
        raise ParameterError(f"gate {gate.name} needs {arity} distinct qubits")
    if any(not 0 <= qubit < n for qubit in qubits):
        raise ParameterError(f"gate {gate} addresses a qubit outside 0..{n - 1}")
    phase = np.exp(1j * (gate.angle or 0.0))
    tensor = state.amplitudes.reshape((2,) * n).copy()
    match gate.name:
        case "H":
            tensor = _apply_single(tensor, _HADAMARD, gate.target)
        case "X":
            tensor = _apply_single(tensor, _NOT, gate.target)
        case "P":
            tensor[_selector(n, {gate.target: 1})] *= phase
        case "CP":
            tensor[_selector(n, dict.fromkeys(qubits, 1))] *= phase
        case _:
            tensor = np.swapaxes(tensor, qubits[0], qubits[1])

    amplitudes = np.ascontiguousarray(tensor).reshape(-1)
    drift = abs(float(np.linalg.norm(amplitudes)) - 1)
    if drift > NORM_TOL:
        raise NumericalError(f"gate {gate.name} broke normalization", drift)
    return QuantumState(amplitudes=amplitudes, n_qubits=n)


def apply_circuit(state: QuantumState, gates: Iterable[Gate]) -> QuantumState:
    for gate in gates:
        state = apply_gate(state, gate)
    return state


def gate_counter() -> Callable[[Iterable[Gate]], dict[str, int]]:
    """Running tally of gates by name across every circuit passed in."""
    counts: dict[str, int] = {}

    def count(gates: Iterable[Gate]) -> dict[str, int]:
        for gate in gates:
            counts[gate.name] = counts.get(gate.name, 0) + 1
        return dict(counts)

    return count


def circuit_to_text(gates: Iterable[Gate]) -> str:
    lines = []
    for gate in gates:
        fields = [gate.name, str(gate.target)]
        if gate.control is not None:
            fields.append(str(gate.control))
        if gate.angle is not None:
            fields.append(format(gate.angle, ANGLE_FORMAT))
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n" if lines else ""


def _parse_line(line: str) -> Gate:
    name, *fields = line.split()
    if name not in _ARITY:
        raise ParameterError(f"unknown gate {name!r}")
    expected = _ARITY[name] + (1 if name in _ANGLED else 0)
    if len(fields) != expected:
        raise ParameterError(f"gate line {line!r} needs {expected} fields")
    try:
        qubits = [int(field) for field in fields[: _ARITY[name]]]
        angle = float(fields[-1]) if name in _ANGLED else None
    except ValueError as error:
        raise ParameterError(f"malformed gate line {line!r}") from error
    return Gate(
        name=name,
        target=qubits[0],
        control=qubits[1] if len(qubits) > 1 else None,
        angle=angle,
    )


def circuit_from_text(text: str) -> list[Gate]:
    return [_parse_line(line) for line in text.splitlines() if line.strip()]


def qft_circuit(n: int, offset: int = 0) -> list[Gate]:
    """QFT on qubits offset … offset+n-1, most significant first."""
    gates: list[Gate] = []
    for j in range(n):
        gates.append(Gate("H", offset + j))
        gates.extend(
            Gate("CP", offset + j, offset + k, math.pi / 2 ** (k - j))
            for k in range(j + 1, n)
        )
    gates.extend(
        Gate("SWAP", offset + j, offset + n - 1 - j) for j in range(n // 2)
    )
    return gates


def inverse_qft_circuit(n: int, offset: int = 0) -> list[Gate]:
    return [
        Gate(
            gate.name,
            gate.target,
            gate.control,
            None if gate.angle is None else -gate.angle,
        )
        for gate in reversed(qft_circuit(n, offset))
    ]


def qft_matrix(n: int) -> ComplexMatrix:
    M = 2**n
    k = np.arange(M)
    return np.exp(2j * np.pi * np.outer(k, k) / M) / math.sqrt(M)


def phase_ladder(n_x: int, sign: int) -> tuple[list[Gate], ComplexMatrix]:
    """U_{P,±}: one phase gate per qubit, θ_s = (2π/M)·2^{n_x-1-s}."""
    if n_x < 1:
        raise ParameterError(f"n_x must be at least 1, got {n_x}")
    if sign not in (1, -1):
        raise ParameterError(f"sign must be +1 or -1, got {sign}")
    M = 2**n_x
    gates = [
        Gate("P", s, angle=sign * 2 * math.pi / M * 2 ** (n_x - 1 - s))
        for s in range(n_x)
    ]
    diagonal = np.exp(sign * 2j * np.pi * np.arange(M) / M)
    return gates, np.diag(diagonal)


def shift_by_circuit(state: QuantumState, sign: int) -> QuantumState:
    """Cyclic shift |j⟩ → |j+sign mod M⟩ as QFT, phase ladder, inverse QFT."""
    ladder, _ = phase_ladder(state.n_qubits, sign)
    gates = qft_circuit(state.n_qubits) + ladder + inverse_qft_circuit(state.n_qubits)
    return apply_circuit(state, gates)


def verify_shift_diagonalization(n_x: int) -> float:
    """Max entrywise error of F†U_{P,±}F against the cyclic shifts."""
    if not 1 <= n_x <= MAX_QUBITS // 2:
        raise ParameterError(f"n_x must lie in 1..{MAX_QUBITS // 2}, got {n_x}")
    F = qft_matrix(n_x)
    errors = []
    for sign, direction in ((1, Direction.PLUS), (-1, Direction.MINUS)):
        _, ladder = phase_ladder(n_x, sign)
        shift = ShiftOperator(2**n_x, Variant.CYCLIC, direction).matrix()
        errors.append(float(np.max(np.abs(F.conj().T @ ladder @ F - shift))))
    return max(errors)


def nonnegative_shift(V: NDArray[np.float64]) -> tuple[NDArray[np.float64], float]:
    """Shift V by its minimum; the offset only contributes a global phase."""
    offset = float(np.min(V))
    return np.asarray(V) - offset, offset


def integer_phase_table(V: NDArray[np.float64], n: int) -> NDArray[np.int64]:
    """q_x = ⌊V(x)⌋ for a non-negative V with 2πV ≤ M - 1."""
    M = 2**n
    V = np.asarray(V, dtype=np.float64)
    if np.any(V < 0):
        raise ParameterError("potential must be non-negative, apply nonnegative_shift")
    if np.any(2 * np.pi * V > M - 1):
        raise ParameterError(f"2*pi*V exceeds M - 1 = {M - 1}, use more ancilla qubits")
    return np.floor(V).astype(np.int64)


def _check_table(n: int, q_table: NDArray[np.int64]) -> NDArray[np.int64]:
    M = 2**n
    table = np.asarray(q_table)
    if table.shape != (M,):
        raise DimensionError(f"q table needs {M} entries, got shape {table.shape}")
    if not np.issubdtype(table.dtype, np.integer):
        raise ParameterError("q table entries must be integers")
    if np.any(table < 0) or np.any(table > M - 1):
        raise ParameterError(f"q table entries must lie in 0..{M - 1}")
    return table.astype(np.int64)


def kickback_phases(n: int, q_table: NDArray[np.int64]) -> ComplexMatrix:
    """Dense diagonal e^{-2πi q_x/M} the kickback circuit should reproduce."""
    table = _check_table(n, q_table)
    return np.diag(np.exp(-2j * np.pi * table / 2**n))


def diagonal_unitary_kickback(n: int, q_table: NDArray[np.int64]) -> StateTransformer:
    """Phase e^{-2πi q_x/M} on |x⟩ by modular addition into a QFT'd ancilla |1⟩."""
    table = _check_table(n, q_table)
    _check_qubits(2 * n)
    M = 2**n
    columns = (np.arange(M)[np.newaxis, :] + table[:, np.newaxis]) % M
    rows = np.arange(M)[:, np.newaxis]

    def transform(state: QuantumState) -> QuantumState:
        if state.n_qubits != n:
            raise DimensionError(f"register has {state.n_qubits} qubits, expected {n}")
        ancilla = np.zeros(M, dtype=np.complex128)
        ancilla[1] = 1
        joint = QuantumState(np.kron(state.amplitudes, ancilla), 2 * n)
        joint = apply_circuit(joint, qft_circuit(n, offset=n))

        # |x, y⟩ → |x, y + q_x mod M⟩
        before = joint.amplitudes.reshape(M, M)
        after = np.zeros_like(before)
        after[rows, columns] = before
        joint = QuantumState(after.reshape(-1), 2 * n)

        joint = apply_circuit(joint, inverse_qft_circuit(n, offset=n))
        register = joint.amplitudes.reshape(M, M)
        leakage = float(np.linalg.norm(np.delete(register, 1, axis=1)))
        if leakage > NORM_TOL * M:
            raise NumericalError("ancilla did not return to |1>", leakage)
        return QuantumState(np.ascontiguousarray(register[:, 1]), n)

    return transform


def potential_phase_table(
    U: NDArray[np.float64], modes: NDArray[np.float64], n: int
) -> tuple[NDArray[np.int64], float]:
    """q = ⌊V⌋ for V(x, k) = -U_x·μ_k on the joint register, x slowest.

    Returns the table and the offset removed by ``nonnegative_shift``.
    """
    shifted, offset = nonnegative_shift(-np.outer(U, modes))
    return integer_phase_table(shifted.ravel(), n), offset


def fd_split_evolve(
    h: float,
    sigma: float,
    U: NDArray[np.float64],
    grid: PGrid,
    psi0: ComplexVector,
    T: float,
    kickback: bool = True,
) -> tuple[SchrodState, int]:
    """Lie-split Schrödingerized FD heat flow for σΔ_h - U.

    Each step applies the stencil phases in Fourier x, then the potential
    phase e^{-iVΔt} on the joint x, p register of n = log2(len(U)·Np) qubits.
    The step is Δt = 2π/M with M = 2^n, so with ``kickback`` the phase is
    e^{-2πiq/M}, q = ⌊V⌋, applied by the ancilla circuit; without it the
    exact phase is used.
    Returns the state in physical x and Fourier p and the number of steps.
    """
    psi0 = np.asarray(psi0, dtype=np.complex128)
    U = np.asarray(U, dtype=np.float64)
    if U.ndim != 1 or psi0.shape != U.shape:
        raise DimensionError(
            f"psi0 and U need one matching axis, got {psi0.shape} and {U.shape}"
        )
    M_x = U.size
    if not (_is_power_of_two(M_x) and _is_power_of_two(grid.Np)):
        raise DimensionError(f"register sizes {M_x} and {grid.Np} are not 2^n")
    n = (M_x * grid.Np).bit_length() - 1
    if h <= 0 or sigma <= 0:
        raise ParameterError(f"h and sigma must be positive, got {h} and {sigma}")
    _check_qubits(2 * n)

    dt = 2 * np.pi / 2**n
    steps = max(1, round(T / dt))
    stencil = np.exp(
        -1j * dt * sigma * np.outer(periodic_laplacian_eigenvalues(M_x, h), grid.modes)
    )
    table, offset = potential_phase_table(U, grid.modes, n)
    kick = diagonal_unitary_kickback(n, table) if kickback else None
    exact = np.exp(-1j * dt * (-np.outer(U, grid.modes) - offset)).ravel()

    profile = np.exp(-np.abs(grid.points))
    data = to_fourier(
        SchrodState(
            data=psi0[:, np.newaxis] * profile[np.newaxis, :],
            representation=Representation.PHYSICAL_P,
            time=0.0,
            grid=grid,
        )
    ).data
    for _ in range(steps):
        coefficients = stencil * scipy.fft.ifft(data, axis=0, norm="ortho")
        amplitudes = np.asarray(
            scipy.fft.fft(coefficients, axis=0, norm="ortho")
        ).ravel()
        if kick is not None:
            norm = float(np.linalg.norm(amplitudes))
            amplitudes = norm * kick(QuantumState(amplitudes / norm, n)).amplitudes
        else:
            amplitudes = exact * amplitudes
        data = np.exp(-1j * offset * dt) * amplitudes.reshape(M_x, grid.Np)
    logger.debug("fd split: %d steps of %.4g, phase offset %.4g", steps, dt, offset)
    state = SchrodState(
        data=data,
        representation=Representation.FOURIER_P,
        time=steps * dt,
        grid=grid,
    )
    return state, steps


def fd_heat_schrodingerized_evolve(
    n_x: int,
    n_p: int,
    h: float,
    grid: PGrid,
    psi0: ComplexVector,
    T: float,
) -> SchrodState:
    """Schrödingerized periodic FD heat flow, diagonal in the x- and p-Fourier bases.

    The returned state is in physical x and physical p; restore u(T) from it
    with the recovery helpers at λ₊ = 0.
    """
    M = 2**n_x
    if grid.Np != 2**n_p:
        raise DimensionError(f"grid has {grid.Np} p points, register holds {2**n_p}")
    psi0 = np.asarray(psi0, dtype=np.complex128)
    if psi0.shape != (M,):
        raise DimensionError(f"psi0 needs {M} entries, got shape {psi0.shape}")
    _check_qubits(n_x + n_p)
    if h <= 0:
        raise ParameterError(f"h must be positive, got {h}")

    # F_x with the +2πi convention, which diagonalizes the periodic stencil
    coefficients = np.asarray(scipy.fft.ifft(psi0, norm="ortho"))
    profile = np.exp(-np.abs(grid.points))
    state = to_fourier(
        SchrodState(
            data=coefficients[:, np.newaxis] * profile[np.newaxis, :],
            representation=Representation.PHYSICAL_P,
            time=0.0,
            grid=grid,
        )
    )
    eigenvalues = periodic_laplacian_eigenvalues(M, h)
    phases = np.exp(-1j * np.outer(eigenvalues, grid.modes) * T)
    evolved = to_physical(
        SchrodState(
            data=state.data * phases,
            representation=Representation.FOURIER_P,
            time=T,
            grid=grid,
        )
    )
    samples = np.asarray(scipy.fft.fft(evolved.data, axis=0, norm="ortho"))
    return SchrodState(
        data=samples, representation=Representation.PHYSICAL_P, time=T, grid=grid
    )
