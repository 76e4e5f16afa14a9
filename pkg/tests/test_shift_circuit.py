"""Tests for shift_circuit module."""

from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg

from errors import DimensionError, ParameterError, ResourceError
from recovery import default_p_star, restore_pointwise
from schrod_engine import PGrid, Representation, SchrodState, p_grid, to_fourier
from shift_circuit import (
    Boundary,
    Direction,
    Gate,
    Variant,
    apply_circuit,
    apply_gate,
    basis_state,
    build_fd_laplacian,
    build_shift,
    circuit_from_text,
    circuit_to_text,
    diagonal_unitary_kickback,
    fd_heat_schrodingerized_evolve,
    fd_split_evolve,
    fidelity,
    gate_counter,
    integer_phase_table,
    inverse_qft_circuit,
    kickback_phases,
    nonnegative_shift,
    periodic_laplacian_eigenvalues,
    phase_ladder,
    potential_phase_table,
    qft_circuit,
    qft_matrix,
    quantum_state,
    shift_by_circuit,
    verify_shift_diagonalization,
)


class TestQuantumState:
    """Tests for quantum_state and basis_state."""

    def test_normalizes(self) -> None:
        """Test that amplitudes are scaled to unit norm."""
        state = quantum_state(np.array([3.0, 4.0]))
        np.testing.assert_allclose(state.amplitudes, [0.6, 0.8])
        assert state.n_qubits == 1

    def test_length_not_power_of_two(self) -> None:
        """Test that a length of 3 raises DimensionError."""
        with pytest.raises(DimensionError, match="not 2\\^n"):
            quantum_state(np.ones(3))

    def test_zero_vector(self) -> None:
        """Test that a zero vector raises ParameterError."""
        with pytest.raises(ParameterError, match="zero norm"):
            quantum_state(np.zeros(4))

    def test_qubit_cap(self) -> None:
        """Test that more than 14 qubits raises ResourceError."""
        with pytest.raises(ResourceError, match="cap"):
            basis_state(15, 0)


class TestShifts:
    """Tests for build_shift and build_fd_laplacian."""

    def test_cyclic_plus(self) -> None:
        """Test S⁺|j⟩ = |j+1 mod M⟩."""
        S = build_shift(4, Variant.CYCLIC, Direction.PLUS)
        np.testing.assert_array_equal(S @ np.eye(4)[:, 3], np.eye(4)[:, 0])
        np.testing.assert_array_equal(S @ np.eye(4)[:, 1], np.eye(4)[:, 2])

    def test_truncated_drops_boundary(self) -> None:
        """Test that the truncated shift sends the last basis vector to zero."""
        S = build_shift(4, Variant.DIRICHLET_TRUNCATED, Direction.PLUS)
        assert not S[:, 3].any()
        minus = build_shift(4, Variant.DIRICHLET_TRUNCATED, Direction.MINUS)
        np.testing.assert_array_equal(S.T, minus)

    def test_not_power_of_two(self) -> None:
        """Test that M = 6 raises ParameterError."""
        with pytest.raises(ParameterError, match="power of two"):
            build_shift(6, Variant.CYCLIC, Direction.MINUS)

    def test_periodic_eigenvalues(self) -> None:
        """Test the periodic stencil spectrum -(4/h²)sin²(πk/M)."""
        M, h = 16, 0.125
        laplacian = build_fd_laplacian(M, h, Boundary.PERIODIC)
        np.testing.assert_allclose(
            np.linalg.eigvalsh(laplacian),
            np.sort(periodic_laplacian_eigenvalues(M, h)),
            atol=1e-10,
        )

    def test_neumann_conserves_constants(self) -> None:
        """Test that the Neumann stencil annihilates constants."""
        laplacian = build_fd_laplacian(8, 0.5, Boundary.NEUMANN)
        np.testing.assert_allclose(laplacian @ np.ones(8), 0.0)

    def test_dirichlet_first_row(self) -> None:
        """Test the zero ghost value at the left end."""
        laplacian = build_fd_laplacian(4, 1.0, Boundary.DIRICHLET)
        np.testing.assert_array_equal(laplacian[0], [-2.0, 1.0, 0.0, 0.0])

    def test_non_positive_spacing(self) -> None:
        """Test that h ≤ 0 raises ParameterError."""
        with pytest.raises(ParameterError, match="h must be positive"):
            build_fd_laplacian(4, 0.0, Boundary.PERIODIC)


class TestGates:
    """Tests for apply_gate and apply_circuit."""

    def test_not_on_most_significant_qubit(self) -> None:
        """Test that X on qubit 0 flips the high bit."""
        state = apply_gate(basis_state(3, 0), Gate("X", 0))
        assert fidelity(state, basis_state(3, 4)) == pytest.approx(1.0)

    def test_controlled_phase(self) -> None:
        """Test that CP only acts when both qubits are set."""
        state = quantum_state(np.ones(4))
        result = apply_gate(state, Gate("CP", 0, 1, np.pi / 2))
        np.testing.assert_allclose(result.amplitudes, [0.5, 0.5, 0.5, 0.5j])

    def test_swap(self) -> None:
        """Test SWAP |01⟩ = |10⟩."""
        state = apply_gate(basis_state(2, 1), Gate("SWAP", 0, 1))
        assert fidelity(state, basis_state(2, 2)) == pytest.approx(1.0)

    @pytest.mark.parametrize(
        ("gate", "message"),
        [
            (Gate("Z", 0), "unknown gate"),
            (Gate("CP", 1, 1, 0.5), "distinct"),
            (Gate("H", 0, 1), "distinct"),
            (Gate("H", 2), "outside"),
        ],
    )
    def test_invalid(self, gate: Gate, message: str) -> None:
        """Test that malformed gates raise ParameterError."""
        with pytest.raises(ParameterError, match=message):
            apply_gate(basis_state(2, 0), gate)

    def test_counter_accumulates(self) -> None:
        """Test that the tally carries over between circuits."""
        count = gate_counter()
        count(qft_circuit(2))
        totals = count([Gate("H", 0)])
        assert totals == {"H": 3, "CP": 1, "SWAP": 1}


class TestQft:
    """Tests for qft_circuit and inverse_qft_circuit."""

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_circuit_matches_matrix(self, n: int) -> None:
        """Test that the gate sequence realizes F|j⟩ = Σ e^{2πijk/M}|k⟩/√M."""
        F = qft_matrix(n)
        for j in range(2**n):
            result = apply_circuit(basis_state(n, j), qft_circuit(n))
            np.testing.assert_allclose(result.amplitudes, F[:, j], atol=1e-12)

    def test_inverse_undoes(self) -> None:
        """Test F†F = I on a random state."""
        rng = np.random.default_rng(5)
        state = quantum_state(rng.standard_normal(16) + 1j * rng.standard_normal(16))
        result = apply_circuit(state, qft_circuit(4) + inverse_qft_circuit(4))
        np.testing.assert_allclose(result.amplitudes, state.amplitudes, atol=1e-12)

    def test_offset_leaves_low_register(self) -> None:
        """Test that a QFT on qubits 2..3 keeps qubits 0..1 untouched."""
        result = apply_circuit(basis_state(4, 0b1000), qft_circuit(2, offset=2))
        np.testing.assert_allclose(
            result.amplitudes.reshape(4, 4)[2], np.full(4, 0.5), atol=1e-12
        )


class TestPhaseLadder:
    """Tests for phase_ladder, shift_by_circuit and verify_shift_diagonalization."""

    @pytest.mark.parametrize("n_x", range(1, 7))
    def test_diagonalizes_shift(self, n_x: int) -> None:
        """Test ‖F†U_{P,±}F - S^±‖_max ≤ 1e-12."""
        assert verify_shift_diagonalization(n_x) <= 1e-12

    def test_gates_reproduce_diagonal(self) -> None:
        """Test that the per-qubit phases multiply to e^{2πik/M}."""
        gates, diagonal = phase_ladder(3, -1)
        for k in range(8):
            result = apply_circuit(basis_state(3, k), gates)
            assert result.amplitudes[k] == pytest.approx(diagonal[k, k])

    @pytest.mark.parametrize("sign", [1, -1])
    def test_circuit_shift(self, sign: int) -> None:
        """Test |j⟩ → |j±1 mod M⟩ through the emulator."""
        for j in range(8):
            state = shift_by_circuit(basis_state(3, j), sign)
            assert fidelity(state, basis_state(3, (j + sign) % 8)) == pytest.approx(1.0)

    @pytest.mark.parametrize(("n_x", "sign"), [(0, 1), (2, 0)])
    def test_invalid_ladder(self, n_x: int, sign: int) -> None:
        """Test that n_x < 1 or a sign other than ±1 raises ParameterError."""
        with pytest.raises(ParameterError):
            phase_ladder(n_x, sign)

    def test_verify_range(self) -> None:
        """Test that n_x past half the qubit cap raises ParameterError."""
        with pytest.raises(ParameterError, match="n_x must lie"):
            verify_shift_diagonalization(8)


class TestCircuitText:
    """Tests for circuit_to_text and circuit_from_text."""

    def test_line_format(self) -> None:
        """Test one gate per line with the angle last."""
        text = circuit_to_text([Gate("H", 0), Gate("CP", 0, 1, 0.5)])
        assert text == "H 0\nCP 0 1 0.5\n"

    def test_reads_back_qft(self) -> None:
        """Test that the QFT text gives back the same gates."""
        gates = qft_circuit(3)
        assert circuit_from_text(circuit_to_text(gates)) == gates

    def test_empty(self) -> None:
        """Test that no gates give empty text."""
        assert circuit_to_text([]) == ""
        assert circuit_from_text("\n\n") == []

    @pytest.mark.parametrize(
        ("line", "message"),
        [("T 0", "unknown gate"), ("CP 0 1", "needs 3 fields"), ("H x", "malformed")],
    )
    def test_invalid_lines(self, line: str, message: str) -> None:
        """Test that bad lines raise ParameterError."""
        with pytest.raises(ParameterError, match=message):
            circuit_from_text(line)


class TestKickback:
    """Tests for the phase-kickback diagonal unitary."""

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_fidelity(self, n: int) -> None:
        """Test fidelity ≥ 1 - 1e-12 against the dense diagonal, 50 tables in all."""
        rng = np.random.default_rng(n)
        M = 2**n
        for _ in range(10):
            table = rng.integers(0, M, size=M)
            state = quantum_state(rng.standard_normal(M) + 1j * rng.standard_normal(M))
            result = diagonal_unitary_kickback(n, table)(state)
            expected = quantum_state(kickback_phases(n, table) @ state.amplitudes)
            assert fidelity(result, expected) >= 1 - 1e-12

    def test_phases_are_exact(self) -> None:
        """Test that the kicked-back phase carries no global offset."""
        table = np.array([0, 1, 2, 3])
        result = diagonal_unitary_kickback(2, table)(basis_state(2, 3))
        assert result.amplitudes[3] == pytest.approx(np.exp(-2j * np.pi * 3 / 4))

    def test_table_out_of_range(self) -> None:
        """Test that q_x ≥ M raises ParameterError."""
        with pytest.raises(ParameterError, match="0..3"):
            kickback_phases(2, np.array([0, 1, 4, 0]))

    def test_table_shape(self) -> None:
        """Test that a table of the wrong length raises DimensionError."""
        with pytest.raises(DimensionError, match="4 entries"):
            diagonal_unitary_kickback(2, np.array([0, 1]))

    def test_register_size(self) -> None:
        """Test that a register of the wrong width raises DimensionError."""
        transform = diagonal_unitary_kickback(2, np.zeros(4, dtype=np.int64))
        with pytest.raises(DimensionError, match="expected 2"):
            transform(basis_state(3, 0))

    def test_float_table(self) -> None:
        """Test that non-integer entries raise ParameterError."""
        with pytest.raises(ParameterError, match="integers"):
            kickback_phases(1, np.array([0.5, 1.0]))


class TestPhaseTable:
    """Tests for nonnegative_shift and integer_phase_table."""

    def test_shift_by_minimum(self) -> None:
        """Test V - min V with the offset returned."""
        shifted, offset = nonnegative_shift(np.array([1.0, -2.0, 3.0]))
        np.testing.assert_array_equal(shifted, [3.0, 0.0, 5.0])
        assert offset == -2.0

    def test_floor(self) -> None:
        """Test q_x = ⌊V(x)⌋."""
        table = integer_phase_table(np.array([0.0, 0.5, 1.7, 2.2]), 4)
        np.testing.assert_array_equal(table, [0, 0, 1, 2])

    def test_negative(self) -> None:
        """Test that a negative V raises ParameterError."""
        with pytest.raises(ParameterError, match="non-negative"):
            integer_phase_table(np.array([-0.1, 0.0]), 2)

    def test_too_large(self) -> None:
        """Test that 2πV > M - 1 raises ParameterError."""
        with pytest.raises(ParameterError, match="ancilla"):
            integer_phase_table(np.array([0.0, 3.0]), 2)


class TestFdHeatEvolve:
    """Tests for fd_heat_schrodingerized_evolve function."""

    def test_recovers_heat_flow(self) -> None:
        """Test the restored state against e^{Δ_h T}ψ0."""
        n_x, n_p, h, T = 3, 9, 0.25, 0.1
        grid = p_grid(-16.0, 16.0, 2**n_p)
        psi0 = np.array([1.0, 2.0, 0.5, -1.0, 0.0, 1.0, 3.0, -0.5])
        state = fd_heat_schrodingerized_evolve(n_x, n_p, h, grid, psi0, T)
        restored = restore_pointwise(state, grid, 0.0, default_p_star(grid, 0.0, T))
        laplacian = build_fd_laplacian(8, h, Boundary.PERIODIC)
        exact = scipy.linalg.expm(laplacian * T) @ psi0
        scale = float(np.linalg.norm(exact))
        assert np.linalg.norm(restored - exact) <= 5 * grid.dp * scale

    def test_register_mismatch(self) -> None:
        """Test that a grid not of size 2^n_p raises DimensionError."""
        with pytest.raises(DimensionError, match="register holds"):
            fd_heat_schrodingerized_evolve(2, 4, 0.5, p_grid(-4, 4, 8), np.ones(4), 0.1)

    def test_qubit_cap(self) -> None:
        """Test that n_x + n_p above the cap raises ResourceError."""
        grid = p_grid(-16.0, 16.0, 2**9)
        with pytest.raises(ResourceError):
            fd_heat_schrodingerized_evolve(6, 9, 0.1, grid, np.ones(64), 0.1)


def _fourier_initial(psi0: np.ndarray, grid: PGrid) -> np.ndarray:
    profile = np.exp(-np.abs(grid.points))
    state = SchrodState(
        data=psi0[:, np.newaxis] * profile[np.newaxis, :],
        representation=Representation.PHYSICAL_P,
        time=0.0,
        grid=grid,
    )
    return to_fourier(state).data


class TestFdSplitEvolve:
    """Tests for fd_split_evolve function."""

    psi0 = np.array([1.0, 2.0, 0.5, -1.0, 0.0, 1.0, 3.0, -0.5], dtype=np.complex128)

    def test_potential_table(self) -> None:
        """Test q = -U·μ shifted by its minimum, x slowest."""
        table, offset = potential_phase_table(
            np.array([1.0, 2.0]), np.array([-1.0, 0.0, 1.0]), 5
        )
        np.testing.assert_array_equal(table, [3, 2, 1, 4, 2, 0])
        assert offset == -2.0

    @pytest.mark.parametrize("kickback", [True, False])
    def test_exact_for_integer_phases(self, kickback: bool) -> None:
        """Test each p mode against e^{-iμ(σΔ_h - 1)T} for constant U."""
        h, sigma = 0.5, 1.0
        grid = p_grid(-np.pi, np.pi, 16)
        state, steps = fd_split_evolve(
            h, sigma, np.ones(8), grid, self.psi0, 0.5, kickback=kickback
        )
        assert steps == 10
        assert state.representation is Representation.FOURIER_P
        generator = sigma * build_fd_laplacian(8, h, Boundary.PERIODIC) - np.eye(8)
        initial = _fourier_initial(self.psi0, grid)
        for k, mu in enumerate(grid.modes):
            exact = scipy.linalg.expm(-1j * mu * generator * state.time) @ initial[:, k]
            np.testing.assert_allclose(state.data[:, k], exact, atol=1e-9)

    def test_quantization_gap_bound(self) -> None:
        """Test that flooring V moves the state by at most steps·Δt."""
        grid = p_grid(-np.pi, np.pi, 16)
        U = 0.75 + 0.25 * np.cos(2 * np.pi * np.arange(8) / 8)
        kicked, steps = fd_split_evolve(0.5, 0.5, U, grid, self.psi0, 0.3)
        phased, _ = fd_split_evolve(0.5, 0.5, U, grid, self.psi0, 0.3, kickback=False)
        scale = float(np.linalg.norm(phased.data))
        gap = float(np.linalg.norm(kicked.data - phased.data))
        assert gap <= steps * (2 * np.pi / 2**7) * scale

    def test_register_not_power_of_two(self) -> None:
        """Test that a p grid of 12 points raises DimensionError."""
        with pytest.raises(DimensionError, match="not 2\\^n"):
            fd_split_evolve(0.5, 1.0, np.ones(4), p_grid(-4, 4, 12), np.ones(4), 0.1)

    def test_potential_shape(self) -> None:
        """Test that U of the wrong length raises DimensionError."""
        with pytest.raises(DimensionError, match="matching axis"):
            fd_split_evolve(0.5, 1.0, np.ones(3), p_grid(-4, 4, 8), np.ones(4), 0.1)

    def test_qubit_cap(self) -> None:
        """Test that a joint register above seven qubits raises ResourceError."""
        grid = p_grid(-np.pi, np.pi, 2**5)
        with pytest.raises(ResourceError):
            fd_split_evolve(0.5, 1.0, np.ones(8), grid, self.psi0, 0.1)
