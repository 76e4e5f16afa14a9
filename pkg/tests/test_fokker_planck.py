"""Tests for fokker_planck module."""

from __future__ import annotations

import logging
from dataclasses import replace

import numpy as np
import pytest
import scipy.linalg

from errors import (
    ConfigError,
    DimensionError,
    ParameterError,
    PreconditionError,
    ResourceError,
)
from fokker_planck import (
    Form,
    apply_generator,
    apply_momentum,
    assemble_conservation_A,
    assemble_symmetric_H,
    axis_grid,
    constant_potential,
    cosine_potential,
    fd_generator,
    fokker_planck_problem,
    generator,
    heat_form_potential,
    heat_generator,
    leading_minor_determinant,
    momentum_operator,
    position_operator,
    positive_eig_scan,
    potential_from_spec,
    quadratic_potential,
    steady_state,
    transform_from_heat,
    transform_to_heat,
)
from linear_core import hermitian_split, spectral_data

POTENTIALS = {"flat": constant_potential(), "cosine": cosine_potential()}


class TestAxisGrid:
    """Tests for axis_grid and position_operator."""

    def test_left_closed_points(self) -> None:
        """Test x_j = a + (b - a)j/M."""
        np.testing.assert_allclose(axis_grid(4), [-1.0, -0.5, 0.0, 0.5])

    def test_position_is_diagonal(self) -> None:
        """Test that X carries the grid on its diagonal."""
        X = position_operator(4, (0.0, 2.0))
        np.testing.assert_allclose(np.diag(X), [0.0, 0.5, 1.0, 1.5])

    def test_odd_size(self) -> None:
        """Test that an odd M raises ParameterError."""
        with pytest.raises(ParameterError, match="even"):
            position_operator(5)


class TestMomentum:
    """Tests for momentum_operator and apply_momentum."""

    def test_plane_wave_eigenvector(self) -> None:
        """Test P e^{iπx} = π e^{iπx} on (-1, 1)."""
        wave = np.exp(1j * np.pi * axis_grid(16))
        P = momentum_operator(16)
        np.testing.assert_allclose(P @ wave, np.pi * wave, atol=1e-12)
        np.testing.assert_allclose(
            apply_momentum(wave, (-1.0, 1.0), 0), np.pi * wave, atol=1e-12
        )

    def test_hermitian(self) -> None:
        """Test P = P†."""
        P = momentum_operator(8, (0.0, 3.0))
        np.testing.assert_array_equal(P, P.conj().T)

    def test_matrix_free_agrees(self) -> None:
        """Test the FFT route against the dense operator on random data."""
        rng = np.random.default_rng(2)
        values = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        np.testing.assert_allclose(
            apply_momentum(values, (-1.0, 1.0), 0),
            momentum_operator(16) @ values,
            atol=1e-11,
        )


class TestFokkerPlanckProblem:
    """Tests for fokker_planck_problem function."""

    def test_tensor_grid_shape(self) -> None:
        """Test that a 2-D problem samples V on an M×M grid."""
        prob = fokker_planck_problem(cosine_potential(), 8, 1.0, d=2)
        assert prob.V.shape == (8, 8)
        assert prob.V[0, 0] == pytest.approx(2 * np.cos(-np.pi))

    def test_row_cap(self) -> None:
        """Test that M^d above the cap raises ResourceError."""
        with pytest.raises(ResourceError, match="row cap"):
            fokker_planck_problem(constant_potential(), 128, 1.0, d=2)

    @pytest.mark.parametrize(
        ("M", "sigma", "d", "message"),
        [
            (7, 1.0, 1, "even"),
            (8, 0.0, 1, "sigma"),
            (8, 1.0, 3, "dimension"),
        ],
    )
    def test_invalid_parameters(
        self, M: int, sigma: float, d: int, message: str
    ) -> None:
        """Test that bad M, σ or d raise ParameterError."""
        with pytest.raises(ParameterError, match=message):
            fokker_planck_problem(constant_potential(), M, sigma, d)

    def test_non_finite_potential(self) -> None:
        """Test that a NaN in the potential table raises ParameterError."""
        table = potential_from_spec({"kind": "table", "table": [0.0, np.nan]})
        with pytest.raises(ParameterError, match="non-finite"):
            fokker_planck_problem(table, 2, 1.0)


class TestPotentialFromSpec:
    """Tests for potential_from_spec function."""

    def test_quadratic_parameters(self) -> None:
        """Test that extra keys become factory arguments."""
        potential = potential_from_spec({"kind": "quadratic", "scale": 2.0})
        prob = fokker_planck_problem(potential, 4, 1.0)
        np.testing.assert_allclose(prob.V, 2.0 * axis_grid(4) ** 2)

    def test_unknown_kind(self) -> None:
        """Test that an unknown kind raises ConfigError."""
        with pytest.raises(ConfigError, match="unknown potential"):
            potential_from_spec({"kind": "bumpy"})

    def test_bad_parameters(self) -> None:
        """Test that unexpected parameters raise ConfigError."""
        with pytest.raises(ConfigError, match="bad parameters"):
            potential_from_spec({"kind": "cosine", "phase": 1.0})

    def test_table_shape_mismatch(self) -> None:
        """Test that a table of the wrong size raises DimensionError."""
        table = potential_from_spec({"kind": "table", "table": [0.0, 1.0, 2.0]})
        with pytest.raises(DimensionError, match="potential table"):
            fokker_planck_problem(table, 4, 1.0)


class TestSteadyState:
    """Tests for the steady state of the conservation forms."""

    @pytest.mark.parametrize("M", [16, 32, 64])
    @pytest.mark.parametrize("sigma", [0.5, 1.0])
    @pytest.mark.parametrize("name", sorted(POTENTIALS))
    def test_conservation_residual(self, name: str, sigma: float, M: int) -> None:
        """Test ‖A e^{-V/σ}‖ ≤ 1e-10."""
        prob = fokker_planck_problem(POTENTIALS[name], M, sigma)
        residual = apply_generator(prob, steady_state(prob.V, sigma))
        assert np.linalg.norm(residual) <= 1e-10

    @pytest.mark.parametrize("sigma", [0.5, 1.0])
    def test_symmetric_residual(self, sigma: float) -> None:
        """Test ‖H e^{-V/(2σ)}‖ ≤ 1e-10."""
        prob = fokker_planck_problem(
            cosine_potential(), 32, sigma, form=Form.CONSERVATION_II
        )
        psi_s = np.sqrt(steady_state(prob.V, sigma))
        assert np.linalg.norm(apply_generator(prob, psi_s)) <= 1e-10

    @pytest.mark.parametrize("sigma", [0.5, 1.0])
    @pytest.mark.parametrize("name", sorted(POTENTIALS))
    def test_assembled_residuals(self, name: str, sigma: float) -> None:
        """Test ‖A e^{-V/σ}‖ and ‖H e^{-V/(2σ)}‖ ≤ 1e-10 at M = 64."""
        prob = fokker_planck_problem(POTENTIALS[name], 64, sigma)
        symmetric = replace(prob, form=Form.CONSERVATION_II)
        f_s = steady_state(prob.V, sigma)
        A = assemble_conservation_A(prob)
        H = assemble_symmetric_H(symmetric)
        assert np.linalg.norm(A @ f_s) <= 1e-10
        assert np.linalg.norm(H @ np.sqrt(f_s)) <= 1e-10

    def test_two_dimensional(self) -> None:
        """Test the steady state on a 2-D tensor grid."""
        prob = fokker_planck_problem(cosine_potential(), 16, 1.0, d=2)
        residual = apply_generator(prob, steady_state(prob.V, 1.0))
        assert np.linalg.norm(residual) <= 1e-10

    def test_non_positive_sigma(self) -> None:
        """Test that σ ≤ 0 raises ParameterError."""
        with pytest.raises(ParameterError, match="sigma"):
            steady_state(np.zeros(4), -1.0)


class TestSymmetricForm:
    """Tests for assemble_symmetric_H function."""

    @pytest.mark.parametrize("M", [16, 32])
    def test_negative_semidefinite(self, M: int) -> None:
        """Test λ_max(H) ≤ 1e-10."""
        prob = fokker_planck_problem(
            cosine_potential(), M, 1.0, form=Form.CONSERVATION_II
        )
        H = assemble_symmetric_H(prob)
        assert scipy.linalg.eigh(H, eigvals_only=True)[-1] <= 1e-10

    @pytest.mark.parametrize(("M", "sigma"), [(16, 1.0), (32, 1.0), (64, 0.5)])
    def test_similarity(self, M: int, sigma: float) -> None:
        """Test e^{V/(2σ)} A e^{-V/(2σ)} = H entrywise."""
        prob = fokker_planck_problem(cosine_potential(), M, sigma)
        half = np.exp(prob.V / (2 * sigma))
        A = assemble_conservation_A(prob)
        similar = half[:, np.newaxis] * A / half[np.newaxis, :]
        H = assemble_symmetric_H(replace(prob, form=Form.CONSERVATION_II))
        assert np.max(np.abs(similar - H)) <= 1e-10

    def test_wrong_form(self) -> None:
        """Test that assembling H from a conservation-I problem raises."""
        prob = fokker_planck_problem(cosine_potential(), 8, 1.0)
        with pytest.raises(PreconditionError, match="expected a CONSERVATION_II"):
            assemble_symmetric_H(prob)


class TestConservationForm:
    """Tests for assemble_conservation_A function."""

    def test_flat_potential_is_laplacian(self) -> None:
        """Test A = -σP² for constant V."""
        P = momentum_operator(8)
        prob = fokker_planck_problem(constant_potential(3.0), 8, 0.5)
        np.testing.assert_allclose(
            assemble_conservation_A(prob), -0.5 * P @ P, atol=1e-10
        )

    def test_wrong_form(self) -> None:
        """Test that a heat-form problem cannot be assembled as A."""
        prob = fokker_planck_problem(cosine_potential(), 8, 1.0, form=Form.HEAT)
        with pytest.raises(PreconditionError, match="expected a CONSERVATION_I"):
            assemble_conservation_A(prob)

    def test_kronecker_structure(self) -> None:
        """Test A = -σ(P²⊗I + I⊗P²) in two dimensions for constant V."""
        P2 = momentum_operator(4) @ momentum_operator(4)
        identity = np.eye(4)
        prob = fokker_planck_problem(constant_potential(), 4, 1.0, d=2)
        expected = -(np.kron(P2, identity) + np.kron(identity, P2))
        np.testing.assert_allclose(assemble_conservation_A(prob), expected, atol=1e-10)

    def test_quadratic_hermitian_part_grows(self) -> None:
        """Test that H1 = (A + A†)/2 has λ₊ ≈ 0.073 for V = x²/2 at M = 64."""
        prob = fokker_planck_problem(quadratic_potential(), 64, 1.0)
        split = hermitian_split(assemble_conservation_A(prob))
        spectral = spectral_data(split)
        assert spectral.lambda_plus == pytest.approx(0.073, abs=0.015)
        assert spectral.lambda_plus == spectral.eigenvalues[-1]

    @pytest.mark.parametrize("form", [Form.CONSERVATION_I, Form.CONSERVATION_II])
    def test_matrix_free_agrees(self, form: Form) -> None:
        """Test apply_generator against the assembled generator."""
        prob = fokker_planck_problem(cosine_potential(), 16, 1.0, form=form)
        rng = np.random.default_rng(4)
        f = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        dense = generator(prob)
        scale = np.linalg.norm(dense) * np.linalg.norm(f)
        np.testing.assert_allclose(
            apply_generator(prob, f), dense @ f, atol=1e-12 * scale
        )


class TestHeatForm:
    """Tests for heat_form_potential, heat_generator and fd_generator."""

    def test_cosine_potential(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test U = π²sin²/(4σ) + π²cos/2 and the negative-U warning."""
        prob = fokker_planck_problem(cosine_potential(), 16, 1.0)
        x = axis_grid(16)
        expected = np.pi**2 * (np.sin(np.pi * x) ** 2 / 4 + np.cos(np.pi * x) / 2)
        with caplog.at_level(logging.WARNING, logger="fokker_planck"):
            U = heat_form_potential(prob)
        np.testing.assert_allclose(U, expected, atol=1e-12)
        assert "dips" in caplog.text

    def test_spectral_fallback(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test that a tabulated periodic V gives the analytic U with a warning."""
        x = axis_grid(16)
        table = potential_from_spec({"kind": "table", "table": np.cos(np.pi * x)})
        cosine = fokker_planck_problem(cosine_potential(), 16, 1.0)
        analytic = heat_form_potential(cosine)
        with caplog.at_level(logging.WARNING, logger="fokker_planck"):
            U = heat_form_potential(fokker_planck_problem(table, 16, 1.0))
        np.testing.assert_allclose(U, analytic, atol=1e-9)
        assert "no analytic derivatives" in caplog.text

    def test_flat_heat_equals_symmetric(self) -> None:
        """Test that σΔ - U and H coincide when V is constant."""
        prob = fokker_planck_problem(
            constant_potential(), 8, 0.7, form=Form.CONSERVATION_II
        )
        np.testing.assert_allclose(
            heat_generator(prob), assemble_symmetric_H(prob), atol=1e-10
        )

    def test_heat_matrix_free(self) -> None:
        """Test the matrix-free heat form against the dense one."""
        prob = fokker_planck_problem(quadratic_potential(), 16, 1.0, form=Form.HEAT)
        f = np.cos(np.pi * axis_grid(16)).astype(np.complex128)
        dense = heat_generator(prob)
        scale = np.linalg.norm(dense) * np.linalg.norm(f)
        np.testing.assert_allclose(
            apply_generator(prob, f), dense @ f, atol=1e-12 * scale
        )

    def test_fd_spectrum(self) -> None:
        """Test the periodic stencil eigenvalues -(4σ/h²)sin²(πk/M)."""
        M, sigma = 16, 0.5
        h = 2.0 / M
        prob = fokker_planck_problem(constant_potential(), M, sigma, form=Form.FD)
        expected = -4 * sigma / h**2 * np.sin(np.pi * np.arange(M) / M) ** 2
        np.testing.assert_allclose(
            np.linalg.eigvalsh(generator(prob)), np.sort(expected), atol=1e-9
        )
        np.testing.assert_allclose(generator(prob), fd_generator(prob))

    def test_fd_has_no_matrix_free_path(self) -> None:
        """Test that the FD form refuses apply_generator."""
        prob = fokker_planck_problem(constant_potential(), 8, 1.0, form=Form.FD)
        with pytest.raises(ParameterError, match="no matrix-free"):
            apply_generator(prob, np.ones(8))


class TestTransforms:
    """Tests for transform_to_heat and transform_from_heat."""

    def test_inverse_pair(self) -> None:
        """Test that the two transforms undo each other."""
        V = np.array([0.0, 1.0, -2.0])
        f = np.array([1.0, 2.0j, 0.5])
        psi = transform_to_heat(f, V, 0.5)
        np.testing.assert_allclose(psi, np.exp(V) * f)
        np.testing.assert_allclose(transform_from_heat(psi, V, 0.5), f)

    def test_steady_state_maps_to_root(self) -> None:
        """Test e^{V/(2σ)}e^{-V/σ} = e^{-V/(2σ)}."""
        V = np.linspace(-1, 1, 5)
        np.testing.assert_allclose(
            transform_to_heat(steady_state(V, 2.0), V, 2.0), np.exp(-V / 4)
        )

    def test_shape_mismatch(self) -> None:
        """Test that mismatched shapes raise DimensionError."""
        with pytest.raises(DimensionError, match="shapes differ"):
            transform_from_heat(np.ones(3), np.ones(4), 1.0)


class TestLeadingMinor:
    """Tests for leading_minor_determinant function."""

    def test_negative_minor(self) -> None:
        """Test a negative 2×2 determinant for an indefinite H1."""
        H1 = np.array([[-1.0, 2.0, 0.0], [2.0, -1.0, 0.0], [0.0, 0.0, -1.0]])
        assert leading_minor_determinant(H1) == pytest.approx(-3.0)
        assert np.linalg.eigvalsh(H1)[-1] > 0

    def test_custom_size(self) -> None:
        """Test the leading 1×1 block."""
        assert leading_minor_determinant(np.diag([-2.0, 5.0]), 1) == pytest.approx(-2.0)


class TestPositiveEigScan:
    """Tests for positive_eig_scan function."""

    def test_flat_potential_has_no_growth(self) -> None:
        """Test λ₊ = 0 when V is constant."""
        scan = positive_eig_scan(constant_potential(), 1.0, [8, 16])
        assert [M for M, _ in scan] == [8, 16]
        assert all(0.0 <= value <= 1e-10 for _, value in scan)

    def test_values_are_non_negative(self) -> None:
        """Test the clamp at zero for a confining potential."""
        scan = positive_eig_scan(quadratic_potential(), 1.0, [8, 16])
        assert all(value >= 0.0 for _, value in scan)

    def test_quadratic_limit(self) -> None:
        """Test λ₊ ≈ 0.073 for V = x²/2, σ = 1, settled from M = 64 to 128."""
        scan = dict(positive_eig_scan(quadratic_potential(), 1.0, [64, 128]))
        assert scan[128] == pytest.approx(0.073, abs=0.015)
        assert abs(scan[64] - scan[128]) <= 0.005

    @pytest.mark.parametrize("M_list", [[16, 8], [8, 9]])
    def test_invalid_sizes(self, M_list: list[int]) -> None:
        """Test that unsorted or odd sizes raise ParameterError."""
        with pytest.raises(ParameterError, match="ascending even"):
            positive_eig_scan(constant_potential(), 1.0, M_list)


class TestGeneratorDispatch:
    """Tests for generator function."""

    def test_forms_share_grid(self) -> None:
        """Test that replacing the form switches the assembled operator."""
        prob = fokker_planck_problem(cosine_potential(), 8, 1.0)
        np.testing.assert_array_equal(generator(prob), assemble_conservation_A(prob))
        symmetric = replace(prob, form=Form.CONSERVATION_II)
        np.testing.assert_array_equal(
            generator(symmetric), assemble_symmetric_H(symmetric)
        )
