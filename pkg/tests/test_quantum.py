import numpy as np
import pytest

from nonlocality.exceptions import DomainError, ShapeError
from nonlocality.linalg import hermitian_eigenvalues, kron, validate_density
from nonlocality.quantum import (
    DensityOperator,
    ProjectiveMeasurement,
    SeparableComponents,
    bell_state,
    joint_probabilities,
    outcome_probabilities,
    product_state,
    pure_state,
    qubit_state,
    random_density,
    random_measurement,
    random_separable_components,
    reduced_state,
    separable_mixture,
    verify_mixture_equality,
    werner_state,
)
from nonlocality.separability import ppt_test, werner_decomposition

Z = ProjectiveMeasurement.computational(2)


class TestBellStates:
    def test_phi_plus_corners(self):
        m = bell_state("phi+").matrix
        expected = np.zeros((4, 4))
        expected[np.ix_([0, 3], [0, 3])] = 0.5
        assert np.array_equal(m, expected)

    @pytest.mark.parametrize("kind", ["phi+", "phi-", "psi+", "psi-"])
    def test_valid_rank_one(self, kind):
        rho = bell_state(kind)
        assert validate_density(rho.matrix).passed
        assert np.trace(rho.matrix) == 1.0
        assert set(np.unique(rho.matrix.real)) <= {-0.5, 0.0, 0.5}
        np.testing.assert_allclose(hermitian_eigenvalues(rho.matrix), [0, 0, 0, 1], atol=1e-12)

    def test_singlet_reduced(self):
        np.testing.assert_allclose(reduced_state(bell_state("psi-"), "A").matrix, np.eye(2) / 2, atol=0)

    def test_unknown(self):
        with pytest.raises(DomainError):
            bell_state("chi")


class TestWerner:
    def test_endpoints(self):
        assert np.array_equal(werner_state(0).matrix, np.eye(4) / 4)
        assert np.array_equal(werner_state(1).matrix, bell_state("psi-").matrix)

    def test_half_spectrum(self):
        np.testing.assert_allclose(
            hermitian_eigenvalues(werner_state(0.5).matrix), [1 / 8, 1 / 8, 1 / 8, 5 / 8], atol=1e-12
        )

    @pytest.mark.parametrize("p", np.linspace(0, 1, 11))
    def test_spectrum_formula(self, p):
        expected = np.sort([(1 - p) / 4] * 3 + [(1 + 3 * p) / 4])
        np.testing.assert_allclose(hermitian_eigenvalues(werner_state(p).matrix), expected, atol=1e-12)

    @pytest.mark.parametrize("p", [-0.1, 1.5])
    def test_range(self, p):
        with pytest.raises(DomainError):
            werner_state(p)

    @pytest.mark.parametrize("p", np.linspace(0, 1, 7))
    def test_reduced_is_maximally_mixed(self, p):
        for keep in "AB":
            np.testing.assert_allclose(reduced_state(werner_state(p), keep).matrix, np.eye(2) / 2, atol=1e-15)


class TestDensityOperator:
    def test_rejects_invalid(self):
        with pytest.raises(DomainError):
            DensityOperator(np.diag([1.0, -1.0]), 2)
        with pytest.raises(ShapeError):
            DensityOperator(np.eye(4) / 4, 2, 3)

    def test_immutable(self):
        rho = werner_state(0.3)
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 1.0


class TestMeasurement:
    def test_qubit_projectors(self):
        m = ProjectiveMeasurement.qubit([1, 0, 0])
        np.testing.assert_allclose(m.projectors[0], np.full((2, 2), 0.5), atol=1e-15)
        assert m.labels == (1, -1)

    def test_incomplete_rejected(self):
        with pytest.raises(DomainError):
            ProjectiveMeasurement(2, (np.diag([1.0, 0.0]),), (0,))

    def test_nonorthogonal_rejected(self):
        with pytest.raises(DomainError):
            ProjectiveMeasurement(2, (np.diag([1.0, 0.0]), np.diag([1.0, 0.0])), (0, 1))


class TestRandomDensity:
    def test_dim_one(self):
        assert np.array_equal(random_density(1, 7).matrix, np.array([[1.0 + 0j]]))

    def test_deterministic(self):
        assert np.array_equal(random_density(4, 11).matrix, random_density(4, 11).matrix)
        assert not np.array_equal(random_density(4, 11).matrix, random_density(4, 12).matrix)

    def test_thousand_samples_valid(self):
        for seed in range(1000):
            m = random_density(4, seed).matrix
            assert np.linalg.eigvalsh(m).min() >= -1e-12
            assert abs(np.trace(m) - 1) <= 1e-12


class TestSeparableMixture:
    def test_single_product(self):
        ra, rb = random_density(2, 1), random_density(3, 2)
        c = SeparableComponents(((1.0, ra, rb),))
        assert np.array_equal(separable_mixture(c).matrix, kron(ra.matrix, rb.matrix))

    def test_classical_diagonal(self):
        k0, k1 = pure_state([1, 0]), pure_state([0, 1])
        c = SeparableComponents(((0.5, k0, k0), (0.5, k1, k1)))
        assert np.array_equal(separable_mixture(c).matrix, np.diag([0.5, 0, 0, 0.5]))

    def test_werner_quarter_six_terms(self):
        c = werner_decomposition(0.25)
        assert len(c) == 6
        np.testing.assert_allclose(separable_mixture(c).matrix, werner_state(0.25).matrix, atol=1e-12)

    def test_weight_errors(self):
        r = random_density(2, 0)
        with pytest.raises(DomainError):
            SeparableComponents(((0.6, r, r), (0.6, r, r)))
        with pytest.raises(DomainError):
            SeparableComponents(((1.5, r, r), (-0.5, r, r)))

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            SeparableComponents(((0.5, random_density(2, 0), random_density(2, 1)),
                                 (0.5, random_density(3, 0), random_density(2, 1))))

    def test_properties_random(self):
        for seed in range(50):
            c = random_separable_components(3, (2, 2), seed)
            rho = separable_mixture(c)
            assert ppt_test(rho).min_eigenvalue >= -1e-9
            expected_a = sum(w * a.matrix for w, a, _ in c.components)
            np.testing.assert_allclose(reduced_state(rho, "A").matrix, expected_a, atol=1e-12)


class TestJointProbabilities:
    def test_phi_plus_zz(self):
        p = joint_probabilities(bell_state("phi+"), Z, Z)
        assert np.array_equal(p, [[0.5, 0.0], [0.0, 0.5]])

    def test_product_zero_zero(self):
        k0 = pure_state([1, 0])
        p = joint_probabilities(product_state(k0, k0), Z, Z)
        assert np.array_equal(p, [[1.0, 0.0], [0.0, 0.0]])

    def test_maximally_mixed_uniform(self, rng):
        rho = werner_state(0.0)
        p = joint_probabilities(rho, random_measurement(2, rng), random_measurement(2, rng))
        np.testing.assert_allclose(p, 0.25, atol=1e-15)

    def test_marginal_identity(self, rng):
        for seed in range(30):
            rho = random_density(6, seed, dims=(2, 3))
            ma, mb = random_measurement(2, rng), random_measurement(3, rng)
            p = joint_probabilities(rho, ma, mb)
            assert p.min() >= 0 and abs(p.sum() - 1) <= 1e-10
            np.testing.assert_allclose(p.sum(axis=1), outcome_probabilities(reduced_state(rho, "A"), ma), atol=1e-12)

    def test_shape_error(self):
        with pytest.raises(ShapeError):
            joint_probabilities(werner_state(0.5), ProjectiveMeasurement.computational(3), Z)


class TestReducedState:
    def test_product(self):
        ra, rb = random_density(2, 3), random_density(2, 4)
        np.testing.assert_allclose(reduced_state(product_state(ra, rb), "A").matrix, ra.matrix, atol=1e-15)

    def test_phi_plus_keep_b(self):
        np.testing.assert_allclose(reduced_state(bell_state("phi+"), "B").matrix, np.eye(2) / 2, atol=0)

    def test_single_party(self):
        with pytest.raises(ShapeError):
            reduced_state(random_density(2, 0), "A")


class TestMixtureEquality:
    def test_single_product(self, rng):
        c = SeparableComponents(((1.0, qubit_state([0.3, 0.1, -0.5]), random_density(2, 5)),))
        assert verify_mixture_equality(c, random_measurement(2, rng), random_measurement(2, rng)) <= 1e-14

    def test_random_components(self, rng):
        for seed in range(100):
            c = random_separable_components(3, (2, 2), seed)
            assert verify_mixture_equality(c, random_measurement(2, rng), random_measurement(2, rng)) <= 1e-12

    def test_qubit_qutrit(self, rng):
        c = random_separable_components(4, (2, 3), 99)
        assert verify_mixture_equality(c, random_measurement(2, rng), random_measurement(3, rng)) <= 1e-12
