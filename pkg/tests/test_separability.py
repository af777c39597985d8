import numpy as np
import pytest
from scipy.optimize import nnls

from conftest import FIXTURES
from nonlocality import io
from nonlocality.exceptions import DomainError, ShapeError
from nonlocality.linalg import partial_transpose
from nonlocality.quantum import (
    SeparableComponents,
    bell_state,
    product_state,
    qubit_state,
    random_density,
    random_separable_components,
    separable_mixture,
    werner_state,
)
from nonlocality.separability import (
    ENTANGLED_LOCAL,
    ENTANGLED_VIOLATING,
    SEPARABLE,
    classify,
    ppt_test,
    regime_boundaries,
    scan_family,
    verify_separable_decomposition,
    werner_chsh_threshold,
    werner_decomposition,
    werner_ppt_threshold,
)


class TestPpt:
    def test_separable_mixtures(self):
        for seed in range(100):
            r = ppt_test(separable_mixture(random_separable_components(3, (2, 2), seed)))
            assert r.min_eigenvalue >= -1e-9 and r.verdict == SEPARABLE

    def test_phi_plus(self):
        r = ppt_test(bell_state("phi+"))
        assert r.min_eigenvalue == pytest.approx(-0.5, abs=1e-12)
        assert r.verdict == "entangled"

    @pytest.mark.parametrize("p", np.linspace(0, 1, 41))
    def test_werner_grid(self, p):
        r = ppt_test(werner_state(p))
        assert r.min_eigenvalue == pytest.approx((1 - 3 * p) / 4, abs=1e-12)
        assert (r.verdict == "entangled") == ((1 - 3 * p) / 4 < -1e-9)

    def test_qubit_qutrit_exact(self):
        r = ppt_test(separable_mixture(random_separable_components(2, (2, 3), 4)))
        assert r.verdict == SEPARABLE and r.dims == (2, 3)

    def test_inconclusive_above_six(self):
        rho = separable_mixture(random_separable_components(2, (3, 3), 4))
        assert ppt_test(rho).verdict == "inconclusive"

    def test_entangled_qutrits(self):
        v = np.zeros(9)
        v[[0, 4, 8]] = 1
        from nonlocality.quantum import pure_state

        assert ppt_test(pure_state(v, (3, 3))).verdict == "entangled"

    def test_single_party(self):
        with pytest.raises(ShapeError):
            ppt_test(random_density(2, 0))

    def test_monotone_along_werner(self):
        mins = [ppt_test(werner_state(p)).min_eigenvalue for p in np.round(np.arange(101) * 0.01, 10)]
        assert np.all(np.diff(mins) < 0)


class TestDecompositionCertificate:
    def test_self_consistency(self):
        c = random_separable_components(3, (2, 2), 7)
        assert verify_separable_decomposition(separable_mixture(c), c) <= 1e-14

    def test_werner_third_fixture(self):
        c = io.components_from_dict(io.read_json(FIXTURES / "werner_third.json"))
        assert len(c) == 6
        assert verify_separable_decomposition(werner_state(1 / 3), c) <= 1e-10

    def test_werner_quarter_fixture(self):
        c = io.components_from_dict(io.read_json(FIXTURES / "werner_quarter.json"))
        assert verify_separable_decomposition(werner_state(1 / 4), c) <= 1e-10

    @pytest.mark.parametrize("p", [0.0, 0.1, 0.25, 1 / 3])
    def test_analytic_decomposition(self, p):
        c = werner_decomposition(p)
        assert len(c) == 6
        assert verify_separable_decomposition(werner_state(p), c) <= 1e-15

    def test_analytic_rejects_entangled(self):
        with pytest.raises(DomainError):
            werner_decomposition(0.4)

    def test_phi_plus_has_no_certificate(self, rng):
        target = bell_state("phi+")
        assert ppt_test(target).verdict == "entangled"
        for seed in range(50):
            c = random_separable_components(int(rng.integers(1, 6)), (2, 2), seed)
            assert verify_separable_decomposition(target, c) >= 0.25
        # best non-negative fit over Pauli-axis product states
        axes = [np.eye(3)[k] * s for k in range(3) for s in (1, -1)]
        pairs = [(qubit_state(a), qubit_state(b)) for a in axes for b in axes]
        cols = np.array([product_state(a, b).matrix.ravel() for a, b in pairs])
        A = np.vstack([cols.real.T, cols.imag.T, np.ones(len(pairs))])
        rhs = np.concatenate([target.matrix.ravel().real, target.matrix.ravel().imag, [1.0]])
        w, _ = nnls(A, rhs)
        keep = np.flatnonzero(w > 1e-12)
        total = w[keep].sum()
        c = SeparableComponents(tuple((w[k] / total, *pairs[k]) for k in keep))
        assert verify_separable_decomposition(target, c) >= 0.25

    def test_shape_mismatch(self):
        c = random_separable_components(2, (2, 3), 0)
        with pytest.raises(ShapeError):
            verify_separable_decomposition(werner_state(0.2), c)


class TestThresholds:
    def test_ppt(self):
        p = werner_ppt_threshold(1e-6)
        assert abs(p - 1 / 3) <= 1e-6
        assert ppt_test(werner_state(p - 1e-6)).verdict == SEPARABLE
        assert ppt_test(werner_state(p + 1e-6)).verdict == "entangled"

    def test_chsh(self):
        from nonlocality.locality import chsh_max

        p = werner_chsh_threshold(1e-6)
        assert abs(p - 1 / np.sqrt(2)) <= 1e-6
        assert chsh_max(werner_state(0.8)) == pytest.approx(2.263, abs=1e-3)
        assert chsh_max(werner_state(0.5)) == pytest.approx(1.414, abs=1e-3)

    def test_bad_tol(self):
        with pytest.raises(DomainError):
            werner_ppt_threshold(0)


class TestScan:
    def test_four_points(self):
        rows = scan_family("werner", [0, 0.2, 0.5, 0.9])
        assert [r.classification for r in rows] == [SEPARABLE, SEPARABLE, ENTANGLED_LOCAL, ENTANGLED_VIOLATING]

    def test_endpoints(self):
        (top,) = scan_family("werner", [1])
        assert top.classification == ENTANGLED_VIOLATING
        assert top.chsh_max == pytest.approx(2 * np.sqrt(2), abs=1e-12)
        (bottom,) = scan_family("werner", [0])
        assert bottom.classification == SEPARABLE and bottom.chsh_max == 0

    def test_grid_range(self):
        with pytest.raises(DomainError):
            scan_family("werner", [1.2])
        with pytest.raises(DomainError):
            scan_family("nope", [0.5])

    @pytest.mark.parametrize("family,kind", [("werner", None), ("isotropic", "phi+"), ("isotropic", "psi+")])
    def test_invariants(self, family, kind):
        grid = np.round(np.arange(51) * 0.02, 10)
        rows = scan_family(family, grid, **({"kind": kind} if kind else {}))
        for r in rows:
            if r.chsh_max > 2 + 1e-9:
                assert r.ppt.verdict == "entangled"
                assert r.lhv_verdict == "infeasible"
            if r.ppt.verdict == SEPARABLE:
                assert r.lhv_verdict == "feasible"
        assert any(r.classification == ENTANGLED_LOCAL for r in rows)

    def test_boundaries_refined(self):
        rows = scan_family("werner", np.round(np.arange(11) * 0.1, 10))
        bounds = regime_boundaries(rows, "werner", tol=1e-7)
        assert [b.upper for b in bounds] == [ENTANGLED_LOCAL, ENTANGLED_VIOLATING]
        assert abs(bounds[0].parameter - 1 / 3) <= 1e-6
        assert abs(bounds[1].parameter - 1 / np.sqrt(2)) <= 1e-6

    def test_boundaries_descending_grid(self):
        rows = scan_family("werner", [0.9, 0.6, 0.3])
        bounds = regime_boundaries(rows, "werner", tol=1e-7)
        assert abs(bounds[0].parameter - 1 / np.sqrt(2)) <= 1e-6
        assert abs(bounds[1].parameter - 1 / 3) <= 1e-6

    def test_classify_random(self):
        row = classify(random_density(4, 2, dims=(2, 2)))
        assert row.classification in (SEPARABLE, ENTANGLED_LOCAL, ENTANGLED_VIOLATING)
