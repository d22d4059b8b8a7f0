import numpy as np
import pytest

from mdfc.qmat import (
    IDENTITY,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    ExpmError,
    bloch_to_density,
    density_to_bloch,
    devectorize,
    expm,
    is_trace_preserving_generator,
    left_mult_superop,
    right_mult_superop,
    validate_density,
    vectorize,
)


def random_complex2(rng):
    return rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))


def series_expm(g, t, terms=80):
    """Independent oracle: plain term-by-term series summation of exp(g t)."""
    a = np.asarray(g, dtype=complex) * t
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    return out


class TestVectorize:
    def test_identity_column_stacking(self):
        assert np.array_equal(vectorize(IDENTITY), [1, 0, 0, 1])

    def test_basis_matrix_position(self):
        m = np.outer([1, 0], [0, 1])  # |0><1|
        v = vectorize(m)
        assert v[2] == 1 and np.count_nonzero(v) == 1

    def test_round_trip_exact(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            m = random_complex2(rng)
            assert np.array_equal(devectorize(vectorize(m)), m)


class TestMultSuperops:
    def test_identity_superop(self):
        assert np.array_equal(left_mult_superop(IDENTITY), np.eye(4))
        assert np.array_equal(right_mult_superop(IDENTITY), np.eye(4))

    def test_sandwich_identity(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            a, b, x = (random_complex2(rng) for _ in range(3))
            lhs = devectorize(
                left_mult_superop(a) @ right_mult_superop(b) @ vectorize(x)
            )
            assert np.max(np.abs(lhs - a @ x @ b)) <= 1e-13

    def test_commuting_case(self):
        diff = left_mult_superop(SIGMA_Z) - right_mult_superop(SIGMA_Z)
        assert np.max(np.abs(devectorize(diff @ vectorize(SIGMA_Z)))) == 0.0


class TestExpm:
    def test_zero_generator(self):
        assert np.allclose(expm(np.zeros((4, 4)), 2.3), np.eye(4), atol=1e-15)

    def test_diagonal_generator(self):
        lam = np.array([0.3, -1.2, 0.7 + 0.4j, -0.1j])
        g = np.diag(lam)
        assert np.max(np.abs(expm(g, 1.7) - np.diag(np.exp(lam * 1.7)))) < 1e-13

    def test_commutator_phase_against_series(self):
        # generator of -i [sigma_z, .] with omega0 = 1: rho_01 picks up e^{-2it}
        h = SIGMA_Z
        g = -1j * (left_mult_superop(h) - right_mult_superop(h))
        t = np.pi / 2
        u = expm(g, t)
        assert np.max(np.abs(u - series_expm(g, t))) <= 1e-12
        rho = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
        out = devectorize(u @ vectorize(rho))
        assert abs(out[0, 1] - 0.5 * np.exp(-2j * t)) < 1e-12
        assert abs(out[0, 1] + 0.5) < 1e-12

    def test_group_property(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            g *= 5.0 / np.linalg.norm(g, 1)
            s, t = rng.uniform(-2, 2, size=2)
            lhs = expm(g, s) @ expm(g, t)
            rhs = expm(g, s + t)
            assert np.max(np.abs(lhs - rhs)) <= 1e-10

    def test_inverse_identity_large_argument(self):
        rng = np.random.default_rng(3)
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        g *= 10.0 / np.linalg.norm(g, 1)
        t = 5.0  # |t| * ||G|| = 50
        resid = expm(g, t) @ expm(g, -t) - np.eye(4)
        assert np.max(np.abs(resid)) <= 1e-9

    def test_rejects_non_finite(self):
        g = np.full((4, 4), np.nan)
        with pytest.raises(ExpmError):
            expm(g, 1.0)

    def test_rejects_unscalable_norm(self):
        with pytest.raises(ExpmError):
            expm(np.eye(4) * 1e19, 1.0)


class TestBloch:
    def test_maximally_mixed(self):
        assert np.allclose(bloch_to_density([0, 0, 0]), IDENTITY / 2)

    def test_pole_state(self):
        assert np.allclose(bloch_to_density([0, 0, 1]), np.diag([1.0, 0.0]))

    def test_equator_state(self):
        plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
        assert np.allclose(bloch_to_density([1, 0, 0]), np.outer(plus, plus.conj()))

    def test_round_trip(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            a = rng.normal(size=3)
            a *= rng.uniform(0, 1) / np.linalg.norm(a)
            back = density_to_bloch(bloch_to_density(a))
            assert np.max(np.abs(back - a)) <= 1e-12

    def test_rejects_overlong_vector(self):
        with pytest.raises(ValueError):
            bloch_to_density([1.0 + 1e-6, 0, 0])


class TestValidateDensity:
    def test_maximally_mixed_passes(self):
        assert validate_density(IDENTITY / 2).passes()

    def test_negative_eigenvalue_fails(self):
        rep = validate_density(np.diag([1.5, -0.5]))
        assert not rep.passes()
        assert rep.min_eigenvalue < -1e-10

    def test_small_non_hermitian_perturbation_fails(self):
        rho = IDENTITY / 2 + 1e-6 * np.array([[0, 1], [0, 0]])
        rep = validate_density(rho)
        assert rep.hermiticity_defect > 1e-12
        assert not rep.passes()


def test_trace_preserving_generator_check():
    # dissipator of a single jump operator is trace preserving
    op = np.array([[0, 1], [0, 0]], dtype=complex)
    ldl = op.conj().T @ op
    g = (
        np.kron(op.conj(), op)
        - 0.5 * (left_mult_superop(ldl) + right_mult_superop(ldl))
    )
    assert is_trace_preserving_generator(g)
    assert not is_trace_preserving_generator(g + 1e-6 * np.eye(4))


def test_pauli_algebra_sanity():
    assert np.allclose(SIGMA_X @ SIGMA_Y, 1j * SIGMA_Z)
    assert np.allclose(SIGMA_X @ SIGMA_X, IDENTITY)
