import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cliffspec.clifford import AlgebraMismatchError, Multivector, Paravector, clifford_mul, modulus_sq
from cliffspec.module import (
    CliffordOperator,
    CliffordVector,
    apply,
    block_diag,
    build_Q,
    compose,
    export_csv,
    left_mul_matrix,
    left_scalar_mul,
    mult_operator,
    real_rep,
    right_mul_matrix,
    right_scalar_mul,
)
from conftest import mv, para


def random_mv(n, rng):
    return Multivector(n, rng.standard_normal(1 << n))


def test_left_and_right_matrices_agree_with_product(rng):
    for n in (1, 2, 3, 4):
        a, b = random_mv(n, rng), random_mv(n, rng)
        ab = clifford_mul(a, b).coeffs
        assert np.allclose(left_mul_matrix(a) @ b.coeffs, ab)
        assert np.allclose(right_mul_matrix(b) @ a.coeffs, ab)


def test_e1_representation():
    assert np.array_equal(left_mul_matrix(mv(1, e1=1)), [[0.0, -1.0], [1.0, 0.0]])
    T = CliffordOperator.from_multivectors([[mv(1, e1=1)]])
    assert np.array_equal(real_rep(T), [[0.0, -1.0], [1.0, 0.0]])


def test_right_scalar_mul_example():
    v = CliffordVector.from_entries([mv(2, _=1), Multivector.zero(2)])
    out = right_scalar_mul(v, mv(2, e1=1))
    assert out.entry(0) == mv(2, e1=1) and out.entry(1) == Multivector.zero(2)


def test_apply_examples(rng):
    v = CliffordVector.random(2, 3, rng)
    assert np.array_equal(apply(CliffordOperator.identity(2, 3), v).coeffs, v.coeffs)
    T = CliffordOperator.from_multivectors([[mv(1, e1=1)]])
    assert apply(T, CliffordVector.from_entries([mv(1, e1=1)])).entry(0) == mv(1, _=-1)


def test_dimension_mismatch(rng):
    T = CliffordOperator.random(2, 3, rng)
    with pytest.raises(ValueError):
        apply(T, CliffordVector.random(2, 2, rng))
    with pytest.raises(AlgebraMismatchError):
        right_scalar_mul(CliffordVector.random(2, 2, rng), mv(3, e1=1))
    with pytest.raises(ValueError):
        compose(T, CliffordOperator.random(2, 2, rng))


def test_real_rep_shape_and_identity(rng):
    assert real_rep(CliffordOperator.random(2, 3, rng)).shape == (12, 12)
    assert np.array_equal(real_rep(CliffordOperator.identity(3, 2)), np.eye(16))


@pytest.mark.parametrize("n, m", [(1, 4), (2, 3), (3, 2)])
def test_real_rep_is_homomorphism(rng, n, m):
    T, S = CliffordOperator.random(n, m, rng), CliffordOperator.random(n, m, rng)
    assert np.allclose(real_rep(compose(T, S)), real_rep(T) @ real_rep(S), atol=1e-12)
    assert np.allclose(real_rep(T @ S), real_rep(T) @ real_rep(S), atol=1e-12)


@pytest.mark.parametrize("n, m", [(2, 3), (3, 2)])
def test_apply_is_right_linear(rng, n, m):
    T, v, s = CliffordOperator.random(n, m, rng), CliffordVector.random(n, m, rng), random_mv(n, rng)
    lhs = apply(T, right_scalar_mul(v, s)).coeffs
    rhs = right_scalar_mul(apply(T, v), s).coeffs
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_build_Q_examples(rng):
    s = para(0.3, 1.2, -0.7)
    Q = build_Q(CliffordOperator.zero(2, 3), s)
    assert np.allclose(real_rep(Q), modulus_sq(s) * np.eye(12))

    T = CliffordOperator.random(2, 3, rng)
    x = Paravector.real(2, 0.8)
    shifted = T - 0.8 * CliffordOperator.identity(2, 3)
    assert np.allclose(real_rep(build_Q(T, x)), real_rep(compose(shifted, shifted)), atol=1e-12)

    a = Paravector.from_slice(0.5, 1.5, para(0, 1, 0))
    b = Paravector.from_slice(0.5, 1.5, para(0, 0, 1))
    assert np.allclose(real_rep(build_Q(T, a)), real_rep(build_Q(T, b)), atol=1e-12)


def test_mult_operator(rng):
    assert np.array_equal(real_rep(mult_operator(Multivector.zero(2), 2)), np.zeros((8, 8)))
    p = para(1.0, 2.0, -0.5)
    one = CliffordVector.from_entries([mv(2, _=1)])
    assert apply(mult_operator(p, 1), one).entry(0) == p.to_multivector()

    s = para(0.2, 0.4, 1.1)
    pm = p.to_multivector()
    factor = clifford_mul(pm, pm) - 2.0 * s.s0 * pm + modulus_sq(s)
    assert np.allclose(real_rep(build_Q(mult_operator(p, 2), s)), np.kron(np.eye(2), left_mul_matrix(factor)))


def test_block_diag():
    A = mult_operator(para(1, 1), 1)
    B = mult_operator(para(0, 2), 2)
    D = block_diag(A, B)
    assert D.m == 3
    assert np.array_equal(real_rep(D)[:2, :2], real_rep(A))
    assert not real_rep(D)[:2, 2:].any()


def test_operator_json_round_trip(rng):
    T = CliffordOperator.random(2, 2, rng)
    assert np.array_equal(CliffordOperator.from_json(T.to_json()).entries, T.entries)


def test_export_csv_round_trips(tmp_path, rng):
    A = rng.standard_normal((4, 4))
    export_csv(A, tmp_path / "a.csv")
    assert np.array_equal(np.loadtxt(tmp_path / "a.csv", delimiter=","), A)


sizes = st.tuples(st.integers(1, 5), st.integers(1, 4), st.integers(0, 2**32 - 1))


@settings(max_examples=80, deadline=None)
@given(sizes)
def test_norm_estimates(data):
    n, m, seed = data
    rng = np.random.default_rng(seed)
    v = CliffordVector.random(n, m, rng)
    s = random_mv(n, rng)
    bound = 2 ** (n / 2) * np.sqrt(modulus_sq(s)) * v.norm()
    assert left_scalar_mul(s, v).norm() <= bound * (1 + 1e-12)
    assert right_scalar_mul(v, s).norm() <= bound * (1 + 1e-12)
    p = Paravector(n, rng.standard_normal(n + 1))
    exact = np.sqrt(modulus_sq(p)) * v.norm()
    assert np.isclose(right_scalar_mul(v, p).norm(), exact, rtol=1e-12)
    assert np.isclose(left_scalar_mul(p, v).norm(), exact, rtol=1e-12)
