"""Exact linear algebra sanity checks."""

from fractions import Fraction

from hypothesis import given
import hypothesis.strategies as st

from affkit.linalg import (
    charpoly, identity, in_span, mat_mul, mat_vec, nullspace, poly_deflate,
    poly_eval, rank, rref, solve,
)
from affkit.scalars import ONE, ZERO, Scalar


def S(x):
    return Scalar.of(Fraction(x))


def M(rows):
    return [[S(x) for x in row] for row in rows]


def test_rref_and_rank():
    m, pivots = rref(M([[1, 2], [2, 4]]))
    assert pivots == [0]
    assert m[1] == [ZERO, ZERO]
    assert rank(M([[1, 2], [3, 4]])) == 2


def test_nullspace_known_kernel():
    ns = nullspace(M([[1, 1, 0], [0, 0, 1]]))
    assert len(ns) == 1
    assert ns[0] == [-ONE, ONE, ZERO]


def test_nullspace_of_empty_rowset_is_identity():
    ns = nullspace([], n_cols=3)
    assert ns == identity(3)


def test_solve_consistent_and_inconsistent():
    x = solve(M([[1, 1], [1, -1]]), [S(3), S(1)])
    assert x == [S(2), S(1)]
    assert solve(M([[1, 1], [1, 1]]), [S(0), S(1)]) is None


def test_in_span():
    basis = [[ONE, ZERO], [ZERO, ONE]]
    assert in_span(basis, [S(5), S(-2)])
    assert not in_span([[ONE, ZERO]], [S(0), S(1)])
    assert in_span([], [ZERO, ZERO])


def test_charpoly_of_rotation_generator():
    # [[0, -1], [1, 0]] has characteristic polynomial t^2 + 1.
    coeffs = charpoly(M([[0, -1], [1, 0]]))
    assert coeffs == [ONE, ZERO, ONE]
    assert poly_eval(coeffs, Scalar.of(0, 1)).is_zero
    deflated = poly_deflate(coeffs, Scalar.of(0, 1))
    assert poly_eval(deflated, Scalar.of(0, -1)).is_zero


@given(st.lists(st.lists(st.integers(-4, 4), min_size=3, max_size=3),
                min_size=3, max_size=3))
def test_nullspace_vectors_annihilate(rows):
    m = M(rows)
    for v in nullspace(m):
        assert all(x.is_zero for x in mat_vec(m, v))
    assert rank(m) + len(nullspace(m)) == 3


@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3),
                min_size=3, max_size=3))
def test_cayley_hamilton(rows):
    a = M(rows)
    coeffs = charpoly(a)
    acc = [[ZERO] * 3 for _ in range(3)]
    power = identity(3)
    for ck in coeffs:
        for i in range(3):
            for j in range(3):
                acc[i][j] = acc[i][j] + ck * power[i][j]
        power = mat_mul(power, a)
    assert all(x.is_zero for row in acc for x in row)
