"""Brackets, structure constants, spectra, grading, classification."""

from itertools import combinations

import pytest
from hypothesis import given
import hypothesis.strategies as st

from affkit.killing import Jet1, VectorField, jet_of
from affkit.liealg import (
    LieAlgebraPresentation, NotHomogeneousCandidate,
    bracket_fields, bracket_jets, classify, effective, generalized_eigenspaces,
    grading_check, jacobi_residual, structure_constants,
)
from affkit.linalg import solve
from affkit.scalars import ONE, ZERO, Scalar
from affkit.surface import make_surface, sphere, type_a, type_b
from affkit.symexpr import Expr, parse

from conftest import random_type_a

D1 = VectorField(parse("1"), parse("0"))
D2 = VectorField(parse("0"), parse("1"))


def presentation_from_table(dim, table):
    """Build a bare presentation from {(i,j): {k: value}} bracket data."""
    c = [[[ZERO] * dim for _ in range(dim)] for _ in range(dim)]
    for (i, j), targets in table.items():
        for k, val in targets.items():
            sc = val if isinstance(val, Scalar) else Scalar.of(val)
            c[i][j][k] = sc
            c[j][i][k] = -sc
    jets = [Jet1(*([ZERO] * 6)) for _ in range(dim)]
    evals = [[ZERO] * dim, [ZERO] * dim]
    return LieAlgebraPresentation(dim, c, jets, evals)


SO3 = presentation_from_table(3, {(0, 1): {2: 1}, (1, 2): {0: 1}, (2, 0): {1: 1}})
AFFINE_PAIR = presentation_from_table(2, {(0, 1): {1: 1}})  # [X, Y] = Y
ABELIAN3 = presentation_from_table(3, {})


def coeffs_of(L, s, X):
    """Coefficient vector of a symbolic Killing field in the jet basis."""
    target = jet_of(s, X).as_vector()
    cols = [[L.jets[k].as_vector()[r] for k in range(L.dim)] for r in range(6)]
    out = solve(cols, target)
    assert out is not None
    return out


# ---------------------------------------------------------------------------
# brackets of symbolic fields
# ---------------------------------------------------------------------------

def test_bracket_with_translation_scales_exponential_eigenfield():
    v = parse("sin(x1)+x1^2")
    for alpha in (0, 2, -1):
        w = Expr.monomial(ONE, freq=Scalar.of(alpha)) * v
        X = VectorField(Expr.zero(), w)
        br = bracket_fields(D2, X)
        assert br.a1.is_zero
        assert br.a2 == w * alpha


@given(st.sampled_from(["x1*x2", "sin(x1)", "exp(1*x2)+x1", "x2^2"]))
def test_bracket_is_alternating(text):
    X = VectorField(parse(text), parse("x1") * parse(text))
    br = bracket_fields(X, X)
    assert br.a1.is_zero and br.a2.is_zero


def test_killing_fields_close_under_bracket():
    # The bracket of two Killing fields is Killing, symbolically.
    from affkit.killing import is_killing
    s = type_a({"222": -1})
    fields = [D1, D2,
              VectorField(Expr.zero(), parse("exp(1*x2)")),
              VectorField(Expr.zero(), parse("x1*exp(1*x2)"))]
    for f in fields:
        assert is_killing(s, f)
    for U, V in combinations(fields, 2):
        assert is_killing(s, bracket_fields(U, V))


def test_sphere_triple_closes_with_rotation_relations(sphere_fields):
    x_f, y_f, z_f = sphere_fields
    xy = bracket_fields(x_f, y_f)
    assert xy.a1 == z_f.a1 and xy.a2 == z_f.a2
    yz = bracket_fields(y_f, z_f)
    assert yz.a1 == x_f.a1 and yz.a2 == x_f.a2
    zx = bracket_fields(z_f, x_f)
    assert zx.a1 == y_f.a1 and zx.a2 == y_f.a2


# ---------------------------------------------------------------------------
# jet brackets
# ---------------------------------------------------------------------------

def test_jet_bracket_of_translations_vanishes(flat_surface):
    j1 = jet_of(flat_surface, D1)
    j2 = jet_of(flat_surface, D2)
    assert all(x.is_zero for x in bracket_jets(flat_surface, j1, j2).as_vector())


def test_jet_bracket_flat_scaling(flat_surface):
    j1 = jet_of(flat_surface, D1)
    jx = jet_of(flat_surface, VectorField(parse("x1"), parse("0")))
    br = bracket_jets(flat_surface, j1, jx)
    assert br.as_vector() == j1.as_vector()


def test_jet_bracket_matches_field_bracket_on_sphere(sphere_surface, sphere_fields):
    x_f, y_f, z_f = sphere_fields
    jx = jet_of(sphere_surface, x_f)
    jy = jet_of(sphere_surface, y_f)
    br = bracket_jets(sphere_surface, jx, jy)
    assert br.as_vector() == jet_of(sphere_surface, z_f).as_vector()
    assert br.as_vector() == [ZERO, ONE, ZERO, ZERO, ZERO, ZERO]


def test_jet_bracket_commutes_with_jet_of(sphere_surface, sphere_fields):
    for U, V in combinations(sphere_fields, 2):
        lhs = bracket_jets(sphere_surface, jet_of(sphere_surface, U),
                           jet_of(sphere_surface, V))
        rhs = jet_of(sphere_surface, bracket_fields(U, V))
        assert lhs.as_vector() == rhs.as_vector()


# ---------------------------------------------------------------------------
# structure constants
# ---------------------------------------------------------------------------

def test_flat_structure_constants_match_hand_table(flat_surface):
    # Basis jets are d1, d2, x1 d1, x2 d1, x1 d2, x2 d2 in that order;
    # the nonzero brackets below were computed by hand.
    L = structure_constants(flat_surface)
    assert L.dim == 6
    expected = {
        (0, 2): {0: 1}, (0, 4): {1: 1},
        (1, 3): {0: 1}, (1, 5): {1: 1},
        (2, 3): {3: -1}, (2, 4): {4: 1},
        (3, 4): {2: -1, 5: 1}, (3, 5): {3: -1},
        (4, 5): {4: 1},
    }
    for i in range(6):
        for j in range(i + 1, 6):
            want = expected.get((i, j), {})
            for k in range(6):
                assert L.c[i][j][k] == Scalar.of(want.get(k, 0))


def test_structure_constants_antisymmetric_and_jacobi(rng):
    for surface in (sphere(), type_b({"221": 1}), random_type_a(rng)):
        L = structure_constants(surface)
        for i in range(L.dim):
            for j in range(L.dim):
                for k in range(L.dim):
                    assert (L.c[i][j][k] + L.c[j][i][k]).is_zero
        assert all(x.is_zero for x in jacobi_residual(L))


def test_sphere_algebra_is_three_dimensional(sphere_surface):
    assert structure_constants(sphere_surface).dim == 3


# ---------------------------------------------------------------------------
# generalized eigenspaces and grading
# ---------------------------------------------------------------------------

def test_so3_eigenspaces_for_rotation_generator():
    spaces = generalized_eigenspaces(SO3, [ZERO, ZERO, ONE])
    byval = {str(sp.alpha): sp for sp in spaces}
    assert set(byval) == {"0", "1*i", "-1*i"}
    zero_space = byval["0"]
    assert zero_space.exact
    assert len(zero_space.basis) == 1
    assert zero_space.basis[0] == [ZERO, ZERO, ONE]
    assert all(sp.exact for sp in spaces)


def test_abelian_algebra_has_single_zero_eigenspace():
    spaces = generalized_eigenspaces(ABELIAN3, [ONE, ZERO, ZERO])
    assert len(spaces) == 1
    assert str(spaces[0].alpha) == "0"
    assert len(spaces[0].basis) == 3


def test_affine_pair_spectrum():
    spaces = generalized_eigenspaces(AFFINE_PAIR, [ONE, ZERO])
    byval = {str(sp.alpha): sp for sp in spaces}
    assert set(byval) == {"0", "1"}
    assert byval["1"].basis == [[ZERO, ONE]]


def test_irrational_spectrum_gets_numeric_certificates():
    # [e1,e2] = 2 e3, [e1,e3] = e2 (Jacobi holds): ad(e1) has eigenvalues
    # 0 and +-sqrt(2), which are outside the exact scalar field.
    L = presentation_from_table(3, {(0, 1): {2: 2}, (0, 2): {1: 1}})
    assert all(x.is_zero for x in jacobi_residual(L))
    spaces = generalized_eigenspaces(L, [ONE, ZERO, ZERO])
    exact = [sp for sp in spaces if sp.exact]
    numeric = [sp for sp in spaces if not sp.exact]
    assert len(exact) == 1 and str(exact[0].alpha) == "0"
    assert len(numeric) == 2
    import math
    vals = sorted(sp.alpha.real for sp in numeric)
    assert abs(vals[0] + math.sqrt(2)) < 1e-9
    assert abs(vals[1] - math.sqrt(2)) < 1e-9
    assert all(sp.certificate < 1e-9 for sp in numeric)
    assert grading_check(L, [ONE, ZERO, ZERO]).ok


def test_grading_sphere_and_flat(sphere_surface, flat_surface):
    L = structure_constants(sphere_surface)
    for i in range(3):
        xi = [ONE if j == i else ZERO for j in range(3)]
        u, v = L.evaluate(xi)
        if u.is_zero and v.is_zero:
            continue
        assert grading_check(L, xi).ok

    Lf = structure_constants(flat_surface)
    xi = [ZERO, ZERO, ONE, ZERO, ZERO, ZERO]  # jet of x1 d1
    assert grading_check(Lf, xi).ok


def test_grading_detects_corrupted_constants():
    broken = presentation_from_table(
        3, {(0, 1): {2: 1}, (1, 2): {0: 1}, (2, 0): {1: 1}})
    # Corrupt one entry: [Z, X] picks up a spurious Z component.
    broken.c[2][0][2] = ONE
    broken.c[0][2][2] = -ONE
    report = grading_check(broken, [ZERO, ZERO, ONE])
    assert not report.ok
    assert report.violations


# ---------------------------------------------------------------------------
# effectivity
# ---------------------------------------------------------------------------

def test_effective_examples(flat_surface):
    L = structure_constants(flat_surface)
    e = lambda i: [ONE if j == i else ZERO for j in range(6)]
    assert effective(L, [e(0), e(1)])            # d1, d2
    assert not effective(L, [e(1), e(5)])        # d2, x2 d2 collinear at P
    assert not effective(L, [e(2), e(3)])        # both vanish at P


def test_effective_sphere_pair(sphere_surface, sphere_fields):
    x_f, _, z_f = sphere_fields
    L = structure_constants(sphere_surface)
    cx = coeffs_of(L, sphere_surface, x_f)
    cz = coeffs_of(L, sphere_surface, z_f)
    assert effective(L, [cx, cz])


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def test_classify_flat_has_abelian_branch(flat_surface):
    res = classify(flat_surface)
    assert "TypeA" in res.kinds()
    wa = next(w for w in res.branches if w.kind == "TypeA")
    assert wa.exact


def test_classify_sphere_is_exactly_so3(sphere_surface):
    res = classify(sphere_surface)
    assert res.kinds() == ["so3"]
    assert res.dim == 3
    w = res.branches[0]
    assert w.residual < 1e-9


def test_classify_type_b_surface(type_b_radial_fields):
    res = classify(type_b({"111": -1}))
    assert "TypeB" in res.kinds()
    wb = next(w for w in res.branches if w.kind == "TypeB")
    assert wb.exact


def test_classify_rejects_rigid_surface():
    s = make_surface({"111": parse("x1"), "122": parse("x2"),
                      "222": parse("x1*x2")}, (0, 0))
    with pytest.raises(NotHomogeneousCandidate):
        classify(s)


def test_classify_witness_relations_reverify(sphere_surface):
    # The TypeB witness on a random A/x1 surface must satisfy [X,Y] = Y
    # through the jet bracket, not merely through the c tensor.
    s = type_b({"221": 1, "122": -2})
    res = classify(s)
    wb = next(w for w in res.branches if w.kind == "TypeB")
    L = structure_constants(s)
    x, y = wb.elements
    got = L.bracket_coeffs(x, y)
    assert all((got[k] - y[k]).is_zero for k in range(L.dim))


def test_sphere_admits_no_two_dimensional_subalgebra(sphere_surface):
    # Every pair in the algebra either fails to close or fails effectivity.
    L = structure_constants(sphere_surface)
    res = classify(sphere_surface)
    assert "TypeA" not in res.kinds() and "TypeB" not in res.kinds()
    kf = L.killing_form()
    # Killing form negative definite: alternating principal minors.
    m1 = kf[0][0]
    m2 = kf[0][0] * kf[1][1] - kf[0][1] * kf[1][0]
    assert m1.is_real and m1.re < 0
    assert m2.is_real and m2.re > 0


def test_classify_flat_also_finds_affine_branch(flat_surface):
    # Branches are not exclusive: the flat plane carries both an abelian
    # pair and a [X,Y] = Y pair (radial scaling with a translation).
    res = classify(flat_surface)
    assert "TypeA" in res.kinds() and "TypeB" in res.kinds()
