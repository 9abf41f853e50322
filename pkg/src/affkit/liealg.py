"""Lie-algebra layer over Killing jets: brackets, spectra, classification.

The Killing fields of a surface close under the Lie bracket.  Working at
the 1-jet level (second derivatives supplied exactly by the prolongation),
this module computes structure constants, generalized ad-eigenspace
decompositions with their grading, effectivity certificates, and searches
for subalgebra witnesses of the three target presentations:

    abelian pair        [X, Y] = 0            ("TypeA")
    affine pair         [X, Y] = Y            ("TypeB")
    rotation triple     [X, Y] = Z, [Y, Z] = X, [Z, X] = Y   ("so3")

Witnesses are certificates: every reported relation is re-verified exactly
through the jet bracket before it is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

import numpy as np

from . import linalg
from .killing import (JET_DIM, Jet1, KillingJetSpace, VectorField,
                      killing_jet_space, prolongation_symbolic)
from .scalars import ONE, ZERO, Scalar
from .surface import AffineSurface
from .symexpr import Expr


class LieAlgError(Exception):
    pass


class SolveFailure(LieAlgError):
    """A bracket jet left the span of the basis (solver inconsistency)."""


class NotHomogeneousCandidate(LieAlgError):
    """Killing dimension below 2, or no effective pair in the algebra."""


class ClassificationInconclusive(LieAlgError):
    """Search budget exhausted without a certified witness."""


# ---------------------------------------------------------------------------
# brackets
# ---------------------------------------------------------------------------

def bracket_fields(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y]^k = X^l d_l Y^k - Y^l d_l X^k, symbolically."""
    comps = []
    for k in (1, 2):
        e = Expr.zero()
        for l in (1, 2):
            e = e + X.component(l) * Y.component(k).diff(f"x{l}")
            e = e - Y.component(l) * X.component(k).diff(f"x{l}")
        comps.append(e)
    return VectorField(comps[0], comps[1])


def _second_derivatives(s: AffineSurface, jet: Jet1) -> dict[tuple[int, int, int], Scalar]:
    """dd_ij a^k at the basepoint from the jet system (exact)."""
    m1, m2, _ = prolongation_symbolic(s)
    p = s.basepoint
    v = jet.as_vector()
    out = {}
    # Row of M_i holding dd at b^k_j; index layout matches killing module.
    rows = {(1, 1): (m1, 2), (1, 2): (m1, 3), (2, 2): (m2, 3)}
    for k in (1, 2):
        for (i, j), (m, base) in rows.items():
            row = m[base + 2 * (k - 1)]
            val = ZERO
            for c in range(JET_DIM):
                if not row[c].is_zero:
                    val = val + row[c].eval_exact(p) * v[c]
            out[(i, j, k)] = out[(j, i, k)] = val
    return out


def bracket_jets(s: AffineSurface, vx: Jet1, vy: Jet1) -> Jet1:
    """Jet of [X, Y] from the jets of two Killing fields."""
    ddx = _second_derivatives(s, vx)
    ddy = _second_derivatives(s, vy)
    ax = (vx.a1, vx.a2)
    ay = (vy.a1, vy.a2)
    bx = {(k, i): vx.as_vector()[2 + 2 * (k - 1) + (i - 1)]
          for k in (1, 2) for i in (1, 2)}
    by = {(k, i): vy.as_vector()[2 + 2 * (k - 1) + (i - 1)]
          for k in (1, 2) for i in (1, 2)}

    val = {}
    der = {}
    for k in (1, 2):
        acc = ZERO
        for l in (1, 2):
            acc = acc + ax[l - 1] * by[(k, l)] - ay[l - 1] * bx[(k, l)]
        val[k] = acc
        for m in (1, 2):
            acc = ZERO
            for l in (1, 2):
                acc = acc + bx[(l, m)] * by[(k, l)] + ax[l - 1] * ddy[(m, l, k)]
                acc = acc - by[(l, m)] * bx[(k, l)] - ay[l - 1] * ddx[(m, l, k)]
            der[(k, m)] = acc
    return Jet1(val[1], val[2], der[(1, 1)], der[(1, 2)], der[(2, 1)], der[(2, 2)])


# ---------------------------------------------------------------------------
# presentations
# ---------------------------------------------------------------------------

@dataclass
class LieAlgebraPresentation:
    dim: int
    c: list[list[list[Scalar]]]          # [e_i, e_j] = sum_k c[i][j][k] e_k
    jets: list[Jet1]
    eval_matrix: list[list[Scalar]]      # 2 x dim basis-field values at P

    def ad(self, xi: list[Scalar]) -> list[list[Scalar]]:
        """Matrix of ad(xi) in the basis: column j holds [xi, e_j]."""
        n = self.dim
        out = [[ZERO] * n for _ in range(n)]
        for j in range(n):
            for i in range(n):
                if xi[i].is_zero:
                    continue
                for k in range(n):
                    out[k][j] = out[k][j] + xi[i] * self.c[i][j][k]
        return out

    def bracket_coeffs(self, u: list[Scalar], v: list[Scalar]) -> list[Scalar]:
        n = self.dim
        out = [ZERO] * n
        for i in range(n):
            if u[i].is_zero:
                continue
            for j in range(n):
                if v[j].is_zero:
                    continue
                for k in range(n):
                    out[k] = out[k] + u[i] * v[j] * self.c[i][j][k]
        return out

    def killing_form(self) -> list[list[Scalar]]:
        ads = [self.ad([ONE if i == j else ZERO for j in range(self.dim)])
               for i in range(self.dim)]
        return [[linalg.trace(linalg.mat_mul(ads[i], ads[j]))
                 for j in range(self.dim)] for i in range(self.dim)]

    def evaluate(self, coeffs: list[Scalar]) -> tuple[Scalar, Scalar]:
        v1 = sum((self.eval_matrix[0][i] * coeffs[i] for i in range(self.dim)), ZERO)
        v2 = sum((self.eval_matrix[1][i] * coeffs[i] for i in range(self.dim)), ZERO)
        return v1, v2


def structure_constants(s: AffineSurface,
                        space: KillingJetSpace | None = None) -> LieAlgebraPresentation:
    """Exact structure constants of the Killing algebra in the jet basis."""
    ks = space or killing_jet_space(s)
    n = ks.dim
    basis_vecs = [j.as_vector() for j in ks.basis]
    cols = [[basis_vecs[k][r] for k in range(n)] for r in range(JET_DIM)]
    c = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            bj = bracket_jets(s, ks.basis[i], ks.basis[j]).as_vector()
            coeffs = linalg.solve(cols, bj)
            if coeffs is None:
                raise SolveFailure(
                    f"bracket of basis jets {i},{j} left the jet space")
            for k in range(n):
                c[i][j][k] = coeffs[k]
                c[j][i][k] = -coeffs[k]
    eval_matrix = [[basis_vecs[k][0] for k in range(n)],
                   [basis_vecs[k][1] for k in range(n)]]
    return LieAlgebraPresentation(n, c, ks.basis, eval_matrix)


def jacobi_residual(L: LieAlgebraPresentation) -> list[Scalar]:
    """All cyclic-sum components; zero list for a genuine Lie algebra."""
    out = []
    n = L.dim
    basis = [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]
    for i, j, k in combinations(range(n), 3):
        term = L.bracket_coeffs(basis[i], L.bracket_coeffs(basis[j], basis[k]))
        t2 = L.bracket_coeffs(basis[j], L.bracket_coeffs(basis[k], basis[i]))
        t3 = L.bracket_coeffs(basis[k], L.bracket_coeffs(basis[i], basis[j]))
        out.extend(a + b + c for a, b, c in zip(term, t2, t3))
    return out


# ---------------------------------------------------------------------------
# spectra and grading
# ---------------------------------------------------------------------------

@dataclass
class Eigenspace:
    alpha: Scalar | complex
    exact: bool
    basis: list          # list of exact Vecs, or float ndarrays
    certificate: float = 0.0


def _rationalize_root(z: complex, coeffs) -> Scalar | None:
    for limit in (1, 12, 720, 10**6):
        cand = Scalar(Fraction(z.real).limit_denominator(limit),
                      Fraction(z.imag).limit_denominator(limit))
        if abs(complex(cand) - z) < 1e-6 and linalg.poly_eval(coeffs, cand).is_zero:
            return cand
    return None


def eigenvalues(L: LieAlgebraPresentation, xi: list[Scalar]):
    """(exact roots with multiplicity, leftover numeric roots)."""
    ad = L.ad(xi)
    coeffs = linalg.charpoly(ad)
    numeric = np.roots([complex(c) for c in reversed(coeffs)])
    exact: list[Scalar] = []
    remaining = coeffs
    for z in numeric:
        root = _rationalize_root(complex(z), remaining)
        if root is not None:
            exact.append(root)
            remaining = linalg.poly_deflate(remaining, root)
    leftover = [complex(z) for z in numeric
                if not any(abs(complex(r) - z) < 1e-7 for r in exact)]
    return exact, leftover, ad


def generalized_eigenspaces(L: LieAlgebraPresentation, xi: list[Scalar]) -> list[Eigenspace]:
    """Complexified decomposition into generalized ad(xi) eigenspaces.

    Exact Gaussian-rational eigenvalues give exact kernels of
    (ad - alpha)^dim; any remaining spectrum is handled numerically with a
    residual certificate below 1e-9.
    """
    exact_roots, leftover, ad = eigenvalues(L, xi)
    n = L.dim
    spaces: list[Eigenspace] = []
    seen: list[Scalar] = []
    for root in exact_roots:
        if any((root - r).is_zero for r in seen):
            continue
        seen.append(root)
        shifted = [[ad[i][j] - (root if i == j else ZERO) for j in range(n)]
                   for i in range(n)]
        power = linalg.mat_pow(shifted, n)
        basis = linalg.nullspace(power, n_cols=n)
        spaces.append(Eigenspace(root, True, basis))
    done = [complex(r) for r in seen]
    for z in leftover:
        if any(abs(z - d) < 1e-8 for d in done):
            continue
        done.append(z)
        adf = np.array([[complex(x) for x in row] for row in ad])
        shifted = adf - z * np.eye(n)
        power = np.linalg.matrix_power(shifted, n)
        _, sv, vt = np.linalg.svd(power)
        tol = 1e-9 * max(1.0, sv[0] if len(sv) else 1.0)
        kernel = vt[int(np.sum(sv >= tol)):].conj()
        cert = float(max((np.linalg.norm(power @ v) for v in kernel), default=0.0))
        spaces.append(Eigenspace(z, False, [v for v in kernel], cert))
    return spaces


@dataclass
class GradingReport:
    ok: bool
    violations: list[str] = field(default_factory=list)
    pairs_checked: int = 0


def grading_check(L: LieAlgebraPresentation, xi: list[Scalar],
                  tol: float = 1e-8) -> GradingReport:
    """Verify [E(alpha), E(beta)] lies inside E(alpha + beta)."""
    spaces = generalized_eigenspaces(L, xi)
    report = GradingReport(ok=True)
    n = L.dim
    for ea, eb in product(spaces, repeat=2):
        if ea.exact and eb.exact:
            target_alpha = ea.alpha + eb.alpha
            target = next((sp for sp in spaces
                           if sp.exact and (sp.alpha - target_alpha).is_zero), None)
            for u in ea.basis:
                for v in eb.basis:
                    w = L.bracket_coeffs(u, v)
                    ok = (linalg.in_span(target.basis, w) if target is not None
                          else all(x.is_zero for x in w))
                    report.pairs_checked += 1
                    if not ok:
                        report.ok = False
                        report.violations.append(
                            f"[E({ea.alpha}), E({eb.alpha})] escapes E({target_alpha})")
        else:
            za = complex(ea.alpha) if isinstance(ea.alpha, Scalar) else ea.alpha
            zb = complex(eb.alpha) if isinstance(eb.alpha, Scalar) else eb.alpha
            target_z = za + zb
            target = next((sp for sp in spaces
                           if abs((complex(sp.alpha) if isinstance(sp.alpha, Scalar)
                                   else sp.alpha) - target_z) < 1e-7), None)
            cf = np.array([[complex(L.c[i][j][k]) for k in range(n)]
                           for i in range(n) for j in range(n)]).reshape(n, n, n)
            for u in ea.basis:
                uf = np.array([complex(x) for x in u]) if ea.exact else np.asarray(u)
                for v in eb.basis:
                    vf = np.array([complex(x) for x in v]) if eb.exact else np.asarray(v)
                    w = np.einsum("i,j,ijk->k", uf, vf, cf)
                    if target is None:
                        resid = float(np.linalg.norm(w))
                    else:
                        tb = np.array(
                            [[complex(x) for x in bv] for bv in target.basis]
                            if target.exact else [np.asarray(bv) for bv in target.basis])
                        if tb.size == 0:
                            resid = float(np.linalg.norm(w))
                        else:
                            sol, *_ = np.linalg.lstsq(tb.T, w, rcond=None)
                            resid = float(np.linalg.norm(tb.T @ sol - w))
                    report.pairs_checked += 1
                    if resid > tol * max(1.0, float(np.linalg.norm(w))):
                        report.ok = False
                        report.violations.append(
                            f"[E({ea.alpha}), E({eb.alpha})] residual {resid:.2e}")
    return report


# ---------------------------------------------------------------------------
# effectivity and classification
# ---------------------------------------------------------------------------

def effective(L: LieAlgebraPresentation, elements: list[list[Scalar]]) -> bool:
    """True iff some pair of evaluations at P spans the tangent plane."""
    evals = [L.evaluate(e) for e in elements]
    for (u1, u2), (v1, v2) in combinations(evals, 2):
        det = u1 * v2 - u2 * v1
        if not det.is_zero:
            return True
    return False


@dataclass
class Witness:
    kind: str                       # "TypeA" | "TypeB" | "so3"
    elements: list                  # coefficient vectors over the jet basis
    relations: str
    exact: bool
    residual: float = 0.0


@dataclass
class ClassificationResult:
    dim: int
    branches: list[Witness]
    diagnostics: list[str] = field(default_factory=list)

    def kinds(self) -> list[str]:
        return [w.kind for w in self.branches]


def _unit(n: int, i: int) -> list[Scalar]:
    return [ONE if j == i else ZERO for j in range(n)]


def _search_candidates(n: int, budget: int):
    """Deterministic candidate stream: basis elements, two-slot integer
    combinations, then full small-integer combinations up to the budget."""
    yielded = 0
    seen = set()

    def emit(vec):
        nonlocal yielded
        ints = tuple(vec)
        if all(v == 0 for v in ints):
            return None
        from math import gcd
        g = 0
        for v in ints:
            g = gcd(g, abs(v))
        ints = tuple(v // g for v in ints)
        lead = next(v for v in ints if v != 0)
        if lead < 0:
            ints = tuple(-v for v in ints)
        if ints in seen:
            return None
        seen.add(ints)
        yielded += 1
        return [Scalar.of(v) for v in ints]

    for i in range(n):
        vec = [0] * n
        vec[i] = 1
        out = emit(vec)
        if out is not None:
            yield out
    for i, j in combinations(range(n), 2):
        for ci in range(-2, 3):
            for cj in range(-2, 3):
                vec = [0] * n
                vec[i], vec[j] = ci, cj
                out = emit(vec)
                if out is not None:
                    yield out
                if yielded >= budget:
                    return
    for combo in product(range(-2, 3), repeat=n):
        out = emit(list(combo))
        if out is not None:
            yield out
        if yielded >= budget:
            return


def _verified_bracket(s, L, u, v) -> list[Scalar]:
    """Bracket computed straight from the jets, as basis coefficients."""
    n = L.dim
    ju = [sum((L.jets[i].as_vector()[r] * u[i] for i in range(n)), ZERO)
          for r in range(JET_DIM)]
    jv = [sum((L.jets[i].as_vector()[r] * v[i] for i in range(n)), ZERO)
          for r in range(JET_DIM)]
    bj = bracket_jets(s, Jet1.from_vector(ju), Jet1.from_vector(jv)).as_vector()
    cols = [[L.jets[k].as_vector()[r] for k in range(n)] for r in range(JET_DIM)]
    coeffs = linalg.solve(cols, bj)
    if coeffs is None:
        raise SolveFailure("witness bracket left the jet space")
    return coeffs


def _find_type_a(s, L, budget) -> Witness | None:
    n = L.dim
    for x in _search_candidates(n, budget):
        kernel = linalg.nullspace(L.ad(x), n_cols=n)
        pool = [x] + kernel
        for u, v in combinations(pool, 2):
            br = L.bracket_coeffs(u, v)
            if not all(e.is_zero for e in br):
                continue
            if not effective(L, [u, v]):
                continue
            if all(e.is_zero for e in _verified_bracket(s, L, u, v)):
                return Witness("TypeA", [u, v], "[X,Y]=0", True)
    return None


def _find_type_b(s, L, budget, diagnostics) -> Witness | None:
    n = L.dim
    for x in _search_candidates(n, budget):
        ad = L.ad(x)
        coeffs = linalg.charpoly(ad)
        roots = np.roots([complex(c) for c in reversed(coeffs)])
        for z in roots:
            if abs(z) < 1e-9:
                continue
            if abs(z.imag) > 1e-9:
                continue
            lam = _rationalize_root(complex(z.real, 0.0), coeffs)
            if lam is None or not lam.is_real or lam.is_zero:
                diagnostics.append(
                    f"skipped non-rational candidate eigenvalue {z.real:.6g}")
                continue
            shifted = [[ad[i][j] - (lam if i == j else ZERO) for j in range(n)]
                       for i in range(n)]
            for y in linalg.nullspace(shifted, n_cols=n):
                x_scaled = [xi / lam for xi in x]
                if not effective(L, [x_scaled, y]):
                    continue
                got = _verified_bracket(s, L, x_scaled, y)
                if all((got[k] - y[k]).is_zero for k in range(n)):
                    return Witness("TypeB", [x_scaled, y], "[X,Y]=Y", True)
    return None


def _find_so3(s, L) -> Witness | None:
    if L.dim != 3:
        return None
    kf = L.killing_form()
    # Negative definite iff leading principal minors alternate in sign.
    minors = [_det3([row[:k] for row in kf[:k]]) for k in (1, 2, 3)]
    signs_ok = (minors[0].is_real and minors[0].re < 0
                and minors[1].is_real and minors[1].re > 0
                and minors[2].is_real and minors[2].re < 0)
    if not signs_ok:
        return None
    # Orthonormalize against -(Killing form)/2 numerically.
    b = np.array([[-float(complex(kf[i][j]).real) / 2 for j in range(3)]
                  for i in range(3)])
    cf = np.array([[[float(complex(L.c[i][j][k]).real) for k in range(3)]
                    for j in range(3)] for i in range(3)])
    frame = []
    for i in range(3):
        v = np.eye(3)[i]
        for w in frame:
            v = v - (v @ b @ w) * w
        norm = float(np.sqrt(v @ b @ v))
        frame.append(v / norm)
    f1, f2, f3 = frame
    orient = np.einsum("i,j,ijk,k->", f1, f2, cf, f3 @ b)
    if orient < 0:
        f1, f2 = f2, f1

    def br(u, v):
        return np.einsum("i,j,ijk->k", u, v, cf)

    residual = max(
        float(np.linalg.norm(br(f1, f2) - f3)),
        float(np.linalg.norm(br(f2, f3) - f1)),
        float(np.linalg.norm(br(f3, f1) - f2)),
    )
    if residual > 1e-9:
        return None
    return Witness("so3", [list(f1), list(f2), list(f3)],
                   "[X,Y]=Z, [Y,Z]=X, [Z,X]=Y", False, residual)


def _det3(m) -> Scalar:
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def classify(s: AffineSurface, budget: int = 4000) -> ClassificationResult:
    """Search the Killing algebra for certified subalgebra witnesses.

    Branches are reported in the order TypeA, TypeB, so3 and are not
    exclusive; each witness' relations are re-verified exactly via the jet
    bracket (TypeA/TypeB) or to residual 1e-9 (so3).
    """
    ks = killing_jet_space(s)
    if ks.dim < 2:
        raise NotHomogeneousCandidate(
            f"Killing dimension {ks.dim} < 2; not locally homogeneous")
    L = structure_constants(s, ks)
    basis_coeffs = [_unit(L.dim, i) for i in range(L.dim)]
    if not effective(L, basis_coeffs):
        raise NotHomogeneousCandidate(
            "no pair of Killing fields spans the tangent plane at P")

    diagnostics: list[str] = []
    branches: list[Witness] = []
    wa = _find_type_a(s, L, budget)
    if wa:
        branches.append(wa)
    wb = _find_type_b(s, L, budget, diagnostics)
    if wb:
        branches.append(wb)
    wc = _find_so3(s, L)
    if wc:
        branches.append(wc)
    if not branches:
        raise ClassificationInconclusive(
            f"no witness found within budget {budget}; diagnostics: {diagnostics}")
    return ClassificationResult(L.dim, branches, diagnostics)
