"""The affine Killing equations: residuals, jet solver, jet extension.

A vector field X = a^1 d1 + a^2 d2 preserves the connection iff the eight
residuals

    K_ij^k = d_i d_j a^k + sum_l ( a^l d_l G_ij^k - G_ij^l d_l a^k
                                   + G_il^k d_j a^l + G_lj^k d_i a^l )

vanish.  Solving each K_ij^k for the second derivative turns the system
into a first-order linear system d_i v = M_i(x) v on the 1-jet
v = (a1, a2, d1 a1, d2 a1, d1 a2, d2 a2) plus algebraic constraint rows:
the mixed-index consistency rows K_12^k - K_21^k and the integrability
rows of the first-order system.  Differentiating constraint rows along the
system and re-evaluating at the basepoint cuts the jet space down until
the dimension stabilizes; all of this is exact Gaussian-rational
arithmetic, so the dimensions (at most 6) are exact integers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import linalg
from .scalars import ONE, Scalar, as_fraction
from .surface import AffineSurface
from .symexpr import Expr, parse

JET_DIM = 6
STABILIZATION_CAP = 12


class KillingError(Exception):
    pass


class NoStabilization(KillingError):
    """The prolongation did not stabilize within the round cap."""


@dataclass(frozen=True)
class VectorField:
    a1: Expr
    a2: Expr

    def component(self, k: int) -> Expr:
        return self.a1 if k == 1 else self.a2

    def eval_real(self, p) -> tuple[float, float]:
        v1 = self.a1.eval_numeric(p)
        v2 = self.a2.eval_numeric(p)
        if max(abs(v1.imag), abs(v2.imag)) > 1e-9 * (1 + abs(v1) + abs(v2)):
            raise KillingError("field has a non-real value at this point")
        return (v1.real, v2.real)

    def eval_array(self, x1, x2) -> np.ndarray:
        out = np.stack([self.a1.eval_array(x1, x2), self.a2.eval_array(x1, x2)],
                       axis=-1)
        return out.real


@dataclass(frozen=True)
class Jet1:
    """A field value plus first derivatives at the basepoint."""

    a1: Scalar
    a2: Scalar
    d1a1: Scalar
    d2a1: Scalar
    d1a2: Scalar
    d2a2: Scalar

    def as_vector(self) -> list[Scalar]:
        return [self.a1, self.a2, self.d1a1, self.d2a1, self.d1a2, self.d2a2]

    @staticmethod
    def from_vector(v) -> "Jet1":
        return Jet1(*v)

    def value(self) -> tuple[Scalar, Scalar]:
        return (self.a1, self.a2)


@dataclass
class KillingJetSpace:
    basis: list[Jet1]
    dim: int
    constraint_history: list[int]


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------

def residuals(s: AffineSurface, X: VectorField) -> dict[str, Expr]:
    """All eight Killing residuals, canonical."""
    out: dict[str, Expr] = {}
    for i, j, k in product((1, 2), repeat=3):
        e = X.component(k).diff(f"x{i}").diff(f"x{j}")
        for l in (1, 2):
            e = (e
                 + X.component(l) * s.g(i, j, k).diff(f"x{l}")
                 - s.g(i, j, l) * X.component(k).diff(f"x{l}")
                 + s.g(i, l, k) * X.component(l).diff(f"x{j}")
                 + s.g(l, j, k) * X.component(l).diff(f"x{i}"))
        out[f"{i}{j}{k}"] = e
    return out


def is_killing(s: AffineSurface, X: VectorField) -> bool:
    return all(e.is_zero for e in residuals(s, X).values())


# ---------------------------------------------------------------------------
# prolongation
# ---------------------------------------------------------------------------

def _idx_a(k: int) -> int:
    return k - 1


def _idx_b(k: int, i: int) -> int:
    return 2 + 2 * (k - 1) + (i - 1)


ExprRow = tuple[Expr, ...]
ExprMat = list[list[Expr]]


def _zero_row() -> list[Expr]:
    return [Expr.zero()] * JET_DIM


def _second_derivative_row(s: AffineSurface, i: int, j: int, k: int) -> list[Expr]:
    """Row expressing d_i d_j a^k = row . v, solved from K_ij^k = 0."""
    row = _zero_row()
    for l in (1, 2):
        row[_idx_a(l)] = row[_idx_a(l)] - s.g(i, j, k).diff(f"x{l}")
        row[_idx_b(k, l)] = row[_idx_b(k, l)] + s.g(i, j, l)
        row[_idx_b(l, j)] = row[_idx_b(l, j)] - s.g(i, l, k)
        row[_idx_b(l, i)] = row[_idx_b(l, i)] - s.g(l, j, k)
    return row


def prolongation_symbolic(s: AffineSurface) -> tuple[ExprMat, ExprMat, list[list[Expr]]]:
    """Symbolic M1, M2 (d_i v = M_i v) and the K_12 - K_21 consistency rows."""
    one = Expr.const(1)
    m1: ExprMat = [_zero_row() for _ in range(JET_DIM)]
    m2: ExprMat = [_zero_row() for _ in range(JET_DIM)]
    for k in (1, 2):
        m1[_idx_a(k)][_idx_b(k, 1)] = one
        m2[_idx_a(k)][_idx_b(k, 2)] = one
        # d_1 b^k_1 = dd_11 a^k; d_1 b^k_2 = d_2 b^k_1 = dd_12 a^k (from K_12);
        # d_2 b^k_2 = dd_22 a^k.
        m1[_idx_b(k, 1)] = _second_derivative_row(s, 1, 1, k)
        m1[_idx_b(k, 2)] = _second_derivative_row(s, 1, 2, k)
        m2[_idx_b(k, 1)] = _second_derivative_row(s, 1, 2, k)
        m2[_idx_b(k, 2)] = _second_derivative_row(s, 2, 2, k)

    c0: list[list[Expr]] = []
    for k in (1, 2):
        row = _zero_row()
        for l in (1, 2):
            row[_idx_a(l)] = row[_idx_a(l)] + (s.g(1, 2, k) - s.g(2, 1, k)).diff(f"x{l}")
            row[_idx_b(k, l)] = row[_idx_b(k, l)] - (s.g(1, 2, l) - s.g(2, 1, l))
            row[_idx_b(l, 2)] = row[_idx_b(l, 2)] + s.g(1, l, k) - s.g(l, 1, k)
            row[_idx_b(l, 1)] = row[_idx_b(l, 1)] + s.g(l, 2, k) - s.g(2, l, k)
        c0.append(row)
    return m1, m2, c0


def prolongation(s: AffineSurface, p) -> tuple[list[list[Scalar]], list[list[Scalar]], list[list[Scalar]]]:
    """M1, M2 and consistency rows exactly evaluated at a rational point."""
    point = (as_fraction(p[0]), as_fraction(p[1]))
    m1, m2, c0 = prolongation_symbolic(s)
    ev = lambda rows: [[e.eval_exact(point) for e in row] for row in rows]
    return ev(m1), ev(m2), ev(c0)


def _integrability_rows(m1: ExprMat, m2: ExprMat) -> list[list[Expr]]:
    """Rows of d1 M2 - d2 M1 + M2 M1 - M1 M2; they vanish on jets of
    genuine solutions and constrain everything else."""
    rows = []
    for r in range(JET_DIM):
        row = []
        for c in range(JET_DIM):
            e = m2[r][c].diff("x1") - m1[r][c].diff("x2")
            for t in range(JET_DIM):
                e = e + m2[r][t] * m1[t][c] - m1[r][t] * m2[t][c]
            row.append(e)
        rows.append(row)
    return rows


def _derive_row(row: list[Expr], m: ExprMat, var: str) -> list[Expr]:
    """d/dx of (row . v) along solutions: row.M + d(row)."""
    out = []
    for c in range(JET_DIM):
        e = row[c].diff(var)
        for t in range(JET_DIM):
            e = e + row[t] * m[t][c]
        out.append(e)
    return out


class _ExactRankTracker:
    """Incremental exact rank of an accumulating row set (at most 6)."""

    def __init__(self):
        self.reduced: list[list[Scalar]] = []
        self.pivots: list[int] = []

    def add(self, row: list[Scalar]) -> None:
        work = row[:]
        for basis_row, piv in zip(self.reduced, self.pivots):
            if not work[piv].is_zero:
                f = work[piv]
                work = [x - f * y for x, y in zip(work, basis_row)]
        piv = next((c for c in range(JET_DIM) if not work[c].is_zero), None)
        if piv is None:
            return
        inv = ONE / work[piv]
        work = [x * inv for x in work]
        self.reduced.append(work)
        self.pivots.append(piv)

    @property
    def rank(self) -> int:
        return len(self.reduced)

    def matrix(self) -> list[list[Scalar]]:
        return [row[:] for row in self.reduced]


def killing_jet_space(s: AffineSurface) -> KillingJetSpace:
    """Exact basis of 1-jets of affine Killing fields at the basepoint.

    Constraint rows are carried symbolically and differentiated along the
    jet system before each exact evaluation.  The iteration is provably
    complete once the frontier empties (the symbolic row span is then
    closed under both derivations); otherwise it stops after two fully
    stagnant rounds, except that a dimension of 6 with constraints present
    is accepted only for genuinely flat surfaces, since the bound is
    attained exactly by flat connections.  Constraints whose entries
    vanish at the basepoint to order beyond the round cap would still be
    missed; such inputs cannot be locally homogeneous.
    """
    from .surface import is_flat

    point = s.basepoint
    m1, m2, c0 = prolongation_symbolic(s)
    base_rows = [row for row in c0 if any(not e.is_zero for e in row)]
    for row in _integrability_rows(m1, m2):
        if any(not e.is_zero for e in row):
            base_rows.append(row)

    tracker = _ExactRankTracker()
    seen: set = set()
    frontier: list[list[Expr]] = []
    for row in base_rows:
        key = tuple(row)
        if key in seen:
            continue
        seen.add(key)
        frontier.append(row)
        tracker.add([e.eval_exact(point) for e in row])

    def finish(history):
        basis = linalg.nullspace(tracker.matrix(), n_cols=JET_DIM)
        jets = [Jet1.from_vector(v) for v in basis]
        return KillingJetSpace(jets, len(jets), history)

    flat = None
    history = [JET_DIM - tracker.rank]
    for _ in range(STABILIZATION_CAP):
        if not frontier:
            # Row span is closed under both derivations: provably complete.
            history.append(history[-1])
            return finish(history)
        new_frontier: list[list[Expr]] = []
        for row in frontier:
            for m, var in ((m1, "x1"), (m2, "x2")):
                derived = _derive_row(row, m, var)
                if all(e.is_zero for e in derived):
                    continue
                key = tuple(derived)
                if key in seen:
                    continue
                seen.add(key)
                new_frontier.append(derived)
                tracker.add([e.eval_exact(point) for e in derived])
        frontier = new_frontier
        history.append(JET_DIM - tracker.rank)
        if len(history) >= 3 and history[-1] == history[-2] == history[-3]:
            if history[-1] == JET_DIM and base_rows:
                if flat is None:
                    flat = is_flat(s)
                if not flat:
                    continue  # constraints must eventually bite
            return finish(history)
    if history[-1] == JET_DIM and base_rows and not (flat or is_flat(s)):
        raise NoStabilization(
            "constraints never became active at the basepoint within "
            f"{STABILIZATION_CAP} rounds on a curved surface: {history}")
    if history[-1] == history[-2]:
        return finish(history)
    raise NoStabilization(
        f"jet space dimension did not stabilize within {STABILIZATION_CAP} rounds: {history}")


# ---------------------------------------------------------------------------
# jets of symbolic fields, numeric extension of jets
# ---------------------------------------------------------------------------

def jet_of(s: AffineSurface, X: VectorField) -> Jet1:
    p = s.basepoint
    return Jet1(
        X.a1.eval_exact(p), X.a2.eval_exact(p),
        X.a1.diff("x1").eval_exact(p), X.a1.diff("x2").eval_exact(p),
        X.a2.diff("x1").eval_exact(p), X.a2.diff("x2").eval_exact(p),
    )


class _CompiledSystem:
    """Numeric evaluator for the sparse symbolic jet system matrices."""

    def __init__(self, s: AffineSurface):
        m1, m2, _ = prolongation_symbolic(s)
        self.entries = []
        for m in (m1, m2):
            self.entries.append([(r, c, m[r][c]) for r in range(JET_DIM)
                                 for c in range(JET_DIM) if not m[r][c].is_zero])

    def matrix(self, axis: int, x1: float, x2: float) -> np.ndarray:
        out = np.zeros((JET_DIM, JET_DIM), dtype=complex)
        for r, c, e in self.entries[axis]:
            out[r, c] = e.eval_numeric((x1, x2))
        return out


def extend_jet(s: AffineSurface, v: Jet1, q, step: float = 1e-3):
    """Integrate the jet along the L-shaped path (x1 leg, then x2 leg).

    Returns the six floats (a1, a2, d1 a1, d2 a1, d1 a2, d2 a2) at q.
    """
    system = _CompiledSystem(s)
    state = np.array([complex(x) for x in v.as_vector()])
    x1, x2 = float(s.basepoint[0]), float(s.basepoint[1])
    q1, q2 = float(q[0]), float(q[1])

    for axis, (start, stop, fixed) in enumerate(((x1, q1, x2), (x2, q2, q1))):
        span = stop - start
        if span == 0.0:
            continue
        n = max(1, math.ceil(abs(span) / step))
        h = span / n
        t = start
        for _ in range(n):
            def rhs(tt, y):
                if axis == 0:
                    m = system.matrix(0, tt, fixed)
                else:
                    m = system.matrix(1, fixed, tt)
                return m @ y
            k1 = rhs(t, state)
            k2 = rhs(t + h / 2, state + h / 2 * k1)
            k3 = rhs(t + h / 2, state + h / 2 * k2)
            k4 = rhs(t + h, state + h * k3)
            state = state + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
    if np.max(np.abs(state.imag)) > 1e-8 * (1 + np.max(np.abs(state))):
        raise KillingError("jet extension produced a non-real jet")
    return tuple(float(x) for x in state.real)


class JetField:
    """A Killing field known only through its 1-jet, evaluated on demand."""

    def __init__(self, s: AffineSurface, jet: Jet1, step: float = 1e-3):
        self.surface = s
        self.jet = jet
        self.step = step

    def jet_at(self, p) -> tuple[float, ...]:
        return extend_jet(self.surface, self.jet, p, self.step)

    def value(self, p) -> tuple[float, float]:
        full = self.jet_at(p)
        return (full[0], full[1])


# ---------------------------------------------------------------------------
# field files
# ---------------------------------------------------------------------------

def field_to_json(X: VectorField) -> dict:
    return {"a1": str(X.a1), "a2": str(X.a2)}


def field_from_json(data: dict) -> VectorField:
    return VectorField(parse(data.get("a1", "0")), parse(data.get("a2", "0")))


def load_field(path) -> VectorField:
    with open(path, encoding="utf-8") as fh:
        return field_from_json(json.load(fh))
