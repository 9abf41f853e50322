"""Built-in cross-check suite run by ``affkit verify-paper``.

Each item re-derives a key exact statement from built-in fixtures: the
sphere curvature data, the rotation Killing triple and its algebra, the
rank of the linear system that pins the sphere's Christoffel symbols, the
eigenspace grading, and the dimension bound.  Negative controls inject a
documented fault (flipped curvature sign, a dropped kernel equation,
corrupted structure constants) and must turn the run red.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import product

from . import linalg
from .killing import VectorField, is_killing, killing_jet_space
from .liealg import classify, grading_check, jacobi_residual, structure_constants
from .scalars import ONE, ZERO, Scalar
from .surface import nabla_ricci, ricci, sphere, torsion, type_a, type_b
from .symexpr import Expr, parse

NEGATIVE_CONTROLS = ("ricci-sign", "drop-kernel-row", "corrupt-structure")


@dataclass
class CheckItem:
    name: str
    passed: bool
    detail: str = ""


def sphere_killing_triple() -> tuple[VectorField, VectorField, VectorField]:
    x_field = VectorField(
        parse("1/2*exp(1*i*x2)+1/2*exp(-1*i*x2)"),
        parse("-1/2*i*tan(x1)*exp(1*i*x2)+1/2*i*tan(x1)*exp(-1*i*x2)"))
    y_field = VectorField(
        parse("1/2*i*exp(1*i*x2)-1/2*i*exp(-1*i*x2)"),
        parse("1/2*tan(x1)*exp(1*i*x2)+1/2*tan(x1)*exp(-1*i*x2)"))
    z_field = VectorField(parse("0"), parse("1"))
    return x_field, y_field, z_field


def constraint_rows(drop: int | None = None) -> list[list[Scalar]]:
    """The eight homogeneous equations pinning the sphere symbol constants.

    Unknown order: a_111, a_112, a_121, a_122, a_211, a_212, a_221, a_222.
    For each ordered pair i != j the evaluated Killing equations give
        K_ii^i:  a_iij + a_iji + a_jii = 0
        K_ii^j: -a_iii + a_ijj + a_jij = 0
        K_ij^i: -a_iii + a_ijj + a_jji = 0
        K_ij^j: -a_iij - a_iji + a_jjj = 0
    and the system must have full rank 8 (only the zero solution).
    """
    slot = {(i, j, k): 4 * (i - 1) + 2 * (j - 1) + (k - 1)
            for i, j, k in product((1, 2), repeat=3)}
    rows = []
    for i, j in ((1, 2), (2, 1)):
        rows.append(_row(slot, [((i, i, j), 1), ((i, j, i), 1), ((j, i, i), 1)]))
        rows.append(_row(slot, [((i, i, i), -1), ((i, j, j), 1), ((j, i, j), 1)]))
        rows.append(_row(slot, [((i, i, i), -1), ((i, j, j), 1), ((j, j, i), 1)]))
        rows.append(_row(slot, [((i, i, j), -1), ((i, j, i), -1), ((j, j, j), 1)]))
    if drop is not None:
        rows = [r for n, r in enumerate(rows) if n != drop]
    return rows


def _row(slot, entries) -> list[Scalar]:
    row = [ZERO] * 8
    for idx, val in entries:
        row[slot[idx]] = row[slot[idx]] + Scalar.of(val)
    return row


def verify_paper(negative_control: str | None = None, seed: int = 0,
                 sweep_size: int = 40) -> list[CheckItem]:
    """Run the whole suite; a negative control injects one fault."""
    if negative_control not in (None,) + NEGATIVE_CONTROLS:
        raise ValueError(f"unknown negative control {negative_control!r}")
    items: list[CheckItem] = []
    sph = sphere()

    # --- sphere curvature data -------------------------------------------
    rho = ricci(sph)
    flip = Expr.const(-1) if negative_control == "ricci-sign" else Expr.const(1)
    diag_ok = ((rho[(1, 1)] * flip - Expr.const(1)).is_zero
               and (rho[(2, 2)] * flip - parse("cos(x1)^2")).is_zero
               and rho[(1, 2)].is_zero and rho[(2, 1)].is_zero)
    items.append(CheckItem(
        "sphere-ricci", diag_ok,
        "rho == diag(1, cos(x1)^2) exactly"))
    items.append(CheckItem(
        "sphere-nabla-ricci", nabla_ricci(sph).is_zero,
        "all 8 covariant-derivative components vanish"))
    items.append(CheckItem(
        "sphere-torsion", torsion(sph).is_zero, "connection is torsion free"))

    # --- symbol constants forced to vanish -------------------------------
    drop = 0 if negative_control == "drop-kernel-row" else None
    rows = constraint_rows(drop)
    rank = linalg.rank(rows)
    items.append(CheckItem(
        "symbol-kernel-rank", rank == 8,
        f"rank {rank} of the 8-equation system in the 8 constants"))

    # --- sphere Killing triple and its algebra ---------------------------
    triple = sphere_killing_triple()
    killing_ok = all(is_killing(sph, f) for f in triple)
    items.append(CheckItem("sphere-killing-triple", killing_ok,
                           "rotation fields satisfy the Killing equations"))
    dim = killing_jet_space(sph).dim
    items.append(CheckItem("sphere-killing-dimension", dim == 3, f"dim = {dim}"))

    result = classify(sph)
    so3_ok = result.kinds() == ["so3"]
    items.append(CheckItem(
        "sphere-so3-branch", so3_ok,
        "classification yields exactly the rotation branch"))

    # --- structure constants and grading over the fixtures ----------------
    grading_ok = True
    algebra_ok = True
    fixtures = [sph, type_a({}), type_a({"112": 1, "221": 1}),
                type_b({"221": 1})]
    for surf in fixtures:
        pres = structure_constants(surf)
        if negative_control == "corrupt-structure" and surf is sph:
            pres.c[2][0][2] = pres.c[2][0][2] + ONE
            pres.c[0][2][2] = pres.c[0][2][2] - ONE
        if not all(x.is_zero for x in jacobi_residual(pres)):
            algebra_ok = False
        for idx in range(pres.dim):
            xi = [ONE if j == idx else ZERO for j in range(pres.dim)]
            v1, v2 = pres.evaluate(xi)
            if v1.is_zero and v2.is_zero:
                continue
            if not grading_check(pres, xi).ok:
                grading_ok = False
    items.append(CheckItem(
        "structure-constants-valid", algebra_ok,
        "antisymmetric c tensor satisfies the Jacobi identity exactly"))
    items.append(CheckItem(
        "eigenspace-grading", grading_ok,
        "[E(a), E(b)] contained in E(a+b) on all fixtures"))

    # --- dimension bound sweep --------------------------------------------
    rng = random.Random(seed)
    keys = ("111", "112", "121", "122", "211", "212", "221", "222")
    bound_ok = True
    worst = 0
    for _ in range(sweep_size):
        surf = type_a({k: rng.randint(-2, 2) for k in keys})
        d = killing_jet_space(surf).dim
        worst = max(worst, d)
        if d > 6:
            bound_ok = False
    flat_dim = killing_jet_space(type_a({})).dim
    items.append(CheckItem(
        "dimension-bound", bound_ok and flat_dim == 6,
        f"max dim {worst} over {sweep_size} random constant surfaces; flat = {flat_dim}"))
    return items
