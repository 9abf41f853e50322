"""Affine surfaces and their tensor calculus.

An affine surface is a coordinate patch carrying eight Christoffel symbols
G[i][j][k] (stored under string keys "ijk", indices in {1,2}) together with
a rational basepoint at which all symbols and their derivatives evaluate
exactly.  Torsion is permitted throughout: the symbols are not assumed
symmetric in the lower indices.

Conventions (pinned by the sphere fixture):
    torsion     T_ij^k = G_ij^k - G_ji^k
    curvature   R_ijk^l = d_i G_jk^l - d_j G_ik^l
                          + sum_m (G_im^l G_jk^m - G_jm^l G_ik^m)
    ricci       rho_jk = R_ijk^i  (trace over the first lower index)
    nabla ricci (D_i rho)_jk = d_i rho_jk - G_ij^m rho_mk - G_ik^m rho_jm
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .scalars import ONE, as_fraction
from .symexpr import Expr, NotExactlyEvaluable, parse

GAMMA_KEYS = ("111", "112", "121", "122", "211", "212", "221", "222")

# Maximum derivative order checked at the basepoint when validating.
VALIDATION_ORDER = 8


class SurfaceError(Exception):
    pass


class BadBasepoint(SurfaceError):
    """A Christoffel symbol or one of its derivatives is not exactly
    evaluable at the basepoint."""


@dataclass(frozen=True)
class TensorField:
    """Components of a tensor, keyed by index tuples with entries in {1,2}."""

    components: dict[tuple[int, ...], Expr]
    valence: tuple[int, int]  # (contravariant, covariant)

    def __getitem__(self, idx: tuple[int, ...]) -> Expr:
        return self.components[idx]

    @property
    def is_zero(self) -> bool:
        return all(e.is_zero for e in self.components.values())


@dataclass(frozen=True)
class AffineSurface:
    gamma: dict[str, Expr]
    basepoint: tuple[Fraction, Fraction]
    domain_note: str = ""

    def g(self, i: int, j: int, k: int) -> Expr:
        return self.gamma[f"{i}{j}{k}"]

    def domain_bounds(self) -> tuple[float, float]:
        """Open x1-interval of validity parsed from the domain note."""
        note = self.domain_note.replace(" ", "")
        if note == "x1>0":
            return (0.0, math.inf)
        if note in ("|x1|<pi/2", "abs(x1)<pi/2"):
            return (-math.pi / 2, math.pi / 2)
        return (-math.inf, math.inf)


def make_surface(gamma: dict[str, Expr], basepoint, domain_note: str = "") -> AffineSurface:
    """Validate and build a surface.

    Every symbol together with all mixed x1/x2 derivatives up to total
    order 8 must evaluate exactly at the basepoint; the error names the
    offending symbol and derivative order.
    """
    bp = (as_fraction(basepoint[0]), as_fraction(basepoint[1]))
    full = {key: gamma.get(key, Expr.zero()) for key in GAMMA_KEYS}
    for key, expr in full.items():
        x1_column = [expr]
        for n1 in range(VALIDATION_ORDER + 1):
            e = x1_column[-1]
            for n2 in range(VALIDATION_ORDER + 1 - n1):
                try:
                    e.eval_exact(bp)
                except NotExactlyEvaluable as exc:
                    raise BadBasepoint(
                        f"Gamma_{key} derivative order {n1 + n2} not exactly "
                        f"evaluable at basepoint {bp}: {exc}") from exc
                e = e.diff("x2")
            x1_column.append(x1_column[-1].diff("x1"))
    return AffineSurface(full, bp, domain_note)


# ---------------------------------------------------------------------------
# model families
# ---------------------------------------------------------------------------

def type_a(constants: dict[str, object] | None = None, **kw) -> AffineSurface:
    """Constant Christoffel symbols; basepoint (0, 0)."""
    vals = dict(constants or {})
    vals.update(kw)
    gamma = {key: Expr.const(as_fraction(vals.get(key, 0))) for key in GAMMA_KEYS}
    return AffineSurface(gamma, (Fraction(0), Fraction(0)), "")


def type_b(constants: dict[str, object] | None = None, **kw) -> AffineSurface:
    """Symbols A_ijk / x1 on the half plane x1 > 0; basepoint (1, 0)."""
    vals = dict(constants or {})
    vals.update(kw)
    inv_x1 = Expr.monomial(ONE, p1=-1)
    gamma = {key: Expr.const(as_fraction(vals.get(key, 0))) * inv_x1 for key in GAMMA_KEYS}
    return AffineSurface(gamma, (Fraction(1), Fraction(0)), "x1>0")


def sphere() -> AffineSurface:
    """The round-sphere connection in polar-type coordinates.

    Nonzero symbols: G_12^2 = G_21^2 = -tan(x1), G_22^1 = cos(x1)sin(x1);
    valid for |x1| < pi/2, basepoint (0, 0).
    """
    gamma = {key: Expr.zero() for key in GAMMA_KEYS}
    gamma["122"] = parse("-tan(x1)")
    gamma["212"] = parse("-tan(x1)")
    gamma["221"] = parse("cos(x1)*sin(x1)")
    return AffineSurface(gamma, (Fraction(0), Fraction(0)), "|x1| < pi/2")


# ---------------------------------------------------------------------------
# tensors
# ---------------------------------------------------------------------------

def torsion(s: AffineSurface) -> TensorField:
    comps = {(i, j, k): s.g(i, j, k) - s.g(j, i, k)
             for i, j, k in product((1, 2), repeat=3)}
    return TensorField(comps, (1, 2))


def curvature(s: AffineSurface) -> TensorField:
    comps: dict[tuple[int, ...], Expr] = {}
    for i, j, k, l in product((1, 2), repeat=4):
        e = s.g(j, k, l).diff(f"x{i}") - s.g(i, k, l).diff(f"x{j}")
        for m in (1, 2):
            e = e + s.g(i, m, l) * s.g(j, k, m) - s.g(j, m, l) * s.g(i, k, m)
        comps[(i, j, k, l)] = e
    return TensorField(comps, (1, 3))


def ricci(s: AffineSurface) -> TensorField:
    r = curvature(s)
    comps = {(j, k): r[(1, j, k, 1)] + r[(2, j, k, 2)]
             for j, k in product((1, 2), repeat=2)}
    return TensorField(comps, (0, 2))


def nabla_ricci(s: AffineSurface) -> TensorField:
    rho = ricci(s)
    comps: dict[tuple[int, ...], Expr] = {}
    for i, j, k in product((1, 2), repeat=3):
        e = rho[(j, k)].diff(f"x{i}")
        for m in (1, 2):
            e = e - s.g(i, j, m) * rho[(m, k)] - s.g(i, k, m) * rho[(j, m)]
        comps[(i, j, k)] = e
    return TensorField(comps, (0, 3))


def is_flat(s: AffineSurface) -> bool:
    return curvature(s).is_zero


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

def surface_to_json(s: AffineSurface) -> dict:
    return {
        "gamma": {key: str(e) for key, e in sorted(s.gamma.items()) if not e.is_zero},
        "basepoint": [str(s.basepoint[0]), str(s.basepoint[1])],
        "domain": s.domain_note,
    }


def surface_from_json(data: dict) -> AffineSurface:
    gamma = {key: parse(text) for key, text in data.get("gamma", {}).items()}
    unknown = set(gamma) - set(GAMMA_KEYS)
    if unknown:
        raise SurfaceError(f"unknown gamma keys: {sorted(unknown)}")
    bp = data.get("basepoint", ["0", "0"])
    return make_surface(gamma, (as_fraction(bp[0]), as_fraction(bp[1])),
                        data.get("domain", ""))


def load_surface(path) -> AffineSurface:
    with open(path, encoding="utf-8") as fh:
        return surface_from_json(json.load(fh))
