"""Floating-point oracles: RK4 flows, geodesics, grid residuals.

These routines deliberately avoid the symbolic layer except to evaluate
expressions pointwise, so they can serve as independent checks of the
exact computations: a field is Killing iff pulling the connection back
through its time-t flow reproduces the Christoffel symbols, and iff the
finite-difference residuals of the Killing equations vanish on a grid.

Finite-difference steps are 1e-5 for first derivatives and 1e-4 for
second derivatives, balancing truncation against double rounding.
All integrators are fixed-step classical RK4; batches integrate with a
shared step count so roundoff correlates across a stencil.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable

import numpy as np

from .killing import VectorField
from .surface import AffineSurface

FD_FIRST = 1e-5
FD_SECOND = 1e-4


class NumericError(Exception):
    pass


class DomainExit(NumericError):
    """A trajectory or grid left the surface's validity domain."""


@dataclass(frozen=True)
class Grid:
    center: tuple[float, float]
    half_width: tuple[float, float]
    n: int

    def points(self) -> np.ndarray:
        xs = np.linspace(self.center[0] - self.half_width[0],
                         self.center[0] + self.half_width[0], self.n)
        ys = np.linspace(self.center[1] - self.half_width[1],
                         self.center[1] + self.half_width[1], self.n)
        return np.array([(x, y) for x in xs for y in ys])


def default_grid(s: AffineSurface, n: int = 5, half_width: float = 0.2,
                 center: tuple[float, float] | None = None) -> Grid:
    """Grid around the basepoint, shrunk near the domain boundary."""
    c = center or (float(s.basepoint[0]), float(s.basepoint[1]))
    lo, hi = s.domain_bounds()
    hw = half_width
    margin = 0.8
    if math.isfinite(lo):
        hw = min(hw, margin * (c[0] - lo))
    if math.isfinite(hi):
        hw = min(hw, margin * (hi - c[0]))
    if hw <= 0:
        raise DomainExit("grid center too close to the domain boundary")
    return Grid(c, (hw, half_width), n)


@dataclass(frozen=True)
class FlowReport:
    max_gamma_deviation: float
    t: float
    step: float


# ---------------------------------------------------------------------------
# field evaluation helpers
# ---------------------------------------------------------------------------

def _field_array_fn(field) -> Callable[[np.ndarray], np.ndarray]:
    """Uniform (N,2) -> (N,2) evaluator for VectorFields and callables."""
    if isinstance(field, VectorField):
        return lambda pts: field.eval_array(pts[..., 0], pts[..., 1])

    def wrapped(pts: np.ndarray) -> np.ndarray:
        flat = pts.reshape(-1, 2)
        vals = np.array([field((p[0], p[1])) for p in flat], dtype=float)
        return vals.reshape(pts.shape)

    return wrapped


def _gamma_array_fn(s: AffineSurface):
    entries = [(i, j, k, s.g(i, j, k))
               for i, j, k in product((1, 2), repeat=3) if not s.g(i, j, k).is_zero]

    def gamma(pts: np.ndarray) -> np.ndarray:
        out = np.zeros(pts.shape[:-1] + (2, 2, 2))
        x1, x2 = pts[..., 0], pts[..., 1]
        for i, j, k, e in entries:
            out[..., i - 1, j - 1, k - 1] = e.eval_array(x1, x2).real
        return out

    return gamma


def _check_domain(s: AffineSurface, pts: np.ndarray) -> None:
    lo, hi = s.domain_bounds()
    x1 = np.atleast_2d(pts)[..., 0]
    if np.any(x1 <= lo) or np.any(x1 >= hi):
        raise DomainExit(f"x1 leaves ({lo}, {hi})")


# ---------------------------------------------------------------------------
# integrators
# ---------------------------------------------------------------------------

def _rk4(rhs, y: np.ndarray, n_steps: int) -> np.ndarray:
    """Classical RK4 over unit pseudo-time with n_steps fixed steps.

    The state update is compensated (Kahan) so that roundoff does not
    accumulate over steps; stencil differences of flowed points then sit
    at the single-rounding floor.
    """
    h = 1.0 / n_steps
    t = 0.0
    comp = np.zeros_like(y)
    for _ in range(n_steps):
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + (h / 2) * k1)
        k3 = rhs(t + h / 2, y + (h / 2) * k2)
        k4 = rhs(t + h, y + h * k3)
        dy = (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4) - comp
        y_next = y + dy
        comp = (y_next - y) - dy
        y = y_next
        t += h
    return y


def flow_batch(field, points: np.ndarray, t, step: float = 1e-3) -> np.ndarray:
    """Flow many points for (possibly distinct) times with a shared step count.

    Each row integrates d y / d tau = t_row * X(y) over unit pseudo-time, so
    all rows advance in lockstep and finish exactly at their target times.
    """
    f = _field_array_fn(field)
    times = np.broadcast_to(np.asarray(t, dtype=float), (points.shape[0],))
    tmax = float(np.max(np.abs(times)))
    if tmax == 0.0:
        return points.copy()
    n = max(1, math.ceil(tmax / step))
    scale = times[:, None]
    return _rk4(lambda _, y: scale * f(y), points.astype(float), n)


def flow(field, p, t: float, step: float = 1e-3):
    """Flow a single point for time t along the field."""
    out = flow_batch(field, np.array([p], dtype=float), t, step)
    return (float(out[0, 0]), float(out[0, 1]))


def geodesic_endpoints(s: AffineSurface, p0: np.ndarray, v0: np.ndarray,
                       times, step: float = 1e-3) -> np.ndarray:
    """Endpoint of the geodesic from each p0 with velocity v0 at parameter t.

    Affine reparametrization folds the time into the initial velocity, so a
    batch with distinct times still shares one fixed step count.
    """
    gamma = _gamma_array_fn(s)
    times = np.broadcast_to(np.asarray(times, dtype=float), (p0.shape[0],))
    tmax = float(np.max(np.abs(times)))
    if tmax == 0.0:
        return p0.copy()
    n = max(1, math.ceil(tmax / step))
    state = np.concatenate([p0.astype(float), v0 * times[:, None]], axis=1)

    def rhs(_, y):
        pos, vel = y[:, :2], y[:, 2:]
        g = gamma(pos)
        acc = -np.einsum("nijk,ni,nj->nk", g, vel, vel)
        return np.concatenate([vel, acc], axis=1)

    out = _rk4(rhs, state, n)
    _check_domain(s, out[:, :2])
    return out[:, :2]


def geodesic(s: AffineSurface, p, v, s_max: float, step: float = 1e-3):
    """Sampled geodesic path: returns (parameters, points (N,2)).

    Only the symmetric part of the connection acts; torsion drops out of
    the quadratic form in the velocity.
    """
    n = max(1, math.ceil(abs(s_max) / step))
    params = np.linspace(0.0, s_max, n + 1)
    gamma = _gamma_array_fn(s)
    state = np.array([[p[0], p[1], v[0] * s_max, v[1] * s_max]], dtype=float)
    samples = [state[0, :2].copy()]

    def rhs(_, y):
        pos, vel = y[:, :2], y[:, 2:]
        g = gamma(pos)
        acc = -np.einsum("nijk,ni,nj->nk", g, vel, vel)
        return np.concatenate([vel, acc], axis=1)

    h = 1.0 / n
    t = 0.0
    for _ in range(n):
        k1 = rhs(t, state)
        k2 = rhs(t + h / 2, state + (h / 2) * k1)
        k3 = rhs(t + h / 2, state + (h / 2) * k2)
        k4 = rhs(t + h, state + h * k3)
        state = state + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
        samples.append(state[0, :2].copy())
    pts = np.array(samples)
    _check_domain(s, pts)
    return params, pts


# ---------------------------------------------------------------------------
# connection preservation through a flow
# ---------------------------------------------------------------------------

def _pullback_deviation(s: AffineSurface, transport, grid_pts: np.ndarray) -> float:
    """Max deviation between the symbols and their pullback through the map.

    ``transport`` maps a stacked stencil (N,2) -> (N,2).  The Jacobian uses
    first central differences at 1e-5, its derivative second differences at
    1e-4, then the standard transformation rule.
    """
    gamma = _gamma_array_fn(s)
    h1, h2 = FD_FIRST, FD_SECOND
    offsets = np.array([
        (0.0, 0.0),
        (h1, 0.0), (-h1, 0.0), (0.0, h1), (0.0, -h1),
        (h2, 0.0), (-h2, 0.0), (0.0, h2), (0.0, -h2),
        (h2, h2), (h2, -h2), (-h2, h2), (-h2, -h2),
    ])
    n_pts = grid_pts.shape[0]
    stencil = (grid_pts[:, None, :] + offsets[None, :, :]).reshape(-1, 2)
    _check_domain(s, stencil)
    mapped = transport(stencil)
    _check_domain(s, mapped)
    mapped = mapped.reshape(n_pts, len(offsets), 2)

    center = mapped[:, 0]
    jac = np.empty((n_pts, 2, 2))
    jac[:, :, 0] = (mapped[:, 1] - mapped[:, 2]) / (2 * h1)
    jac[:, :, 1] = (mapped[:, 3] - mapped[:, 4]) / (2 * h1)
    djac = np.empty((n_pts, 2, 2, 2))  # [n, i, c, j] = d_i J^c_j
    djac[:, 0, :, 0] = (mapped[:, 5] - 2 * center + mapped[:, 6]) / h2**2
    djac[:, 1, :, 1] = (mapped[:, 7] - 2 * center + mapped[:, 8]) / h2**2
    mixed = (mapped[:, 9] - mapped[:, 10] - mapped[:, 11] + mapped[:, 12]) / (4 * h2**2)
    djac[:, 0, :, 1] = mixed
    djac[:, 1, :, 0] = mixed

    g_at_image = gamma(center)
    g_at_pts = gamma(grid_pts)
    jinv = np.linalg.inv(jac)
    pulled = np.einsum("nkc,nicj->nijk", jinv, djac)
    pulled += np.einsum("nkc,nabc,nai,nbj->nijk", jinv, g_at_image, jac, jac)
    return float(np.max(np.abs(pulled - g_at_pts)))


def flow_preserves_connection(s: AffineSurface, X, t: float,
                              grid: Grid | None = None,
                              step: float = 1e-3) -> FlowReport:
    """Pull the symbols back through the time-t flow of X and compare.

    Killing fields give deviations at rounding level; fields that fail the
    Killing equations show O(t) deviations.
    """
    g = grid or default_grid(s)
    deviation = _pullback_deviation(
        s, lambda pts: flow_batch(X, pts, t, step), g.points())
    return FlowReport(deviation, t, step)


# ---------------------------------------------------------------------------
# finite-difference Killing residuals
# ---------------------------------------------------------------------------

def _gamma_and_derivs(s: AffineSurface, pts: np.ndarray):
    gamma = _gamma_array_fn(s)
    h = FD_SECOND
    g0 = gamma(pts)
    e1 = np.array([h, 0.0])
    e2 = np.array([0.0, h])
    dg = np.stack([
        (gamma(pts + e1) - gamma(pts - e1)) / (2 * h),
        (gamma(pts + e2) - gamma(pts - e2)) / (2 * h),
    ], axis=1)  # [n, l, i, j, k]
    return g0, dg


def fd_residuals(s: AffineSurface, field, grid: Grid | None = None) -> float:
    """Max |K_ij^k| over the grid by finite differences.

    For symbolic fields the second derivatives come from second central
    differences of the values (h = 1e-4).  For jet-extended numeric fields
    (anything exposing ``jet_at``) the integrated first derivatives are
    differenced once instead, which is much better conditioned.
    """
    g = grid or default_grid(s)
    pts = g.points()
    h = FD_SECOND

    if hasattr(field, "jet_at"):
        jets = {}
        offsets = {"c": (0, 0), "e1+": (h, 0), "e1-": (-h, 0),
                   "e2+": (0, h), "e2-": (0, -h)}
        for name, (dx, dy) in offsets.items():
            jets[name] = np.array([field.jet_at((p[0] + dx, p[1] + dy))
                                   for p in pts])
        a = jets["c"][:, 0:2]
        # jet layout: (a1, a2, d1 a1, d2 a1, d1 a2, d2 a2)
        da = np.empty((len(pts), 2, 2))  # [n, l, k] = d_l a^k
        da[:, 0, 0] = jets["c"][:, 2]
        da[:, 1, 0] = jets["c"][:, 3]
        da[:, 0, 1] = jets["c"][:, 4]
        da[:, 1, 1] = jets["c"][:, 5]
        dda = np.empty((len(pts), 2, 2, 2))  # [n, i, j, k]
        for k, (c1, c2) in enumerate(((2, 3), (4, 5))):
            dda[:, 0, 0, k] = (jets["e1+"][:, c1] - jets["e1-"][:, c1]) / (2 * h)
            dda[:, 1, 1, k] = (jets["e2+"][:, c2] - jets["e2-"][:, c2]) / (2 * h)
            m = (jets["e2+"][:, c1] - jets["e2-"][:, c1]) / (2 * h)
            dda[:, 0, 1, k] = m
            dda[:, 1, 0, k] = m
    else:
        f = _field_array_fn(field)
        e1 = np.array([h, 0.0])
        e2 = np.array([0.0, h])
        vc = f(pts)
        vp1, vm1 = f(pts + e1), f(pts - e1)
        vp2, vm2 = f(pts + e2), f(pts - e2)
        vpp = f(pts + e1 + e2)
        vpm = f(pts + e1 - e2)
        vmp = f(pts - e1 + e2)
        vmm = f(pts - e1 - e2)
        a = vc
        da = np.stack([(vp1 - vm1) / (2 * h), (vp2 - vm2) / (2 * h)], axis=1)
        dda = np.empty((len(pts), 2, 2, 2))
        dda[:, 0, 0, :] = (vp1 - 2 * vc + vm1) / h**2
        dda[:, 1, 1, :] = (vp2 - 2 * vc + vm2) / h**2
        mixed = (vpp - vpm - vmp + vmm) / (4 * h**2)
        dda[:, 0, 1, :] = mixed
        dda[:, 1, 0, :] = mixed

    g0, dg = _gamma_and_derivs(s, pts)
    res = dda.copy()
    res += np.einsum("nl,nlijk->nijk", a, dg)
    res -= np.einsum("nijl,nlk->nijk", g0, da)
    res += np.einsum("nilk,njl->nijk", g0, da)
    res += np.einsum("nljk,nil->nijk", g0, da)
    return float(np.max(np.abs(res)))
