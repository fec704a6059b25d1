"""Classical period extraction and the inverse problem.

A symmetric well u(Q) with u(0) = 0 determines the full oscillation period
T(H); conversely T(H) determines the turning-point curve through an Abel
integral, and with it the well itself. Periods can come from a closed-form
model, from quantum level spacings, or from direct quadrature over a given
potential, and every inversion is round-trip checked against the periods it
started from.
"""
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.optimize import brentq

from .spectrum import MODEL_DIAGONAL, spectrum_hash

GL_PERIOD_ORDER = 64
GL_TAU_ORDER = 32  # deliberately a different rule than the period leg


class InversionError(RuntimeError):
    """Recovered potential failed its period round-trip."""

    def __init__(self, message, worst_h, worst_rel):
        super().__init__(message)
        self.worst_h = worst_h
        self.worst_rel = worst_rel


@dataclass(frozen=True)
class PeriodFunction:
    """T(H) on (0, h_max]: monotone samples plus an optional exact rule."""

    h_vals: np.ndarray
    t_vals: np.ndarray
    source: str
    h_max: float
    exact: object = None

    def __post_init__(self):
        if self.h_vals.ndim != 1 or self.h_vals.shape != self.t_vals.shape:
            raise ValueError("period samples must be matching 1-d arrays")
        if self.h_vals.size < 4:
            raise ValueError("need at least 4 period samples")
        if np.any(np.diff(self.h_vals) <= 0.0):
            raise ValueError("energy samples must increase strictly")
        if np.any(self.t_vals <= 0.0):
            raise ValueError("periods must be positive")

    @cached_property
    def _interp(self):
        return PchipInterpolator(self.h_vals, self.t_vals, extrapolate=False)

    def __call__(self, h):
        h = np.asarray(h, dtype=float)
        if np.any(h < self.h_vals[0] - 1e-12) or np.any(h > self.h_max * (1 + 1e-12)):
            raise ValueError(
                f"energy outside the tabulated range "
                f"[{self.h_vals[0]:g}, {self.h_max:g}]"
            )
        if self.exact is not None:
            return self.exact(h)
        return self._interp(np.clip(h, self.h_vals[0], self.h_vals[-1]))


def periods_closed_form(params, h_max, n_samples=400):
    """Full period of the diagonal model, 2 pi / (omega sqrt(1 + 4 lam H))."""
    if params.model_kind != MODEL_DIAGONAL:
        raise ValueError("closed-form periods exist only for the diagonal model")
    om, lam = params.omega, params.lam

    def t_of_h(h):
        return 2.0 * math.pi / (om * np.sqrt(1.0 + 4.0 * lam * np.asarray(h)))

    h = np.linspace(0.0, h_max, n_samples)
    return PeriodFunction(h_vals=h, t_vals=np.asarray(t_of_h(h)),
                          source="closed-form", h_max=float(h_max),
                          exact=t_of_h)


def periods_from_spectrum(spectrum, n_use=None):
    """Periods from level spacings: T = 2 pi / (omega H'(y)) with H'
    the derivative of the monotone interpolant through ((n + 1/2) hbar
    omega, E_n). Anchored at H -> 0 by the curvature of the well bottom,
    where the period is 2 pi / omega for both models."""
    params = spectrum.params
    if n_use is None:
        n_use = spectrum.n_converged
    if n_use < 4 or n_use > spectrum.n_converged:
        raise ValueError("need 4 <= n_use <= converged level count")
    y = (np.arange(n_use) + 0.5) * params.hbar * params.omega
    e = spectrum.levels[:n_use]
    dh = PchipInterpolator(y, e).derivative()
    t = 2.0 * math.pi / (params.omega * dh(y))
    h_vals = np.concatenate(([0.0], e))
    t_vals = np.concatenate(([2.0 * math.pi / params.omega], t))
    if np.any(np.diff(h_vals) <= 0.0):
        raise ValueError("level energies must increase strictly")
    return PeriodFunction(h_vals=h_vals, t_vals=t_vals,
                          source=f"spectrum:{spectrum_hash(spectrum)}",
                          h_max=float(e[-1]))


def _turning_point(u, h, q_hint=1.0, q_cap=None):
    """Rightmost classical turning point of a symmetric increasing well.

    q_cap bounds the bracket search for wells only known on a finite grid.
    """
    hi = max(q_hint, 1e-3)
    if q_cap is not None:
        hi = min(hi, q_cap)
    for _ in range(200):
        if float(u(hi)) > h:
            break
        if q_cap is not None and hi >= q_cap:
            raise ValueError(
                f"no turning point below the tabulated range q<={q_cap:g}"
            )
        hi *= 1.5
        if q_cap is not None:
            hi = min(hi, q_cap)
    else:
        raise ValueError(f"no turning point found below q={hi:g}")
    return brentq(lambda q: float(u(q)) - h, 0.0, hi,
                  xtol=1e-14, rtol=8.9e-16)


def period_from_potential(u, h_vals, order=GL_PERIOD_ORDER, q_cap=None):
    """Half period at each energy by direct quadrature over the well.

    The substitution Q = Q_t sin(psi) regularizes the turning-point
    endpoint; the integrand stays bounded on [0, pi/2] for any well with
    nonvanishing slope at the turning point. u must accept arrays; q_cap
    bounds the turning-point search for tabulated wells.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    psi = 0.25 * math.pi * (x + 1.0)
    wpsi = 0.25 * math.pi * w
    out = []
    q_t = 1.0
    for h in np.atleast_1d(np.asarray(h_vals, dtype=float)):
        if h <= 0.0:
            raise ValueError("energies must be positive")
        q_t = _turning_point(u, h, q_hint=q_t, q_cap=q_cap)
        q = q_t * np.sin(psi)
        rad = 2.0 * (h - np.asarray(u(q), dtype=float))
        rad = np.maximum(rad, 0.0)
        grand = q_t * np.cos(psi) / np.sqrt(rad)
        if not np.all(np.isfinite(grand)):
            raise ValueError(f"singular period integrand at H={h:g}")
        out.append(2.0 * float(np.dot(wpsi, grand)))
    return np.array(out)


@dataclass(frozen=True)
class PotentialTable:
    """Recovered symmetric well: u on a turning-point grid q >= 0."""

    q_grid: np.ndarray
    u_vals: np.ndarray
    h_max: float
    provenance: dict = field(compare=False)

    @cached_property
    def _interp(self):
        # the well is even in q, so du/dq(0) = 0 exactly; clamping it makes
        # the spline fourth-order through the origin instead of third
        return CubicSpline(self.q_grid, self.u_vals,
                           bc_type=((1, 0.0), "not-a-knot"),
                           extrapolate=False)

    def u(self, q):
        q = np.abs(np.asarray(q, dtype=float))
        if np.any(q > self.q_grid[-1] * (1 + 1e-12)):
            raise ValueError(
                f"|q| beyond the tabulated range {self.q_grid[-1]:g}"
            )
        return self._interp(np.minimum(q, self.q_grid[-1]))

    def tau_of_q(self, h, q):
        return tau_chart(self, h, q)

    def to_json_dict(self):
        return {
            "h_max": self.h_max,
            "q_grid": [float(v) for v in self.q_grid],
            "u_vals": [float(v) for v in self.u_vals],
            "provenance": dict(self.provenance),
        }


def invert_periods(period_fn, n_grid=300, order=GL_PERIOD_ORDER,
                   roundtrip_tol=1e-4, n_roundtrip=9):
    """Recover the symmetric well whose full period function is period_fn.

    The turning point at depth u is the Abel transform
        Q(u) = sqrt(2 u) / (2 pi) * integral_0^{pi/2} T(u sin^2 phi)
               sin(phi) dphi,
    evaluated by Gauss-Legendre at a graded energy grid (geometric near the
    well bottom, linear above). The recovered table is immediately pushed
    back through the direct period quadrature; a relative mismatch above
    roundtrip_tol anywhere raises InversionError.
    """
    h_max = period_fn.h_max
    lo = h_max * 1e-5
    split = h_max * 0.05
    u_grid = np.concatenate([
        np.geomspace(lo, split, 40, endpoint=False),
        np.linspace(split, h_max, n_grid - 40),
    ])
    x, w = np.polynomial.legendre.leggauss(order)
    phi = 0.25 * math.pi * (x + 1.0)
    wphi = 0.25 * math.pi * w
    sin_phi = np.sin(phi)
    s2 = sin_phi * sin_phi
    t_nodes = period_fn(np.outer(u_grid, s2))
    q_vals = (np.sqrt(2.0 * u_grid) / (2.0 * math.pi)
              * ((t_nodes * sin_phi[None, :]) @ wphi))
    if np.any(np.diff(q_vals) <= 0.0):
        raise InversionError("recovered turning points are not monotone",
                             float("nan"), float("inf"))
    q_grid = np.concatenate(([0.0], q_vals))
    u_vals = np.concatenate(([0.0], u_grid))
    table = PotentialTable(q_grid=q_grid, u_vals=u_vals, h_max=float(h_max),
                           provenance={"source": period_fn.source,
                                       "n_grid": int(n_grid),
                                       "order": int(order)})
    h_check = np.linspace(0.05, 0.95, n_roundtrip) * h_max
    t_back = 2.0 * period_from_potential(table.u, h_check,
                                         q_cap=float(q_grid[-1]))
    t_ref = np.asarray(period_fn(h_check), dtype=float)
    rel = np.abs(t_back - t_ref) / t_ref
    worst = int(np.argmax(rel))
    table.provenance["roundtrip_h"] = [float(v) for v in h_check]
    table.provenance["roundtrip_rel"] = [float(v) for v in rel]
    if rel[worst] > roundtrip_tol:
        raise InversionError(
            f"period round-trip off by {rel[worst]:.3e} at H={h_check[worst]:g}",
            float(h_check[worst]), float(rel[worst]),
        )
    return table


def momentum_from_energy(u, h, q):
    """Classical momentum magnitude sqrt(2 (H - u(q))) at each q."""
    q = np.asarray(q, dtype=float)
    rad = 2.0 * (h - np.asarray(u(q), dtype=float))
    if np.any(rad < -1e-12 * max(1.0, abs(h))):
        bad = q.ravel()[int(np.argmin(rad))]
        raise ValueError(f"q={bad:g} is classically forbidden at H={h:g}")
    return np.sqrt(np.maximum(rad, 0.0))


def tau_chart(table, h, q, order=GL_TAU_ORDER):
    """Time from Q = 0 to Q = q along the H-orbit, q within [0, Q_t].

    Two-panel Gauss rule on the regularized angle psi in [0, arcsin(q /
    Q_t)]; independent of the quadrature used for whole periods.
    """
    if isinstance(table, PotentialTable):
        u, cap = table.u, float(table.q_grid[-1])
    else:
        u, cap = table, None
    if h <= 0.0:
        raise ValueError("energy must be positive")
    q_t = _turning_point(u, h, q_cap=cap)
    if q < 0.0 or q > q_t * (1.0 + 1e-12):
        raise ValueError(f"q={q:g} outside the classical range [0, {q_t:g}]")
    psi_top = math.asin(min(q / q_t, 1.0))
    if psi_top == 0.0:
        return 0.0
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.array([0.0, 0.5 * psi_top, psi_top])
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        psi = 0.5 * (b - a) * x + 0.5 * (a + b)
        wpsi = 0.5 * (b - a) * w
        rad = 2.0 * (h - np.asarray(u(q_t * np.sin(psi)), dtype=float))
        total += float(np.dot(wpsi, q_t * np.cos(psi) / np.sqrt(rad)))
    return total


def time_branches(tau, t_full):
    """The four times in one period that visit |Q| = q: going out, coming
    back, and the mirrored pair on the far half of the orbit."""
    return (tau, 0.5 * t_full - tau, 0.5 * t_full + tau, t_full - tau)
