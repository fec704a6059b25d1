"""Classical side of the correspondence: conjugate charts, trajectories,
and the quantization action.

Three charts describe the same point: (q, p), the polar pair (R, Theta) with
R = sqrt(p^2 + omega^2 q^2)/omega and Theta = atan2(p, omega*q), and the
energy pair (H, tau) with tau = Theta/(omega*H'). Theta lives on the covering
space: conversions out of (q, p) land in (-pi, pi], and evolution advances it
without wrapping.

The flow convention follows the quantum relabel identity: Theta advances by
+omega*H'*t. Models beyond the built-in diagonal closed form are supplied as
a (h_of_y, dh_dy, y_of_h) triple of callables in y = (p^2 + omega^2 q^2)/2.
"""
import math
from dataclasses import dataclass, replace

import numpy as np

CHART_PQ = "pq"
CHART_RTHETA = "rtheta"
CHART_HTAU = "htau"
_CHARTS = (CHART_PQ, CHART_RTHETA, CHART_HTAU)


class DegenerateInputError(ValueError):
    """Angle conversion requested at the phase-space origin."""


@dataclass(frozen=True)
class PhasePoint:
    chart: str
    first: float
    second: float
    params: "ModelParams"
    hprime: float


def _model_triple(params, hamiltonian):
    if hamiltonian is not None:
        return hamiltonian
    return (params.h_of_y, params.dh_dy, params.y_of_h)


def _to_polar(pt, hamiltonian):
    """Internal (y, theta) representation of any chart."""
    h_of_y, dh_dy, y_of_h = _model_triple(pt.params, hamiltonian)
    omega = pt.params.omega
    if pt.chart == CHART_PQ:
        q, p = pt.first, pt.second
        y = 0.5 * (p * p + omega * omega * q * q)
        theta = math.atan2(p, omega * q) if y > 0.0 else 0.0
        return y, theta
    if pt.chart == CHART_RTHETA:
        r, theta = pt.first, pt.second
        return 0.5 * omega * omega * r * r, theta
    h, tau = pt.first, pt.second
    y = float(y_of_h(h))
    return y, tau * omega * float(dh_dy(y))


def _from_polar(params, y, theta, target, hamiltonian):
    h_of_y, dh_dy, y_of_h = _model_triple(params, hamiltonian)
    omega = params.omega
    hp = float(dh_dy(y))
    if hp <= 0.0:
        raise ValueError(f"H' must be positive, got {hp}")
    if target == CHART_PQ:
        amp = math.sqrt(2.0 * y)
        return PhasePoint(CHART_PQ, amp * math.cos(theta) / omega,
                          amp * math.sin(theta), params, hp)
    if target == CHART_RTHETA:
        return PhasePoint(CHART_RTHETA, math.sqrt(2.0 * y) / omega, theta, params, hp)
    return PhasePoint(CHART_HTAU, float(h_of_y(y)), theta / (omega * hp), params, hp)


def point_pq(params, q, p, hamiltonian=None):
    pt = PhasePoint(CHART_PQ, float(q), float(p), params, 1.0)
    y, _ = _to_polar(pt, hamiltonian)
    _, dh_dy, _ = _model_triple(params, hamiltonian)
    return replace(pt, hprime=float(dh_dy(y)))


def point_rtheta(params, r, theta, hamiltonian=None):
    if r < 0.0:
        raise ValueError(f"R must be >= 0, got {r}")
    pt = PhasePoint(CHART_RTHETA, float(r), float(theta), params, 1.0)
    y, _ = _to_polar(pt, hamiltonian)
    _, dh_dy, _ = _model_triple(params, hamiltonian)
    return replace(pt, hprime=float(dh_dy(y)))


def point_htau(params, h, tau, hamiltonian=None):
    _, dh_dy, y_of_h = _model_triple(params, hamiltonian)
    y = float(y_of_h(float(h)))
    return PhasePoint(CHART_HTAU, float(h), float(tau), params, float(dh_dy(y)))


def chart_convert(pt, target, hamiltonian=None):
    """Convert a point to another chart; conversions preserve the energy.

    Leaving the (q, p) chart at the origin is an error: the angle is
    undefined there.
    """
    if target not in _CHARTS:
        raise ValueError(f"unknown chart {target!r}")
    y, theta = _to_polar(pt, hamiltonian)
    if pt.chart == CHART_PQ and target != CHART_PQ and y == 0.0:
        raise DegenerateInputError("angle is undefined at q = p = 0")
    return _from_polar(pt.params, y, theta, target, hamiltonian)


def classical_evolve(pt, t, hamiltonian=None):
    """Advance the point by t along the flow: R fixed, Theta += omega*H'*t.

    Equivalently H is conserved and tau advances by t. The result stays in
    the input chart.
    """
    y, theta = _to_polar(pt, hamiltonian)
    if y == 0.0:
        return pt  # the origin is a fixed point of the flow
    _, dh_dy, _ = _model_triple(pt.params, hamiltonian)
    theta_t = theta + pt.params.omega * float(dh_dy(y)) * t
    return _from_polar(pt.params, y, theta_t, pt.chart, hamiltonian)


def bohr_action(pt, hamiltonian=None):
    """One-orbit action in units of h: (p^2 + omega^2 q^2)/(2 hbar omega).

    Equals the squared dimensionless radial label, and is independent of the
    coupling because the orbit is the same circle traversed at a different
    rate.
    """
    y, _ = _to_polar(pt, hamiltonian)
    return y / (pt.params.hbar * pt.params.omega)


def dimensionless_radius(pt, hamiltonian=None):
    """rho = R * sqrt(omega / (2 hbar)), the label the state builder consumes."""
    return math.sqrt(bohr_action(pt, hamiltonian))


def orbit_action_quadrature(pt, n_samples=512, hamiltonian=None):
    """|closed-orbit integral of p dq| / h by quadrature along the flow.

    Cross-check for bohr_action; the magnitude is compared because the flow
    orientation convention (see module docstring) reverses the signed area.
    Along the label flow dq/dt = -H' p, so the loop integral is H' times
    the integral of p^2 over one period, where the uniform trapezoid rule
    is exact for trigonometric integrands up to roundoff.
    """
    y, _ = _to_polar(pt, hamiltonian)
    if y == 0.0:
        return 0.0
    _, dh_dy, _ = _model_triple(pt.params, hamiltonian)
    hp = float(dh_dy(y))
    period = 2.0 * math.pi / (pt.params.omega * hp)
    base = chart_convert(pt, CHART_PQ, hamiltonian) if pt.chart != CHART_PQ else pt
    ts = np.linspace(0.0, period, n_samples + 1)
    p2 = np.array([classical_evolve(base, float(t), hamiltonian).second ** 2
                   for t in ts])
    dt = period / n_samples
    integral = dt * (0.5 * p2[0] + p2[1:-1].sum() + 0.5 * p2[-1])
    return hp * integral / (2.0 * math.pi * pt.params.hbar)


def trajectory_rows(pt, times, hamiltonian=None):
    """Sample the flow at the given times.

    Returns a float array with columns t, q, p, R, Theta_unwrapped, H, tau.
    Theta is continuous in t (covering space), anchored at the initial
    point's principal angle.
    """
    y, theta0 = _to_polar(pt, hamiltonian)
    h_of_y, dh_dy, _ = _model_triple(pt.params, hamiltonian)
    omega = pt.params.omega
    hp = float(dh_dy(y))
    energy = float(h_of_y(y))
    r = math.sqrt(2.0 * y) / omega
    times = np.asarray(times, dtype=float)
    theta = theta0 + omega * hp * times
    rows = np.empty((times.size, 7))
    rows[:, 0] = times
    rows[:, 1] = r * np.cos(theta)
    rows[:, 2] = omega * r * np.sin(theta)
    rows[:, 3] = r
    rows[:, 4] = theta
    rows[:, 5] = energy
    rows[:, 6] = theta / (omega * hp)
    return rows


TRAJECTORY_COLUMNS = ("t", "q", "p", "R", "Theta_unwrapped", "H", "tau")
