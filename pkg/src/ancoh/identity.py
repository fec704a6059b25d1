"""Resolution of the identity over the state family, checked numerically.

Averaging the projector onto the state labeled (rho, theta) over theta with
the flat Cesaro weight on [-pi N, pi N] leaves a matrix whose diagonal holds
the Poisson weights exactly and whose off-diagonal entries decay like 1/N
(except along commensurate level pairs). Integrating the Poisson weights
over rho^2 then resolves each diagonal entry to one. Both legs are computed
with Gauss-Legendre quadrature and cross-checked by refinement.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.special import gammainc, gammaincc, gammaln, i0e

from .coherent import poisson_amplitudes, state_hprime
from .phasespace import chart_convert, point_rtheta
from .spectrum import spectrum_hash

# Looser than the state-construction gate: the average is compared
# entrywise, and a 1e-11 tail perturbs entries below the 1e-10 targets.
RAW_TAIL_BOUND = 1e-11
NODES_PER_LEVEL = 8  # minimum Gauss nodes per 2 pi window per level index
GL_PANEL_ORDER = 16


class QuadratureError(RuntimeError):
    """Angular quadrature failed its refinement cross-check."""

    def __init__(self, message, deviation):
        super().__init__(message)
        self.deviation = deviation


@dataclass(frozen=True)
class CesaroPlan:
    """Quadrature nodes and weights for one Cesaro window [-pi N, pi N]."""

    n_periods: int
    theta_nodes: np.ndarray
    weights: np.ndarray
    window: tuple
    panels_per_window: int

    def __post_init__(self):
        if self.n_periods < 1:
            raise ValueError("n_periods must be >= 1")
        if self.theta_nodes.shape != self.weights.shape:
            raise ValueError("nodes and weights differ in shape")
        lo, hi = self.window
        if self.theta_nodes.min() < lo or self.theta_nodes.max() > hi:
            raise ValueError("nodes fall outside the window")
        if abs(float(self.weights.sum()) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 (flat average)")

    def nodes_per_window(self):
        return self.theta_nodes.size / self.n_periods


def default_plan(spectrum, rho, n_periods, dim, panels_per_window=None):
    """Composite GL-16 plan sized to the spectral span and the level count.

    Panels per 2 pi window: twice the larger of span*pi/12 (phase advance
    per panel stays small against the rule order) and (dim-1)/2 (keeps the
    node density at 2x the floor of 8 nodes per level index).
    """
    hp = state_hprime(spectrum, rho)
    params = spectrum.params
    r = spectrum.levels[:dim] / (params.hbar * params.omega * hp)
    span = float(r.max() - r.min())
    if panels_per_window is None:
        panels_per_window = 2 * max(
            math.ceil(span * math.pi / 12.0), math.ceil((dim - 1) / 2), 1
        )
    half = math.pi * n_periods
    edges = np.linspace(-half, half, panels_per_window * n_periods + 1)
    x, w = np.polynomial.legendre.leggauss(GL_PANEL_ORDER)
    mid = 0.5 * (edges[1:] + edges[:-1])
    hw = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + hw[:, None] * x[None, :]).ravel()
    weights = (hw[:, None] * w[None, :]).ravel() / (2.0 * math.pi * n_periods)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return CesaroPlan(
        n_periods=int(n_periods),
        theta_nodes=nodes,
        weights=weights,
        window=(-half, half),
        panels_per_window=int(panels_per_window),
    )


def _raw_setup(spectrum, rho, dim):
    if dim is None:
        dim = spectrum.n_converged
    if dim > spectrum.n_converged:
        raise ValueError(
            f"dim={dim} exceeds the {spectrum.n_converged} converged levels"
        )
    tail = float(gammainc(dim, rho * rho)) if rho > 0.0 else 0.0
    if tail >= RAW_TAIL_BOUND:
        raise ValueError(
            f"Poisson tail {tail:.3e} beyond dim={dim} too large for an "
            f"entrywise check (bound {RAW_TAIL_BOUND})"
        )
    params = spectrum.params
    hp = state_hprime(spectrum, rho)
    c = poisson_amplitudes(rho, dim)
    r = spectrum.levels[:dim] / (params.hbar * params.omega * hp)
    return c, r, dim


def theta_average(spectrum, rho, plan=1, dim=None, check=True):
    """Cesaro theta-average of the projector, as a dim x dim matrix.

    plan is either a period count (an auto plan is built) or a CesaroPlan.
    With check on, the integral is recomputed on a doubled-panel plan and a
    mismatch above 1e-10 raises QuadratureError. Amplitudes enter raw
    (without the truncation renormalization), so the diagonal must land on
    the Poisson weights themselves.
    """
    from ._kernels import cesaro_accumulate

    c, r, dim = _raw_setup(spectrum, rho, dim)
    if isinstance(plan, CesaroPlan):
        used = plan
        if used.nodes_per_window() < NODES_PER_LEVEL * (dim - 1):
            raise ValueError(
                f"plan supplies {used.nodes_per_window():.0f} nodes per window; "
                f"need >= {NODES_PER_LEVEL * (dim - 1)} for {dim} levels"
            )
    else:
        used = default_plan(spectrum, rho, int(plan), dim)
    m = cesaro_accumulate(c, r, used.theta_nodes, used.weights)
    if check:
        fine = default_plan(spectrum, rho, used.n_periods, dim,
                            panels_per_window=2 * used.panels_per_window)
        m_fine = cesaro_accumulate(c, r, fine.theta_nodes, fine.weights)
        dev = float(np.max(np.abs(m - m_fine)))
        if dev > 1e-10:
            raise QuadratureError(
                f"refinement changed the average by {dev:.3e}; "
                "the supplied plan under-resolves the phases", dev
            )
    return m


def exact_theta_average(spectrum, rho, n_periods, dim=None):
    """Closed-form average: entries c_m c_n sinc(pi N (r_m - r_n))."""
    c, r, dim = _raw_setup(spectrum, rho, dim)
    alpha = r[:, None] - r[None, :]
    return np.outer(c, c) * np.sinc(n_periods * alpha)


def commensurate_pairs(spectrum, rho, dim=None, q_max=8, tol=1e-9):
    """Level pairs whose phase-frequency gap is rational with a small
    denominator; their off-diagonal entries do not decay with N."""
    _, r, dim = _raw_setup(spectrum, rho, dim)
    found = []
    for m in range(dim):
        for n in range(m):
            alpha = r[m] - r[n]
            for q in range(1, q_max + 1):
                p = round(alpha * q)
                if abs(alpha - p / q) < tol:
                    found.append((m, n, int(p), q))
                    break
    return found


@dataclass(frozen=True)
class ResolutionReport:
    n_list: tuple
    offdiag_max: tuple
    offdiag_argmax: tuple
    diag_dev: float
    decay_slope: float
    commensurate: tuple
    radial_dev: float
    rho: float
    dim: int


def radial_resolution(spectrum, n_check=12, quad=(4, 64), upper=60.0,
                      tol=1e-8):
    """Integrate each Poisson weight over rho^2 on [0, upper].

    Returns the per-level masses, which must each resolve to 1. The cut
    tail is bounded analytically first; an upper too small to support the
    requested levels is rejected rather than silently under-counted.
    """
    if n_check >= spectrum.n_converged:
        raise ValueError("n_check must stay below the converged level count")
    n = np.arange(n_check + 1)
    cut = gammaincc(n + 1.0, upper)
    if float(cut.max()) >= 0.1 * tol:
        raise ValueError(
            f"upper={upper} leaves tail mass {float(cut.max()):.3e} for "
            f"level {int(cut.argmax())}; raise upper"
        )
    panels, order = quad
    edges = np.linspace(0.0, upper, panels + 1)
    x, w = np.polynomial.legendre.leggauss(order)
    mid = 0.5 * (edges[1:] + edges[:-1])
    hw = 0.5 * (edges[1:] - edges[:-1])
    mu = (mid[:, None] + hw[:, None] * x[None, :]).ravel()
    wt = (hw[:, None] * w[None, :]).ravel()
    log_mu = np.log(mu)
    vals = np.exp(-mu[None, :] + n[:, None] * log_mu[None, :]
                  - gammaln(n + 1.0)[:, None])
    return vals @ wt


def alternative_radial_masses(n_check=1, quad=(8, 64), upper=120.0):
    """Same radial integral under the squared-profile normalization.

    Normalizing |amplitude|^2 by its own level sum (a Bessel I0) instead of
    using the bare Poisson weights spoils the resolution: the masses come
    out near but not equal to 1. Kept as the contrast case.
    """
    panels, order = quad
    edges = np.linspace(0.0, upper, panels + 1)
    x, w = np.polynomial.legendre.leggauss(order)
    mid = 0.5 * (edges[1:] + edges[:-1])
    hw = 0.5 * (edges[1:] - edges[:-1])
    mu = (mid[:, None] + hw[:, None] * x[None, :]).ravel()
    wt = (hw[:, None] * w[None, :]).ravel()
    n = np.arange(n_check + 1)
    log_mu = np.log(mu)
    # (mu^n/n!)^2 e^{-2 mu} / (e^{-2 mu} I0(2 mu)) via the scaled Bessel
    log_term = 2.0 * (n[:, None] * log_mu[None, :] - gammaln(n + 1.0)[:, None])
    vals = np.exp(log_term - 2.0 * mu[None, :]) / i0e(2.0 * mu)[None, :]
    return vals @ wt


def resolution_report(spectrum, rho, n_list=(1, 4, 16, 64), dim=None,
                      n_radial=12):
    """Full diagnostic: off-diagonal decay across window sizes, diagonal
    deviation from the Poisson weights, the log-log decay slope, the
    commensurate pairs, and the radial masses."""
    if dim is None:
        dim = spectrum.n_converged
    c = poisson_amplitudes(rho, dim)
    off_max, off_arg, diag_dev = [], [], 0.0
    for n_per in n_list:
        m = theta_average(spectrum, rho, plan=int(n_per), dim=dim)
        off = np.abs(m - np.diag(np.diag(m)))
        idx = np.unravel_index(int(np.argmax(off)), off.shape)
        off_max.append(float(off[idx]))
        off_arg.append((int(idx[0]), int(idx[1])))
        diag_dev = max(diag_dev, float(np.max(np.abs(np.diag(m).real - c * c))))
    if len(n_list) >= 2 and min(off_max) > 0.0:
        slope = float(np.polyfit(np.log(np.asarray(n_list, dtype=float)),
                                 np.log(np.asarray(off_max)), 1)[0])
    else:
        slope = float("nan")
    n_rad = min(n_radial, spectrum.n_converged - 1)
    radial = radial_resolution(spectrum, n_check=n_rad)
    return ResolutionReport(
        n_list=tuple(int(n) for n in n_list),
        offdiag_max=tuple(off_max),
        offdiag_argmax=tuple(off_arg),
        diag_dev=diag_dev,
        decay_slope=slope,
        commensurate=tuple(commensurate_pairs(spectrum, rho, dim=dim)),
        radial_dev=float(np.max(np.abs(radial - 1.0))),
        rho=float(rho),
        dim=int(dim),
    )


def report_to_json_dict(report, spectrum):
    return {
        "spectrum_hash": spectrum_hash(spectrum),
        "rho": report.rho,
        "dim": report.dim,
        "n_list": list(report.n_list),
        "offdiag_max": list(report.offdiag_max),
        "offdiag_argmax": [list(p) for p in report.offdiag_argmax],
        "diag_dev": report.diag_dev,
        "decay_slope": report.decay_slope,
        "commensurate": [list(p) for p in report.commensurate],
        "radial_dev": report.radial_dev,
    }


DECAY_COLUMNS = ("n_periods", "offdiag_max", "pair_m", "pair_n")


def decay_rows(report):
    return [
        (n, off, pair[0], pair[1])
        for n, off, pair in zip(report.n_list, report.offdiag_max,
                                report.offdiag_argmax)
    ]


def measure_identity_check(params, mu_range, theta_range, n_edge=2049):
    """Area of a (rho^2, theta) box pushed to the (q, p) plane.

    Green's theorem along the mapped boundary (Simpson per edge) against
    hbar * d(rho^2) * d(theta). The boundary tangent comes from the chart
    map q = R cos(theta), p = omega R sin(theta), R = sqrt(2 hbar mu /
    omega) by the chain rule; the chart module supplies the corner points
    as a cross-check that the same map is in play.
    """
    mu0, mu1 = mu_range
    th0, th1 = theta_range
    if not (0.0 <= mu0 < mu1) or not th0 < th1:
        raise ValueError("need 0 <= mu0 < mu1 and theta0 < theta1")
    hw, om = params.hbar, params.omega

    def edge(mu_a, th_a, mu_b, th_b):
        s = np.linspace(0.0, 1.0, n_edge)
        mus = mu_a + (mu_b - mu_a) * s
        ths = th_a + (th_b - th_a) * s
        r2 = 2.0 * hw * mus / om
        # q dp/ds; the radial part q d_mu(p) collapses to hbar sin cos
        integrand = (hw * np.cos(ths) * np.sin(ths) * (mu_b - mu_a)
                     + om * r2 * np.cos(ths) ** 2 * (th_b - th_a))
        return float(simpson(integrand, x=s))

    for mu_c, th_c in ((mu0, th0), (mu1, th1)):
        if mu_c == 0.0:
            continue
        radius = math.sqrt(2.0 * hw * mu_c / om)
        pt = chart_convert(point_rtheta(params, radius, th_c), "pq")
        if abs(pt.first - radius * math.cos(th_c)) > 1e-12 * (1.0 + radius):
            raise RuntimeError("chart map disagrees with the boundary map")

    # counterclockwise in (mu, theta)
    area = (edge(mu0, th0, mu1, th0) + edge(mu1, th0, mu1, th1)
            + edge(mu1, th1, mu0, th1) + edge(mu0, th1, mu0, th0))
    expected = hw * (mu1 - mu0) * (th1 - th0)
    return area, expected, abs(area - expected) / expected
