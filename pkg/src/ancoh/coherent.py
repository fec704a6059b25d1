"""Coherent states over an arbitrary discrete spectrum.

A state is labeled by a non-negative radial value rho and an angle theta on
the covering space. Radially the amplitudes are the normalized Poisson
profile peaked at floor(rho^2); the angle enters through per-level phases
exp(-i E_n theta / (hbar omega H')) with H' evaluated at the label's action,
so that time evolution by exp(-i E_n t / hbar) is exactly a relabeling
theta -> theta + omega H' t.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaln

from .spectrum import (
    MODEL_DIAGONAL,
    build_operator,
    eigenbasis_operator,
    hprime_from_levels,
    spectrum_hash,
)

TRUNCATION_BOUND = 1e-12


class TruncationError(ValueError):
    """Requested truncation leaves more than the allowed Poisson tail mass."""

    def __init__(self, message, min_dim):
        super().__init__(message)
        self.min_dim = min_dim


@dataclass(frozen=True)
class CoherentState:
    rho: float
    theta: float
    coeffs: np.ndarray
    spectrum: "EnergySpectrum"
    hprime: float
    trunc_mass: float

    @property
    def dim(self):
        return self.coeffs.size


@dataclass(frozen=True)
class ExpectationReport:
    mean_q: float
    mean_p: float
    var_q: float
    var_p: float
    uncertainty_product: float
    a_residual_norm: float
    k_value: float


@dataclass(frozen=True)
class RecurrenceReport:
    times: np.ndarray
    values: np.ndarray
    baseline: float
    residuals: np.ndarray
    t_nominal: float
    first_period_residual: float
    t_best: float
    best_residual: float


def poisson_amplitudes(rho, dim):
    """Unnormalized radial amplitudes e^{-rho^2/2} rho^n / sqrt(n!)."""
    if rho == 0.0:
        c = np.zeros(dim)
        c[0] = 1.0
        return c
    n = np.arange(dim)
    return np.exp(-0.5 * rho * rho + n * math.log(rho) - 0.5 * gammaln(n + 1.0))


def minimal_dim(rho, bound=TRUNCATION_BOUND, cap=4096):
    """Smallest truncation whose Poisson tail mass is below bound."""
    if rho == 0.0:
        return 1
    mu = rho * rho
    dims = np.arange(1, cap + 1)
    tails = gammainc(dims, mu)  # regularized lower = P(X >= dim)
    ok = tails < bound
    if not ok.any():
        raise ValueError(f"no adequate truncation below cap={cap} for rho={rho}")
    return int(dims[np.argmax(ok)])


def state_hprime(spectrum, rho):
    """H' at the label's action y = hbar omega rho^2.

    Closed form for the diagonal model; the spectral monotone-interpolation
    derivative otherwise.
    """
    params = spectrum.params
    y = params.hbar * params.omega * rho * rho
    if params.model_kind == MODEL_DIAGONAL:
        return float(params.dh_dy(y))
    if params.lam == 0.0:
        return 1.0
    return hprime_from_levels(spectrum, y)


def build_state(spectrum, rho, theta, dim=None):
    """Construct the state labeled (rho, theta) over the given spectrum.

    dim defaults to every converged level. The Poisson tail beyond dim must
    stay below 1e-12; otherwise a TruncationError reports the minimal
    adequate dim. Coefficients are renormalized to unit norm after the cut.
    """
    if rho < 0.0:
        raise ValueError(f"rho must be >= 0, got {rho}")
    if dim is None:
        dim = spectrum.n_converged
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if dim > spectrum.n_converged:
        raise ValueError(
            f"dim={dim} exceeds the {spectrum.n_converged} converged levels"
        )
    mu = rho * rho
    tail = float(gammainc(dim, mu)) if rho > 0.0 else 0.0
    if tail >= TRUNCATION_BOUND:
        need = minimal_dim(rho)
        raise TruncationError(
            f"truncation mass {tail:.3e} at dim={dim} exceeds {TRUNCATION_BOUND}; "
            f"minimal adequate dim is {need}",
            need,
        )
    hp = state_hprime(spectrum, rho)
    c = poisson_amplitudes(rho, dim)
    c = c / np.linalg.norm(c)
    params = spectrum.params
    phases = np.exp(
        -1j * spectrum.levels[:dim] * theta / (params.hbar * params.omega * hp)
    )
    coeffs = c * phases
    coeffs.flags.writeable = False
    return CoherentState(
        rho=float(rho),
        theta=float(theta),
        coeffs=coeffs,
        spectrum=spectrum,
        hprime=hp,
        trunc_mass=tail,
    )


def evolve_state(state, t):
    """Multiply each coefficient by exp(-i E_n t / hbar).

    By the phase convention this equals rebuilding at theta + omega H' t;
    the returned label is advanced accordingly.
    """
    params = state.spectrum.params
    coeffs = state.coeffs * np.exp(
        -1j * state.spectrum.levels[: state.dim] * t / params.hbar
    )
    coeffs.flags.writeable = False
    return CoherentState(
        rho=state.rho,
        theta=state.theta + params.omega * state.hprime * t,
        coeffs=coeffs,
        spectrum=state.spectrum,
        hprime=state.hprime,
        trunc_mass=state.trunc_mass,
    )


def _ladder_apply(coeffs):
    # (a psi)_n = sqrt(n+1) psi_{n+1}
    out = np.zeros_like(coeffs)
    n = np.arange(1, coeffs.size)
    out[:-1] = np.sqrt(n) * coeffs[1:]
    return out


def _default_observable(spectrum, tag, need):
    # quartic states live in the eigenbasis; the banded harmonic forms only
    # apply when that basis coincides with the harmonic one
    if spectrum.params.model_kind == MODEL_DIAGONAL:
        return build_operator(spectrum.params, tag, need)
    return eigenbasis_operator(spectrum, tag)


def expectation_report(state, ops=None):
    """Means, variances, uncertainty product, ladder residual, spread factor.

    ops may carry prebuilt "q", "p", "q2", "p2" OperatorMatrix values in the
    state's eigenbasis, of size >= the state dim (carry a bandwidth margin
    for banded forms); missing ones are built on the fly. The spread factor
    k solves var_q = (hbar / 2 omega)(1 + rho^2 k); at rho = 0 it is
    defined as 0.
    """
    params = state.spectrum.params
    d = state.dim
    need = d + 4  # bandwidth margin; ignored for dense eigenbasis forms
    ops = dict(ops) if ops else {}
    for tag in ("q", "p", "q2", "p2"):
        if tag not in ops:
            ops[tag] = _default_observable(state.spectrum, tag, need)
        elif ops[tag].dim < d:
            raise ValueError(
                f"operator {tag!r} dim {ops[tag].dim} too small for state dim {d}"
            )
    pad = max(op.dim for op in ops.values())
    amp = np.zeros(pad, dtype=complex)
    amp[:d] = state.coeffs

    def ev(tag):
        m = ops[tag].entries
        k = m.shape[0]
        return float(np.real(amp[:k].conj() @ m @ amp[:k]))

    mean_q, mean_p = ev("q"), ev("p")
    var_q = ev("q2") - mean_q * mean_q
    var_p = ev("p2") - mean_p * mean_p
    z = state.rho * np.exp(-1j * state.theta)
    resid = float(np.linalg.norm(_ladder_apply(state.coeffs) - z * state.coeffs))
    if state.rho > 0.0:
        k_val = (var_q * 2.0 * params.omega / params.hbar - 1.0) / (state.rho**2)
    else:
        k_val = 0.0
    return ExpectationReport(
        mean_q=mean_q,
        mean_p=mean_p,
        var_q=var_q,
        var_p=var_p,
        uncertainty_product=math.sqrt(max(var_q, 0.0) * max(var_p, 0.0)),
        a_residual_norm=resid,
        k_value=k_val,
    )


EXPECTATION_COLUMNS = (
    "rho", "theta", "mean_q", "mean_p", "var_q", "var_p", "product",
    "a_residual", "k",
)


def expectation_rows(spectrum, labels, dim=None):
    """Scan expectation reports over (rho, theta) labels; rows for CSV."""
    rows = []
    for rho, theta in labels:
        st = build_state(spectrum, rho, theta, dim)
        rep = expectation_report(st)
        rows.append((rho, theta, rep.mean_q, rep.mean_p, rep.var_q, rep.var_p,
                     rep.uncertainty_product, rep.a_residual_norm, rep.k_value))
    return rows


def overlap(left, right):
    """Inner product of two states over the same spectrum and truncation."""
    if left.dim != right.dim:
        raise ValueError("states have different truncations")
    return complex(np.vdot(left.coeffs, right.coeffs))


def almost_periodic_scan(state, observable=None, n_periods=50, per_period=32,
                         skip_fraction=0.5):
    """Track one observable along the evolution and hunt near-recurrences.

    Samples <O(t)> on a uniform grid of per_period points per nominal period
    2 pi/(omega H'), over n_periods periods. The best recurrence time
    minimizes |<O(t)> - <O(0)>| over grid times at least skip_fraction
    nominal periods in (the departure transient is not a recurrence).
    Intended use covers at least 50 periods; commensurate spectra then show
    an exact return, incommensurate ones only improving near-returns.
    """
    if n_periods < 1 or per_period < 2:
        raise ValueError("degenerate scan grid")
    params = state.spectrum.params
    d = state.dim
    if observable is None:
        observable = _default_observable(state.spectrum, "q", d + 2)
    m = observable.entries[: d, : d] if observable.dim > d else observable.entries
    if m.shape[0] < d:
        raise ValueError("observable matrix smaller than the state")
    t_nom = 2.0 * math.pi / (params.omega * state.hprime)
    dt = t_nom / per_period
    times = dt * np.arange(1, n_periods * per_period + 1)
    levels = state.spectrum.levels[:d]
    phases = np.exp(-1j * np.outer(times, levels) / params.hbar)
    amps = phases * state.coeffs[None, :]
    values = np.einsum("tm,mn,tn->t", amps.conj(), m, amps).real
    baseline = float(np.real(state.coeffs.conj() @ m @ state.coeffs))
    residuals = np.abs(values - baseline)
    first_idx = per_period - 1  # grid lands exactly on t_nom
    searchable = times >= skip_fraction * t_nom
    if not searchable.any():
        raise ValueError("skip window leaves no searchable grid")
    best_local = int(np.argmin(np.where(searchable, residuals, np.inf)))
    return RecurrenceReport(
        times=times,
        values=values,
        baseline=baseline,
        residuals=residuals,
        t_nominal=t_nom,
        first_period_residual=float(residuals[first_idx]),
        t_best=float(times[best_local]),
        best_residual=float(residuals[best_local]),
    )


def state_to_json_dict(state):
    return {
        "label": {"rho": state.rho, "theta": state.theta},
        "spectrum_hash": spectrum_hash(state.spectrum),
        "hprime": state.hprime,
        "trunc_mass": state.trunc_mass,
        "coeffs": [[float(c.real), float(c.imag)] for c in state.coeffs],
    }


def state_from_json_dict(d, spectrum):
    if d["spectrum_hash"] != spectrum_hash(spectrum):
        raise ValueError("state was built over a different spectrum")
    coeffs = np.array([complex(re, im) for re, im in d["coeffs"]])
    coeffs.flags.writeable = False
    return CoherentState(
        rho=float(d["label"]["rho"]),
        theta=float(d["label"]["theta"]),
        coeffs=coeffs,
        spectrum=spectrum,
        hprime=float(d["hprime"]),
        trunc_mass=float(d["trunc_mass"]),
    )
