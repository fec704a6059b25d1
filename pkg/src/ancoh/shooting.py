"""Grid-based eigenvalue solver used as an independent cross-check.

This path never touches the basis-diagonalization machinery: it integrates
the position-space equation psi'' = 2 (V - E) psi (units with the action
scale set by the model) over a uniform grid and brackets eigenvalues by
counting nodes. Agreement between the two routes is what qualifies the
quartic spectra.
"""
import numpy as np
from scipy.optimize import brentq

from ._kernels import numerov_count_nodes
from .spectrum import MODEL_QUARTIC


def potential(params, x):
    """Position-space potential of the quartic model."""
    x = np.asarray(x, dtype=float)
    return 0.5 * params.omega**2 * x * x + 0.5 * params.lam * x**4


def _box_size(params, e_top, pad_action):
    # classical turning point of the highest energy, then extend until the
    # decay integral of sqrt(2(V-E)) reaches pad_action (~ e^-14 leakage)
    x_turn = brentq(
        lambda x: potential(params, x) - e_top, 0.0, 1e6, xtol=1e-10, rtol=8.9e-16
    )
    x = x_turn
    acc = 0.0
    dx = 0.01
    while acc < pad_action:
        x += dx
        acc += dx * np.sqrt(2.0 * max(float(potential(params, x)) - e_top, 0.0))
    return x


def numerov_levels(params, n_levels, h=1e-3, pad_action=14.0, xtol=5e-11):
    """Lowest n_levels eigenvalues by node-count bisection.

    The node count of the shooting solution at energy E equals the number of
    eigenvalues of the boxed problem below E, and is monotone in E, so plain
    bisection on the count is robust: no sign-flip detection on a possibly
    huge terminal value is needed. All levels are bisected simultaneously
    (the sweep kernel is batched over energies).

    h controls the discretization error, which scales like h^4; the default
    keeps it near 1e-11 relative for the energies reachable with double
    precision here.
    """
    if params.model_kind != MODEL_QUARTIC and params.lam != 0.0:
        raise ValueError(
            "shooting solver needs a position-space potential; the diagonal "
            "model with lam > 0 does not define one"
        )
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    # generous upper bound on E_{n_levels-1}: harmonic count plus a quartic
    # scaling term
    e_top = 2.0 * params.omega * params.hbar * (n_levels + 2) + 2.0 * (
        params.lam * params.hbar**4 / 1.0
    ) ** (1.0 / 3.0) * (n_levels + 2) ** (4.0 / 3.0)
    half = _box_size(params, e_top, pad_action)
    nx = int(np.ceil(2.0 * half / h)) + 1
    grid = np.linspace(-half, half, nx)
    v = potential(params, grid)
    step = grid[1] - grid[0]

    # the sweep kernel integrates psi'' = 2 (v - e) psi, so fold hbar^-2 into
    # its inputs; bisection still runs on the physical energies
    scale = 1.0 / params.hbar**2
    v_scaled = v * scale
    target = np.arange(n_levels)
    lo = np.zeros(n_levels)
    hi = np.full(n_levels, e_top)
    while np.max(hi - lo) > xtol:
        mid = 0.5 * (lo + hi)
        counts = numerov_count_nodes(v_scaled, mid * scale, step)
        below = counts <= target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)
