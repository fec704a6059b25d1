"""Numpy reference implementations of the two hot kernels.

These are the import-time fallback when the compiled extension is missing
(or when ANCOH_PURE_PYTHON is set). Results must agree with the compiled
versions to round-off; tests/test_kernels.py enforces that.
"""
import numpy as np


def numerov_count_nodes(v, energies, h):
    """Count sign changes of the shooting solution for a batch of energies.

    Integrates psi'' = 2 (v - E) psi across the whole grid with the Numerov
    recurrence, starting from a node-free left tail, and counts the interior
    sign changes. For a Dirichlet box this count equals the number of
    eigenvalues below E, which is what the bisection in ancoh.shooting needs.

    Parameters
    ----------
    v : (nx,) float array
        Potential sampled on a uniform grid.
    energies : (ne,) float array
        Trial energies, swept simultaneously.
    h : float
        Grid spacing.

    Returns
    -------
    (ne,) int64 array of node counts.
    """
    v = np.asarray(v, dtype=np.float64)
    energies = np.atleast_1d(np.asarray(energies, dtype=np.float64))
    c = h * h / 12.0
    ne = energies.size
    psi_prev = np.zeros(ne)
    psi = np.full(ne, 1e-8)
    nodes = np.zeros(ne, dtype=np.int64)
    f_prev = 2.0 * (v[0] - energies)
    f_cur = 2.0 * (v[1] - energies)
    for i in range(1, v.size - 1):
        f_next = 2.0 * (v[i + 1] - energies)
        psi_next = ((2.0 + 10.0 * c * f_cur) * psi
                    - (1.0 - c * f_prev) * psi_prev) / (1.0 - c * f_next)
        nodes += (psi_next * psi) < 0.0
        # rescale before overflow; node counts and signs are scale-invariant
        big = np.abs(psi_next) > 1e200
        if big.any():
            s = np.where(big, np.abs(psi_next), 1.0)
            psi_next = psi_next / s
            psi = psi / s
        psi_prev = psi
        psi = psi_next
        f_prev = f_cur
        f_cur = f_next
    return nodes


def cesaro_accumulate(c, r, nodes, weights):
    """Weighted accumulation of coherent projectors over angle nodes.

    Returns M with M[m, n] = sum_j w_j A_m(theta_j) conj(A_n(theta_j)) where
    A_n(theta) = c_n exp(-i r_n theta). Hermitian by construction.
    """
    c = np.asarray(c, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    nodes = np.asarray(nodes, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    u = c[None, :] * np.exp(-1j * np.outer(nodes, r))
    return (u * weights[:, None]).T @ u.conj()
