"""Hamiltonian models, oscillator-basis operator matrices, spectra, and the
normal-order expansion coefficients.

Two model kinds are supported. The "diagonal" model adds a quadratic function
of the harmonic number operator, so its levels have a closed form and its
classical limit is a function of the quadratic invariant y = (p^2 +
omega^2 q^2)/2 alone. The "quartic" model adds a position-quartic term and is
solved by dense diagonalization in the harmonic basis with basis-doubling
convergence control.
"""
import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

MODEL_DIAGONAL = "diagonal"
MODEL_QUARTIC = "quartic"
_MODEL_KINDS = (MODEL_DIAGONAL, MODEL_QUARTIC)

_OPERATOR_BANDS = {"q": 1, "p": 1, "q2": 2, "p2": 2, "q4": 4, "a": 1, "adag": 1}


class SpectrumConvergenceError(RuntimeError):
    """Raised when fewer levels converged than were requested."""

    def __init__(self, message, n_converged):
        super().__init__(message)
        self.n_converged = n_converged


@dataclass(frozen=True)
class ModelParams:
    """Model definition: frequency, anharmonic coupling, action scale, kind.

    omega and hbar must be positive; lam must be non-negative (a negative
    quartic coupling would make the potential unbounded below, which is
    outside this library's scope).
    """

    omega: float = 1.0
    lam: float = 0.0
    hbar: float = 1.0
    model_kind: str = MODEL_DIAGONAL

    def __post_init__(self):
        if not (self.omega > 0.0) or not math.isfinite(self.omega):
            raise ValueError(f"omega must be positive and finite, got {self.omega}")
        if not (self.hbar > 0.0) or not math.isfinite(self.hbar):
            raise ValueError(f"hbar must be positive and finite, got {self.hbar}")
        if self.lam < 0.0 or not math.isfinite(self.lam):
            raise ValueError(
                f"lam must be >= 0 (unbounded potential otherwise), got {self.lam}"
            )
        if self.model_kind not in _MODEL_KINDS:
            raise ValueError(
                f"unknown model_kind {self.model_kind!r}; expected one of {_MODEL_KINDS}"
            )

    # Classical closed forms for the diagonal model. y is the quadratic
    # invariant (p^2 + omega^2 q^2)/2, an energy.
    def h_of_y(self, y):
        self._require_diagonal_classical()
        y = np.asarray(y, dtype=float)
        return y + self.lam * y * y

    def dh_dy(self, y):
        self._require_diagonal_classical()
        y = np.asarray(y, dtype=float)
        return 1.0 + 2.0 * self.lam * y

    def y_of_h(self, h):
        self._require_diagonal_classical()
        h = np.asarray(h, dtype=float)
        if self.lam == 0.0:
            return h
        return (-1.0 + np.sqrt(1.0 + 4.0 * self.lam * h)) / (2.0 * self.lam)

    def _require_diagonal_classical(self):
        if self.model_kind != MODEL_DIAGONAL:
            raise ValueError(
                "closed-form classical functions exist only for the diagonal "
                "model; derive them from a solved spectrum instead"
            )

    def to_json_dict(self):
        return {
            "omega": self.omega,
            "lambda": self.lam,
            "hbar": self.hbar,
            "model": self.model_kind,
        }

    @classmethod
    def from_json_dict(cls, d):
        return cls(
            omega=d["omega"], lam=d["lambda"], hbar=d["hbar"], model_kind=d["model"]
        )


@dataclass(frozen=True)
class OperatorMatrix:
    """Matrix elements of an operator in the harmonic eigenbasis.

    entries is dense complex with exact zeros outside the band; band is the
    half-bandwidth.
    """

    dim: int
    band: int
    entries: np.ndarray


@dataclass(frozen=True)
class EnergySpectrum:
    levels: np.ndarray
    n_converged: int
    basis_dim: int
    tol: float
    params: ModelParams

    def to_json_dict(self):
        return {
            "params": self.params.to_json_dict(),
            "basis_dim": self.basis_dim,
            "tol": self.tol,
            "levels": [float(v) for v in self.levels],
            "n_converged": self.n_converged,
        }

    @classmethod
    def from_json_dict(cls, d):
        return cls(
            levels=np.asarray(d["levels"], dtype=float),
            n_converged=int(d["n_converged"]),
            basis_dim=int(d["basis_dim"]),
            tol=float(d["tol"]),
            params=ModelParams.from_json_dict(d["params"]),
        )


@dataclass(frozen=True)
class NormalOrderCoeffs:
    h: np.ndarray
    k_max: int
    growth_flag: bool
    guard: float = field(default=1e12)


def spectrum_hash(spectrum):
    """Short stable identifier for a spectrum, used in serialized outputs."""
    payload = json.dumps(spectrum.to_json_dict(), sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def build_operator(params, which, dim):
    """Banded matrix of one of q, p, q2, p2, q4, a, adag at basis size dim.

    Entries follow the standard ladder algebra for the harmonic eigenbasis of
    frequency params.omega; everything outside the half-bandwidth is exactly
    zero, and the Hermitian operators are Hermitian by construction.
    """
    if which not in _OPERATOR_BANDS:
        raise ValueError(
            f"unknown operator tag {which!r}; expected one of {sorted(_OPERATOR_BANDS)}"
        )
    band = _OPERATOR_BANDS[which]
    if dim < band + 1:
        raise ValueError(f"dim={dim} too small for operator {which!r} (band {band})")
    omega, hbar = params.omega, params.hbar
    s = math.sqrt(hbar / (2.0 * omega))
    n = np.arange(dim, dtype=float)
    m = np.zeros((dim, dim), dtype=complex)
    k1 = np.arange(dim - 1, dtype=float)
    k2 = np.arange(dim - 2, dtype=float)
    if which == "a":
        m[np.arange(dim - 1), np.arange(1, dim)] = np.sqrt(k1 + 1.0)
    elif which == "adag":
        m[np.arange(1, dim), np.arange(dim - 1)] = np.sqrt(k1 + 1.0)
    elif which == "q":
        off = s * np.sqrt(k1 + 1.0)
        m[np.arange(dim - 1), np.arange(1, dim)] = off
        m[np.arange(1, dim), np.arange(dim - 1)] = off
    elif which == "p":
        off = math.sqrt(hbar * omega / 2.0) * np.sqrt(k1 + 1.0)
        m[np.arange(1, dim), np.arange(dim - 1)] = 1j * off
        m[np.arange(dim - 1), np.arange(1, dim)] = -1j * off
    elif which == "q2":
        m[np.arange(dim), np.arange(dim)] = s * s * (2.0 * n + 1.0)
        off = s * s * np.sqrt((k2 + 1.0) * (k2 + 2.0))
        m[np.arange(dim - 2), np.arange(2, dim)] = off
        m[np.arange(2, dim), np.arange(dim - 2)] = off
    elif which == "p2":
        m[np.arange(dim), np.arange(dim)] = 0.5 * hbar * omega * (2.0 * n + 1.0)
        off = -0.5 * hbar * omega * np.sqrt((k2 + 1.0) * (k2 + 2.0))
        m[np.arange(dim - 2), np.arange(2, dim)] = off
        m[np.arange(2, dim), np.arange(dim - 2)] = off
    elif which == "q4":
        s4 = s**4
        m[np.arange(dim), np.arange(dim)] = s4 * 3.0 * (2.0 * n * n + 2.0 * n + 1.0)
        off2 = s4 * (4.0 * k2 + 6.0) * np.sqrt((k2 + 1.0) * (k2 + 2.0))
        m[np.arange(dim - 2), np.arange(2, dim)] = off2
        m[np.arange(2, dim), np.arange(dim - 2)] = off2
        if dim > 4:
            k4 = np.arange(dim - 4, dtype=float)
            off4 = s4 * np.sqrt((k4 + 1.0) * (k4 + 2.0) * (k4 + 3.0) * (k4 + 4.0))
            m[np.arange(dim - 4), np.arange(4, dim)] = off4
            m[np.arange(4, dim), np.arange(dim - 4)] = off4
    return OperatorMatrix(dim=dim, band=band, entries=m)


def _diagonal_levels(params, count):
    n = np.arange(count, dtype=float)
    base = (n + 0.5) * params.hbar * params.omega
    return base + params.lam * base * base


def _quartic_hamiltonian(params, dim):
    p2 = build_operator(params, "p2", dim).entries
    q2 = build_operator(params, "q2", dim).entries
    q4 = build_operator(params, "q4", dim).entries
    h = 0.5 * (p2 + params.omega**2 * q2 + params.lam * q4)
    if not np.all(np.isfinite(h)):
        raise ValueError("non-finite Hamiltonian matrix entries")
    return h


def solve_spectrum(params, dim=128, n_want=None, tol=1e-10, allow_partial=False):
    """Lowest n_want levels of the model.

    The diagonal model returns its closed form. The quartic model
    diagonalizes the dense Hermitian matrix at dim, repeats at 2*dim, and
    marks level n converged when the relative shift is below tol. With
    allow_partial=False (the default) fewer than n_want converged levels is
    an error reporting the achieved count.
    """
    if n_want is None:
        n_want = dim // 2
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    if n_want < 1:
        raise ValueError(f"n_want must be >= 1, got {n_want}")
    if params.model_kind == MODEL_DIAGONAL:
        levels = _diagonal_levels(params, n_want)
        return EnergySpectrum(
            levels=levels, n_converged=n_want, basis_dim=dim, tol=tol, params=params
        )
    if n_want > dim // 2:
        raise ValueError(
            f"n_want={n_want} exceeds dim/2={dim // 2}; no convergence margin"
        )
    e_small = np.linalg.eigvalsh(_quartic_hamiltonian(params, dim))[:n_want]
    e_big = np.linalg.eigvalsh(_quartic_hamiltonian(params, 2 * dim))[:n_want]
    rel = np.abs(e_small - e_big) / np.abs(e_small)
    converged = rel < tol
    # convergence is monotone in n for these confining models; count the
    # leading converged run so levels[:n_converged] is trustworthy
    n_conv = int(np.argmin(converged)) if not converged.all() else n_want
    if n_conv < n_want and not allow_partial:
        raise SpectrumConvergenceError(
            f"only {n_conv} of {n_want} levels converged at basis_dim={dim}, "
            f"tol={tol}; raise dim",
            n_conv,
        )
    return EnergySpectrum(
        levels=e_small, n_converged=n_conv, basis_dim=dim, tol=tol, params=params
    )


def eigenbasis_operator(spectrum, which):
    """Matrix of one of the standard operators in the energy eigenbasis,
    truncated to the converged levels.

    For the diagonal model the eigenbasis is the harmonic one and the banded
    form is returned directly. For the quartic model the Hamiltonian is
    rediagonalized at spectrum.basis_dim and the operator conjugated with the
    eigenvector matrix; each eigenvector's sign is fixed by making its
    largest-magnitude component positive, so repeated calls and serialized
    results agree.
    """
    n_ok = spectrum.n_converged
    params = spectrum.params
    if params.model_kind == MODEL_DIAGONAL:
        return build_operator(params, which, n_ok)
    basis = spectrum.basis_dim
    w, v = np.linalg.eigh(_quartic_hamiltonian(params, basis))
    dev = np.max(np.abs(w[:n_ok] - spectrum.levels[:n_ok]))
    if dev > 1e-8 * max(1.0, float(np.abs(spectrum.levels[:n_ok]).max())):
        raise ValueError(
            f"stored levels disagree with rediagonalization by {dev:.3e}; "
            "spectrum and params are inconsistent"
        )
    idx = np.argmax(np.abs(v), axis=0)
    v = v * np.where(v[idx, np.arange(basis)] < 0.0, -1.0, 1.0)[None, :]
    op = build_operator(params, which, basis).entries
    m = v[:, :n_ok].conj().T @ op @ v[:, :n_ok]
    return OperatorMatrix(dim=n_ok, band=n_ok - 1, entries=m)


def hprime_from_levels(spectrum, y):
    """dE/dy at y from the monotone interpolation of (n+1/2)*hbar*omega -> E_n.

    This is the spectral route to the amplitude-dependent frequency factor,
    used for models without a closed classical form. Monotone (PCHIP) cubic
    interpolation keeps the derivative positive where the data is increasing;
    plain splines can oscillate.
    """
    from scipy.interpolate import PchipInterpolator

    n_ok = spectrum.n_converged
    if n_ok < 4:
        raise ValueError(f"need at least 4 converged levels, have {n_ok}")
    params = spectrum.params
    y_knots = (np.arange(n_ok) + 0.5) * params.hbar * params.omega
    y = float(y)
    if y < y_knots[0] or y > y_knots[-1]:
        raise ValueError(
            f"y={y} outside the spectral knot range [{y_knots[0]}, {y_knots[-1]}]"
        )
    interp = PchipInterpolator(y_knots, spectrum.levels[:n_ok])
    return float(interp.derivative()(y))


def normal_order_coeffs(spectrum, k_max, guard=1e12, exact=None):
    """Expansion coefficients H_n from the first k_max+1 levels.

    H_n is the n-th scaled finite difference of the level sequence,
    H_n = sum_{k<=n} (-1)^(n-k) E_k / (k! (n-k)!). The alternating sum loses
    digits as n grows, so the default evaluation is exact rational arithmetic
    for k_max <= 24 and compensated float summation beyond that; pass
    exact=True/False to force a path. growth_flag reports any |H_n| above
    guard instead of overflowing silently.
    """
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    if spectrum.n_converged < k_max + 1:
        raise ValueError(
            f"need {k_max + 1} converged levels, have {spectrum.n_converged}"
        )
    levels = spectrum.levels[: k_max + 1]
    if exact is None:
        exact = k_max <= 24
    out = np.empty(k_max + 1)
    if exact:
        exact_levels = [Fraction(float(e)) for e in levels]
        for n in range(k_max + 1):
            acc = Fraction(0)
            for k in range(n + 1):
                term = exact_levels[k] / (
                    math.factorial(k) * math.factorial(n - k)
                )
                acc += -term if (n - k) % 2 else term
            out[n] = float(acc)
    else:
        for n in range(k_max + 1):
            terms = [
                (-1.0 if (n - k) % 2 else 1.0)
                * levels[k]
                / (math.factorial(k) * math.factorial(n - k))
                for k in range(n + 1)
            ]
            out[n] = math.fsum(terms)
    return NormalOrderCoeffs(
        h=out, k_max=k_max, growth_flag=bool(np.max(np.abs(out)) > guard), guard=guard
    )


def reconstruct_levels(coeffs, m_count=None):
    """Invert normal_order_coeffs: E_m = sum_{n<=m} H_n m!/(m-n)!.

    The falling-factorial weights are exact integers, so this composition is
    the identity on the input levels up to round-off.
    """
    if m_count is None:
        m_count = coeffs.k_max + 1
    if m_count > coeffs.k_max + 1:
        raise ValueError("m_count exceeds available coefficients")
    out = np.empty(m_count)
    for m in range(m_count):
        terms = []
        fall = 1.0  # m!/(m-n)! built incrementally
        for n in range(m + 1):
            terms.append(coeffs.h[n] * fall)
            fall *= m - n
        out[m] = math.fsum(terms)
    return out
