import numpy as np
import pytest

import ancoh
from ancoh.shooting import potential


def quartic(lam):
    return ancoh.ModelParams(omega=1.0, lam=lam, hbar=1.0, model_kind="quartic")


def test_potential_values():
    p = quartic(0.4)
    assert potential(p, 2.0) == pytest.approx(0.5 * 4.0 + 0.2 * 16.0, abs=1e-15)
    assert potential(p, 0.0) == 0.0


def test_harmonic_levels_on_the_grid():
    levels = ancoh.numerov_levels(quartic(0.0), 6)
    assert np.max(np.abs(levels - (np.arange(6) + 0.5))) < 5e-10


def test_agrees_with_dense_diagonalization(quartic04_spectrum):
    levels = ancoh.numerov_levels(quartic04_spectrum.params, 8)
    ref = quartic04_spectrum.levels[:8]
    assert np.max(np.abs(levels - ref) / ref) < 1e-8


def test_rejects_diagonal_model_with_coupling():
    # the anharmonic diagonal model has no position-space potential
    p = ancoh.ModelParams(omega=1.0, lam=0.1, hbar=1.0, model_kind="diagonal")
    with pytest.raises(ValueError, match="position-space"):
        ancoh.numerov_levels(p, 4)


def test_rejects_empty_request():
    with pytest.raises(ValueError):
        ancoh.numerov_levels(quartic(0.1), 0)
