"""Period functions, the Abel inversion, and orbit timing."""
import math

import numpy as np
import pytest
from scipy.optimize import brentq

import ancoh
from ancoh.inversion import period_from_potential, time_branches

DIAG = ancoh.ModelParams(omega=1.0, lam=0.1, hbar=1.0, model_kind="diagonal")
HARM = ancoh.ModelParams(omega=1.0, lam=0.0, hbar=1.0, model_kind="diagonal")


def u_closed(q, lam=0.1):
    # well whose closed-form period is 2 pi / sqrt(1 + 4 lam H)
    return np.tan(np.sqrt(2.0 * lam) * np.asarray(q)) ** 2 / (4.0 * lam)


class TestPeriodFunction:
    def test_closed_form_values(self):
        pf = ancoh.periods_closed_form(DIAG, 8.0)
        assert float(pf(1.0)) == pytest.approx(2.0 * math.pi / math.sqrt(1.4),
                                               rel=1e-14)
        assert float(pf(0.0)) == pytest.approx(2.0 * math.pi, rel=1e-14)

    def test_closed_form_needs_diagonal_model(self):
        p = ancoh.ModelParams(omega=1.0, lam=0.1, hbar=1.0,
                              model_kind="quartic")
        with pytest.raises(ValueError):
            ancoh.periods_closed_form(p, 8.0)

    def test_out_of_range_energy(self):
        pf = ancoh.periods_closed_form(DIAG, 8.0)
        with pytest.raises(ValueError, match="range"):
            pf(9.0)

    def test_sample_validation(self):
        with pytest.raises(ValueError):
            ancoh.PeriodFunction(h_vals=np.array([0.0, 1.0, 1.0, 2.0]),
                                 t_vals=np.full(4, 6.0), source="x", h_max=2.0)
        with pytest.raises(ValueError):
            ancoh.PeriodFunction(h_vals=np.array([0.0, 1.0, 2.0]),
                                 t_vals=np.full(3, 6.0), source="x", h_max=2.0)
        with pytest.raises(ValueError):
            ancoh.PeriodFunction(h_vals=np.array([0.0, 1.0, 2.0, 3.0]),
                                 t_vals=np.array([6.0, 6.0, -1.0, 6.0]),
                                 source="x", h_max=3.0)

    def test_spectral_periods_anchor_and_source(self, quartic_spectrum):
        pf = ancoh.periods_from_spectrum(quartic_spectrum)
        assert pf.source.startswith("spectrum:")
        assert float(pf.t_vals[0]) == pytest.approx(2.0 * math.pi, rel=1e-14)
        # stiffer well: every period below the bottom anchor
        assert np.all(pf.t_vals[1:] < 2.0 * math.pi)


class TestDirectQuadrature:
    def test_harmonic_half_period(self):
        t_half = period_from_potential(lambda q: 0.5 * np.asarray(q) ** 2,
                                       [0.3, 1.0, 5.0])
        assert np.max(np.abs(t_half - math.pi)) < 1e-12

    def test_pure_quartic_scaling(self):
        # T ~ H^{-1/4}: scaling energy by 16 halves the period
        t = period_from_potential(lambda q: np.asarray(q) ** 4, [1.0, 16.0])
        assert t[1] / t[0] == pytest.approx(0.5, abs=1e-9)

    def test_nonpositive_energy_rejected(self):
        with pytest.raises(ValueError):
            period_from_potential(lambda q: 0.5 * np.asarray(q) ** 2, [0.0])


class TestInversion:
    def test_harmonic_recovery(self):
        table = ancoh.invert_periods(ancoh.periods_closed_form(HARM, 8.0))
        q = 0.5 * (table.q_grid[1:] + table.q_grid[:-1])
        u = np.asarray(table.u(q))
        true = 0.5 * q * q
        interior = true > 0.05 * 8.0
        rel = np.abs(u[interior] - true[interior]) / true[interior]
        assert np.max(rel) < 1e-6

    def test_anharmonic_recovery_against_closed_well(self):
        table = ancoh.invert_periods(ancoh.periods_closed_form(DIAG, 8.0))
        q = 0.5 * (table.q_grid[1:] + table.q_grid[:-1])
        u = np.asarray(table.u(q))
        true = np.asarray(u_closed(q))
        interior = true > 0.05 * 8.0
        rel = np.abs(u[interior] - true[interior]) / true[interior]
        assert np.max(rel) < 1e-6

    def test_round_trip_residuals_recorded(self):
        table = ancoh.invert_periods(ancoh.periods_closed_form(DIAG, 8.0))
        rel = table.provenance["roundtrip_rel"]
        assert len(rel) == 9
        assert max(rel) < 1e-5

    def test_tight_tolerance_raises(self):
        with pytest.raises(ancoh.InversionError) as exc:
            ancoh.invert_periods(ancoh.periods_closed_form(DIAG, 8.0),
                                 roundtrip_tol=1e-9)
        assert exc.value.worst_rel > 1e-9

    def test_table_range_guard_and_json(self):
        table = ancoh.invert_periods(ancoh.periods_closed_form(DIAG, 8.0))
        with pytest.raises(ValueError, match="tabulated range"):
            table.u(table.q_grid[-1] + 1.0)
        d = table.to_json_dict()
        assert d["h_max"] == 8.0
        assert len(d["q_grid"]) == len(d["u_vals"])

    def test_spectral_route_self_consistent_but_offset(self, quartic_spectrum):
        # the level-spacing periods round-trip through their own well, yet
        # that well is not the position-space potential: the gap is the
        # order-hbar difference between the two, and it must neither vanish
        # nor blow up
        pf = ancoh.periods_from_spectrum(quartic_spectrum, n_use=30)
        table = ancoh.invert_periods(pf, roundtrip_tol=1e-3)
        assert max(table.provenance["roundtrip_rel"]) < 1e-4
        h_mid = 0.5 * pf.h_max
        q_t = brentq(lambda q: float(table.u(q)) - h_mid, 0.0,
                     float(table.q_grid[-1]), xtol=1e-14)
        qs = np.linspace(0.3 * q_t, q_t, 30)
        true = 0.5 * qs**2 + 0.05 * qs**4
        gap = np.max(np.abs(np.asarray(table.u(qs)) - true) / true)
        assert 1e-3 < gap < 1e-1


class TestOrbitTiming:
    @pytest.fixture(scope="class")
    @staticmethod
    def table():
        return ancoh.invert_periods(ancoh.periods_closed_form(DIAG, 8.0))

    def test_quarter_period_at_the_turning_point(self, table):
        pf = ancoh.periods_closed_form(DIAG, 8.0)
        for h in (2.0, 5.0, 7.0):
            q_t = brentq(lambda q: float(table.u(q)) - h, 0.0,
                         float(table.q_grid[-1]), xtol=1e-14)
            tau = ancoh.tau_chart(table, h, q_t)
            assert tau == pytest.approx(0.25 * float(pf(h)), rel=1e-6)

    def test_zero_displacement_zero_time(self, table):
        assert ancoh.tau_chart(table, 3.0, 0.0) == 0.0

    def test_beyond_turning_point_rejected(self, table):
        with pytest.raises(ValueError, match="classical range"):
            ancoh.tau_chart(table, 2.0, 10.0)

    def test_branch_times_tile_the_period(self, table):
        pf = ancoh.periods_closed_form(DIAG, 8.0)
        t_full = float(pf(3.0))
        tau = ancoh.tau_chart(table, 3.0, 1.0)
        b = time_branches(tau, t_full)
        assert b[0] + b[3] == pytest.approx(t_full, abs=1e-13)
        assert b[1] + b[2] == pytest.approx(t_full, abs=1e-13)
        assert b[0] < b[1] < b[2] < b[3]

    def test_momentum_values_and_guard(self, table):
        h = 3.0
        assert ancoh.momentum_from_energy(table.u, h, 0.0) == pytest.approx(
            math.sqrt(2.0 * h), rel=1e-13)
        # u(2.3) is about 7, well above h = 3
        with pytest.raises(ValueError, match="forbidden"):
            ancoh.momentum_from_energy(table.u, h, 2.3)
