"""Numbered end-to-end criteria with fixed tolerances and time budgets.

Every test builds what it needs inside its own timed block, so the budget
covers the full computation. Tolerances are deliberate constants: a red
verdict here is a finding about the library, not a prompt to loosen the
test. Verdicts land in the terminal summary (one line per criterion).
"""
import math
import time

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

import ancoh
from conftest import record


def diag(lam):
    return ancoh.ModelParams(omega=1.0, lam=lam, hbar=1.0,
                             model_kind="diagonal")


def quart(lam):
    return ancoh.ModelParams(omega=1.0, lam=lam, hbar=1.0,
                             model_kind="quartic")


def test_criterion_1_harmonic_collapse():
    t0 = time.perf_counter()
    sp = ancoh.solve_spectrum(diag(0.0), n_want=80)
    n = np.arange(80)
    coeff_dev = product_dev = residual = 0.0
    for rho in np.linspace(0.8, 4.0, 5):
        mags = np.exp(-0.5 * rho * rho + n * math.log(rho)
                      - 0.5 * gammaln(n + 1.0))
        for theta in np.linspace(0.0, 2.0 * math.pi, 5, endpoint=False):
            st = ancoh.build_state(sp, rho, theta, dim=80)
            ref = mags * np.exp(-1j * (n + 0.5) * theta)
            coeff_dev = max(coeff_dev, float(np.max(np.abs(st.coeffs - ref))))
            rep = ancoh.expectation_report(st)
            product_dev = max(product_dev,
                              abs(rep.uncertainty_product - 0.5))
            residual = max(residual, rep.a_residual_norm)
    elapsed = time.perf_counter() - t0
    ok = (coeff_dev < 1e-12 and product_dev < 1e-10 and residual < 1e-10
          and elapsed < 1.0)
    record(1, "harmonic collapse", ok,
           f"coeff {coeff_dev:.1e}, product {product_dev:.1e}, "
           f"ladder {residual:.1e}, {elapsed:.2f}s")


def test_criterion_2_evolution_is_relabeling():
    t0 = time.perf_counter()
    worst = 0.0
    theta0 = 0.3
    for lam in (0.05, 0.1, 0.5):
        sp = ancoh.solve_spectrum(diag(lam), n_want=64)
        for rho in (1.0, 2.0, 4.0):
            hp = 1.0 + 2.0 * lam * rho * rho
            st = ancoh.build_state(sp, rho, theta0, dim=64)
            for t in (0.1, 1.0, 10.0):
                moved = ancoh.evolve_state(st, t)
                target = ancoh.build_state(sp, rho, theta0 + hp * t, dim=64)
                idx = int(np.argmax(np.abs(target.coeffs)))
                phase = moved.coeffs[idx] / target.coeffs[idx]
                phase /= abs(phase)
                worst = max(worst, float(np.max(
                    np.abs(moved.coeffs - phase * target.coeffs))))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-12 and elapsed < 1.0
    record(2, "evolution = relabeling", ok,
           f"max coeff dev {worst:.1e}, {elapsed:.2f}s")


def test_criterion_3_peak_at_floor():
    t0 = time.perf_counter()
    rng = np.random.default_rng(173)
    mus = []
    while len(mus) < 50:
        x = float(rng.uniform(0.5, 60.0))
        if abs(x - round(x)) > 1e-6:
            mus.append(x)
    misses = 0
    for mu in mus:
        amps = ancoh.poisson_amplitudes(math.sqrt(mu), 130)
        if int(np.argmax(amps * amps)) != math.floor(mu):
            misses += 1
    elapsed = time.perf_counter() - t0
    ok = misses == 0 and elapsed < 1.0
    record(3, "mode index = floor(rho^2)", ok,
           f"{misses}/50 misses, {elapsed:.2f}s")


def test_criterion_4_resolution_of_identity():
    t0 = time.perf_counter()
    sp = ancoh.solve_spectrum(diag(0.1), n_want=40)
    rep = ancoh.resolution_report(sp, 2.0, n_list=(1, 4, 16, 64), dim=25,
                                  n_radial=12)
    decreasing = all(a > b for a, b in zip(rep.offdiag_max,
                                           rep.offdiag_max[1:]))
    elapsed = time.perf_counter() - t0
    ok = (rep.diag_dev < 1e-10 and decreasing
          and abs(rep.decay_slope + 1.0) <= 0.2 and rep.radial_dev < 1e-8
          and elapsed < 300.0)
    record(4, "resolution of identity", ok,
           f"diag {rep.diag_dev:.1e}, slope {rep.decay_slope:+.3f}, "
           f"radial {rep.radial_dev:.1e}, {elapsed:.1f}s")


def test_criterion_5_two_route_spectra():
    t0 = time.perf_counter()
    worst = 0.0
    for lam in (0.1, 0.4):
        dense = ancoh.solve_spectrum(quart(lam), dim=128, n_want=20).levels
        grid = ancoh.numerov_levels(quart(lam), 20)
        worst = max(worst, float(np.max(np.abs(dense - grid) / dense)))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-8 and elapsed < 30.0
    record(5, "dense vs grid spectra", ok,
           f"max rel {worst:.1e}, {elapsed:.1f}s")


def test_criterion_6_normal_order_duality():
    t0 = time.perf_counter()
    worst = 0.0
    for sp in (ancoh.solve_spectrum(diag(0.1), n_want=16),
               ancoh.solve_spectrum(quart(0.1), dim=128, n_want=16)):
        coeffs = ancoh.normal_order_coeffs(sp, 15)
        back = ancoh.reconstruct_levels(coeffs, 16)
        worst = max(worst, float(np.max(
            np.abs(back - sp.levels[:16]) / np.abs(sp.levels[:16]))))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 1.0
    record(6, "normal-order duality", ok,
           f"max rel {worst:.1e}, {elapsed:.2f}s")


def test_criterion_7_spread_factor_decay():
    t0 = time.perf_counter()
    sp = ancoh.solve_spectrum(diag(0.1), n_want=160)
    thetas = np.linspace(0.0, 2.0 * math.pi, 8, endpoint=False)
    k_max, product_min = [], math.inf
    for rho in (2.0, 4.0, 6.0, 8.0):
        dim = ancoh.minimal_dim(rho) + 8
        reports = [ancoh.expectation_report(
            ancoh.build_state(sp, rho, th, dim=dim)) for th in thetas]
        k_max.append(max(abs(r.k_value) for r in reports))
        product_min = min(product_min,
                          min(r.uncertainty_product for r in reports))
    decreasing = all(a > b for a, b in zip(k_max, k_max[1:]))
    elapsed = time.perf_counter() - t0
    ok = decreasing and product_min >= 0.5 - 1e-12 and elapsed < 30.0
    record(7, "uncertainty asymptotics", ok,
           f"k_max {', '.join(f'{k:.3f}' for k in k_max)}, "
           f"floor margin {product_min - 0.5:+.1e}, {elapsed:.1f}s")


def test_criterion_8_abel_round_trip():
    t0 = time.perf_counter()
    h_max = 8.0
    # harmonic well recovered from its constant period
    tab_h = ancoh.invert_periods(ancoh.periods_closed_form(diag(0.0), h_max))
    q_mid = 0.5 * (tab_h.q_grid[1:] + tab_h.q_grid[:-1])
    true_h = 0.5 * q_mid * q_mid
    keep = true_h > 0.05 * h_max
    harm_dev = float(np.max(np.abs(np.asarray(tab_h.u(q_mid))[keep]
                                   - true_h[keep]) / true_h[keep]))
    # anharmonic periods pushed through the recovered well
    pf = ancoh.periods_closed_form(diag(0.1), h_max)
    tab = ancoh.invert_periods(pf)
    round_trip = max(tab.provenance["roundtrip_rel"])
    # quarter period at the turning point
    tau_dev = 0.0
    for h in (2.0, 5.0, 7.0):
        q_t = brentq(lambda q: float(tab.u(q)) - h, 0.0,
                     float(tab.q_grid[-1]), xtol=1e-14)
        tau = ancoh.tau_chart(tab, h, q_t)
        tau_dev = max(tau_dev, abs(tau / (0.25 * float(pf(h))) - 1.0))
    elapsed = time.perf_counter() - t0
    ok = (harm_dev < 1e-6 and round_trip < 1e-4 and tau_dev < 1e-6
          and elapsed < 30.0)
    record(8, "Abel round-trip", ok,
           f"harmonic {harm_dev:.1e}, round-trip {round_trip:.1e}, "
           f"quarter-period {tau_dev:.1e}, {elapsed:.1f}s")


def test_criterion_9_almost_periodicity():
    t0 = time.perf_counter()
    sp = ancoh.solve_spectrum(quart(0.1), dim=192, n_want=40)
    st = ancoh.build_state(sp, 2.0, 0.0)
    scan = ancoh.almost_periodic_scan(st, n_periods=50, per_period=32)
    min_residual = float(scan.residuals.min())
    elapsed = time.perf_counter() - t0
    ok = (min_residual > 1e-3
          and scan.best_residual < scan.first_period_residual
          and elapsed < 30.0)
    record(9, "almost periodicity", ok,
           f"min residual {min_residual:.1e}, best {scan.best_residual:.4f} "
           f"< first {scan.first_period_residual:.4f}, {elapsed:.1f}s")
