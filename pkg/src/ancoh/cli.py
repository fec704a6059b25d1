"""Batch front end.

Subcommands run spectra, build and evolve states, execute the verification
suites, and invert period data. Output is deterministic JSON or CSV; a JSON
config file can supply any flag, with explicit flags winning.

Exit codes: 0 pass, 1 validation error, 2 numerical failure (convergence,
quadrature, round-trip, or a failed suite), 3 I/O. Usage errors raised by
the argument parser itself keep its conventional status 2.
"""
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import click
import numpy as np

from . import coherent, identity, inversion, phasespace, spectrum
from .coherent import TruncationError
from .identity import QuadratureError
from .inversion import InversionError
from .spectrum import MODEL_DIAGONAL, MODEL_QUARTIC, ModelParams, \
    SpectrumConvergenceError

EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


@dataclass(frozen=True)
class RunConfig:
    """Merged, fully resolved parameters for one command invocation."""

    command: str
    model: str = MODEL_DIAGONAL
    omega: float = 1.0
    lam: float = 0.0
    hbar: float = 1.0
    rho: float = None
    theta: float = 0.0
    levels: int = 20
    dim: int = None
    tol: float = None
    cesaro: int = None
    fmt: str = "json"
    out: str = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tol is not None and self.tol <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.fmt not in ("json", "csv"):
            raise ValueError(f"unknown format {self.fmt!r}")

    def to_json_dict(self):
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_json_dict(cls, d):
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        return cls(**d)

    def params(self):
        return ModelParams(omega=self.omega, lam=self.lam, hbar=self.hbar,
                           model_kind=self.model)


_CONFIG_KEYS = {
    "model", "omega", "lambda", "hbar", "rho", "theta", "levels", "dim",
    "tol", "cesaro", "format", "out",
    # per-command extras; keys a command does not define are ignored for it
    "t", "t_max", "n_steps", "h_max", "n_grid", "spectrum_file",
}


def _load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise _Exit(EXIT_IO, f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        raise _Exit(EXIT_VALIDATION, f"config is not valid JSON: {exc}")
    bad = set(data) - _CONFIG_KEYS
    if bad:
        raise _Exit(EXIT_VALIDATION,
                    f"unknown config keys: {', '.join(sorted(bad))}")
    return data


class _Exit(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _merge(ctx, config_path, **flag_values):
    """Flags override the config file, which overrides the defaults."""
    merged = dict(flag_values)
    if config_path is not None:
        file_cfg = _load_config(config_path)
        for key, value in file_cfg.items():
            name = "lam" if key == "lambda" else ("fmt" if key == "format"
                                                  else key)
            if name not in merged:
                continue
            src = ctx.get_parameter_source(
                "lam" if key == "lambda" else ("fmt" if key == "format"
                                               else key))
            if src is None or src.name == "DEFAULT":
                merged[name] = value
    return merged


def _emit(payload, cfg, columns=None):
    """Write JSON (sorted keys) or CSV (repr floats); stdout if no path."""
    if cfg.fmt == "json":
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    else:
        if columns is None:
            raise _Exit(EXIT_VALIDATION,
                        "this command has no CSV form; use --format json")
        rows = payload
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(repr(v) if isinstance(v, float) else str(v)
                                  for v in row))
        text = "\n".join(lines) + "\n"
    if cfg.out is None:
        click.echo(text, nl=False)
        return
    try:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise _Exit(EXIT_IO, f"cannot write {cfg.out}: {exc}")


def _solve(cfg, n_want, tol=None):
    params = cfg.params()
    tol = tol if tol is not None else 1e-10
    if params.model_kind == MODEL_DIAGONAL:
        return spectrum.solve_spectrum(params, dim=n_want, n_want=n_want,
                                       tol=tol)
    basis = cfg.dim if cfg.command == "spectrum" and cfg.dim else None
    if basis is None:
        basis = max(64, 3 * n_want)
        sp = spectrum.solve_spectrum(params, dim=basis, n_want=n_want,
                                     tol=tol, allow_partial=True)
        if sp.n_converged >= n_want:
            return sp
        basis *= 2
    return spectrum.solve_spectrum(params, dim=basis, n_want=n_want, tol=tol)


def _state_spectrum(cfg, rho):
    dim = cfg.dim or (coherent.minimal_dim(rho) + 8)
    return _solve(cfg, dim), dim


def _config(ctx, config_path, command, extra=None, **kw):
    """Build the RunConfig under the same exit-code mapping as the command
    body; config-file problems must not surface as bare tracebacks. Extra
    (per-command) keys ride through the merge too, so the config file can
    supply them like any flag."""
    try:
        merged = _merge(ctx, config_path, **dict(kw, **(extra or {})))
        if extra is not None:
            pulled = {k: merged.pop(k) for k in extra}
            return RunConfig(command=command, extra=pulled, **merged)
        return RunConfig(command=command, **merged)
    except _Exit as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.code)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)


def _require(value, flag):
    # required-but-config-suppliable flags are checked after the merge, so
    # click must not enforce them at parse time
    if value is None:
        raise _Exit(EXIT_VALIDATION,
                    f"missing {flag} (pass the flag or set it in --config)")
    return value


def _run(fn, cfg):
    try:
        fn(cfg)
    except _Exit as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.code)
    except (ValueError, TruncationError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    except (SpectrumConvergenceError, QuadratureError, InversionError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)
    sys.exit(0)


def _model_options(fn):
    for opt in reversed([
        click.option("--model", type=click.Choice([MODEL_DIAGONAL,
                                                   MODEL_QUARTIC]),
                     default=MODEL_DIAGONAL, show_default=True),
        click.option("--omega", type=float, default=1.0, show_default=True),
        click.option("--lambda", "lam", type=float, default=0.0,
                     show_default=True, help="Anharmonic strength."),
        click.option("--hbar", type=float, default=1.0, show_default=True),
    ]):
        fn = opt(fn)
    return fn


def _output_options(fn):
    for opt in reversed([
        click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
                     default="json", show_default=True),
        click.option("--out", type=str, default=None,
                     help="Output file; stdout if omitted."),
        click.option("--config", "config_path", type=str, default=None,
                     help="JSON file supplying any flag; flags override."),
    ]):
        fn = opt(fn)
    return fn


@click.group()
@click.version_option(package_name="ancoh")
def main():
    """Coherent states for anharmonic oscillators: spectra, states,
    verification suites, and period inversion."""


@main.command("spectrum")
@_model_options
@_output_options
@click.option("--levels", type=int, default=20, show_default=True,
              help="Converged levels to produce.")
@click.option("--dim", type=int, default=None, help="Basis size override.")
@click.option("--tol", type=float, default=None,
              help="Relative convergence tolerance [default: 1e-10].")
@click.pass_context
def cmd_spectrum(ctx, config_path, **kw):
    """Solve the model spectrum and write it as JSON."""
    cfg = _config(ctx, config_path, "spectrum", **kw)

    def run(cfg):
        if cfg.levels < 1:
            raise _Exit(EXIT_VALIDATION, "--levels must be >= 1")
        sp = _solve(cfg, cfg.levels, tol=cfg.tol)
        if cfg.fmt == "csv":
            rows = list(enumerate(float(e) for e in sp.levels[:cfg.levels]))
            _emit(rows, cfg, columns=("n", "energy"))
        else:
            _emit(sp.to_json_dict(), cfg)

    _run(run, cfg)


@main.command("state")
@_model_options
@_output_options
@click.option("--rho", type=float, default=None,
              help="Label radius; required (flag or config).")
@click.option("--theta", type=float, default=0.0, show_default=True)
@click.option("--dim", type=int, default=None,
              help="Truncation [default: smallest adequate + 8].")
@click.pass_context
def cmd_state(ctx, config_path, **kw):
    """Construct one state and write its label, weights, and moments."""
    cfg = _config(ctx, config_path, "state", **kw)

    def run(cfg):
        _require(cfg.rho, "--rho")
        sp, dim = _state_spectrum(cfg, cfg.rho)
        st = coherent.build_state(sp, cfg.rho, cfg.theta, dim)
        rep = coherent.expectation_report(st)
        payload = {
            "state": coherent.state_to_json_dict(st),
            "moments": asdict(rep),
            "spectrum": sp.to_json_dict(),
        }
        _emit(payload, cfg)

    _run(run, cfg)


@main.command("evolve")
@_model_options
@_output_options
@click.option("--rho", type=float, default=None,
              help="Label radius; required (flag or config).")
@click.option("--theta", type=float, default=0.0, show_default=True)
@click.option("--t", "t", type=float, default=None,
              help="Evolution time; required (flag or config).")
@click.option("--dim", type=int, default=None)
@click.pass_context
def cmd_evolve(ctx, config_path, t, **kw):
    """Evolve one state and report the relabeling cross-check."""
    cfg = _config(ctx, config_path, "evolve", extra={"t": t}, **kw)

    def run(cfg):
        _require(cfg.rho, "--rho")
        t = _require(cfg.extra["t"], "--t")
        sp, dim = _state_spectrum(cfg, cfg.rho)
        st = coherent.build_state(sp, cfg.rho, cfg.theta, dim)
        ev = coherent.evolve_state(st, t)
        rebuilt = coherent.build_state(sp, cfg.rho, ev.theta, dim)
        dev = float(np.max(np.abs(ev.coeffs - rebuilt.coeffs)))
        payload = {
            "t": t,
            "state": coherent.state_to_json_dict(ev),
            "relabel_dev": dev,
        }
        _emit(payload, cfg)

    _run(run, cfg)


@main.command("trajectory")
@_model_options
@_output_options
@click.option("--rho", type=float, default=None,
              help="Label radius; required (flag or config).")
@click.option("--theta", type=float, default=0.0, show_default=True)
@click.option("--t-max", type=float, default=None,
              help="End time [default: two nominal periods].")
@click.option("--n-steps", type=int, default=256, show_default=True)
@click.pass_context
def cmd_trajectory(ctx, config_path, t_max, n_steps, **kw):
    """Classical trajectory of the label point, as CSV rows."""
    cfg = _config(ctx, config_path, "trajectory",
                  extra={"t_max": t_max, "n_steps": n_steps}, **kw)

    def run(cfg):
        _require(cfg.rho, "--rho")
        if cfg.model != MODEL_DIAGONAL:
            raise _Exit(EXIT_VALIDATION,
                        "trajectory needs the diagonal model's closed-form "
                        "classical flow")
        params = cfg.params()
        if cfg.extra["n_steps"] < 2:
            raise _Exit(EXIT_VALIDATION, "--n-steps must be >= 2")
        y = params.hbar * params.omega * cfg.rho ** 2
        radius = math.sqrt(2.0 * y) / params.omega
        pt = phasespace.point_rtheta(params, radius, cfg.theta)
        t_end = cfg.extra["t_max"]
        if t_end is None:
            t_end = 2.0 * 2.0 * math.pi / (params.omega * pt.hprime)
        times = np.linspace(0.0, t_end, cfg.extra["n_steps"])
        rows = phasespace.trajectory_rows(pt, times)
        if cfg.fmt == "json":
            payload = {
                "columns": list(phasespace.TRAJECTORY_COLUMNS),
                "rows": [[float(v) for v in row] for row in rows],
            }
            _emit(payload, cfg)
        else:
            _emit([tuple(float(v) for v in row) for row in rows], cfg,
                  columns=phasespace.TRAJECTORY_COLUMNS)

    _run(run, cfg)


@main.command("verify")
@click.argument("suite", type=click.Choice(["identity", "uncertainty",
                                            "evolution", "bohr",
                                            "recurrence"]))
@_model_options
@_output_options
@click.option("--rho", type=float, default=None)
@click.option("--theta", type=float, default=0.0, show_default=True)
@click.option("--dim", type=int, default=None)
@click.option("--cesaro", type=int, default=None,
              help="Single window count for the identity suite.")
@click.option("--tol", type=float, default=None,
              help="Override the suite's headline tolerance.")
@click.pass_context
def cmd_verify(ctx, suite, config_path, **kw):
    """Run one verification suite; nonzero exit if it fails."""
    cfg = _config(ctx, config_path, f"verify-{suite}", **kw)
    _run(_SUITES[suite], cfg)


def _finish_suite(cfg, payload, checks):
    """Emit the report with one PASS/FAIL line per check; fail the run if
    any check failed."""
    payload["checks"] = {name: bool(ok) for name, ok in checks}
    payload["pass"] = all(ok for _, ok in checks)
    _emit(payload, cfg)
    for name, ok in checks:
        click.echo(f"{'PASS' if ok else 'FAIL'} {name}", err=True)
    if not payload["pass"]:
        failing = ", ".join(name for name, ok in checks if not ok)
        raise _Exit(EXIT_NUMERICAL, f"suite failed: {failing}")


def _suite_evolution(cfg):
    rho = cfg.rho if cfg.rho is not None else 2.0
    tol = cfg.tol if cfg.tol is not None else 1e-12
    sp, dim = _state_spectrum(cfg, rho)
    st = coherent.build_state(sp, rho, cfg.theta, dim)
    devs = {}
    for t in (0.1, 1.0, 10.0):
        ev = coherent.evolve_state(st, t)
        rebuilt = coherent.build_state(sp, rho, ev.theta, dim)
        idx = int(np.argmax(np.abs(rebuilt.coeffs)))
        phase = ev.coeffs[idx] / rebuilt.coeffs[idx]
        phase /= abs(phase)
        devs[str(t)] = float(np.max(np.abs(ev.coeffs - phase * rebuilt.coeffs)))
    worst = max(devs.values())
    payload = {"suite": "evolution", "rho": rho, "deviation_by_t": devs,
               "max_deviation": worst, "tolerance": tol}
    _finish_suite(cfg, payload, [("relabel-identity", worst < tol)])


def _suite_bohr(cfg):
    params = cfg.params()
    if cfg.rho is not None:
        mus = [cfg.rho ** 2]
    else:
        mus = [j + 0.37 for j in range(0, 60, 3)]
    classical = params.model_kind == MODEL_DIAGONAL
    results = []
    for mu in mus:
        rho = math.sqrt(mu)
        dim = coherent.minimal_dim(rho) + 8
        sp = _solve(cfg, dim)
        st = coherent.build_state(sp, rho, 0.0, dim)
        row = {"rho_sq": mu,
               "argmax_n": int(np.argmax(np.abs(st.coeffs))),
               "expected": math.floor(mu)}
        if classical:
            y = params.hbar * params.omega * mu
            radius = math.sqrt(2.0 * y) / params.omega
            row["action_over_h"] = phasespace.orbit_action_quadrature(
                phasespace.point_rtheta(params, radius, 0.0))
        results.append(row)
    def peak_ok(r):
        if r["argmax_n"] == r["expected"]:
            return True
        # integer rho^2 ties the top two weights exactly; round-off picks
        # one of them, and either is the true mode
        mu = r["rho_sq"]
        return (abs(mu - round(mu)) < 1e-9 and round(mu) >= 1
                and r["argmax_n"] == int(round(mu)) - 1)

    checks = [("peak-at-floor", all(peak_ok(r) for r in results))]
    if classical:
        checks.append(("orbit-action",
                       all(abs(r["action_over_h"] - r["rho_sq"]) < 1e-8
                           for r in results)))
    payload = {"suite": "bohr", "results": results}
    if len(results) == 1:
        payload["argmax_n"] = results[0]["argmax_n"]
    _finish_suite(cfg, payload, checks)


def _suite_uncertainty(cfg):
    tol = cfg.tol if cfg.tol is not None else 1e-12
    rhos = [cfg.rho] if cfg.rho is not None else [2.0, 4.0, 6.0, 8.0]
    thetas = np.linspace(0.0, 2.0 * math.pi, 8, endpoint=False)
    k_max, product_min = [], math.inf
    params = cfg.params()
    for rho in rhos:
        sp, dim = _state_spectrum(cfg, rho)
        reports = [coherent.expectation_report(
            coherent.build_state(sp, rho, th, dim)) for th in thetas]
        k_max.append(max(abs(r.k_value) for r in reports))
        product_min = min(product_min,
                          min(r.uncertainty_product for r in reports))
    floor = 0.5 * params.hbar - tol
    checks = [("uncertainty-floor", product_min >= floor)]
    if len(rhos) > 1:
        checks.append(("spread-factor-decreasing",
                       all(a > b for a, b in zip(k_max, k_max[1:]))))
    payload = {"suite": "uncertainty", "rho_list": rhos,
               "k_max_by_rho": k_max, "product_min": product_min,
               "hbar_over_2": 0.5 * params.hbar}
    _finish_suite(cfg, payload, checks)


def _suite_identity(cfg):
    diag_tol = cfg.tol if cfg.tol is not None else 1e-10
    rho = cfg.rho if cfg.rho is not None else 2.0
    dim = cfg.dim or 25
    n_list = (cfg.cesaro,) if cfg.cesaro else (1, 4, 16, 64)
    n_want = max(dim, 13)
    sp = _solve(cfg, n_want)
    report = identity.resolution_report(sp, rho, n_list=n_list, dim=dim)
    checks = [("poisson-diagonal", report.diag_dev < diag_tol),
              ("radial-masses", report.radial_dev < 1e-8)]
    if len(n_list) > 1:
        decreasing = all(a > b for a, b in
                         zip(report.offdiag_max, report.offdiag_max[1:]))
        checks.append(("offdiag-decay", decreasing
                       and abs(report.decay_slope + 1.0) <= 0.2))
    else:
        checks.append(("offdiag-vanishes",
                       report.offdiag_max[0] < diag_tol))
    _finish_suite(cfg, identity.report_to_json_dict(report, sp), checks)


def _suite_recurrence(cfg):
    rho = cfg.rho if cfg.rho is not None else 2.0
    sp, dim = _state_spectrum(cfg, rho)
    st = coherent.build_state(sp, rho, cfg.theta, dim)
    scan = coherent.almost_periodic_scan(st)
    payload = {
        "suite": "recurrence",
        "t_nominal": scan.t_nominal,
        "first_period_residual": scan.first_period_residual,
        "best_residual": scan.best_residual,
        "t_best": scan.t_best,
        "min_residual": float(scan.residuals.min()),
    }
    _finish_suite(cfg, payload, [
        ("improving-near-return",
         scan.best_residual < scan.first_period_residual),
    ])


_SUITES = {
    "evolution": _suite_evolution,
    "bohr": _suite_bohr,
    "uncertainty": _suite_uncertainty,
    "identity": _suite_identity,
    "recurrence": _suite_recurrence,
}


@main.command("invert")
@_model_options
@_output_options
@click.option("--spectrum-file", type=str, default=None,
              help="Period source: a spectrum JSON written by `spectrum`.")
@click.option("--h-max", type=float, default=8.0, show_default=True,
              help="Top of the inversion energy range.")
@click.option("--n-grid", type=int, default=300, show_default=True)
@click.option("--tol", type=float, default=None,
              help="Round-trip tolerance [default: 1e-4].")
@click.pass_context
def cmd_invert(ctx, config_path, spectrum_file, h_max, n_grid, **kw):
    """Recover the potential from periods; write table plus residuals."""
    cfg = _config(ctx, config_path, "invert",
                  extra={"spectrum_file": spectrum_file, "h_max": h_max,
                         "n_grid": n_grid}, **kw)

    def run(cfg):
        h_top = cfg.extra["h_max"]
        if h_top <= 0.0:
            raise _Exit(EXIT_VALIDATION, "--h-max must be positive")
        if cfg.extra["spectrum_file"] is not None:
            try:
                with open(cfg.extra["spectrum_file"], encoding="utf-8") as fh:
                    sp = spectrum.EnergySpectrum.from_json_dict(json.load(fh))
            except OSError as exc:
                raise _Exit(EXIT_IO, f"cannot read spectrum: {exc}")
            except (json.JSONDecodeError, KeyError) as exc:
                raise _Exit(EXIT_VALIDATION, f"bad spectrum file: {exc}")
            periods = inversion.periods_from_spectrum(sp)
            if h_top > periods.h_max:
                raise _Exit(EXIT_VALIDATION,
                            f"--h-max {h_top:g} beyond the period table "
                            f"range {periods.h_max:g}")
            periods = inversion.PeriodFunction(
                h_vals=periods.h_vals, t_vals=periods.t_vals,
                source=periods.source, h_max=float(h_top))
        else:
            periods = inversion.periods_closed_form(cfg.params(), h_top)
        tol = cfg.tol if cfg.tol is not None else 1e-4
        table = inversion.invert_periods(periods, n_grid=cfg.extra["n_grid"],
                                         roundtrip_tol=tol)
        if cfg.fmt == "csv":
            rows = list(zip((float(v) for v in table.q_grid),
                            (float(v) for v in table.u_vals)))
            _emit(rows, cfg, columns=("q", "u"))
        else:
            _emit(table.to_json_dict(), cfg)
        worst = max(table.provenance["roundtrip_rel"])
        click.echo(f"PASS round-trip (max rel {worst:.3e})", err=True)

    _run(run, cfg)


if __name__ == "__main__":
    main()
