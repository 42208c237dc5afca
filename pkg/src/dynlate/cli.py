"""Command-line interface.

Subcommands: check, estimate, identify, bounds, decompose, simulate,
montecarlo, bootstrap. Human-readable tables go to stdout; ``--json``
writes a versioned machine-readable report. Exit codes: 0 success,
2 validation/usage errors (one ``error[CODE]: ...`` line on stderr),
1 internal errors.
"""

from __future__ import annotations

import os
import sys

import click

from . import dgp as dgp_mod
from . import inference, reporting, simulate
from .errors import AssumptionRequired, DynlateError
from .estimators import (
    CALENDAR_HOMOGENEITY,
    CROSS_GROUP_HOMOGENEITY,
    KNOWN_ASSUMPTIONS,
    NO_LATE_SWITCHERS,
    NegativeWeightStatus,
    bounds_general,
    bounds_general_unrestricted,
    bounds_tight,
    estimate as estimate_fn,
    identify as identify_fn,
    negative_weight_diagnostic,
    outcome_range_bounds,
)
from .panel import check_assumptions, ingest, serialize
from .reporting import fnum, render_table

REPORT_SCHEMA_VERSION = reporting.REPORT_SCHEMA_VERSION


def _parse_bounds(ctx, param, value):
    if value is None:
        return None
    parts = value.split(",")
    if len(parts) != 2:
        raise click.BadParameter("expected two comma-separated numbers: lo,hi")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise click.BadParameter(f"could not parse {value!r} as lo,hi") from None
    if lo > hi:
        raise click.BadParameter(f"lo must be <= hi, got {value!r}")
    return lo, hi


def _parse_assume(ctx, param, value):
    names = []
    for chunk in value:
        names.extend(x.strip() for x in chunk.split(",") if x.strip())
    unknown = [x for x in names if x not in KNOWN_ASSUMPTIONS]
    if unknown:
        raise click.BadParameter(
            f"unknown assumption(s) {unknown}; valid: {', '.join(KNOWN_ASSUMPTIONS)}"
        )
    return tuple(dict.fromkeys(names))


def _parse_targets(ctx, param, value):
    if value is None:
        return simulate.ALL_TARGETS
    names = tuple(x.strip() for x in value.split(",") if x.strip())
    unknown = set(names) - set(simulate.ALL_TARGETS)
    if unknown:
        raise click.BadParameter(
            f"unknown target(s) {sorted(unknown)}; valid: {', '.join(simulate.ALL_TARGETS)}"
        )
    return names


panel_opt = click.option("--panel", "panel_path", type=str, help="Panel CSV file.")
dgp_opt = click.option("--dgp", "dgp_path", type=str, help="DGP spec file.")
json_opt = click.option("--json", "json_path", type=str, help="Write a JSON report here.")
seed_opt = click.option(
    "--seed", type=int, envvar="DYNLATE_SEED", required=True,
    help="RNG seed (falls back to DYNLATE_SEED).",
)
threads_opt = click.option(
    "--threads", type=int, default=lambda: os.cpu_count() or 1,
    help="Worker threads (results are thread-count invariant).",
)
assume_opt = click.option(
    "--assume", multiple=True, callback=_parse_assume,
    help="Declare assumptions (comma-separated or repeated): "
    + ", ".join(KNOWN_ASSUMPTIONS),
)
bounds_opt = click.option(
    "--bounds", "effect_bounds", callback=_parse_bounds, default=None,
    help="Effect bounds lo,hi (default: observed outcome range).",
)


@click.group()
def cli():
    """Dynamic treatment-effect estimation with a one-shot binary instrument."""


def _load_inputs(panel_path, dgp_path, need_one=True):
    if panel_path and dgp_path:
        raise click.UsageError("--panel and --dgp are mutually exclusive")
    if need_one and not panel_path and not dgp_path:
        raise click.UsageError("one of --panel or --dgp is required")
    panel = ingest(panel_path) if panel_path else None
    spec = dgp_mod.load_spec(dgp_path) if dgp_path else None
    return panel, spec


def _estimands(panel, spec):
    if panel is not None:
        return estimate_fn(panel)
    return dgp_mod.population_estimands(spec)


def _negative_weight_warnings(est):
    warnings = []
    for flag in negative_weight_diagnostic(est):
        if flag.status is NegativeWeightStatus.GUARANTEED:
            warnings.append(
                f"negative weights guaranteed in the period-{flag.t} reduced form "
                f"(first stage decreases at k={flag.decreasing_k})"
            )
    return warnings


def _report(command, inputs, outputs, assume=(), warnings=()):
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "assume": list(assume),
        "warnings": list(warnings),
        "outputs": outputs,
    }


def _emit(report, json_path):
    if json_path:
        reporting.dump(report, json_path)


def _echo_estimands_table(est):
    headers = ["t", "rf", "fs", "iv", "rho", "switch_z0", "switch_z1"]
    rows = []
    for t in range(1, est.T + 1):
        rows.append(
            [
                str(t),
                fnum(est.rf_at(t)),
                fnum(est.fs_at(t)),
                fnum(est.iv_at(t)),
                fnum(est.rho_at(t)) if t >= 2 else "-",
                fnum(est.switch_at(t, 0)) if t >= 2 else "-",
                fnum(est.switch_at(t, 1)) if t >= 2 else "-",
            ]
        )
    click.echo(render_table(headers, rows))


@cli.command()
@panel_opt
@dgp_opt
@json_opt
def check(panel_path, dgp_path, json_path):
    """Validate a panel or DGP spec and report assumption diagnostics."""
    panel, spec = _load_inputs(panel_path, dgp_path)
    inputs = {"panel": panel_path, "dgp": dgp_path}
    if panel is not None:
        diag = check_assumptions(panel)
        outputs = {"diagnostics": reporting.diagnostics_to_dict(diag)}
        click.echo(f"panel ok: n={diag.n} T={diag.T} (z=1: {diag.n_z1}, z=0: {diag.n_z0})")
        click.echo(f"sample fs_1 = {fnum(diag.fs1)}"
                   + ("" if diag.relevance_ok else "  [relevance FAILS]"))
        for note in diag.notes:
            click.echo(f"note: {note}")
        warnings = [] if diag.relevance_ok else ["relevance at t=1 fails (fs_1 = 0)"]
    else:
        outputs = {
            "spec": {
                "T": spec.T,
                "pz": spec.pz,
                "noise_sd": spec.noise_sd,
                "histories": len(spec.histories),
                "p_c1": spec.p_c1,
                "calendar_homogeneity": dgp_mod.check_calendar_homogeneity(spec),
                "cross_group_homogeneity": dgp_mod.check_cross_group_homogeneity(spec),
            }
        }
        click.echo(
            f"spec ok: T={spec.T} histories={len(spec.histories)} "
            f"P(C1)={fnum(spec.p_c1)}"
        )
        click.echo(
            "calendar homogeneity: "
            + ("holds" if outputs["spec"]["calendar_homogeneity"] else "does not hold")
        )
        warnings = []
    _emit(_report("check", inputs, outputs, warnings=warnings), json_path)


@cli.command()
@panel_opt
@dgp_opt
@json_opt
def estimate(panel_path, dgp_path, json_path):
    """Per-period reduced forms, first stages, and IV ratios."""
    panel, spec = _load_inputs(panel_path, dgp_path)
    est = _estimands(panel, spec)
    warnings = _negative_weight_warnings(est)
    outputs = {
        "estimands": reporting.estimands_to_dict(est),
        "negative_weight_flags": reporting.flags_to_dicts(negative_weight_diagnostic(est)),
    }
    _echo_estimands_table(est)
    for w in warnings:
        click.echo(f"warning: {w}")
    inputs = {"panel": panel_path, "dgp": dgp_path}
    _emit(_report("estimate", inputs, outputs, warnings=warnings), json_path)


@cli.command()
@panel_opt
@dgp_opt
@assume_opt
@json_opt
def identify(panel_path, dgp_path, assume, json_path):
    """Identify the effect-by-exposure profile (needs --assume calendar-homogeneity)."""
    if CALENDAR_HOMOGENEITY not in assume:
        raise AssumptionRequired(
            f"identification requires --assume {CALENDAR_HOMOGENEITY}"
        )
    panel, spec = _load_inputs(panel_path, dgp_path)
    est = _estimands(panel, spec)
    prof = identify_fn(est)
    warnings = list(prof.warnings) + _negative_weight_warnings(est)
    outputs = {
        "estimands": reporting.estimands_to_dict(est),
        "profile": reporting.profile_to_dict(prof),
    }
    rows = [[str(tau), fnum(v)] for tau, v in enumerate(prof.deltas)]
    click.echo(render_table(["exposure", "delta"], rows))
    for w in warnings:
        click.echo(f"warning: {w}")
    inputs = {"panel": panel_path, "dgp": dgp_path}
    _emit(_report("identify", inputs, outputs, assume=assume, warnings=warnings), json_path)


@cli.command()
@panel_opt
@dgp_opt
@click.option("--period", type=int, default=None, help="Single period t (default: all).")
@bounds_opt
@assume_opt
@json_opt
def bounds(panel_path, dgp_path, period, effect_bounds, assume, json_path):
    """Partial-identification intervals for the dynamic effects."""
    panel, spec = _load_inputs(panel_path, dgp_path)
    est = _estimands(panel, spec)
    if effect_bounds is None:
        if panel is not None:
            effect_bounds = outcome_range_bounds(panel)
        else:
            effect_bounds = dgp_mod.contaminating_effect_range(spec)
    lo, hi = effect_bounds
    periods = [period] if period is not None else list(range(2, est.T + 1))
    signs_ok = lo <= 0.0 <= hi
    tight_declared = CROSS_GROUP_HOMOGENEITY in assume or NO_LATE_SWITCHERS in assume
    reports = []
    for t in periods:
        if signs_ok:
            reports.append(bounds_general(est, t, lo, hi))
        reports.append(bounds_general_unrestricted(est, t, lo, hi))
        if signs_ok and tight_declared:
            reports.append(bounds_tight(est, t, lo, hi))
    warnings = []
    if not tight_declared:
        warnings.append(
            "tight bounds skipped: declare --assume cross-group-homogeneity "
            "or --assume no-late-switchers"
        )
    outputs = {"bounds": [reporting.bounds_to_dict(r) for r in reports]}
    rows = [
        [str(r.t), r.method, fnum(r.lower), fnum(r.upper)]
        for r in reports
    ]
    click.echo(render_table(["t", "method", "lower", "upper"], rows))
    for w in warnings:
        click.echo(f"warning: {w}")
    inputs = {
        "panel": panel_path,
        "dgp": dgp_path,
        "period": period,
        "bounds": [lo, hi],
    }
    _emit(_report("bounds", inputs, outputs, assume=assume, warnings=warnings), json_path)


@cli.command()
@dgp_opt
@click.option("--period", type=int, required=True, help="Period t >= 2 to decompose.")
@json_opt
def decompose(dgp_path, period, json_path):
    """Exact latent-group decomposition of a period's reduced form."""
    if not dgp_path:
        raise click.UsageError("--dgp is required")
    spec = dgp_mod.load_spec(dgp_path)
    rep = dgp_mod.decompose(spec, period)
    neg = dgp_mod.negative_weight_report(spec, period)
    headers = ["group", "switch", "exposure", "sign", "prob", "effect", "signed", "weight"]
    rows = []
    for x in rep.all_terms:
        rows.append(
            [
                str(x.label),
                str(x.switch_period),
                str(x.exposure),
                "+" if x.sign > 0 else "-",
                fnum(x.probability),
                fnum(x.effect),
                fnum(x.signed_value),
                fnum(x.weight),
            ]
        )
    click.echo(render_table(headers, rows))
    click.echo(
        f"rf[{rep.t}] = {fnum(rep.rf_t)} (reconstructed {fnum(rep.reconstructed_rf)}); "
        f"fs[{rep.t}] = {fnum(rep.fs_t)} (reconstructed {fnum(rep.reconstructed_fs)})"
    )
    warnings = []
    if neg.entries:
        warnings.append(
            f"negatively weighted groups at t={period}: "
            + ", ".join(str(x.label) for x in neg.entries)
        )
    if not neg.iv_defined:
        warnings.append(f"iv undefined at t={period} (fs_t = 0)")
    for w in warnings:
        click.echo(f"warning: {w}")
    outputs = {
        "decomposition": reporting.decomposition_to_dict(rep),
        "negative_weights": reporting.negative_weights_to_dict(neg),
    }
    inputs = {"dgp": dgp_path, "period": period}
    _emit(_report("decompose", inputs, outputs, warnings=warnings), json_path)


@cli.command("simulate")
@dgp_opt
@click.option("--n", type=int, required=True, help="Units to draw.")
@seed_opt
@click.option("--out", "out_path", type=str, default=None,
              help="Panel CSV destination (default: stdout).")
@json_opt
def simulate_cmd(dgp_path, n, seed, out_path, json_path):
    """Draw a panel from a DGP spec and write it as CSV."""
    if not dgp_path:
        raise click.UsageError("--dgp is required")
    spec = dgp_mod.load_spec(dgp_path)
    panel = simulate.draw_panel(spec, n, seed)
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            serialize(panel, fh)
        click.echo(f"wrote {panel.n} units x {panel.T} periods to {out_path}")
    else:
        click.echo(serialize(panel), nl=False)
    inputs = {"dgp": dgp_path, "n": n, "seed": seed, "out": out_path}
    outputs = {"n": panel.n, "T": panel.T, "n_z1": panel.n_z1, "n_z0": panel.n_z0}
    _emit(_report("simulate", inputs, outputs), json_path)


@cli.command()
@dgp_opt
@click.option("--n", type=int, required=True, help="Units per replication.")
@click.option("--reps", type=int, required=True, help="Replications.")
@seed_opt
@click.option("--targets", callback=_parse_targets, default=None,
              help="Comma-separated subset of: " + ", ".join(simulate.ALL_TARGETS))
@bounds_opt
@threads_opt
@json_opt
def montecarlo(dgp_path, n, reps, seed, targets, effect_bounds, threads, json_path):
    """Monte Carlo study of the estimators against the population oracle."""
    if not dgp_path:
        raise click.UsageError("--dgp is required")
    spec = dgp_mod.load_spec(dgp_path)
    lo, hi = effect_bounds if effect_bounds else (None, None)
    summary = simulate.monte_carlo(
        spec, n=n, reps=reps, seed=seed, targets=targets, lo=lo, hi=hi, threads=threads
    )
    headers = ["target", "oracle", "mean", "bias", "sd", "ok", "failed"]
    rows = [
        [r.name, fnum(r.oracle), fnum(r.mean), fnum(r.bias), fnum(r.sd),
         str(r.n_ok), str(r.n_failed)]
        for r in summary.rows
    ]
    click.echo(render_table(headers, rows))
    outputs = {"monte_carlo": reporting.monte_carlo_to_dict(summary)}
    inputs = {
        "dgp": dgp_path, "n": n, "reps": reps, "seed": seed,
        "targets": list(targets),
    }
    _emit(_report("montecarlo", inputs, outputs), json_path)


@cli.command("bootstrap")
@panel_opt
@click.option("--reps", type=int, required=True, help="Bootstrap resamples.")
@click.option("--alpha", type=float, default=0.05, show_default=True,
              help="1 - confidence level.")
@seed_opt
@bounds_opt
@assume_opt
@threads_opt
@json_opt
def bootstrap_cmd(panel_path, reps, alpha, seed, effect_bounds, assume, threads, json_path):
    """Unit-level percentile bootstrap intervals for all reported estimands."""
    if not panel_path:
        raise click.UsageError("--panel is required")
    panel = ingest(panel_path)
    lo, hi = effect_bounds if effect_bounds else (None, None)
    include_identify = CALENDAR_HOMOGENEITY in assume
    res = inference.bootstrap(
        panel, reps=reps, alpha=alpha, seed=seed, lo=lo, hi=hi,
        include_identify=include_identify, threads=threads,
    )
    tight_declared = CROSS_GROUP_HOMOGENEITY in assume or NO_LATE_SWITCHERS in assume
    targets = tuple(
        t for t in res.targets if tight_declared or not t.name.startswith("tight_")
    )
    res = inference.BootstrapResult(
        n=res.n, T=res.T, reps=res.reps, alpha=res.alpha, seed=res.seed,
        n_failed_resamples=res.n_failed_resamples, lo=res.lo, hi=res.hi,
        targets=targets,
    )
    warnings = []
    if not include_identify:
        warnings.append(
            "identified profile skipped: declare --assume calendar-homogeneity"
        )
    if res.n_failed_resamples:
        warnings.append(
            f"{res.n_failed_resamples} of {reps} resamples failed the relevance screen"
        )
    headers = ["target", "point", "lower", "upper", "ok", "failed"]
    rows = [
        [t.name, fnum(t.point), fnum(t.lower), fnum(t.upper), str(t.n_ok), str(t.n_failed)]
        for t in res.targets
    ]
    click.echo(render_table(headers, rows))
    for w in warnings:
        click.echo(f"warning: {w}")
    outputs = {"bootstrap": reporting.bootstrap_to_dict(res)}
    inputs = {
        "panel": panel_path, "reps": reps, "alpha": alpha, "seed": seed,
        "bounds": None if res.lo is None else [res.lo, res.hi],
    }
    _emit(_report("bootstrap", inputs, outputs, assume=assume, warnings=warnings), json_path)


def main(argv=None) -> int:
    """Entry point with the documented exit-code and error-line contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        click.echo(f"error[E_ARGS]: {exc.format_message()}", err=True)
        return 2
    except click.ClickException as exc:
        click.echo(f"error[E_ARGS]: {exc.format_message()}", err=True)
        return 2
    except DynlateError as exc:
        click.echo(f"error[{exc.code}]: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"error[E_IO]: {exc}", err=True)
        return 2
    except Exception as exc:  # pragma: no cover - internal failures
        click.echo(f"error[E_INTERNAL]: {exc!r}", err=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
