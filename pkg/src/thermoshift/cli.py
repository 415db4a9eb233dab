"""Config-driven experiment runner.

Every subcommand reads one config file, runs deterministically, and writes a
CSV report plus a JSON summary (which records the config hash and tolerance
settings). Exact-arithmetic runs render rationals as terminating decimals
where possible and as numerator/denominator otherwise, so reruns are
byte-identical.

Exit codes: 0 success, 1 failed audit checks, 2 config or usage error,
3 non-primitive space, 4 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import enumeration
from .config import ExperimentConfig, load_config
from .equilibrium import (bowen_series, conditional_unstable_measure,
                          equilibrium_state, gibbs_ratio_report, pressure_spectral,
                          stationary_distribution, variational_score)
from .errors import (ConfigError, ConvergenceError, ExactArithmeticError,
                     NonPrimitiveError, ThermoshiftError)
from .potentials import shift_reduce
from .shiftspace import TwoSidedCylinder
from .transform import (RAW, TransformJob, endpoint_eval, growth_series,
                        lambda_n_eval, mu_n_eval, partition_sum, pushforward_eval,
                        transform_job)

ALCHEMY_HEADER = ("n", "i", "quantity", "value", "reference", "abs_error",
                  "n_times_error")


def format_exact(x: Fraction) -> str:
    """Terminating decimal when the denominator is 2^a 5^b, else num/denom."""
    if x.denominator == 1:
        return str(x.numerator)
    d = x.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{x.numerator}/{x.denominator}"
    digits = max(twos, fives)
    scaled = abs(x.numerator) * 10**digits // x.denominator
    text = str(scaled).rjust(digits + 1, "0")
    sign = "-" if x < 0 else ""
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


def fmt(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, Fraction):
        return format_exact(value)
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    atomic_write(path, buf.getvalue())


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return format_exact(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    return obj


def write_summary(path: Path, summary: dict) -> None:
    atomic_write(path, json.dumps(_jsonable(summary), sort_keys=True, indent=2) + "\n")


def _base_summary(cfg: ExperimentConfig, command: str) -> dict:
    return {
        "command": command,
        "config": str(cfg.path),
        "config_hash": cfg.config_hash,
        "settings": {
            "arith": cfg.arith,
            "normalization": cfg.normalization,
            "seed": cfg.seed,
            "perron_tol": cfg.perron_tol,
            "perron_max_iter": cfg.perron_max_iter,
            "variational_tol": cfg.variational_tol,
        },
    }


def _cyl_label(cyl: TwoSidedCylinder) -> str:
    return f"{cyl.start}:{''.join(map(str, cyl.symbols))}"


def _make_job(cfg: ExperimentConfig) -> TransformJob:
    return transform_job(cfg.space, shift_reduce(cfg.g1),
                         shift_reduce(cfg.require_g2()), cfg.past,
                         normalization=cfg.normalization, pinned=cfg.pinned,
                         arith=cfg.arith, tol=cfg.perron_tol,
                         max_iter=cfg.perron_max_iter)


def cmd_pressure(cfg: ExperimentConfig):
    g = cfg.potentials[cfg.target]
    state = equilibrium_state(g, tol=cfg.perron_tol, max_iter=cfg.perron_max_iter)
    series = bowen_series(g, cfg.n_range)
    rows = [(n, diff, diff - state.pressure)
            for n, diff in zip(series.ns, series.diffs)]
    summary = _base_summary(cfg, "pressure")
    summary["results"] = {
        "potential": cfg.target,
        "pressure_spectral": state.pressure,
        "bowen_diff_last": series.diffs[-1],
        "bowen_gap_last": abs(series.diffs[-1] - state.pressure),
        "entropy": state.entropy,
        "expected_potential": state.expected_value,
        "pi": state.pi,
        "q": state.q,
        "perron_residual": state.perron.residual,
        "variational_residual": state.variational_residual,
        "blocks": ["".join(map(str, b)) for b in state.recoding.blocks],
    }
    return ("n", "value", "diff_to_limit"), rows, summary


def cmd_gibbs(cfg: ExperimentConfig):
    g = shift_reduce(cfg.potentials[cfg.target])
    exact = cfg.arith == "exact"
    state = equilibrium_state(g, exact=exact, tol=cfg.perron_tol,
                              max_iter=cfg.perron_max_iter)
    fiber = conditional_unstable_measure(cfg.past, g, state=state, exact=exact)
    report = gibbs_ratio_report(fiber, g, n_max=max(cfg.n_range),
                                n_min=min(cfg.n_range), depth=cfg.gibbs_depth,
                                exact=exact)
    rows = []
    for n, lo, hi in report.rows:
        rows.append((n, "min_ratio", lo, lo - report.min_ratio))
        rows.append((n, "max_ratio", hi, hi - report.max_ratio))
    summary = _base_summary(cfg, "gibbs")
    summary["results"] = {
        "potential": cfg.target,
        "depth": report.depth,
        "method": report.method,
        "empirical_K_inverse": report.min_ratio,
        "empirical_K": report.max_ratio,
        "spread_across_n": report.spread,
        "pressure": state.pressure,
    }
    return ("n", "quantity", "value", "diff_to_limit"), rows, summary


def cmd_fiber(cfg: ExperimentConfig):
    g = shift_reduce(cfg.potentials[cfg.target])
    exact = cfg.arith == "exact"
    state = equilibrium_state(g, exact=exact, tol=cfg.perron_tol,
                              max_iter=cfg.perron_max_iter)
    fiber = conditional_unstable_measure(cfg.past, g, state=state,
                                         pinned=cfg.pinned, exact=exact)
    rows = []
    totals = {}
    for length in range(1, cfg.fiber_depth + 1):
        total = Fraction(0) if exact else 0.0
        for w in cfg.space.admissible_words(length):
            mass = fiber.mass_exact(w) if exact else fiber.mass(w)
            total += mass
            rows.append(("".join(map(str, w)), mass))
        totals[length] = total
    summary = _base_summary(cfg, "fiber")
    summary["results"] = {
        "potential": cfg.target,
        "past": "".join(map(str, cfg.past.symbols)),
        "pinned": "".join(map(str, cfg.pinned)),
        "entry_distribution": fiber.entry_distribution,
        "total_mass_by_depth": {str(k): v for k, v in totals.items()},
    }
    return ("word", "value"), rows, summary


def cmd_transform(cfg: ExperimentConfig):
    job = _make_job(cfg)
    if not cfg.cylinders:
        raise ConfigError("transform needs at least one cylinder in [report]")
    rows = []
    refs = {}
    for cyl in cfg.cylinders:
        label = _cyl_label(cyl)
        ref = (job.state2.cylinder_measure_exact(cyl.symbols) if job.exact
               else job.state2.cylinder_measure(cyl.symbols))
        refs[label] = ref
        for n in cfg.n_range:
            ps = partition_sum(job, n)
            rows.append((n, "", "z_n", ps.z, "", "", ""))
            mu = mu_n_eval(job, n, cyl)
            err = abs(mu - ref)
            rows.append((n, "", f"mu_n({label})", mu, ref, err, n * err))
            if cfg.emit_pushforwards:
                for i in range(n):
                    pf = pushforward_eval(job, n, i, cyl)
                    rows.append((n, i, f"pushforward({label})", pf, ref,
                                 abs(pf - ref), ""))
            m_a = max(0, -cyl.start)
            n_a = max(0, cyl.end)
            if n > m_a + n_a:
                ep = endpoint_eval(job, n, cyl)
                rows.append((n, n, f"endpoint({label})", ep, ref,
                             abs(ep - ref), ""))
    checks = _job_checks(job, cfg)
    summary = _base_summary(cfg, "transform")
    summary["results"] = {
        "pressure_g1": job.state1.pressure,
        "pressure_g2": job.state2.pressure,
        "references": refs,
        "invariant_checks": checks,
        "all_checks_pass": all(c["pass"] for c in checks.values()),
    }
    return ALCHEMY_HEADER, rows, summary


def cmd_growth(cfg: ExperimentConfig):
    if cfg.normalization != RAW:
        raise ConfigError("growth needs normalization = raw")
    job = _make_job(cfg)
    series = growth_series(job, cfg.n_range)
    rows = []
    for n, value, diff in zip(series.ns, series.values, series.diffs):
        rows.append((n, "", "growth_avg", value, series.target,
                     abs(value - series.target), ""))
        rows.append((n, "", "growth_diff", diff, series.target,
                     abs(diff - series.target), ""))
    summary = _base_summary(cfg, "growth")
    summary["results"] = {
        "target_pressure_gap": series.target,
        "final_diff": series.diffs[-1],
        "final_gap": series.final_gap,
    }
    return ALCHEMY_HEADER, rows, summary


def cmd_endpoint(cfg: ExperimentConfig):
    job = _make_job(cfg)
    if not cfg.cylinders:
        raise ConfigError("endpoint needs at least one cylinder in [report]")
    rows = []
    results = {}
    for cyl in cfg.cylinders:
        label = _cyl_label(cyl)
        ref = (job.state2.cylinder_measure_exact(cyl.symbols) if job.exact
               else job.state2.cylinder_measure(cyl.symbols))
        values = []
        for n in cfg.n_range:
            m_a = max(0, -cyl.start)
            n_a = max(0, cyl.end)
            if n <= m_a + n_a:
                continue
            ep = endpoint_eval(job, n, cyl)
            values.append(ep)
            rows.append((n, n, f"endpoint({label})", ep, ref, abs(ep - ref), ""))
        if values:
            spread = max(values) - min(values)
            results[label] = {"reference": ref, "first": values[0],
                              "spread_across_n": spread}
    summary = _base_summary(cfg, "endpoint")
    summary["results"] = results
    return ALCHEMY_HEADER, rows, summary


def _job_checks(job: TransformJob, cfg: ExperimentConfig) -> dict:
    """Cheap invariants evaluated on every transform run."""
    checks = {}
    n = min(max(cfg.n_range), 40)
    tol = 1e-10

    total = sum(float(lambda_n_eval(job, n, w))
                for w in job.space.admissible_words(3))
    checks["lambda_partition_of_fiber"] = {
        "value": total, "target": 1.0, "pass": abs(total - 1.0) <= tol}

    span = 2
    mu_total = 0.0
    for w in job.space.admissible_words(span):
        mu_total += float(mu_n_eval(job, n, TwoSidedCylinder(-1, w)))
    checks["mu_n_partition_of_space"] = {
        "value": mu_total, "target": 1.0, "pass": abs(mu_total - 1.0) <= tol}

    ps = partition_sum(job, n, constraint=(0, (0,)))
    comp = sum(float(partition_sum(job, n, constraint=(0, (s,))).k)
               for s in range(1, job.space.k))
    additivity = abs(float(ps.k) + comp - float(ps.z))
    checks["k_additivity"] = {
        "value": additivity, "target": 0.0,
        "pass": additivity <= tol * max(1.0, abs(float(ps.z)))}

    if not job.exact and min(cfg.n_range) <= 8:
        n_small = min(cfg.n_range)
        table = enumeration.fiber_table(job, n_small + job.block_length + 1)
        z_fast = float(partition_sum(job, n_small).z)
        z_slow = enumeration.z_enum(job, n_small, table=table)
        gap = abs(z_fast - z_slow)
        checks["contraction_vs_enumeration_z"] = {
            "value": gap, "target": 0.0, "pass": gap <= 1e-10 * max(1.0, z_slow)}
    return checks


def cmd_audit(cfg: ExperimentConfig):
    rng = np.random.default_rng(cfg.seed)
    rows = []
    checks = []

    def record(name, value, threshold, ok):
        checks.append(ok)
        rows.append((name, value, threshold, "pass" if ok else "FAIL"))

    g1 = shift_reduce(cfg.g1)
    state1 = equilibrium_state(g1, tol=cfg.perron_tol,
                               max_iter=cfg.perron_max_iter)

    # variational principle battery (seeded)
    p1 = state1.pressure
    worst = -np.inf
    for _ in range(50):
        q = np.where(cfg.space.matrix_bool,
                     rng.uniform(0.05, 1.0, size=(cfg.space.k, cfg.space.k)), 0.0)
        q /= q.sum(axis=1, keepdims=True)
        pi = stationary_distribution(q)
        score = variational_score(cfg.space, pi, q, g1)
        worst = max(worst, score - p1)
    record("variational_score_minus_pressure_max", worst, cfg.variational_tol,
           worst <= cfg.variational_tol)
    eq_score = variational_score(
        cfg.space, state1.pi, state1.q, g1) if state1.recoding.length == 1 else p1
    record("variational_equality_at_equilibrium", abs(eq_score - p1),
           cfg.variational_tol, abs(eq_score - p1) <= cfg.variational_tol)

    # conditional Gibbs audit: extremes constant in n
    fiber = conditional_unstable_measure(cfg.past, g1, state=state1)
    report = gibbs_ratio_report(fiber, g1, n_max=12, n_min=5)
    record("gibbs_ratio_spread", report.spread, 1e-10, report.spread <= 1e-10)
    record("gibbs_ratio_finite", report.min_ratio, 0.0,
           report.min_ratio > 0.0 and np.isfinite(report.max_ratio))

    # Kolmogorov consistency of the fiber measure
    worst = 0.0
    for w in cfg.space.admissible_words(3):
        short = fiber.mass(w)
        ext = sum(fiber.mass(w + (s,)) for s in cfg.space.successors[w[-1]])
        worst = max(worst, abs(short - ext))
    record("fiber_kolmogorov_consistency", worst, 1e-12, worst <= 1e-12)

    if cfg.g2 is not None:
        job = _make_job(cfg)
        for name, check in _job_checks(job, cfg).items():
            record(name, check["value"], check["target"], check["pass"])
        # normalization equivalence on lambda_n
        other = transform_job(cfg.space, shift_reduce(cfg.g1),
                              shift_reduce(cfg.require_g2()), cfg.past,
                              normalization=("pressure" if cfg.normalization == RAW
                                             else RAW),
                              pinned=cfg.pinned, arith=cfg.arith,
                              tol=cfg.perron_tol, max_iter=cfg.perron_max_iter)
        n = min(max(cfg.n_range), 20)
        gap = 0.0
        for w in cfg.space.admissible_words(2):
            gap = max(gap, abs(float(lambda_n_eval(job, n, w))
                               - float(lambda_n_eval(other, n, w))))
        record("normalization_equivalence_lambda", gap, 0.0, gap == 0.0)

    summary = _base_summary(cfg, "audit")
    summary["results"] = {
        "checks_total": len(checks),
        "checks_failed": sum(not ok for ok in checks),
        "all_pass": all(checks),
    }
    return ("check", "value", "threshold", "status"), rows, summary, all(checks)


COMMANDS = {
    "pressure": cmd_pressure,
    "gibbs": cmd_gibbs,
    "fiber": cmd_fiber,
    "transform": cmd_transform,
    "growth": cmd_growth,
    "endpoint": cmd_endpoint,
    "audit": cmd_audit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermoshift",
        description="Thermodynamic formalism and fiber-measure transforms "
                    "on subshifts of finite type")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for randomized audit batteries")
        p.add_argument("--arith", choices=("exact", "float"), default=None,
                       help="override the arithmetic mode")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, out_override=args.out,
                          seed_override=args.seed, arith_override=args.arith)
        result = COMMANDS[args.command](cfg)
        if len(result) == 4:
            header, rows, summary, ok = result
        else:
            header, rows, summary = result
            ok = True
        stem = cfg.path.stem
        csv_path = cfg.out_dir / f"{stem}_{args.command}.csv"
        json_path = cfg.out_dir / f"{stem}_{args.command}_summary.json"
        write_csv(csv_path, header, rows)
        write_summary(json_path, summary)
        print(f"wrote {csv_path} and {json_path}")
        return 0 if ok else 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NonPrimitiveError as exc:
        print(f"non-primitive space: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"numeric non-convergence: {exc}", file=sys.stderr)
        return 4
    except ExactArithmeticError as exc:
        print(f"exact arithmetic unavailable: {exc}", file=sys.stderr)
        return 2
    except (ThermoshiftError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
