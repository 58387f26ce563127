"""Command-line interface.

Subcommands:
  lcd compute       solve one denominator query
  net audit         weight-net / annulus-lattice / water-filling census
  dist run          distance-to-span experiment sweep (CSV, optional plots)
  probe ...         compressible | tensorize | unstructured probes
  props check       run the deterministic property suite

Exit codes: 0 success, 1 a check or property failed, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import constants_from_dict, load_config
from .errors import LcdLabError
from .geometry import SphereParams
from .lcd import LcdQuery, LcdVariant, lcd_infimum
from .models import EntryDistribution, RandomMatrixModel, SeedSpec, distribution_from_spec
from .nets import (
    column_norms_sq,
    enumerate_annulus_lattice,
    regularized_hs,
    weight_net,
    weight_net_constant,
)
from .experiments import (
    DistanceExperimentConfig,
    emit_records,
    fit_power_law,
    run_compressible_probe,
    run_distance_experiment,
    run_property_suite,
    run_tensorization_probe,
    run_unstructured_probe,
    write_plots,
)


def _law_spec(text: str) -> dict:
    """A law argument: either a JSON spec or a bare kind like 'rademacher'
    ('gaussian' means the standard gaussian)."""
    text = text.strip()
    if text.startswith("{"):
        return json.loads(text)
    if text == "gaussian":
        return {"kind": "gaussian", "sigma": 1.0}
    return {"kind": text}


def _parse_law(text: str) -> EntryDistribution:
    return distribution_from_spec(_law_spec(text))


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _cmd_lcd_compute(args) -> int:
    variant = LcdVariant(args.variant, args.L, args.u)
    v = np.asarray(_parse_floats(args.v))
    law = _parse_law(args.law) if args.law else None
    res = lcd_infimum(
        LcdQuery(
            variant, v, law,
            theta_max=args.theta_max,
            grid_step=args.grid_step,
            bisect_tol=args.bisect_tol,
        )
    )
    print(
        f"variant={variant.tag} L={variant.L!r} u={variant.u!r} "
        f"value={res.value!r} censored={res.censored} "
        f"residual={res.crossing_residual:.3e} theta_max={res.theta_max!r}"
    )
    return 0


def _cmd_net_audit(args) -> int:
    seed = SeedSpec(args.seed)
    rng = seed.substream(0)
    net = weight_net(args.kappa, args.n)
    growth = weight_net_constant(len(net), args.kappa, args.n)
    print(f"weight net: {len(net)} elements, growth constant {growth:.4f}")
    failures = 0
    rows = ["alpha_min,alpha_max,lattice_points,hs_value,kkt_residual"]
    for i in range(args.trials):
        A = rng.standard_normal((args.m, args.n)) * rng.uniform(0.3, 2.0)
        res = regularized_hs(column_norms_sq(A), args.kappa)
        if res.kkt_residual > 1e-10:
            failures += 1
        try:
            lat = enumerate_annulus_lattice(
                np.asarray(res.alpha), args.epsilon, args.n, budget=args.budget
            )
            count = lat.count
        except LcdLabError as e:
            print(f"  trial {i}: lattice census skipped ({e})")
            count = -1
        rows.append(
            f"{min(res.alpha)!r},{max(res.alpha)!r},{count},"
            f"{res.value!r},{res.kkt_residual!r}"
        )
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text("\n".join(rows) + "\n")
        print(f"wrote {args.out}")
    print(f"water-filling KKT failures: {failures}/{args.trials}")
    return 1 if failures else 0


def _cmd_dist_run(args) -> int:
    if args.config:
        data = load_config(args.config)
        if args.seed is not None:
            data["seed"] = args.seed
        cfg = DistanceExperimentConfig.from_dict(data)
    else:
        if args.n is None or args.d is None or args.t_grid is None:
            print("dist run needs --config or all of --n/--d/--t-grid", file=sys.stderr)
            return 2
        cfg = DistanceExperimentConfig.from_dict(
            {
                "n": args.n,
                "d": [int(x) for x in args.d.split(",")],
                "t_grid": _parse_floats(args.t_grid),
                "trials": args.trials,
                "x_law": _law_spec(args.x_law),
                "a_law": _law_spec(args.a_law),
                "seed": args.seed if args.seed is not None else 0,
            }
        )
    records = run_distance_experiment(cfg)
    out = Path(args.out) if args.out else Path("distance.csv")
    emit_records(records, out)
    print(f"wrote {out} ({len(records)} rows)")
    if args.format == "csv+plot":
        paths = write_plots(records, out.parent)
        for p in paths:
            print(f"wrote {p}")
    for d in cfg.d_list:
        group = [r for r in records if r.d == d]
        try:
            fit = fit_power_law(group)
            print(
                f"d={d}: slope={fit.slope:.3f} (target {d}), "
                f"C={fit.c_fit:.3f}, r2={fit.r_squared:.4f}, "
                f"rows={fit.rows_used}"
            )
        except LcdLabError as e:
            print(f"d={d}: fit unavailable ({e})")
    return 0


def _cmd_probe_compressible(args) -> int:
    seed = SeedSpec(args.seed)
    a_dist = _parse_law(args.a_law)
    model = RandomMatrixModel.iid(a_dist, args.m, args.n, hs_budget=math.inf)
    rep = run_compressible_probe(
        model,
        SphereParams(args.delta, args.rho),
        trials=args.trials,
        samples_per_trial=args.samples,
        seed=seed,
        c_threshold=args.threshold,
    )
    q = np.quantile(rep.min_ratios, [0.0, 0.25, 0.5])
    print(
        f"min ||Ax||/sqrt(m) over {rep.trials} trials x {rep.samples_per_trial} "
        f"vectors: min={q[0]:.4f} q25={q[1]:.4f} median={q[2]:.4f}"
    )
    if rep.c_threshold is not None:
        print(
            f"fraction of trials below c={rep.c_threshold!r}: "
            f"{rep.fraction_below:.4f}"
        )
    return 0


def _cmd_probe_tensorize(args) -> int:
    rep = run_tensorization_probe(
        _parse_law(args.law),
        d=args.d,
        t_grid=_parse_floats(args.t_grid),
        trials=args.trials,
        seed=SeedSpec(args.seed),
        K=args.K,
    )
    print(f"d={rep.d} K={rep.k_used:.4f} trials={rep.trials}")
    for row in rep.rows:
        ct = f"{row.c_t:.4f}" if row.c_t is not None else "below-floor"
        print(f"  t={row.t!r} phat={row.phat!r} stderr={row.stderr:.2e} C_t={ct}")
    print(f"C_fit={rep.c_fit:.4f} flatness_ratio={rep.flatness_ratio:.3f}")
    return 0


def _cmd_probe_unstructured(args) -> int:
    lam = (
        np.full(args.n, args.lam)
        if args.lambdas is None
        else np.asarray(_parse_floats(args.lambdas))
    )
    rep = run_unstructured_probe(
        lam,
        _parse_law(args.law),
        L=args.L,
        u=args.u,
        gamma=args.gamma,
        trials=args.trials,
        seed=SeedSpec(args.seed),
    )
    print(
        f"n={rep.n} threshold={rep.threshold:.4f} trials={rep.trials} "
        f"fraction_below={rep.fraction_below:.4f} (stderr {rep.stderr:.4f}) "
        f"censored={rep.censored} hypothesis_ok={rep.hypothesis_ok} "
        f"acceptance={rep.acceptance_rate:.3g}"
    )
    return 0


def _cmd_props_check(args) -> int:
    report = run_property_suite(SeedSpec(args.seed), scale=args.scale)
    for o in report.outcomes:
        status = "pass" if o.passed else "FAIL"
        extra = f", vacuous={o.vacuous}" if o.vacuous else ""
        print(
            f"[{status}] {o.name}: {o.checked} instances, "
            f"{o.violations} violations{extra} -- {o.detail}"
        )
    print(f"{report.n_pass}/{len(report.outcomes)} properties passed")
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lcdlab", description=__doc__)
    sub = p.add_subparsers(dest="group", required=True)

    lcd_p = sub.add_parser("lcd", help="denominator solvers")
    lcd_sub = lcd_p.add_subparsers(dest="cmd", required=True)
    c = lcd_sub.add_parser("compute", help="solve one LCD query")
    c.add_argument("--variant", required=True,
                   choices=["essential", "logarithmic", "randomized",
                            "randomized-logarithmic"])
    c.add_argument("--L", type=float, required=True)
    c.add_argument("--u", type=float, required=True)
    c.add_argument("--v", required=True, help="comma-separated coordinates")
    c.add_argument("--law", default=None,
                   help="JSON law spec or a kind name (randomized variants)")
    c.add_argument("--theta-max", type=float, default=100.0)
    c.add_argument("--grid-step", type=float, default=None)
    c.add_argument("--bisect-tol", type=float, default=1e-9)
    c.set_defaults(fn=_cmd_lcd_compute)

    net_p = sub.add_parser("net", help="net and water-filling audits")
    net_sub = net_p.add_subparsers(dest="cmd", required=True)
    a = net_sub.add_parser("audit", help="weight net + lattice census")
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--m", type=int, default=8, help="matrix rows for B_kappa")
    a.add_argument("--kappa", type=float, default=math.e**2)
    a.add_argument("--epsilon", type=float, default=0.5)
    a.add_argument("--trials", type=int, default=10)
    a.add_argument("--budget", type=int, default=200_000)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out", default=None)
    a.set_defaults(fn=_cmd_net_audit)

    dist_p = sub.add_parser("dist", help="distance experiments")
    dist_sub = dist_p.add_subparsers(dest="cmd", required=True)
    r = dist_sub.add_parser("run", help="run a sweep and emit CSV")
    r.add_argument("--config", default=None, help="JSON config file")
    r.add_argument("--n", type=int, default=None)
    r.add_argument("--d", default=None, help="comma-separated d values")
    r.add_argument("--t-grid", default=None, help="comma-separated t values")
    r.add_argument("--trials", type=int, default=10_000)
    r.add_argument("--x-law", default="gaussian")
    r.add_argument("--a-law", default="gaussian")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--out", default=None)
    r.add_argument("--format", choices=["csv", "csv+plot"], default="csv")
    r.set_defaults(fn=_cmd_dist_run)

    probe_p = sub.add_parser("probe", help="qualitative probes")
    probe_sub = probe_p.add_subparsers(dest="cmd", required=True)
    pc = probe_sub.add_parser("compressible")
    pc.add_argument("--m", type=int, default=48, help="matrix rows")
    pc.add_argument("--n", type=int, default=32, help="matrix cols")
    pc.add_argument("--a-law", default="gaussian")
    pc.add_argument("--delta", type=float, default=0.1)
    pc.add_argument("--rho", type=float, default=0.3)
    pc.add_argument("--trials", type=int, default=20)
    pc.add_argument("--samples", type=int, default=50)
    pc.add_argument("--threshold", type=float, default=None)
    pc.add_argument("--seed", type=int, default=0)
    pc.set_defaults(fn=_cmd_probe_compressible)
    pt = probe_sub.add_parser("tensorize")
    pt.add_argument("--law", default="rademacher")
    pt.add_argument("--d", type=int, default=2)
    pt.add_argument("--t-grid", default="0.2,0.3,0.5,0.7,1.0")
    pt.add_argument("--trials", type=int, default=200_000)
    pt.add_argument("--K", type=float, default=None)
    pt.add_argument("--seed", type=int, default=0)
    pt.set_defaults(fn=_cmd_probe_tensorize)
    pu = probe_sub.add_parser("unstructured")
    pu.add_argument("--n", type=int, default=8)
    pu.add_argument("--lam", type=float, default=0.01)
    pu.add_argument("--lambdas", default=None,
                    help="comma-separated per-coordinate lambdas")
    pu.add_argument("--law", default="rademacher")
    pu.add_argument("--L", type=float, default=1.0)
    pu.add_argument("--u", type=float, default=0.25)
    pu.add_argument("--gamma", type=float, default=0.5)
    pu.add_argument("--trials", type=int, default=100)
    pu.add_argument("--seed", type=int, default=0)
    pu.set_defaults(fn=_cmd_probe_unstructured)

    props_p = sub.add_parser("props", help="invariant suites")
    props_sub = props_p.add_subparsers(dest="cmd", required=True)
    k = props_sub.add_parser("check", help="run the property suite")
    k.add_argument("--seed", type=int, default=20260819)
    k.add_argument("--scale", type=float, default=1.0)
    k.set_defaults(fn=_cmd_props_check)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except LcdLabError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (json.JSONDecodeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
