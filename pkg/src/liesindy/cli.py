"""Command-line front end.

Subcommands mirror the experiment life cycle: generate datasets, discover
equations from them, verify invariant catalogs, evaluate saved models on
test data, and re-render reports from their CSVs.
"""

import argparse
import glob
import json
import os
import sys

import numpy as np

from .dynamics import load_trajectories
from .expr import max_order, to_string
from .harness import (
    SPACE, ExperimentConfig, HarnessError, long_term_mse, load_runs_csv,
    render_longterm_svg, run_experiment, generate_dataset, summarize_rows,
    write_summary_csv,
)
from .invariants import CatalogError, builtin_set, truth_equation, verify_set
from .liealg import check_symmetry_criterion, prolong
from .regress import model_from_dict


def _cmd_generate(args):
    cfg = ExperimentConfig.load(args.config)
    generate_dataset(cfg, args.out)
    print(f"wrote test set and {cfg.runs} training sets to {args.out} "
          f"(data digest {cfg.data_digest()})")
    return 0


def _cmd_discover(args):
    cfg = ExperimentConfig.load(args.config)
    report = run_experiment(cfg, data_dir=args.data, out_dir=args.out)
    ok = report.rmse_successful
    print(f"{cfg.system} {cfg.method_label()}: "
          f"success rate {100.0 * report.success_rate:.0f}%, "
          f"rmse successful "
          f"{'N/A' if ok is None else format(ok, '.3e')}, "
          f"rmse all "
          f"{'N/A' if report.rmse_all is None else format(report.rmse_all, '.3e')}")
    print(f"report written to {args.out}")
    return 0


def _cmd_verify(args):
    try:
        inv = builtin_set(args.system)
    except CatalogError as err:
        print(f"FAIL catalog: {err}")
        return 1
    report = verify_set(inv, samples=1000, seed=20240501)
    print(f"invariance pairs checked: {len(report.pair_reports)}, "
          f"numeric max |apply| {report.numeric_max:.2e}")
    print(f"independence: min singular value "
          f"{report.jacobian_min_sv:.2e} at "
          f"{100.0 * report.jacobian_ok_fraction:.1f}% of samples")
    status = 0
    if not report.passed:
        for msg in report.failures:
            print(f"FAIL {msg}")
        status = 1
    try:
        eq = truth_equation(args.system)
    except CatalogError:
        eq = None
    if eq is not None:
        order = max(1, max_order(eq))
        for g in inv.generators:
            crit = check_symmetry_criterion(prolong(g, order), eq)
            tag = "ok" if crit.symbolic_zero else "FAIL"
            name = g.name or to_string(g.phi[0])
            print(f"criterion {name}: {tag}")
            if not crit.symbolic_zero:
                status = 1
    print("PASS" if status == 0 else "FAIL")
    return status


def _cmd_evaluate(args):
    models_dir = args.models
    if os.path.isdir(os.path.join(models_dir, "models")):
        models_dir = os.path.join(models_dir, "models")
    paths = sorted(glob.glob(os.path.join(models_dir, "run_*.json")),
                   key=lambda p: int(
                       os.path.basename(p)[4:].split(".")[0]))
    if not paths:
        print(f"no run_*.json under {models_dir}", file=sys.stderr)
        return 1
    test_dir = args.data
    if os.path.isdir(os.path.join(test_dir, "test")):
        test_dir = os.path.join(test_dir, "test")
    test_trajs, solver = load_trajectories(test_dir)
    if solver is None:
        print("test data has no solver config", file=sys.stderr)
        return 1
    os.makedirs(args.out, exist_ok=True)
    mean_rows = []
    for path in paths:
        with open(path) as f:
            blob = json.load(f)
        if blob.get("model") is None:
            continue
        model = model_from_dict(blob["model"], space=SPACE)
        mean, _, blown = long_term_mse(model, test_trajs, solver)
        mean_rows.append((blob["run"], mean, blown))
    if not mean_rows:
        print("no usable models", file=sys.stderr)
        return 1
    n = max(m.size for _, m, _ in mean_rows)
    stacked = [[m[j] for _, m, _ in mean_rows if m.size > j]
               for j in range(n)]
    mean = [float(np.mean(v)) for v in stacked]
    std = [float(np.std(v)) for v in stacked]
    import csv as _csv
    with open(os.path.join(args.out, "longterm.csv"), "w", newline="") as f:
        w = _csv.writer(f)
        w.writerow(["step", "mean_mse", "std_mse", "n_series"])
        for j, (m, s, v) in enumerate(zip(mean, std, stacked)):
            w.writerow([j, repr(m), repr(s), len(v)])
    render_longterm_svg(os.path.join(args.out, "longterm.svg"), mean, std,
                        title="long-term MSE over saved models")
    blown = sum(1 for _, _, b in mean_rows if b)
    print(f"evaluated {len(mean_rows)} models over {len(test_trajs)} test "
          f"trajectories ({blown} blew up); wrote {args.out}/longterm.csv")
    return 0


def _cmd_report(args):
    runs_path = os.path.join(args.indir, "runs.csv")
    if not os.path.exists(runs_path):
        print(f"no runs.csv in {args.indir}", file=sys.stderr)
        return 1
    rows = load_runs_csv(runs_path)
    rate, rmse_ok, rmse_all = summarize_rows(rows)
    cfg_path = os.path.join(args.indir, "config.json")
    system, method = "?", "?"
    if os.path.exists(cfg_path):
        cfg = ExperimentConfig.load(cfg_path)
        system, method = cfg.system, cfg.method_label()
    write_summary_csv(os.path.join(args.indir, "summary.csv"),
                      [(system, method, rate, rmse_ok, rmse_all)])
    lt_path = os.path.join(args.indir, "longterm.csv")
    if os.path.exists(lt_path):
        import csv as _csv
        with open(lt_path, newline="") as f:
            lt = list(_csv.DictReader(f))
        render_longterm_svg(
            os.path.join(args.indir, "longterm.svg"),
            [float(r["mean_mse"]) for r in lt],
            [float(r["std_mse"]) for r in lt],
            title=f"{system} {method} long-term MSE")
    print(f"{'system':<10}{'method':<26}{'success rate':<14}"
          f"{'RMSE successful':<18}{'RMSE all'}")
    print(f"{system:<10}{method:<26}{100.0 * rate:<14.0f}"
          f"{'N/A' if rmse_ok is None else format(rmse_ok, '.3e'):<18}"
          f"{'N/A' if rmse_all is None else format(rmse_all, '.3e')}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="liesindy",
        description="discover governing PDEs with symmetry-invariant "
                    "feature libraries")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="solve and save experiment datasets")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out", required=True, help="dataset directory")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("discover", help="run discovery on a saved dataset")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--out", required=True, help="report directory")
    p.set_defaults(func=_cmd_discover)

    p = sub.add_parser("verify",
                       help="verify an invariant catalog entry")
    p.add_argument("--system", required=True,
                   help="catalog key (kdv, ks, burgers, nkdv, so2-demo)")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("evaluate",
                       help="long-term prediction error of saved models")
    p.add_argument("--models", required=True,
                   help="report directory or its models/ subdirectory")
    p.add_argument("--data", required=True,
                   help="dataset directory holding the test set")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("report", help="re-render summary CSV and SVG")
    p.add_argument("--in", dest="indir", required=True,
                   help="report directory with runs.csv")
    p.set_defaults(func=_cmd_report)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (HarnessError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
