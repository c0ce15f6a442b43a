"""Command-line front end: validate (oracle suite), sweep (closed-form experiments), train (SAC)."""

from __future__ import annotations

import argparse
import csv
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields, replace

import numpy as np
import yaml

from . import oracle
from .estimation import assign_pilots, compute_estimation_stats
from .channel import compute_stats
from .perf import energy_efficiency, evaluate_phases
from .ris import BudgetExhaustedWarning, RisState, amplitude_gain
from .sac.agent import SacConfig, TrainingDiverged, save_checkpoint, load_checkpoint, train
from .sac.env import RisEnv
from .scenario import Scenario, load_scenario, sample_layout

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3

_INT_FIELDS = {"M", "K", "N_H", "N_V", "tau_p", "tau_c"}


class UsageError(Exception):
    pass


def _load_or_default(config_path: str | None, defaults: dict | None = None) -> Scenario:
    if config_path is None:
        return Scenario(**(defaults or {}))
    try:
        return load_scenario(config_path)
    except (OSError, ValueError, KeyError, TypeError, yaml.YAMLError) as exc:
        raise UsageError(f"cannot load config {config_path!r}: {exc}") from exc


def _write_csv(path: str | None, comments: list[str], header: list[str], rows: list[list[str]]):
    out = open(path, "w", newline="") if path else sys.stdout
    try:
        for line in comments:
            out.write(f"# {line}\n")
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if path:
            out.close()


def _fmt(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# validate

def cmd_validate(args) -> int:
    if args.config is None:
        # built-in synthetic benchmark: conditioning guaranteed by construction
        realization, state, plan = oracle.benchmark_instance()
        scenario = realization.scenario
    else:
        scenario = _load_or_default(args.config)
        realization = sample_layout(scenario, args.seed)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BudgetExhaustedWarning)
            a = amplitude_gain(scenario, realization.alpha_bar)
        plan = assign_pilots(scenario.K, scenario.tau_p)
        state = RisState(phases=np.zeros(scenario.N), a=a)

    rows = oracle.verify_moment_identities(realization, state, plan,
                                           n_trials=args.trials, master_seed=args.seed)
    authoritative = args.trials >= oracle.MIN_AUTHORITATIVE_TRIALS
    comments = [
        f"config_sha256={scenario.config_hash()}",
        f"master_seed={args.seed}",
        f"n_trials={args.trials}",
        f"authoritative={int(authoritative)}",
    ]
    if not authoritative:
        comments.append(f"warning=fewer than {oracle.MIN_AUTHORITATIVE_TRIALS} trials; report is not authoritative")
    _write_csv(args.out, comments, oracle.CSV_HEADER, [r.csv_row() for r in rows])

    failed = [r for r in rows if r.failed]
    for r in failed:
        print(f"FAIL {r.name}: empirical={r.empirical:.6e} analytic={r.analytic:.6e} "
              f"rel_err={r.rel_err:.4f} tol={r.tol}", file=sys.stderr)
    underpowered = [r.name for r in rows if r.status == "underpowered"]
    if underpowered:
        print(f"underpowered at {args.trials} trials (no verdict): {', '.join(underpowered)}",
              file=sys.stderr)
    if not authoritative:
        print(f"non-authoritative run ({args.trials} < {oracle.MIN_AUTHORITATIVE_TRIALS} trials)",
              file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_VALIDATION if failed else EXIT_OK


# ---------------------------------------------------------------------------
# sweep

def _resolve_phases(spec: str, N: int, seed: int) -> np.ndarray:
    if spec == "equal":
        return np.zeros(N)
    if spec == "random":
        rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0x9155)))
        return rng.uniform(0.0, 2.0 * np.pi, N)
    if spec.startswith("trained:"):
        ckpt = load_checkpoint(spec.split(":", 1)[1])
        phases = ckpt["best_phases"]
        if phases.size != N:
            raise UsageError(f"checkpoint phases have N={phases.size}, scenario needs N={N}")
        return phases
    raise UsageError(f"--phases must be equal, random, or trained:<path>, got {spec!r}")


def _sweep_point(payload):
    scenario, param, value, seed, phases_spec, prelog = payload
    sc = replace(scenario, **{param: value})
    realization = sample_layout(sc, seed)
    exhausted = False
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BudgetExhaustedWarning)
        a = amplitude_gain(sc, realization.alpha_bar)
        exhausted = any(issubclass(w.category, BudgetExhaustedWarning) for w in caught)
    phases = _resolve_phases(phases_spec, sc.N, seed)
    plan = assign_pilots(sc.K, sc.tau_p)
    se_total, _ = evaluate_phases(sc, realization, plan, phases, a, prelog)
    stats = compute_stats(realization, RisState(phases=phases, a=a))
    est = compute_estimation_stats(sc, stats, plan)
    ee = energy_efficiency(sc, realization, se_total, a)
    return [_fmt(value) if param not in _INT_FIELDS else str(value), str(seed),
            _fmt(se_total), _fmt(float(est.nmse.mean())), _fmt(a), _fmt(ee),
            "0" if exhausted else "1"]


def cmd_sweep(args) -> int:
    scenario = _load_or_default(args.config)
    valid = {f.name for f in fields(Scenario)}
    if args.param not in valid:
        raise UsageError(f"--param {args.param!r} is not a Scenario field")
    cast = int if args.param in _INT_FIELDS else float
    try:
        values = [cast(v) for v in args.values.split(",") if v]
    except ValueError as exc:
        raise UsageError(f"bad --values: {exc}") from exc
    if not values:
        raise UsageError("--values must be a non-empty comma list")
    seeds = [int(s) for s in args.seeds.split(",") if s]
    if not seeds:
        raise UsageError("--seeds must be a non-empty comma list")

    payloads = [(scenario, args.param, value, seed, args.phases, args.prelog)
                for value in values for seed in seeds]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_point, payloads))
    else:
        rows = [_sweep_point(p) for p in payloads]
    rows.sort(key=lambda r: (float(r[0]), int(r[1])))

    comments = [
        f"config_sha256={scenario.config_hash()}",
        f"master_seed={','.join(str(s) for s in seeds)}",
        f"param={args.param}",
        f"phases={args.phases}",
    ]
    header = ["param_value", "seed", "sum_se", "nmse_mean", "a", "ee", "feasible"]
    _write_csv(args.out, comments, header, rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# train

def cmd_train(args) -> int:
    scenario = _load_or_default(args.config)
    realization = sample_layout(scenario, args.seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BudgetExhaustedWarning)
        a = amplitude_gain(scenario, realization.alpha_bar)
    plan = assign_pilots(scenario.K, scenario.tau_p)
    env = RisEnv(scenario, realization, plan, a, prelog=args.prelog)

    comments = [f"config_sha256={scenario.config_hash()}", f"master_seed={args.seed}"]
    baseline = env.sum_se_of(np.zeros(scenario.N))
    if args.episodes == 0:
        _write_csv(args.out, comments + [f"baseline_equal_sum_se={_fmt(baseline)}"],
                   ["episode", "cumulative_reward"], [])
        print(f"baseline equal-phase sum SE: {baseline:.6f} (no training requested)")
        return EXIT_OK

    overrides = {}
    if args.episodes is not None:
        overrides["episodes"] = args.episodes
    if args.steps is not None:
        overrides["episode_len"] = args.steps
    if args.lr is not None:
        overrides["lr"] = args.lr
    if args.optimizer is not None:
        overrides["optimizer"] = args.optimizer
    config = replace(SacConfig(), **overrides)

    try:
        result = train(env, config, args.seed)
    except TrainingDiverged as exc:
        diag_path = (args.out or "training") + ".diverged.npz"
        np.savez(diag_path, **{k: np.asarray(v) for k, v in exc.snapshot.items()
                               if isinstance(v, np.ndarray)})
        print(f"training diverged: {exc}; diagnostics at {diag_path}", file=sys.stderr)
        return EXIT_DIVERGED

    rows = [[str(i), _fmt(r)] for i, r in enumerate(result.episode_rewards)]
    _write_csv(args.out, comments + [f"baseline_equal_sum_se={_fmt(baseline)}"],
               ["episode", "cumulative_reward"], rows)
    if args.checkpoint:
        save_checkpoint(args.checkpoint, result)
    print(f"best sum SE found: {result.best_sum_se:.6f}")
    print(f"equal-phase baseline sum SE: {baseline:.6f}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ariscf",
                                     description="Active-RIS cell-free uplink toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="run the Monte Carlo identity suite")
    p.add_argument("--config", help="scenario YAML (defaults to a built-in small instance)")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV report path (stdout if omitted)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="closed-form parameter sweep to CSV")
    p.add_argument("--config", help="base scenario YAML")
    p.add_argument("--param", required=True, help="swept Scenario field name")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--seeds", default="0", help="comma-separated layout seeds")
    p.add_argument("--phases", default="equal", help="equal | random | trained:<checkpoint>")
    p.add_argument("--prelog", action="store_true", help="apply the (1 - tau_p/tau_c) prelog")
    p.add_argument("--jobs", type=int, default=1, help="parallel sweep-point workers")
    p.add_argument("--out", help="CSV path (stdout if omitted)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("train", help="optimize RIS phases with SAC")
    p.add_argument("--config", help="scenario YAML")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--episodes", type=int, help="override training episodes (0 = baseline only)")
    p.add_argument("--steps", type=int, help="override steps per episode")
    p.add_argument("--lr", type=float, help="override learning rate")
    p.add_argument("--optimizer", choices=["sgd", "adam"], help="override optimizer")
    p.add_argument("--prelog", action="store_true")
    p.add_argument("--out", help="learning-curve CSV path (stdout if omitted)")
    p.add_argument("--checkpoint", help="write weights/best-phases npz here")
    p.set_defaults(func=cmd_train)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors already; normalize
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
