"""Command-line front end.

Subcommands map onto the library modules: ``analyze`` (closed-form table for
a homogeneous chain), ``spectral`` (arbitrary profile from a rates file),
``simulate`` (stochastic lattice runs), ``sweep`` (scalar outputs versus a
swept parameter), and the three ``optimize-*`` commands. Results are emitted
as JSON (default) or CSV with a header row; every JSON document carries
schema_version. Randomized commands take --seed or draw one from OS entropy
and log it, so any run can be reproduced from its log.

Exit codes: 0 success, 2 invalid input, 3 non-convergence or numerical
inconsistency, 4 insufficient statistics. RFMNET_LOG sets log verbosity.
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import secrets
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .capacity import BudgetConstraint, maximize_throughput
from .errors import (
    ConvergenceError,
    DegenerateChannelError,
    InsufficientStatisticsError,
    InvalidInputError,
    NumericalConsistencyError,
    StiffnessError,
)
from .homogeneous import ThrfmSpec, thrfm_steady_state
from .multihop import ChannelParams, optimal_contention, optimal_hop_length, snr_success_prob
from .spectral import spectral_steady_state
from .tasep import TasepConfig, replicate, run_tasep
from .types import RateProfile

log = logging.getLogger("rfmnet.cli")

SCHEMA_VERSION = 1


def read_rate_profile(path):
    """Load a rate profile from a JSON array or a single-column CSV file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read rates file {path}: {exc}") from exc
    if text.lstrip().startswith("["):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"{path}: line {exc.lineno}: invalid JSON: {exc.msg}") from exc
        if not isinstance(data, list) or not data or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in data
        ):
            raise InvalidInputError(f"{path}: JSON must be a non-empty array of numbers")
        return RateProfile(np.asarray(data, dtype=np.float64))
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        cell = line.strip()
        if not cell:
            continue
        try:
            values.append(float(cell))
        except ValueError:
            if lineno == 1 and not values:
                continue  # header row
            raise InvalidInputError(f"{path}: line {lineno}: not a number: {cell!r}") from None
    if not values:
        raise InvalidInputError(f"{path}: no rates found")
    return RateProfile(np.asarray(values))


def write_rate_profile(path, rates: RateProfile):
    Path(path).write_text(json.dumps([float(v) for v in rates.rates]) + "\n")


def _resolve_seed(args):
    if args.seed is not None:
        return args.seed
    seed = secrets.randbits(63)
    log.info("seed not given; using OS-entropy seed %d", seed)
    return seed


def _resolve_theta(args):
    if args.theta is not None and args.theta_db is not None:
        raise InvalidInputError("give either --theta or --theta-db, not both")
    if args.theta is not None:
        return args.theta
    if args.theta_db is not None:
        return 10.0 ** (args.theta_db / 10.0)
    raise InvalidInputError("one of --theta or --theta-db is required")


def _steady_state_table(state):
    rows = [
        [i + 1, float(state.occupancies[i]), float(state.per_node_delay[i]),
         state.throughput, state.e2e_delay]
        for i in range(state.n)
    ]
    result = {
        "sites": [
            {"i": i + 1, "e_i": float(state.occupancies[i]),
             "D_i": float(state.per_node_delay[i])}
            for i in range(state.n)
        ],
        "throughput": state.throughput,
        "e2e_delay": state.e2e_delay,
    }
    return result, (["i", "e_i", "D_i", "R", "D_e2e"], rows)


def cmd_analyze(args):
    spec = ThrfmSpec(n=args.n, lambda_c=args.lambda_c)
    state = thrfm_steady_state(spec)
    params = {"n": args.n, "lambda_c": args.lambda_c}
    result, csv_spec = _steady_state_table(state)
    return params, result, csv_spec


def cmd_spectral(args):
    rates = read_rate_profile(args.rates)
    state = spectral_steady_state(rates, closure_rtol=args.tolerance or 1e-8)
    params = {"rates_file": str(args.rates), "rates": [float(v) for v in rates.rates]}
    result, csv_spec = _steady_state_table(state)
    return params, result, csv_spec


def _sim_config(args, seed):
    if args.rates is not None:
        rates = read_rate_profile(args.rates)
        if args.n is not None and rates.n != args.n:
            raise InvalidInputError(f"rates file describes {rates.n} sites, --n says {args.n}")
        n = rates.n
    else:
        if args.n is None:
            raise InvalidInputError("--n is required without --rates")
        n = args.n
        rates = RateProfile.homogeneous(n, args.lambda_c)
    return TasepConfig(
        n=n, rates=rates, measure_cycles=args.measure, seed=seed,
        burn_in_cycles=args.burn_in, tick=args.tick,
    )


def cmd_simulate(args):
    seed = _resolve_seed(args)
    config = _sim_config(args, seed)
    params = {
        "n": config.n, "rates": [float(v) for v in config.rates.rates],
        "burn_in_cycles": config.burn_in_cycles,
        "measure_cycles": config.measure_cycles,
        "tick": config.tick_width, "seed": seed, "replicas": args.replicas,
    }
    if args.replicas > 1:
        stats = replicate(config, args.replicas, threads=args.threads)
        result = {
            "mean_occupancy": [float(v) for v in stats.mean_occupancy],
            "occupancy_stderr": [float(v) for v in stats.occupancy_stderr],
            "throughput_estimate": stats.throughput_estimate,
            "throughput_stderr": stats.throughput_stderr,
            "mean_e2e_delay": stats.mean_e2e_delay,
            "e2e_delay_stderr": stats.e2e_delay_stderr,
            "packets_completed": stats.packets_completed,
            "replicas": stats.replicas,
        }
        header = ["i", "mean_occupancy", "occupancy_stderr", "throughput",
                  "throughput_stderr", "mean_e2e_delay", "e2e_delay_stderr"]
        rows = [
            [i + 1, float(stats.mean_occupancy[i]), float(stats.occupancy_stderr[i]),
             stats.throughput_estimate, stats.throughput_stderr,
             stats.mean_e2e_delay, stats.e2e_delay_stderr]
            for i in range(config.n)
        ]
    else:
        stats = run_tasep(config, keep_transits=args.transit_csv is not None)
        if args.transit_csv is not None:
            with open(args.transit_csv, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["packet_id", "entry_time", "exit_time"])
                for rec in stats.transits:
                    writer.writerow([int(rec.packet_id), float(rec.entry_time),
                                     float(rec.exit_time)])
        result = {
            "mean_occupancy": [float(v) for v in stats.mean_occupancy],
            "throughput_estimate": stats.throughput_estimate,
            "mean_e2e_delay": stats.mean_e2e_delay,
            "e2e_delay_stderr": stats.e2e_delay_stderr,
            "packets_completed": stats.packets_completed,
            "packets_entered": stats.packets_entered,
            "packets_exited": stats.packets_exited,
            "packets_in_flight": stats.packets_in_flight,
        }
        header = ["i", "mean_occupancy", "throughput", "mean_e2e_delay",
                  "e2e_delay_stderr", "packets_completed"]
        rows = [
            [i + 1, float(stats.mean_occupancy[i]), stats.throughput_estimate,
             stats.mean_e2e_delay, stats.e2e_delay_stderr, stats.packets_completed]
            for i in range(config.n)
        ]
    return params, result, (header, rows)


def cmd_optimize_hop(args):
    theta = _resolve_theta(args)
    p = ChannelParams(theta=theta, n0=args.n0, gamma=args.gamma, l=args.l, n=args.n)
    opt = optimal_hop_length(p, rate_scale=args.rate_scale)
    params = {"theta": theta, "n0": args.n0, "gamma": args.gamma, "l": args.l,
              "n": args.n, "rate_scale": args.rate_scale}
    result = {
        "m_star_real": opt.m_star_real,
        "m_star_int": opt.m_star_int,
        "delay_at_optimum": opt.delay_at_optimum,
        "success_prob_at_m_star": snr_success_prob(p, opt.m_star_int),
    }
    header = ["m_star_real", "m_star_int", "delay_at_optimum", "success_prob_at_m_star"]
    rows = [[opt.m_star_real, opt.m_star_int, opt.delay_at_optimum,
             result["success_prob_at_m_star"]]]
    return params, result, (header, rows)


def cmd_optimize_contention(args):
    theta = _resolve_theta(args)
    opt = optimal_contention(theta, args.gamma, args.n)
    params = {"theta": theta, "gamma": args.gamma, "n": args.n}
    result = {"q_star": opt.q_star, "delay_at_optimum": opt.delay_at_optimum}
    return params, result, (["q_star", "delay_at_optimum"],
                            [[opt.q_star, opt.delay_at_optimum]])


def cmd_optimize_capacity(args):
    if args.weights is not None:
        weights = read_rate_profile(args.weights).rates
    else:
        weights = np.full(args.n + 1, args.weight)
    constraint = BudgetConstraint(weights=weights, budget=args.budget)
    res = maximize_throughput(
        args.n, constraint, kkt_tol=args.tolerance or 1e-8, max_iter=args.max_iter,
    )
    if args.rates_out is not None:
        write_rate_profile(args.rates_out, res.optimal_rates)
    lam = res.optimal_rates.rates
    params = {"n": args.n, "budget": args.budget,
              "weights": [float(v) for v in weights]}
    result = {
        "optimal_rates": [float(v) for v in lam],
        "optimal_throughput": res.optimal_throughput,
        "iterations": res.iterations,
        "kkt_residual": res.kkt_residual,
    }
    header = ["i", "weight", "lambda_opt", "R_opt", "iterations", "kkt_residual"]
    rows = [
        [i, float(weights[i]), float(lam[i]), res.optimal_throughput,
         res.iterations, res.kkt_residual]
        for i in range(lam.size)
    ]
    return params, result, (header, rows)


def _sweep_grid(args):
    if args.points < 2:
        raise InvalidInputError("--points must be >= 2")
    if args.log:
        if args.start <= 0 or args.stop <= 0:
            raise InvalidInputError("--log sweep needs positive endpoints")
        return np.geomspace(args.start, args.stop, args.points)
    return np.linspace(args.start, args.stop, args.points)


def cmd_sweep(args):
    grid = _sweep_grid(args)
    quantity = args.quantity
    rows = []
    if quantity == "thrfm-throughput":
        if args.param == "lambda-c":
            for v in grid:
                rows.append({"lambda_c": float(v),
                             "throughput": thrfm_steady_state(
                                 ThrfmSpec(args.n, float(v))).throughput})
        elif args.param == "n":
            for v in grid:
                n = max(1, int(round(v)))
                rows.append({"n": n, "throughput": thrfm_steady_state(
                    ThrfmSpec(n, args.lambda_c)).throughput})
        else:
            raise InvalidInputError("thrfm-throughput sweeps over lambda-c or n")
    elif quantity == "thrfm-delay":
        if args.param == "lambda-c":
            for v in grid:
                rows.append({"lambda_c": float(v),
                             "e2e_delay": thrfm_steady_state(
                                 ThrfmSpec(args.n, float(v))).e2e_delay})
        elif args.param == "n":
            for v in grid:
                n = max(1, int(round(v)))
                rows.append({"n": n, "e2e_delay": thrfm_steady_state(
                    ThrfmSpec(n, args.lambda_c)).e2e_delay})
        else:
            raise InvalidInputError("thrfm-delay sweeps over lambda-c or n")
    elif quantity == "optimal-hop":
        if args.param != "theta":
            raise InvalidInputError("optimal-hop sweeps over theta")
        for v in grid:
            p = ChannelParams(theta=float(v), n0=args.n0, gamma=args.gamma,
                              l=args.l, n=args.n)
            opt = optimal_hop_length(p)
            rows.append({"theta": float(v), "m_star_real": opt.m_star_real,
                         "m_star_int": opt.m_star_int,
                         "delay_at_optimum": opt.delay_at_optimum})
    elif quantity == "optimal-contention":
        if args.param != "theta":
            raise InvalidInputError("optimal-contention sweeps over theta")
        for v in grid:
            opt = optimal_contention(float(v), args.gamma, args.n)
            rows.append({"theta": float(v), "q_star": opt.q_star,
                         "delay_at_optimum": opt.delay_at_optimum})
    elif quantity == "optimal-hop-empirical":
        seed = _resolve_seed(args)
        rows = _sweep_hop_empirical(args, grid, seed)
    else:
        raise InvalidInputError(f"unknown sweep quantity {quantity!r}")

    params = {"quantity": quantity, "param": args.param,
              "start": args.start, "stop": args.stop,
              "points": args.points, "log": args.log}
    if quantity == "optimal-hop-empirical":
        params["seed"] = seed
        params["burn_in_cycles"] = args.burn_in
        params["measure_cycles"] = args.measure
    header = list(rows[0].keys())
    return params, {"rows": rows}, (header, [[row[k] for k in header] for row in rows])


def _sweep_hop_empirical(args, grid, seed):
    """Lattice-backed hop-length sweep: for each theta, simulate chains of
    round(n/m) sites with link rate equal to the m-step success probability
    and report the integer m minimizing the measured end-to-end delay."""
    if args.param != "theta":
        raise InvalidInputError("optimal-hop-empirical sweeps over theta")
    m_max = args.m_max or min(args.n, 30)
    rows = []
    for v in grid:
        p = ChannelParams(theta=float(v), n0=args.n0, gamma=args.gamma,
                          l=args.l, n=args.n)
        best_m, best_delay = None, math.inf
        for m in range(1, m_max + 1):
            sites = max(1, round(args.n / m))
            ps = snr_success_prob(p, m)
            if ps <= 0.0:  # success probability underflowed; hop too long
                continue
            config = TasepConfig(
                n=sites, rates=RateProfile.homogeneous(sites, ps),
                measure_cycles=args.measure, seed=seed,
                burn_in_cycles=args.burn_in,
            )
            try:
                stats = run_tasep(config)
            except InsufficientStatisticsError:
                continue
            # delay for n unit steps: packets traverse n/m hops of the scaled chain
            delay = stats.mean_e2e_delay * (args.n / (m * sites))
            if delay < best_delay:
                best_m, best_delay = m, delay
        if best_m is None:
            raise InsufficientStatisticsError(
                f"no hop count produced completed packets at theta={v:g}"
            )
        analytic = optimal_hop_length(p)
        rows.append({"theta": float(v), "m_star_empirical": best_m,
                     "delay_empirical": best_delay,
                     "m_star_int": analytic.m_star_int,
                     "m_star_real": analytic.m_star_real})
    return rows


def _emit(args, command, params, result, csv_spec):
    if args.format == "json":
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "params": params,
            "result": result,
        }
        text = json.dumps(payload, indent=2) + "\n"
    else:
        header, rows = csv_spec
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(header)
        writer.writerows(rows)
        text = buf.getvalue()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rfmnet",
        description="Steady-state analysis, simulation, and optimization of "
                    "linear store-and-forward chains.",
    )
    parser.add_argument("--version", action="version", version=f"rfmnet {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write the result to this path")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, help="RNG seed for randomized commands")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--tolerance", type=float, help="solver tolerance override")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common],
                       help="closed-form steady state of a homogeneous chain")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lambda-c", type=float, default=1.0, dest="lambda_c")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("spectral", parents=[common],
                       help="steady state for an arbitrary profile from a rates file")
    p.add_argument("--rates", required=True, help="JSON array or single-column CSV")
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("simulate", parents=[common],
                       help="stochastic lattice simulation")
    p.add_argument("--n", type=int)
    p.add_argument("--lambda-c", type=float, default=1.0, dest="lambda_c")
    p.add_argument("--rates", help="rates file (overrides --lambda-c)")
    p.add_argument("--burn-in", type=int, default=350_000)
    p.add_argument("--measure", type=int, required=True)
    p.add_argument("--tick", type=float)
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--transit-csv", help="dump per-packet transit times to this CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", parents=[common],
                       help="tabulate a scalar output against a swept parameter")
    p.add_argument("--quantity", required=True,
                   choices=("thrfm-throughput", "thrfm-delay", "optimal-hop",
                            "optimal-contention", "optimal-hop-empirical"))
    p.add_argument("--param", required=True,
                   help="swept parameter name (lambda-c, n, or theta)")
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--log", action="store_true", help="geometric grid")
    p.add_argument("--n", type=int, default=19)
    p.add_argument("--lambda-c", type=float, default=1.0, dest="lambda_c")
    p.add_argument("--n0", type=float, default=1e-5)
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--l", type=float, default=1.0)
    p.add_argument("--burn-in", type=int, default=20_000)
    p.add_argument("--measure", type=int, default=100_000)
    p.add_argument("--m-max", type=int, help="largest hop count in empirical sweeps")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("optimize-hop", parents=[common],
                       help="delay-minimizing hop length in the noise-limited regime")
    p.add_argument("--theta", type=float)
    p.add_argument("--theta-db", type=float, help="threshold in dB (10^(dB/10))")
    p.add_argument("--n0", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--l", type=float, default=1.0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rate-scale", type=float, default=1.0)
    p.set_defaults(func=cmd_optimize_hop)

    p = sub.add_parser("optimize-contention", parents=[common],
                       help="delay-minimizing contention probability in the "
                            "interference-limited regime")
    p.add_argument("--theta", type=float)
    p.add_argument("--theta-db", type=float)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_optimize_contention)

    p = sub.add_parser("optimize-capacity", parents=[common],
                       help="budget-constrained throughput-maximizing rate profile")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--budget", type=float, required=True)
    p.add_argument("--weights", help="weights file (JSON array or CSV column)")
    p.add_argument("--weight", type=float, default=1.0,
                   help="uniform weight when no file is given")
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--rates-out", help="also write the optimal profile to this file")
    p.set_defaults(func=cmd_optimize_capacity)

    return parser


def _fail(exc, code):
    sys.stderr.write(json.dumps(
        {"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}
    ) + "\n")
    return code


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("RFMNET_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        params, result, csv_spec = args.func(args)
        _emit(args, args.command, params, result, csv_spec)
    except (InvalidInputError, DegenerateChannelError) as exc:
        return _fail(exc, 2)
    except (ConvergenceError, StiffnessError, NumericalConsistencyError) as exc:
        return _fail(exc, 3)
    except InsufficientStatisticsError as exc:
        return _fail(exc, 4)
    return 0


if __name__ == "__main__":
    sys.exit(main())
