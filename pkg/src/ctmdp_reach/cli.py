"""Command-line front end.

Subcommands: solve, simulate, gen, sweep, poisson.  Results go to stdout
as JSON or CSV; diagnostics go to stderr.  Exit codes: 0 success, 1 input
error, 2 rate-cap abort (best bounds are still printed).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

from .benchmarks import SjsParams, generate_grid_ctmc, generate_sjs
from .model import (
    GoalSpec,
    ModelFormatError,
    Query,
    dump_model,
    load_goal,
    load_model,
    max_exit_rate,
    model_to_dict,
    parse_goal,
    validate,
)
from .poisson import poisson_weights, truncation_depth
from .simulate import SimConfig, simulate_baseline, simulate_scheduler
from .solver import (
    LambdaCapExceeded,
    gu_solve,
    result_to_dict,
    scheduler_to_dict,
)
from .uniformise import uniformise_early, uniformise_late

SWEEP_COLUMNS = [
    "model", "variant", "objective", "T", "eps", "kappa",
    "value", "gap", "lambda", "depth", "outer_iters", "wall_seconds",
]


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage errors exit with code 1, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_query_flags(p):
    p.add_argument("-T", "--time-bound", type=float, required=True, help="time horizon")
    p.add_argument("--eps", type=float, default=1e-6, help="approximation error (default 1e-6)")
    p.add_argument("--kappa", type=float, default=0.1, help="truncation error ratio (default 0.1)")
    p.add_argument("--variant", choices=("late", "early"), default="late")
    p.add_argument("--objective", choices=("max", "min"), default="max")
    p.add_argument("--lambda-cap-doublings", type=int, default=40,
                   help="abort after this many rate doublings (default 40)")


def _add_goal_flags(p):
    p.add_argument("--goal", help="comma-separated goal state indices")
    p.add_argument("--goal-file", help='JSON file {"goal": [..]}')


def _goal_from_args(args, num_states) -> GoalSpec:
    if args.goal:
        doc = {"goal": [int(tok) for tok in args.goal.split(",") if tok.strip()]}
        return parse_goal(doc, num_states)
    if args.goal_file:
        return load_goal(args.goal_file, num_states)
    raise ModelFormatError("goal set required: pass --goal or --goal-file")


def _emit_json(doc, path):
    text = json.dumps(doc)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _query_from_args(args) -> Query:
    return Query(
        time_bound=args.time_bound,
        variant=args.variant,
        objective=args.objective,
        epsilon=args.eps,
        kappa=args.kappa,
    )


def cmd_solve(args) -> int:
    try:
        model = load_model(args.model)
        goal = _goal_from_args(args, model.num_states)
        query = _query_from_args(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        result, sched = gu_solve(model, goal, query, args.lambda_cap_doublings)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except LambdaCapExceeded as exc:
        print(f"warning: {exc}", file=sys.stderr)
        if exc.result is not None:
            _emit_json(result_to_dict(exc.result, query), args.out)
            if args.scheduler_out and exc.scheduler is not None:
                _emit_json(scheduler_to_dict(exc.scheduler), args.scheduler_out)
        return 2
    _emit_json(result_to_dict(result, query), args.out)
    if args.scheduler_out:
        _emit_json(scheduler_to_dict(sched), args.scheduler_out)
    return 0


def cmd_simulate(args) -> int:
    try:
        model = load_model(args.model)
        goal = _goal_from_args(args, model.num_states)
        cfg = SimConfig(runs=args.runs, seed=args.seed,
                        time_bound=args.time_bound, confidence=args.confidence)
        if args.policy == "fixed":
            if not args.policy_table:
                raise ModelFormatError("--policy fixed requires --policy-table")
            with open(args.policy_table, encoding="utf-8") as fh:
                raw = json.load(fh)
            table = [int(raw[str(s)]) for s in range(model.num_states)] \
                if isinstance(raw, dict) else [int(a) for a in raw]
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.policy == "scheduler":
            query = _query_from_args(args)
            _, sched = gu_solve(model, goal, query, args.lambda_cap_doublings)
            uniformiser = uniformise_late if query.variant == "late" else uniformise_early
            um = uniformiser(model, goal, sched.lam)
            outcome = simulate_scheduler(um, sched, cfg, initial_state=args.initial)
        elif args.policy == "uniform":
            outcome = simulate_baseline(model, goal, "uniform-random", cfg,
                                        initial_state=args.initial)
        else:
            outcome = simulate_baseline(model, goal, table, cfg, initial_state=args.initial)
    except LambdaCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    doc = {
        "estimate": outcome.estimate,
        "half_width": outcome.half_width,
        "runs": outcome.runs,
        "seed": outcome.seed,
    }
    _emit_json(doc, None)
    if args.csv:
        row = [args.model, args.policy, repr(args.time_bound), str(args.runs),
               str(args.seed), repr(outcome.estimate), repr(outcome.half_width)]
        with open(args.csv, "a", encoding="utf-8", newline="") as fh:
            csv.writer(fh).writerow(row)
    return 0


def cmd_gen(args) -> int:
    try:
        if args.family == "sjs":
            rates = [float(tok) for tok in args.rates.split(",") if tok.strip()]
            model, goal = generate_sjs(SjsParams(args.processors, tuple(rates)),
                                       max_states=args.max_states)
        else:
            model, goal = generate_grid_ctmc(args.states, args.rate)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    goal_doc = {"goal": sorted(goal.goal_states)}
    if args.out:
        dump_model(model, args.out)
        goal_out = args.goal_out or _default_goal_path(args.out)
        with open(goal_out, "w", encoding="utf-8") as fh:
            json.dump(goal_doc, fh)
            fh.write("\n")
        print(f"wrote {args.out} ({model.num_states} states, "
              f"{len(model.transitions)} transitions) and {goal_out}", file=sys.stderr)
    else:
        print(json.dumps(model_to_dict(model)))
        print(f"goal: {json.dumps(goal_doc)}", file=sys.stderr)
    return 0


def _default_goal_path(model_path: str) -> str:
    if model_path.endswith(".json"):
        return model_path[: -len(".json")] + ".goal.json"
    return model_path + ".goal.json"


def _parse_gen_spec(spec: str):
    """Generator spec: sjs:<processors>:<r1,r2,...> or grid:<states>:<rate>."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ModelFormatError(f"bad generator spec {spec!r}")
    kind = parts[0]
    if kind == "sjs":
        rates = tuple(float(tok) for tok in parts[2].split(",") if tok.strip())
        model, goal = generate_sjs(SjsParams(int(parts[1]), rates))
    elif kind == "grid":
        model, goal = generate_grid_ctmc(int(parts[1]), float(parts[2]))
    else:
        raise ModelFormatError(f"unknown generator {kind!r} in spec {spec!r}")
    return spec, model, goal


def cmd_sweep(args) -> int:
    try:
        items = []
        for path in args.model or []:
            model = load_model(path)
            items.append((path, model, _goal_from_args(args, model.num_states)))
        for spec in args.gen or []:
            items.append(_parse_gen_spec(spec))
        if not items:
            raise ModelFormatError("nothing to sweep: pass --model or --gen")
        t_grid = [float(tok) for tok in args.t_grid.split(",") if tok.strip()]
        eps_grid = [float(tok) for tok in args.eps_grid.split(",") if tok.strip()]
        variants = [tok.strip() for tok in args.variants.split(",") if tok.strip()]
        objectives = [tok.strip() for tok in args.objectives.split(",") if tok.strip()]
        if not t_grid or not eps_grid or not variants or not objectives:
            raise ModelFormatError("sweep grids must be nonempty")
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(SWEEP_COLUMNS)
    status = 0
    for name, model, goal in items:
        for variant in variants:
            for objective in objectives:
                for t in t_grid:
                    for eps in eps_grid:
                        try:
                            query = Query(time_bound=t, variant=variant,
                                          objective=objective, epsilon=eps,
                                          kappa=args.kappa)
                        except ValueError as exc:
                            print(f"error: {exc}", file=sys.stderr)
                            return 1
                        start = time.perf_counter()
                        try:
                            result, _ = gu_solve(model, goal, query,
                                                 args.lambda_cap_doublings)
                        except LambdaCapExceeded as exc:
                            print(f"warning: {name}: {exc}", file=sys.stderr)
                            result = exc.result
                            status = 2
                            if result is None:
                                continue
                        wall = time.perf_counter() - start
                        vec = result.lower if objective == "max" else result.upper
                        writer.writerow([
                            name, variant, objective, repr(t), repr(eps),
                            repr(args.kappa), repr(float(vec[0])),
                            repr(result.gap), repr(result.lambda_used),
                            str(result.depth_used), str(result.outer_iterations),
                            repr(wall),
                        ])
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


def cmd_uniformise(args) -> int:
    try:
        model = load_model(args.model)
        violations = validate(model)
        if violations:
            raise ModelFormatError("invalid model: " + "; ".join(violations))
        goal = _goal_from_args(args, model.num_states)
        lam = args.rate if args.rate is not None else max_exit_rate(model)
        build = uniformise_late if args.variant == "late" else uniformise_early
        um = build(model, goal, lam)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    doc = model_to_dict(um.model)
    mapping = {
        "lambda": um.lam,
        "variant": um.variant,
        "origin_of": list(um.origin_of),
        "entry_state_of": list(um.entry_state_of),
        "goal": sorted(um.goal_states),
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)
            fh.write("\n")
        map_out = args.map_out or _default_map_path(args.out)
        with open(map_out, "w", encoding="utf-8") as fh:
            json.dump(mapping, fh)
            fh.write("\n")
        print(f"wrote {args.out} and {map_out}", file=sys.stderr)
    else:
        print(json.dumps(doc))
        print(f"mapping: {json.dumps(mapping)}", file=sys.stderr)
    return 0


def _default_map_path(model_path: str) -> str:
    if model_path.endswith(".json"):
        return model_path[: -len(".json")] + ".map.json"
    return model_path + ".map.json"


def cmd_poisson(args) -> int:
    try:
        if args.depth is not None:
            depth = args.depth
        elif args.delta is not None:
            depth = truncation_depth(args.rate_time, args.delta)
        else:
            raise ValueError("pass --depth or --delta")
        trunc = poisson_weights(args.rate_time, depth)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = csv.writer(sys.stdout)
    out.writerow(["i", "weight"])
    for i, w in enumerate(trunc.weights):
        out.writerow([str(i), repr(float(w))])
    print(f"depth={trunc.depth} tail_mass={trunc.tail_mass!r}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ctmdp-reach",
                     description="Time-bounded reachability in CTMDPs with certified bounds")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="compute certified value bounds")
    p.add_argument("model", help="model JSON file")
    _add_goal_flags(p)
    _add_query_flags(p)
    p.add_argument("--out", help="write result JSON here instead of stdout")
    p.add_argument("--scheduler-out", help="also dump the extracted decision table")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of the reach probability")
    p.add_argument("model")
    _add_goal_flags(p)
    _add_query_flags(p)
    p.add_argument("--policy", choices=("scheduler", "uniform", "fixed"),
                   default="scheduler")
    p.add_argument("--policy-table", help="JSON state->action table for --policy fixed")
    p.add_argument("--runs", type=int, default=10000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--confidence", type=float, default=0.99)
    p.add_argument("--initial", type=int, default=0, help="initial state (default 0)")
    p.add_argument("--csv", help="append one CSV row here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen", help="generate a benchmark model")
    gen_sub = p.add_subparsers(dest="family", required=True)
    g = gen_sub.add_parser("sjs", help="job scheduling family")
    g.add_argument("--processors", type=int, required=True)
    g.add_argument("--rates", required=True, help="comma-separated job service rates")
    g.add_argument("--max-states", type=int, default=1 << 16)
    g.add_argument("--out")
    g.add_argument("--goal-out")
    g.set_defaults(func=cmd_gen)
    g = gen_sub.add_parser("grid", help="birth chain CTMC")
    g.add_argument("--states", type=int, required=True)
    g.add_argument("--rate", type=float, required=True)
    g.add_argument("--out")
    g.add_argument("--goal-out")
    g.set_defaults(func=cmd_gen)

    p = sub.add_parser("sweep", help="solve a grid of configurations, emit CSV")
    p.add_argument("--model", action="append", help="model JSON file (repeatable)")
    _add_goal_flags(p)
    p.add_argument("--gen", action="append",
                   help="generator spec sjs:<m>:<rates> or grid:<n>:<rate> (repeatable)")
    p.add_argument("--T-grid", dest="t_grid", required=True,
                   help="comma-separated time bounds")
    p.add_argument("--eps-grid", dest="eps_grid", default="1e-6")
    p.add_argument("--variants", default="late")
    p.add_argument("--objectives", default="max")
    p.add_argument("--kappa", type=float, default=0.1)
    p.add_argument("--lambda-cap-doublings", type=int, default=40)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("uniformise", help="dump a uniformised model with its mapping")
    p.add_argument("model")
    _add_goal_flags(p)
    p.add_argument("--rate", type=float,
                   help="uniformisation rate (default: maximal exit rate)")
    p.add_argument("--variant", choices=("late", "early"), default="late")
    p.add_argument("--out", help="uniformised model JSON path (default stdout)")
    p.add_argument("--map-out", help="sidecar mapping path (default <out>.map.json)")
    p.set_defaults(func=cmd_uniformise)

    p = sub.add_parser("poisson", help="dump truncated Poisson weights as CSV")
    p.add_argument("--rate-time", type=float, required=True)
    p.add_argument("--depth", type=int)
    p.add_argument("--delta", type=float)
    p.set_defaults(func=cmd_poisson)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
