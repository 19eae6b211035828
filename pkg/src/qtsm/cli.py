"""Batch command-line front end.

Commands (JSON reports on stdout; ``--format csv`` for tabular outputs):

    qtsm solve    --config cfg.json --product bond --maturity 1.0
    qtsm price    --config cfg.json --product bond --maturity 1.0 --t 0 --state 0.1
    qtsm curve    --config cfg.json --maturities 0.5,1,2 --state 0.1
    qtsm flows1d  --alpha 0.05 --beta 0.5 --sigma 0.1 --a 0 --b 0.02 --c 1 --tau 1
    qtsm validate --config cfg.json --paths 100000 --steps 500 --seed 1

Exit codes: 0 success, 2 config/validation error, 3 numerical failure.
The config schema is documented in docs/config_schema.json; reports are
documented in docs/output_schema.md.  QTSM_THREADS caps Monte Carlo
parallelism (results do not depend on it).
"""

import argparse
import io
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import flows1d, montecarlo, pricing
from .errors import NumericalError, QtsmError
from .model import (
    FactorModel,
    QuadraticPayoff,
    QuadraticRate,
    TimeGrid,
    eval_payoff,
    validate_model,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(Exception):
    """Invalid configuration; message lists JSON paths of the failures."""


@dataclass(frozen=True)
class Numeric:
    grid_step_max: float = pricing.DEFAULT_H_MAX
    mc_paths: int = 100_000
    mc_seed: int = 0
    mc_steps: int = 500


@dataclass(frozen=True, eq=False)
class Config:
    model: FactorModel
    rate: QuadraticRate
    payoff: QuadraticPayoff  # may be None
    numeric: Numeric


def _get(data, path, default=None, required=False):
    node = data
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            if required:
                raise ConfigError(f"{path}: required field missing")
            return default
        node = node[part]
    return node


def load_config(path):
    """Parse and validate a JSON config file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc

    try:
        model = FactorModel(
            A=_get(data, "A", required=True),
            B=_get(data, "B", required=True),
            sigma=_get(data, "sigma", required=True),
            x0=_get(data, "x0", required=True),
        )
    except (QtsmError, ValueError, TypeError) as exc:
        raise ConfigError(f"model: {exc}") from exc
    n_declared = _get(data, "n")
    if n_declared is not None and int(n_declared) != model.n:
        raise ConfigError(f"n: declared {n_declared} but matrices have dimension {model.n}")

    try:
        rate = QuadraticRate(
            Gamma=_get(data, "rate.Gamma", required=True),
            Rvec=_get(data, "rate.R", required=True),
            k=_get(data, "rate.k", required=True),
            strict=bool(_get(data, "rate.strict", default=False)),
        )
    except (QtsmError, ValueError, TypeError) as exc:
        raise ConfigError(f"rate: {exc}") from exc

    payoff = None
    if _get(data, "payoff") is not None:
        try:
            payoff = QuadraticPayoff(
                aT=_get(data, "payoff.aT", required=True),
                bT=_get(data, "payoff.bT", required=True),
                cT=_get(data, "payoff.cT", required=True),
            )
        except (QtsmError, ValueError, TypeError) as exc:
            raise ConfigError(f"payoff: {exc}") from exc

    steps = int(_get(data, "numeric.mc_steps", default=500))
    if steps % 2:
        steps += 1
        print(f"warning: numeric.mc_steps was odd; using {steps}", file=sys.stderr)
    numeric = Numeric(
        grid_step_max=float(_get(data, "numeric.grid_step_max", default=pricing.DEFAULT_H_MAX)),
        mc_paths=int(_get(data, "numeric.mc_paths", default=100_000)),
        mc_seed=int(_get(data, "numeric.mc_seed", default=0)),
        mc_steps=steps,
    )

    report = validate_model(model, rate, payoff)
    if not report.ok:
        raise ConfigError("; ".join(report.failures()))
    return Config(model=model, rate=rate, payoff=payoff, numeric=numeric)


def _parse_state(text, config):
    if text is None:
        return config.model.x0
    return np.array([float(v) for v in text.split(",")])


def _require_payoff(config, product):
    if product in ("futures", "forward") and config.payoff is None:
        raise ConfigError(f"payoff required for product {product!r}")


def _solve_system(config, product, maturity):
    grid = pricing.default_grid(maturity, config.numeric.grid_step_max)
    if product == "bond":
        return pricing.bond_system(config.model, config.rate, grid)
    if product == "futures":
        return pricing.futures_system(config.model, config.payoff, grid)
    if product == "forward":
        return pricing.forward_system(config.model, config.rate, config.payoff, grid)
    raise ConfigError(f"unknown product {product!r}")


def _terminal_price(config, product, x):
    if product == "bond":
        return 1.0
    return eval_payoff(config.payoff, x)


def cmd_solve(config, args):
    _require_payoff(config, args.product)
    system = _solve_system(config, args.product, args.maturity)
    doc = system.path.to_dict()
    if args.format == "csv":
        return _csv_path(doc)
    return json.dumps(doc, indent=2)


def _csv_path(doc):
    n_sq = len(doc["R2"][0])
    n = int(round(n_sq ** 0.5))
    out = io.StringIO()
    header = ["t"] + [f"R2_{i}{j}" for i in range(n) for j in range(n)] \
        + [f"R1_{i}" for i in range(n)] + ["R0"]
    print(",".join(header), file=out)
    h = doc["grid"]["h"]
    for i, (r2, r1, r0) in enumerate(zip(doc["R2"], doc["R1"], doc["R0"])):
        row = [repr(i * h)] + [repr(v) for v in r2] + [repr(v) for v in r1] + [repr(r0)]
        print(",".join(row), file=out)
    return out.getvalue().rstrip("\n")


def cmd_price(config, args):
    _require_payoff(config, args.product)
    x = _parse_state(args.state, config)
    if args.maturity == 0.0:
        value = _terminal_price(config, args.product, x)
    else:
        system = _solve_system(config, args.product, args.maturity)
        bond = None
        if args.product == "forward":
            grid = pricing.default_grid(args.maturity, config.numeric.grid_step_max)
            bond = pricing.bond_system(config.model, config.rate, grid)
        value = pricing.price(system, args.t, x, bond=bond)
    return json.dumps(
        {
            "product": args.product,
            "maturity": args.maturity,
            "t": args.t,
            "state": x.tolist(),
            "price": value,
        },
        indent=2,
    )


def cmd_curve(config, args):
    x = _parse_state(args.state, config)
    maturities = [float(v) for v in args.maturities.split(",")]
    curve = pricing.yield_curve(
        config.model, config.rate, x, maturities, config.numeric.grid_step_max
    )
    if args.format == "csv":
        lines = ["maturity,yield"] + [f"{T!r},{y!r}" for T, y in curve]
        return "\n".join(lines)
    return json.dumps(
        {"state": x.tolist(), "curve": [{"maturity": T, "yield": y} for T, y in curve]},
        indent=2,
    )


def cmd_flows1d(args):
    params = flows1d.FlowParams(
        alpha=args.alpha, beta=args.beta, sigma=args.sigma,
        a=args.a, b=args.b, c=args.c,
    )
    doc = {
        "tau": args.tau,
        "A": flows1d.coeff_A(args.tau, params),
        "B": flows1d.coeff_B(args.tau, params),
        "C": flows1d.coeff_C(args.tau, params),
    }
    if args.state is not None:
        doc["state"] = args.state
        doc["price"] = flows1d.bond_price_1d(0.0, args.tau, args.state, params)
    return json.dumps(doc, indent=2)


def _bracket(name, closed_form, estimate, sigmas):
    diff = abs(estimate.mean - closed_form)
    z = diff / estimate.stderr if estimate.stderr > 0 else 0.0
    # Degenerate (deterministic) cases have roundoff-sized stderr; agreement
    # at roundoff scale counts as a pass there.
    roundoff = 1e-12 * (1.0 + abs(closed_form))
    return {
        "product": name,
        "closed_form": closed_form,
        "mc_mean": estimate.mean,
        "mc_stderr": estimate.stderr,
        "z": z,
        "within": bool(z <= sigmas or diff <= roundoff),
    }


def cmd_validate(config, args):
    model, rate, payoff = config.model, config.rate, config.payoff
    maturity = args.maturity
    if args.steps % 2:
        args.steps += 1
        print(f"warning: --steps was odd; using {args.steps}", file=sys.stderr)
    grid = TimeGrid(T=maturity, N=args.steps)
    price_grid = pricing.default_grid(maturity, config.numeric.grid_step_max)
    x0 = model.x0
    seed = args.seed

    checks = []
    bond = pricing.bond_system(model, rate, price_grid)
    p_bond = pricing.price(bond, 0.0, x0)
    est = montecarlo.mc_bond(model, rate, args.paths, grid, seed)
    checks.append(_bracket("bond", p_bond, est, args.sigmas))

    if payoff is not None:
        fut = pricing.futures_system(model, payoff, price_grid)
        est = montecarlo.mc_terminal_expectation(model, payoff, args.paths, grid, seed)
        checks.append(_bracket("futures", pricing.price(fut, 0.0, x0), est, args.sigmas))

        fwd = pricing.forward_system(model, rate, payoff, price_grid)
        est = montecarlo.mc_forward(model, rate, payoff, args.paths, grid, seed)
        checks.append(
            _bracket("forward", pricing.price(fwd, 0.0, x0, bond=bond), est, args.sigmas)
        )

    mc_bond_path = pricing.bond_system(model, rate, grid).path
    fbsde = montecarlo.fbsde_check(
        model, rate, mc_bond_path, min(args.paths, 10_000), grid, seed
    )
    report = {
        "maturity": maturity,
        "paths": args.paths,
        "steps": args.steps,
        "seed": seed,
        "sigmas": args.sigmas,
        "brackets": checks,
        "closed_form_within_3_sigma": all(c["within"] for c in checks),
        "fbsde": {
            "mean_abs_terminal_error": fbsde.mean_abs_terminal_error,
            "max_terminal_error": fbsde.max_terminal_error,
            "mean_bsde_increment_residual": fbsde.mean_bsde_increment_residual,
            "paths": fbsde.n_paths,
            "steps": fbsde.N,
        },
    }
    return json.dumps(report, indent=2)


def build_parser():
    parser = argparse.ArgumentParser(prog="qtsm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("solve", help="dump a solved coefficient path")
    add_common(p)
    p.add_argument("--product", choices=["bond", "futures", "forward"], required=True)
    p.add_argument("--maturity", type=float, required=True)

    p = sub.add_parser("price", help="price one product at (t, state)")
    add_common(p)
    p.add_argument("--product", choices=["bond", "futures", "forward"], required=True)
    p.add_argument("--maturity", type=float, required=True)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--state", help="comma-separated state vector (default x0)")

    p = sub.add_parser("curve", help="zero-coupon yield curve")
    add_common(p)
    p.add_argument("--maturities", required=True, help="comma-separated maturities")
    p.add_argument("--state", help="comma-separated state vector (default x0)")

    p = sub.add_parser("flows1d", help="closed-form 1D flow coefficients")
    add_common(p, config=False)
    for name in ("alpha", "beta", "sigma", "a", "b", "c", "tau"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.add_argument("--state", type=float)

    p = sub.add_parser("validate", help="Monte Carlo bracketing and FBSDE checks")
    add_common(p)
    p.add_argument("--maturity", type=float, default=1.0)
    p.add_argument("--paths", type=int, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--sigmas", type=float, default=3.0)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "flows1d":
            print(cmd_flows1d(args))
            return EXIT_OK
        config = load_config(args.config)
        if args.command == "validate":
            if args.paths is None:
                args.paths = config.numeric.mc_paths
            if args.steps is None:
                args.steps = config.numeric.mc_steps
            if args.seed is None:
                args.seed = config.numeric.mc_seed
            print(cmd_validate(config, args))
        elif args.command == "solve":
            print(cmd_solve(config, args))
        elif args.command == "price":
            print(cmd_price(config, args))
        elif args.command == "curve":
            print(cmd_curve(config, args))
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
