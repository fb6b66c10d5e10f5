"""Command-line entry point: ``mirror-sqkd <subcommand> [flags]``.

Exit status is 0 on success, 1 on usage or validation failure, and 2 when
the simulator hits a contract violation.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .adversary import SpanError, build_attack, epsilon_star, verify_unitary
from .engine import (
    AttackSpec,
    ScenarioConfig,
    derive_rates,
    detection_test,
    exact_distribution,
    parse_grid,
    simulate,
)
from .fock import ContractViolation, TruncationError
from .protocol import AliceOp, ProtocolVariant, Variant
from .tables import sweep_csv, sweep_records, state_tables


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# Config file keys; values are parsed by the same converters as the flags.
CONFIG_KEYS = {"variant", "attack", "epsilon", "rounds", "seed", "cap", "hadamard_prob", "op_probs", "workers"}


@dataclass
class RawSettings:
    variant: str = "simplified"
    attack: str = "none"
    epsilon: Optional[float] = None
    rounds: int = 100_000
    seed: int = 0
    cap: int = 2
    hadamard_prob: float = 0.5
    op_probs: Optional[str] = None
    workers: int = 1


def _convert(key: str, value: str):
    if key in ("epsilon", "hadamard_prob"):
        return float(value)
    if key in ("rounds", "seed", "cap", "workers"):
        return int(value, 0)
    if key == "variant" and value not in ("mirror", "simplified"):
        raise ValueError(f"variant must be mirror or simplified, not {value!r}")
    if key == "attack" and value not in ("none", "full", "weaker"):
        raise ValueError(f"attack must be none, full or weaker, not {value!r}")
    return value


def read_config_file(path: str | Path) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _convert(key, value)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from None
    return values


def _op_probs(spec: Optional[str]):
    if spec is None:
        return ()
    pairs = []
    for item in spec.split(","):
        name, _, p = item.partition(":")
        pairs.append((AliceOp(name.strip()), float(p)))
    return tuple(pairs)


def build_config(settings: RawSettings) -> ScenarioConfig:
    try:
        kind = Variant(settings.variant)
        variant = ProtocolVariant(kind, _op_probs(settings.op_probs), settings.hadamard_prob)
        return ScenarioConfig(
            variant,
            AttackSpec(settings.attack, settings.epsilon),
            settings.rounds,
            settings.seed,
            settings.cap,
        )
    except (ContractViolation, ValueError) as exc:
        raise UsageError(str(exc)) from None


def parse_config(path: str | Path, overrides: Optional[dict] = None) -> ScenarioConfig:
    """Validated scenario from a config file, explicit ``overrides`` winning."""
    values = read_config_file(path)
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return build_config(RawSettings(**values))


def _settings(args) -> RawSettings:
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return RawSettings(**values)


def _emit(text: str, args) -> None:
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _human_rates(rates) -> str:
    lines = []
    for name in ("error_rate_swap", "error_rate_ctrl", "loss_rate_ctrl", "loss_rate_swap",
                 "key_rate", "eve_info_probability", "forbidden_event_rate"):
        v = getattr(rates, name)
        text = "undefined" if v is None else f"{v:.6f}"
        if name in rates.intervals:
            lo, hi = rates.intervals[name]
            text += f"  [{lo:.6f}, {hi:.6f}]"
        lines.append(f"{name:22s} {text}")
    return "\n".join(lines) + "\n"


def cmd_exact(args) -> int:
    config = build_config(_settings(args))
    dist = exact_distribution(config)
    rates = derive_rates(dist)
    if args.format == "human":
        _emit(_human_rates(rates), args)
    else:
        _emit(_dumps({"config": config.to_dict(), "rates": rates.to_dict(), "distribution": dist.to_dict()}), args)
    return 0


def cmd_simulate(args) -> int:
    settings = _settings(args)
    config = build_config(settings)
    tally, rates = simulate(config, workers=settings.workers)
    if args.format == "human":
        _emit(_human_rates(rates), args)
    else:
        _emit(_dumps({"config": config.to_dict(), "rates": rates.to_dict(), "tally": tally.to_dict()}), args)
    return 0


def cmd_detect(args) -> int:
    settings = _settings(args)
    config = build_config(settings)
    tally, rates = simulate(config, workers=settings.workers)
    report = detection_test(tally, alpha=args.alpha)
    if args.format == "human":
        verdict = "DETECTED" if report.detected else "not detected"
        text = (f"R_CTRL  = {report.r_ctrl}  ({report.ctrl_lost}/{report.ctrl_rounds})\n"
                f"R_SWAPx = {report.r_swap}  ({report.swap_lost}/{report.swap_rounds})\n"
                f"z = {report.z}  p = {report.p_value}  -> {verdict} at alpha {report.alpha}\n")
        _emit(text, args)
    else:
        _emit(_dumps({"config": config.to_dict(), "detection": report.to_dict(), "rates": rates.to_dict()}), args)
    return 0


def cmd_sweep(args) -> int:
    try:
        grid = parse_grid(args.epsilon_grid)
    except ValueError as exc:
        raise UsageError(f"bad --epsilon-grid: {exc}") from None
    for eps in grid:
        if not 0.0 <= eps <= 1.0:
            raise UsageError(f"epsilon {eps} outside [0, 1]")
    records = sweep_records(grid)
    if args.format == "json":
        _emit(_dumps(records), args)
    elif args.format == "csv":
        _emit(sweep_csv(records), args)
    else:
        lines = [f"{'eps':>6} {'p':>6} {'R_CTRL':>7} {'R_SWAPx':>8}"]
        lines += [f"{r['epsilon']:6.3f} {r['p_closed']:6.3f} {r['r_ctrl_closed']:7.3f} {r['r_swap_closed']:8.3f}"
                  for r in records]
        _emit("\n".join(lines) + "\n", args)
    return 0


def cmd_verify(args) -> int:
    if args.attack == "full":
        points = [None]
    elif args.epsilon is not None:
        points = [args.epsilon]
    else:
        if args.grid < 2:
            raise UsageError("--grid needs at least 2 points")
        points = [i / (args.grid - 1) for i in range(args.grid)]
    for eps in points:
        if eps is not None and not 0.0 <= eps <= 1.0:
            raise UsageError(f"epsilon {eps} outside [0, 1]")
    results = []
    for eps in points:
        rep = verify_unitary(build_attack(args.attack, eps, args.cap or 2), args.tol)
        results.append({"epsilon": eps, "max_overlap": rep.max_overlap,
                        "max_norm_deviation": rep.max_norm_deviation,
                        "completion_defect": rep.completion_defect, "passed": rep.passed})
    passed = all(r["passed"] for r in results)
    worst = max(max(r["max_overlap"], r["max_norm_deviation"], r["completion_defect"]) for r in results)
    if args.format == "human":
        _emit(f"{args.attack}: {len(results)} point(s), max defect {worst:.3e}, "
              f"{'pass' if passed else 'FAIL'} (tol {args.tol:g})\n", args)
    else:
        _emit(_dumps({"attack": args.attack, "tol": args.tol, "passed": passed,
                      "max_defect": worst, "points": results}), args)
    return 0 if passed else 1


def cmd_tables(args) -> int:
    eps = epsilon_star() if args.epsilon is None else args.epsilon
    if not 0.0 <= eps <= 1.0:
        raise UsageError(f"epsilon {eps} outside [0, 1]")
    states = state_tables(eps, args.cap or 2)
    table6 = sweep_csv(sweep_records([i / 10 for i in range(11)]))
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        for name in ("table1", "table2", "table3", "table4", "table5"):
            body = {"rows": states[name]}
            if name == "table5":
                body["epsilon"] = eps
            (out / f"{name}.json").write_text(_dumps(body))
        (out / "table6.csv").write_text(table6)
    elif args.format == "csv":
        sys.stdout.write(table6)
    else:
        sys.stdout.write(_dumps(states))
    return 0


def _add_common(p, *, scenario=True, sampled=False):
    p.add_argument("--format", choices=["json", "csv", "human"], default="json")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.add_argument("--cap", type=int, help="photon cap per mode (default 2)")
    if scenario:
        p.add_argument("--config", help="key = value scenario file; flags override it")
        p.add_argument("--variant", choices=["mirror", "simplified"])
        p.add_argument("--attack", choices=["none", "full", "weaker"])
        p.add_argument("--epsilon", type=float)
        p.add_argument("--hadamard-prob", dest="hadamard_prob", type=float)
        p.add_argument("--op-probs", dest="op_probs", help="e.g. CTRL:0.5,SWAP-10:0.25,SWAP-01:0.25")
    if sampled:
        p.add_argument("--rounds", type=int)
        p.add_argument("--seed", type=lambda s: int(s, 0))
        p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mirror-sqkd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("exact", help="exact outcome distribution and rates")
    _add_common(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("simulate", help="seeded Monte Carlo run")
    _add_common(p, sampled=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", help="Monte Carlo run plus loss-rate z-test")
    _add_common(p, sampled=True)
    p.add_argument("--alpha", type=float, default=0.01)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("sweep", help="closed form vs exact engine over an epsilon grid")
    _add_common(p, scenario=False)
    p.add_argument("--epsilon-grid", default="0:1:0.1", help="start:stop:step or comma list")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="check the stage-2 unitary")
    _add_common(p, scenario=False)
    p.add_argument("--attack", choices=["full", "weaker"], required=True)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("tables", help="state tables as JSON, epsilon table as CSV")
    _add_common(p, scenario=False)
    p.add_argument("--epsilon", type=float, help="weaker-attack parameter for its state table (default: equal-loss point)")
    p.set_defaults(func=cmd_tables)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"mirror-sqkd: error: {exc}", file=sys.stderr)
        return 1
    except (ContractViolation, SpanError, TruncationError) as exc:
        print(f"mirror-sqkd: contract violation: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
