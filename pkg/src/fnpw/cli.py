"""Command-line surface: run auctions, check axioms, search manipulations,
and drive the experiment harness.

Exit codes (stable for scripting): 0 success / check passed, 1 usage or
parse error, 2 infeasible allocation, 3 axiom violation or failed check.
File formats use exact decimal strings for money; nothing is ever parsed
through binary floats.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import axioms
from .domain import (
    Bundle,
    CheckReport,
    FnpwError,
    Profile,
    load_caps_from_env,
    money_to_string,
)
from .experiments import (
    DEFAULT_TABLE_MECHANISMS,
    FIXTURE_NAMES,
    replay_fixture,
    run_ratio_scenarios,
    run_table_experiment,
)
from .manipulation import find_fnpw_manipulation
from .mechanisms import get_mechanism
from .porf import InfeasibleAllocation, PriceFunction
from .valuation import ValuationSpec, valuation_from_jsonable

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_VIOLATION = 3

AXIOM_NAMES = (
    "dlb",
    "pia",
    "snsaw",
    "nsa",
    "nsaw",
    "weak-mono",
    "sub-add",
    "withdrawal-mono",
    "submodularity",
    "scf-sp",
    "scf-fnpw",
)


class UsageError(FnpwError):
    pass


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def load_instance(path: str) -> Profile:
    """InstanceFile: {"m": int, "agents": [{"id": ..., "valuation": {...}}]}."""
    doc = _load_json(path)
    try:
        m = int(doc["m"])
        agents = []
        for entry in doc["agents"]:
            spec = dict(entry["valuation"])
            spec.setdefault("m", m)
            agents.append((str(entry["id"]), valuation_from_jsonable(spec)))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: bad instance file: {exc}") from exc
    return Profile(agents=tuple(agents), m=m)


def dump_instance(profile: Profile) -> dict:
    return {
        "m": profile.m,
        "agents": [
            {"id": a, "valuation": v.to_jsonable()} for a, v in profile.agents
        ],
    }


def load_pool(path: str) -> tuple[list[ValuationSpec], list[ValuationSpec], int]:
    """PoolFile: {"m": int, "types": [...], "others": [...] (optional)}."""
    doc = _load_json(path)
    try:
        m = int(doc["m"])
        types = [_val(spec, m) for spec in doc["types"]]
        others = [_val(spec, m) for spec in doc.get("others", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: bad pool file: {exc}") from exc
    if not types:
        raise UsageError(f"{path}: pool file needs at least one type")
    return types, others, m


def _val(spec: dict, m: int) -> ValuationSpec:
    spec = dict(spec)
    spec.setdefault("m", m)
    return valuation_from_jsonable(spec)


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno}: {exc.msg}") from exc


def _emit(doc: dict, output: Optional[str]) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_run(args) -> int:
    profile = load_instance(args.instance)
    mech = _mechanism(args.mechanism)
    try:
        outcome = mech.run(profile)
    except InfeasibleAllocation as exc:
        _emit(
            {"error": "infeasible", "item": exc.item, "agents": list(exc.agent_ids)},
            args.output,
        )
        return EXIT_INFEASIBLE
    doc = {"mechanism": args.mechanism, "outcome": outcome.to_jsonable()}
    doc["revenue"] = money_to_string(outcome.revenue)
    _emit(doc, args.output)
    return EXIT_OK


def cmd_check(args) -> int:
    report = _dispatch_check(args)
    _emit({"axiom": args.axiom, "mechanism": args.mechanism, **report.to_jsonable()}, args.output)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def _dispatch_check(args) -> CheckReport:
    axiom = args.axiom
    if axiom in ("scf-sp", "scf-fnpw"):
        table, utilities = axioms.build_demo_scf(args.scf)
        if axiom == "scf-sp":
            return axioms.check_scf_strategyproof(table, utilities)
        return axioms.check_scf_fnpw(table)

    if not args.pool:
        raise UsageError(f"axiom {axiom!r} requires --pool")
    types, others, m = load_pool(args.pool)

    if axiom == "submodularity":
        return axioms.check_submodularity(types, args.max_n)

    mech = _mechanism(args.mechanism)
    if axiom == "weak-mono":
        return axioms.check_weak_monotonicity(mech, types, others)
    if axiom == "sub-add":
        return axioms.check_subadditivity(mech, types, others, k_max=args.k_max)
    if axiom == "withdrawal-mono":
        return axioms.check_withdrawal_monotonicity(mech, types, others)

    if not isinstance(mech, PriceFunction):
        raise UsageError(f"axiom {axiom!r} needs a price-function mechanism")
    if axiom == "dlb":
        if others:
            return axioms.check_dlb(mech, tuple(others))
        return _sweep(types, args.max_n, lambda o: axioms.check_dlb(mech, o))
    if axiom == "pia":
        contexts = [tuple(others)] if others else None

        def pia_all(o: tuple) -> CheckReport:
            cases = 0
            for extra in types:
                sub = axioms.check_pia(mech, o, extra)
                cases += sub.cases
                if not sub:
                    sub.cases = cases
                    return sub
            return CheckReport(True, cases=cases)

        if contexts is not None:
            return pia_all(contexts[0])
        return _sweep(types, args.max_n, pia_all)
    if axiom == "snsaw":
        return axioms.check_snsaw(mech, types, args.max_n)
    if axiom == "nsa":
        return _sweep(types, args.max_n, lambda o: axioms.check_nsa(mech, o), min_size=1)
    if axiom == "nsaw":
        return _sweep(types, args.max_n, lambda o: axioms.check_nsaw(mech, o), min_size=1)
    raise UsageError(f"unknown axiom {axiom!r}")


def _sweep(types, max_n: int, check, min_size: int = 0) -> CheckReport:
    cases = 0
    for others in axioms.multisets(types, max_n, min_size=min_size):
        sub = check(tuple(others))
        cases += sub.cases
        if not sub:
            sub.cases = cases
            return sub
    return CheckReport(True, cases=cases)


def cmd_manipulate(args) -> int:
    profile = load_instance(args.instance)
    try:
        truth = profile.valuation(args.agent)
    except KeyError:
        raise UsageError(f"agent {args.agent!r} not in instance") from None
    others = profile.others(args.agent)
    if args.pool:
        pool, _, pool_m = load_pool(args.pool)
        if pool_m != profile.m:
            raise UsageError("pool and instance disagree on m")
    else:
        pool = [v for _, v in profile.agents]
    mech = _mechanism(args.mechanism)
    try:
        plan = find_fnpw_manipulation(
            mech,
            truth,
            others,
            pool,
            k_max=args.k_max,
            q_max=args.q_max,
            allow_withdrawal=not args.no_withdrawal,
        )
    except InfeasibleAllocation as exc:
        _emit({"error": "infeasible", "item": exc.item, "agents": list(exc.agent_ids)}, args.output)
        return EXIT_INFEASIBLE
    if plan is None:
        _emit(
            {"mechanism": args.mechanism, "agent": args.agent, "plan": None},
            args.output,
        )
        return EXIT_OK
    _emit(
        {"mechanism": args.mechanism, "agent": args.agent, "plan": plan.to_jsonable()},
        args.output,
    )
    return EXIT_VIOLATION


def _results_dir(base: str, command: str, key: str) -> Path:
    path = Path(base) / command / key
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(path: Path, config: dict) -> None:
    canon = json.dumps(config, sort_keys=True)
    manifest = {"config": config, "config_sha256": hashlib.sha256(canon.encode()).hexdigest()}
    (path / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def cmd_experiment(args) -> int:
    if args.kind == "table":
        mechanisms = tuple(args.mechanisms.split(",")) if args.mechanisms else DEFAULT_TABLE_MECHANISMS
        if args.include_mb and "mb" not in mechanisms:
            mechanisms = mechanisms + ("mb",)
        result = run_table_experiment(
            args.scenario,
            mechanisms=mechanisms,
            n_instances=args.n,
            seed=args.seed,
            threads=args.threads,
        )
        outdir = _results_dir(args.outdir, "table", f"{args.scenario}-{args.seed}")
        _write_manifest(
            outdir,
            {
                "kind": "table",
                "scenario": args.scenario,
                "mechanisms": list(mechanisms),
                "n_instances": args.n,
                "seed": args.seed,
            },
        )
        (outdir / "result.json").write_text(
            json.dumps(result.to_jsonable(), indent=2) + "\n", encoding="utf-8"
        )
        with open(outdir / "table.csv", "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh).writerows(result.csv_rows())
        for name in mechanisms:
            print(
                f"{name:10s} revenue {float(result.revenue[name]):.3f} "
                f"efficiency {float(result.efficiency[name]):.3f}"
            )
        print(f"results in {outdir}")
        return EXIT_OK

    if args.kind == "ratio":
        result = run_ratio_scenarios(args.mechanism, args.m, args.eps)
        key = f"{args.mechanism.replace(':', '_')}-m{args.m}-eps{args.eps}"
        outdir = _results_dir(args.outdir, "ratio", key)
        _write_manifest(
            outdir,
            {"kind": "ratio", "mechanism": args.mechanism, "m": args.m, "eps": args.eps},
        )
        (outdir / "result.json").write_text(
            json.dumps(result.to_jsonable(), indent=2) + "\n", encoding="utf-8"
        )
        print(f"scenario-3 efficiency ratio: {result.ratio} ({float(result.ratio):.6f})")
        print(f"results in {outdir}")
        return EXIT_OK

    # fixture
    report = replay_fixture(args.name)
    outdir = _results_dir(args.outdir, "fixture", args.name)
    _write_manifest(outdir, {"kind": "fixture", "name": args.name})
    (outdir / "result.json").write_text(
        json.dumps(report.to_jsonable(), indent=2) + "\n", encoding="utf-8"
    )
    print(f"{args.name}: {report.verdict} ({report.cases} cases) {report.note}")
    return EXIT_OK if report.passed else EXIT_VIOLATION


def _mechanism(name: Optional[str]):
    if not name:
        raise UsageError("--mechanism is required")
    try:
        return get_mechanism(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fnpw",
        description="exact false-name-proof combinatorial auction laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a mechanism on an instance file")
    p_run.add_argument("--instance", required=True)
    p_run.add_argument("--mechanism", required=True)
    p_run.add_argument("--output")
    p_run.set_defaults(func=cmd_run)

    p_check = sub.add_parser("check", help="run an axiom checker")
    p_check.add_argument("--axiom", required=True, choices=AXIOM_NAMES)
    p_check.add_argument("--mechanism")
    p_check.add_argument("--pool")
    p_check.add_argument("--max-n", type=int, default=4, dest="max_n")
    p_check.add_argument("--k-max", type=int, default=2, dest="k_max")
    p_check.add_argument("--scf", default="majority", choices=axioms.DEMO_SCF_NAMES)
    p_check.add_argument("--output")
    p_check.set_defaults(func=cmd_check)

    p_man = sub.add_parser("manipulate", help="search for false-name manipulations")
    p_man.add_argument("--instance", required=True)
    p_man.add_argument("--agent", required=True)
    p_man.add_argument("--mechanism", required=True)
    p_man.add_argument("--pool")
    p_man.add_argument("--k-max", type=int, default=2, dest="k_max")
    p_man.add_argument("--q-max", type=int, default=2, dest="q_max")
    p_man.add_argument("--no-withdrawal", action="store_true")
    p_man.add_argument("--output")
    p_man.set_defaults(func=cmd_manipulate)

    p_exp = sub.add_parser("experiment", help="run the experiment harness")
    exp_sub = p_exp.add_subparsers(dest="kind", required=True)

    p_table = exp_sub.add_parser("table", help="revenue/efficiency benchmark")
    p_table.add_argument("--scenario", required=True, choices=("substitutable", "complementary"))
    p_table.add_argument("--n", type=int, default=1000)
    p_table.add_argument("--seed", type=int, default=0)
    p_table.add_argument("--mechanisms")
    p_table.add_argument("--include-mb", action="store_true")
    p_table.add_argument("--threads", type=int, default=None)
    p_table.add_argument("--outdir", default="results")
    p_table.set_defaults(func=cmd_experiment)

    p_ratio = exp_sub.add_parser("ratio", help="worst-case efficiency-ratio scenarios")
    p_ratio.add_argument("--mechanism", required=True)
    p_ratio.add_argument("--m", type=int, required=True)
    p_ratio.add_argument("--eps", required=True)
    p_ratio.add_argument("--outdir", default="results")
    p_ratio.set_defaults(func=cmd_experiment)

    p_fix = exp_sub.add_parser("fixture", help="replay a named regression fixture")
    p_fix.add_argument("name", choices=FIXTURE_NAMES)
    p_fix.add_argument("--outdir", default="results")
    p_fix.set_defaults(func=cmd_experiment)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_caps_from_env()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleAllocation as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, FnpwError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
