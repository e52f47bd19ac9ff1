"""Command-line surface: info, discord, rex, scan, verify, example.

Exit codes: 0 success / all checks pass, 1 verification failure, 2 usage or
parse error, 3 invalid input state. Reports embed the tool version, backend,
seed and optimizer budgets, so a run can be reproduced exactly.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__, backend
from .channels import channel_to_json
from .discord import MeasuredCmiProblem, OptimizerConfig, classical_cmi
from .dynamics import (
    BUILTIN_SCENARIOS,
    Scenario,
    broadcast_suite,
    example_state,
    property_suite,
    trajectory,
)
from .entropy import cmi, entropy_matrix, mutual_information
from .errors import CmiflowError, NotDensityMatrix, RangeError
from .extensions import generalized_kw_check, koashi_winter_check, r_ex
from .rand import rand_pure, rng_for
from .states import (
    LabeledState,
    marginal_matrix,
    maximally_entangled,
    state_from_json,
    state_to_json,
)


def _labels(arg: str | None):
    if not arg:
        return ()
    return tuple(l for l in arg.split(",") if l)


def _load_state(path: str) -> LabeledState:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise SystemExit(_fail(2, f"cannot read state file: {exc}"))
    except json.JSONDecodeError as exc:
        raise SystemExit(_fail(2, f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"))
    try:
        return state_from_json(obj)
    except CmiflowError as exc:
        raise SystemExit(_fail(3, f"invalid state: {exc}"))


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _report(args, command: str, results: dict, flags: dict | None = None) -> dict:
    return {
        "tool": "cmiflow",
        "version": __version__,
        "backend": backend.backend_name(),
        "command": command,
        "seed": getattr(args, "seed", None),
        "budgets": {
            "restarts": getattr(args, "restarts", None),
            "max_evals": getattr(args, "max_evals", None),
            "tol": getattr(args, "tol", None),
        },
        "ext_dim": getattr(args, "ext_dim", None),
        "flags": flags or {},
        "results": results,
    }


def _emit(args, payload, rows=None, header=None):
    fmt = getattr(args, "format", "json")
    if fmt == "csv" and rows is not None:
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_csv_num(v) for v in row))
        text = "\n".join(lines) + "\n"
    elif fmt == "csv":
        flat = payload["results"]
        lines = ["key,value"] + [f"{k},{_csv_num(v)}" for k, v in sorted(flat.items())]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    out = getattr(args, "output", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_num(v):
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _cfg(args) -> OptimizerConfig:
    return OptimizerConfig(
        restarts=args.restarts,
        max_evals=args.max_evals,
        obj_tol=args.tol,
        seed=args.seed,
        outcomes=getattr(args, "outcomes", None),
    )


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_info(args) -> int:
    s = _load_state(args.state)
    x, y = _labels(args.x), _labels(args.y)
    given = _labels(args.given)
    try:
        s_x = entropy_matrix(marginal_matrix(s, x)).value
        s_y = entropy_matrix(marginal_matrix(s, y)).value
        s_given = entropy_matrix(marginal_matrix(s, given)).value if given else 0.0
        i_cmi = cmi(s, x, y, given)
        i_x_given = mutual_information(s, x, given) if given else 0.0
        # identity residuals are taken against the full complement environment
        env = tuple(l for l in s.labels if l not in x + given)
        i_x_total = mutual_information(s, x, env + given)
        i_cmi_env = cmi(s, x, env, given)
        decomposition_residual = abs(i_x_total - i_cmi_env - i_x_given)
        capacity_residual = abs(i_cmi_env + i_x_given - 2.0 * s_x)
    except CmiflowError as exc:
        return _fail(3, str(exc))
    results = {
        "s_x": s_x,
        "s_y": s_y,
        "s_given": s_given,
        "i_cmi": i_cmi,
        "i_x_given": i_x_given,
        "i_x_total": i_x_total,
        "decomposition_residual": decomposition_residual,
        "capacity_residual": capacity_residual,
    }
    _emit(args, _report(args, "info", results))
    return 0


def cmd_discord(args) -> int:
    s = _load_state(args.state)
    x, y, given = _labels(args.x), _labels(args.y), _labels(args.given)
    cfg = _cfg(args)
    try:
        c = classical_cmi(s, y, cfg, x=x, given=given)
        i_cond = cmi(s, x, y, given)
    except CmiflowError as exc:
        return _fail(3, str(exc))
    results = {
        "i_cmi": i_cond,
        "j_at_argmax": c.value,
        "c_lower_bound": c.value,
        "r_upper_bound": i_cond - c.value,
        "argmax_povm": channel_to_json(c.povm),
    }
    flags = {"c_is_lower_bound": True, "r_is_upper_bound": True, "budget_hit": c.budget_hit}
    _emit(args, _report(args, "discord", results, flags))
    return 0


def cmd_rex(args) -> int:
    s = _load_state(args.state)
    x, y, given = _labels(args.x), _labels(args.y), _labels(args.given)
    cfg = _cfg(args)
    try:
        res = r_ex(s, cfg, ext_dim=args.ext_dim, x=x, given=given,
                   e_labels=y if y else None)
    except CmiflowError as exc:
        return _fail(3, str(exc))
    results = {"r_ex_upper_bound": res.value, "ext_dim": res.ext_dim,
               "evaluations": res.evaluations}
    flags = {"r_ex_is_upper_bound": True, "budget_hit": res.budget_hit}
    _emit(args, _report(args, "rex", results, flags))
    return 0


def _scenario_from_json(obj: dict) -> Scenario:
    init = obj["initial_as"]
    if isinstance(init, str):
        if not init.startswith("bell:"):
            raise CmiflowError(f"unknown initial_as shorthand {init!r}")
        initial_as = maximally_entangled(int(init.split(":")[1]), "A", "S")
    else:
        initial_as = state_from_json(init)
    initial_env = state_from_json(obj["initial_env"])
    fam = obj["family"]
    if isinstance(fam, str):
        if fam not in BUILTIN_SCENARIOS:
            raise CmiflowError(f"unknown family {fam!r}")
        built = BUILTIN_SCENARIOS[fam]()
        return Scenario(initial_as, initial_env, built.unitary_family, name=fam)
    table = {}
    for entry in fam["custom"]:
        u = np.asarray(entry["re"], dtype=float) + 1j * np.asarray(entry.get("im", 0.0), dtype=float)
        table[float(entry["t"])] = u

    def family(t):
        if float(t) not in table:
            raise RangeError(f"custom family has no unitary at t={t}")
        return table[float(t)]

    return Scenario(initial_as, initial_env, family, name="custom")


def _load_scenario(spec: str) -> Scenario:
    if spec in BUILTIN_SCENARIOS:
        return BUILTIN_SCENARIOS[spec]()
    try:
        with open(spec) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise SystemExit(_fail(2, f"cannot read scenario: {exc}"))
    except json.JSONDecodeError as exc:
        raise SystemExit(_fail(2, f"malformed scenario JSON: {exc.msg}"))
    try:
        return _scenario_from_json(obj)
    except (CmiflowError, KeyError) as exc:
        raise SystemExit(_fail(3, f"invalid scenario: {exc}"))


def cmd_scan(args) -> int:
    if args.steps < 1:
        return _fail(2, "scan grid needs at least one step")
    grid = np.linspace(args.start, args.stop, args.steps)
    rows = []
    if args.family == "paper":
        y = _labels(args.y) or ("E1", "E2")
        header = ["u", "i_cmi", "i_as", "s_a", "capacity_residual"]
        for u in grid:
            s = example_state(float(u))
            rows.append([
                float(u),
                cmi(s, ("A",), y, ("S",)),
                mutual_information(s, "A", "S"),
                entropy_matrix(marginal_matrix(s, ("A",))).value,
                abs(cmi(s, ("A",), ("E1", "E2"), ("S",))
                    + mutual_information(s, "A", "S")
                    - 2 * entropy_matrix(marginal_matrix(s, ("A",))).value),
            ])
    else:
        sc = _load_scenario(args.scenario)
        try:
            rep = trajectory(sc, grid)
        except CmiflowError as exc:
            return _fail(3, str(exc))
        header = ["t", "i_as", "i_ae_given_s", "i_a_se", "capacity_residual", "backflow"]
        flags = np.concatenate([[False], rep.backflow])
        for i, t in enumerate(rep.times):
            rows.append([
                float(t), float(rep.i_as[i]), float(rep.i_ae_given_s[i]),
                float(rep.i_a_se[i]), float(rep.capacity_residuals[i]), bool(flags[i]),
            ])
    payload = _report(args, "scan", {"header": header, "rows": rows})
    _emit(args, payload, rows=rows, header=header)
    return 0


def _kw_suite(trials: int, seed: int, cfg: OptimizerConfig):
    from .dynamics import CheckResult
    worst = -np.inf
    for k in range(trials):
        rng = rng_for(seed, 31, k)
        phi = rand_pure(rng, ["A", "B", "C"], [2, 2, 2])
        rep = koashi_winter_check(phi, cfg)
        worst = max(worst, rep.residual)
    checks = [CheckResult("Koashi-Winter |Ef + C - S(A)|", worst <= 2e-3, worst, 2e-3)]
    g1 = generalized_kw_check(example_state(1.0), ("E1", "E2"), cfg)
    g2 = generalized_kw_check(example_state(0.5), ("E1",), cfg, seed=seed)
    worst_g = max(g1.residual, g2.residual)
    checks.append(CheckResult("generalized monogamy residual", worst_g <= 3e-3, worst_g, 3e-3))
    from .dynamics import SuiteReport
    return SuiteReport("monogamy", tuple(checks))


def _discord_oracle_suite(trials: int, seed: int, cfg: OptimizerConfig):
    from .dynamics import CheckResult, SuiteReport
    from .rand import rand_state

    def j_at(prob, th, ph):
        v = np.array([np.cos(th), np.exp(1j * ph) * np.sin(th)])
        vecs = np.stack([v, np.array([-np.conj(v[1]), v[0]])])
        return prob.j_value(vecs)

    worst = -np.inf
    for k in range(trials):
        rng = rng_for(seed, 41, k)
        s = rand_state(rng, ["A", "S", "E"], [2, 2, 2], rank=4)
        prob = MeasuredCmiProblem(s, ("E",))
        best_grid, arg = -np.inf, (0.0, 0.0)
        for th in np.linspace(0.0, np.pi / 2, 100):
            for ph in np.linspace(0.0, 2 * np.pi, 100, endpoint=False):
                val = j_at(prob, th, ph)
                if val > best_grid:
                    best_grid, arg = val, (th, ph)
        # zoom out the grid quantization error (a bare 10^4 grid is ~2e-4 off)
        dth, dph = np.pi / 2 / 99, 2 * np.pi / 100
        for _ in range(3):
            th0, ph0 = arg
            for th in np.linspace(th0 - dth, th0 + dth, 11):
                for ph in np.linspace(ph0 - dph, ph0 + dph, 11):
                    val = j_at(prob, th, ph)
                    if val > best_grid:
                        best_grid, arg = val, (th, ph)
            dth /= 5.0
            dph /= 5.0
        c = classical_cmi(s, ("E",), cfg)
        worst = max(worst, abs(c.value - best_grid))
    return SuiteReport(
        "discord-oracle",
        (CheckResult("optimizer matches 10^4-point grid", worst <= 1e-4, worst, 1e-4),),
    )


def cmd_verify(args) -> int:
    cfg = _cfg(args)
    suites = []
    names = ["properties", "broadcast", "monogamy", "discord-oracle"] if args.suite == "all" else [args.suite]
    for name in names:
        if name == "properties":
            suites.append(property_suite(trials=args.trials, seed=args.seed))
        elif name == "broadcast":
            suites.append(broadcast_suite(seed=args.seed, trials=max(5, args.trials // 5)))
        elif name == "monogamy":
            suites.append(_kw_suite(args.trials, args.seed, cfg))
        elif name == "discord-oracle":
            suites.append(_discord_oracle_suite(min(args.trials, 10), args.seed, cfg))
        else:
            return _fail(2, f"unknown suite {name!r}")
    all_pass = True
    for suite in suites:
        for c in suite.checks:
            status = "PASS" if c.passed else "FAIL"
            print(f"[{status}] {suite.name}: {c.name} (worst {c.worst:.3e}, tol {c.tol:g})")
            all_pass &= c.passed
    payload = _report(args, "verify", {"suites": [s.as_dict() for s in suites]})
    if args.output:
        _emit(args, payload)
    return 0 if all_pass else 1


def cmd_example(args) -> int:
    if args.name != "paper":
        return _fail(2, f"unknown example {args.name!r}")
    try:
        s = example_state(args.u)
    except RangeError as exc:
        return _fail(2, str(exc))
    payload = state_to_json(s)
    text = json.dumps(payload, sort_keys=True)
    if args.emit:
        with open(args.emit, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cmiflow", description=__doc__)
    p.add_argument("--version", action="version", version=f"cmiflow {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, state=True):
        if state:
            sp.add_argument("--state", required=True, help="state JSON file")
            sp.add_argument("--x", default="A", help="comma-separated x labels")
            sp.add_argument("--y", default="", help="comma-separated y labels")
            sp.add_argument("--given", default="S", help="comma-separated conditioning labels")
        sp.add_argument("--restarts", type=int, default=32)
        sp.add_argument("--max-evals", dest="max_evals", type=int, default=2000)
        sp.add_argument("--tol", type=float, default=1e-8)
        sp.add_argument("--ext-dim", dest="ext_dim", type=int, default=2)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--outcomes", type=int, default=None)
        sp.add_argument("--output", default=None)
        sp.add_argument("--format", choices=["json", "csv"], default="json")

    sp = sub.add_parser("info", help="entropies and CMI of a state file")
    common(sp)
    sp.set_defaults(fn=cmd_info)

    sp = sub.add_parser("discord", help="measured CMI decomposition I, J, C, R")
    common(sp)
    sp.set_defaults(fn=cmd_discord)

    sp = sub.add_parser("rex", help="extension-minimized remainder")
    common(sp)
    sp.set_defaults(fn=cmd_rex)

    sp = sub.add_parser("scan", help="parameter or time scans")
    sp.add_argument("--family", choices=["paper", "scenario"], default="paper")
    sp.add_argument("--scenario", default="partial_swap",
                    help="builtin scenario name or scenario JSON file")
    sp.add_argument("--from", dest="start", type=float, default=0.0)
    sp.add_argument("--to", dest="stop", type=float, default=1.0)
    sp.add_argument("--steps", type=int, default=11)
    sp.add_argument("--y", default="")
    common(sp, state=False)
    sp.set_defaults(fn=cmd_scan)

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("--suite", choices=["properties", "broadcast", "monogamy", "discord-oracle", "all"],
                    default="all")
    sp.add_argument("--trials", type=int, default=100)
    common(sp, state=False)
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("example", help="emit a built-in example state file")
    sp.add_argument("name", choices=["paper"])
    sp.add_argument("--u", type=float, required=True)
    sp.add_argument("--emit", default=None)
    sp.set_defaults(fn=cmd_example)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except NotDensityMatrix as exc:
        return _fail(3, str(exc))
    except CmiflowError as exc:
        return _fail(2, str(exc))


if __name__ == "__main__":
    sys.exit(main())
