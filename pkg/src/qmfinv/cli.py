"""Command-line front end.

Every subcommand builds an :class:`~qmfinv.config.ExperimentConfig` (from flags or from a
TOML file via ``run --config``), writes its artifacts into the output directory together
with ``summary.json``, prints the summary, and exits 0 exactly when its checks pass.
"""
from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from fractions import Fraction
from pathlib import Path

from . import config as cfgmod
from .config import ConfigError, ExperimentConfig, rational

STOCHASTIC = {"simulate"}


# ---------------------------------------------------------------------------
# helpers


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, int, float, str)) or x is None:
        return x
    return str(x)


def _write_csv(path: Path, header: list, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _out(cfg: ExperimentConfig) -> Path:
    d = Path(cfg.output)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _filter_for(cfg: ExperimentConfig):
    return cfg.build_filter()


# ---------------------------------------------------------------------------
# commands: each returns (passed, summary)


def cmd_analyze_subshift(cfg: ExperimentConfig):
    from .subshift import BarrierSet, ExitSet, check_prop_2_2, condition_thm_1_2

    K = cfg.build_subshift()
    if isinstance(K, tuple):
        fam, L = K
        if L is None:
            raise ConfigError("subshift.truncation", "a generator family needs a truncation")
        rep = check_prop_2_2(fam, L)
        return True, {
            "subshift": f"{fam.name} truncated at {L}",
            "forbidden_words": len(fam.words(L)),
            "finite_type": rep.finite_type,
            "exit_set_closed": rep.exit_set_closed,
            "disjoint_from_exit_closure": rep.disjoint_from_exit_closure,
            "witness": str(rep.witness) if rep.witness is not None else None,
            "witness_distance": rep.witness_distance,
        }
    ex, bar = ExitSet(K), BarrierSet(K)
    rep = check_prop_2_2(K)
    cond = condition_thm_1_2(K)
    return True, {
        "subshift": repr(K),
        "shift_onto": K.shift_is_onto(),
        "exit_set_empty": ex.is_empty(),
        "exit_set_closed": ex.is_closed(),
        "exit_points_depth8": [str(s) for s in ex.points(8)],
        "barrier_empty": bar.is_empty(),
        "disjoint_from_exit_closure": rep.disjoint_from_exit_closure,
        "star_images_disjoint": cond.holds,
        "star_witness": str(cond.witness) if cond.witness is not None else None,
    }


def cmd_analyze_set(cfg: ExperimentConfig):
    from .intervals import check_lemma_4_3, exit_and_barrier, set_to_dict

    B = cfg.build_set()
    ex, bar = exit_and_barrier(B)
    rep = check_lemma_4_3(B)
    summary = {
        "B": str(B),
        "exit_set": str(ex),
        "barrier_set": str(bar),
        "theta_invariant": rep.theta_invariant,
        "no_binary_rationals": rep.no_binary_rationals,
        "closures_disjoint": rep.disjointness,
        "delta": rep.delta,
    }
    try:
        summary["exit_set_json"] = set_to_dict(ex)
    except TypeError:
        pass
    passed = True
    if cfg.filter is not None:
        from .filters import invariance_check

        v = invariance_check(_filter_for(cfg), B)
        summary["invariance"] = {"passed": v.passed, "max_abs": v.max_abs, "worst_point": v.worst_point, "method": v.method}
        passed = v.passed
    return passed, summary


def cmd_build_filter(cfg: ExperimentConfig):
    from .filters import ConstructedFilter, filter_to_dict, invariance_check, qmf_residual

    p = _filter_for(cfg)
    res = qmf_residual(p, 4096)
    summary = {"filter": repr(p), "qmf_residual": res}
    passed = res <= 1e-9
    if isinstance(p, ConstructedFilter):
        step1 = p.verify_step1()
        inv = invariance_check(p, p.B)
        summary.update(step1=step1, invariance=inv.passed, epsilon=p.eps, k=p.k, delta=p.delta)
        passed = passed and all(step1.values()) and inv.passed
    path = _out(cfg) / "filter.json"
    path.write_text(json.dumps(filter_to_dict(p), indent=2, sort_keys=True) + "\n")
    summary["artifact"] = str(path)
    return passed, summary


def cmd_build_g(cfg: ExperimentConfig):
    from .gfun import GConstructionError, Refusal, construct_thm_1_2, g_sum_residual, g_to_dict, lift, sample_points, strict_g

    if cfg.subshift is None:
        g = lift(_filter_for(cfg))
        res = g_sum_residual(g, sample_points(1, 2000, seed=cfg.seed or 0))
        summary = {"g": repr(g), "sum_residual": float(res)}
        passed = res <= 1e-12
    else:
        K = cfg.build_subshift()
        if isinstance(K, tuple):
            ref = strict_g(*K)
            if isinstance(ref, Refusal):
                return False, {"refused": ref.reason, "witness": str(ref.witness), "distance": ref.distance}
            g = ref.g
        else:
            try:
                g = construct_thm_1_2(K)
            except GConstructionError as e:
                return False, {"refused": str(e), "witness": str(e.witness)}
        res = g_sum_residual(g, sample_points(g.J, 2000, seed=cfg.seed or 0))
        st = strict_g(g.K)
        summary = {
            "g": repr(g),
            "window_m": g.m,
            "cells": len(g.cells),
            "sum_residual": res,
            "strict_lower_bound": getattr(st, "lower_bound", None),
        }
        passed = res == 0
    path = _out(cfg) / "g.json"
    path.write_text(json.dumps(g_to_dict(g), indent=2, sort_keys=True) + "\n")
    summary["artifact"] = str(path)
    return passed, summary


GNUPLOT = """\
# phi_hat(x0 + k) brackets written by qmfinv eval-product
set datafile separator ","
set key autotitle columnhead
set xlabel "k"
set ylabel "bracket"
set logscale y
plot "{csv}" using 1:($3 > 0 ? $3 : 1/0) with points title "upper", \\
     "{csv}" using 1:($2 > 0 ? $2 : 1/0) with points title "lower"
"""


def cmd_eval_product(cfg: ExperimentConfig):
    from .spectral import sum_phi_hat

    p = _filter_for(cfg)
    sp = cfg.spectral
    s = sum_phi_hat(p, sp.x, sp.k_max, sp.t_max)
    out = _out(cfg)
    csv_path = out / "product.csv"
    _write_csv(
        csv_path,
        ["k", "lower", "upper", "exact_zero", "terms_used"],
        ([k, repr(b.lower), repr(b.upper), int(b.exact_zero), b.terms_used] for k, b in sorted(s.terms.items())),
    )
    (out / "product.gp").write_text(GNUPLOT.format(csv=csv_path.name))
    return True, {
        "filter": repr(p),
        "x0": sp.x,
        "k_max": sp.k_max,
        "t_max": sp.t_max,
        "sum_lower": s.lower,
        "sum_upper": s.upper,
        "largest_omitted_upper": s.largest_omitted_upper,
        "all_exact_zero": s.all_exact_zero,
        "artifacts": [str(csv_path), str(out / "product.gp")],
    }


def cmd_simulate(cfg: ExperimentConfig):
    from .sampler import run_paths, wilson

    if cfg.seed is None:
        raise ConfigError("seed", "stochastic commands need an explicit seed")
    p = _filter_for(cfg)
    sim = cfg.simulation
    outs = run_paths(p, sim.x0, sim.paths, sim.steps, cfg.seed, sim.eps, stop_on_absorb=False, with_ref=True)
    path = _out(cfg) / "paths.csv"
    _write_csv(
        path,
        ["path_id", "t_absorbed", "final_state_num", "final_state_den", "decouple_count"],
        ([o.path_id, o.t_absorbed, o.final_num, o.final_den, o.decouple_count] for o in outs),
    )
    k = sum(1 for o in outs if o.t_absorbed >= 0)
    lo, hi = wilson(k, sim.paths)
    return True, {
        "filter": repr(p),
        "x0": sim.x0,
        "paths": sim.paths,
        "steps": sim.steps,
        "seed": cfg.seed,
        "absorbed": k,
        "estimate": k / sim.paths,
        "wilson_95": [lo, hi],
        "artifact": str(path),
    }


def cmd_cohen(cfg: ExperimentConfig):
    from .filters import cohen_check

    p = _filter_for(cfg)
    c = cfg.cohen
    v = cohen_check(p, c.T, c.j_max, c.grid_n)
    return v.passed, {
        "filter": repr(p),
        "T": [[a, b] for a, b in c.T],
        "j_max": c.j_max,
        "passed": v.passed,
        "inf": v.inf,
        "argmin": list(v.argmin) if v.argmin else None,
        "covers_all_classes": v.covered,
        "uncovered_point": v.uncovered,
        "tail_lower_bound": v.tail_bound,
    }


COMMANDS = {
    "analyze-subshift": cmd_analyze_subshift,
    "analyze-set": cmd_analyze_set,
    "build-filter": cmd_build_filter,
    "build-g": cmd_build_g,
    "eval-product": cmd_eval_product,
    "simulate": cmd_simulate,
    "cohen": cmd_cohen,
}


# ---------------------------------------------------------------------------
# recipes


def _recipe_example_4_1(out: str):
    from .filters import builtin, invariance_check
    from .intervals import Points, exit_and_barrier

    B = Points(["1/3", "2/3"])
    ex, bar = exit_and_barrier(B)
    p = builtin("cos3")
    v = invariance_check(p, B)
    ok = ex == Points(["1/6", "5/6"]) and v.passed
    return ok, {
        "description": "cos^2(3 pi x) leaves the doubling orbit {1/3, 2/3} invariant",
        "B": str(B),
        "exit_set": str(ex),
        "barrier_set": str(bar),
        "invariance": v.passed,
        "p_at_exit_points": [str(p(Fraction(1, 6))), str(p(Fraction(5, 6)))],
    }


def _recipe_shannon(out: str):
    from .filters import builtin, cohen_check, invariance_check
    from .intervals import Intervals, exit_and_barrier

    B = Intervals([["0", "1/4", "closed-open"], ["3/4", "1", "closed"]])
    ex, bar = exit_and_barrier(B)
    p = builtin("shannon")
    v = invariance_check(p, B)
    c = cohen_check(p, [(Fraction(-1, 2), Fraction(1, 2))], 30)
    return v.passed and c.passed, {
        "description": "the Shannon filter and its half-open invariant set",
        "B": str(B),
        "exit_set": str(ex),
        "barrier_set": str(bar),
        "invariance": v.passed,
        "cohen": {"T": ["-1/2", "1/2"], "passed": c.passed, "inf": c.inf, "argmin": list(c.argmin) if c.argmin else None},
    }


def _recipe_thm1_onethird(out: str):
    from .filters import construct_thm_1, filter_to_dict, qmf_residual
    from .intervals import Points
    from .spectral import sum_phi_hat

    B = Points(["1/3", "2/3"])
    p = construct_thm_1(B)
    step1 = p.verify_step1()
    s = sum_phi_hat(p, Fraction(1, 3), 64, 64)
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / "filter.json").write_text(json.dumps(filter_to_dict(p), indent=2, sort_keys=True) + "\n")
    ok = all(step1.values()) and s.upper == 0 and s.all_exact_zero
    return ok, {
        "description": "continuous QMF filter with {1/3, 2/3} invariant and p = 1 near 0; "
        "the periodization of |Phi_p|^2 vanishes at 1/3",
        "epsilon": p.eps,
        "k": p.k,
        "qmf_residual": qmf_residual(p, 4096),
        "step1": step1,
        "sum_phi_hat_one_third": [s.lower, s.upper],
        "all_terms_exact_zero": s.all_exact_zero,
        "artifact": str(d / "filter.json"),
    }


RECIPES = {
    "example-4-1": _recipe_example_4_1,
    "shannon": _recipe_shannon,
    "thm1-onethird": _recipe_thm1_onethird,
}


def run(cfg: ExperimentConfig) -> tuple[bool, dict]:
    """Execute a config; returns (passed, summary) and writes summary.json."""
    if cfg.command not in COMMANDS:
        raise ConfigError("command", f"unknown command {cfg.command!r} (known: {sorted(COMMANDS)})")
    if cfg.command in STOCHASTIC and cfg.seed is None:
        raise ConfigError("seed", "stochastic commands need an explicit seed")
    passed, summary = COMMANDS[cfg.command](cfg)
    summary = {"command": cfg.command, "passed": bool(passed), **summary}
    _finish(Path(cfg.output), summary)
    return bool(passed), summary


def run_recipe(name: str, out: str = ".") -> tuple[bool, dict]:
    if name not in RECIPES:
        raise ConfigError("recipe", f"unknown recipe {name!r} (known: {sorted(RECIPES)})")
    passed, summary = RECIPES[name](out)
    summary = {"recipe": name, "passed": bool(passed), **summary}
    _finish(Path(out), summary)
    return bool(passed), summary


def verify_all(level: str = "quick", out: str | None = None) -> tuple[bool, dict]:
    from .acceptance import run_all

    results = run_all(level)
    for r in results:
        print(r.line(), flush=True)
    summary = {
        "level": level,
        "passed": all(r.passed for r in results),
        "criteria": [
            {"number": r.number, "title": r.title, "passed": r.passed, "seconds": round(r.seconds, 3), "detail": r.detail}
            for r in results
        ],
    }
    if out is not None:
        _finish(Path(out), summary)
    return summary["passed"], summary


def _finish(out: Path, summary: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# argument parsing


def _filter_table(value: str) -> dict:
    path = Path(value)
    if value.endswith(".json") or path.is_file():
        return json.loads(path.read_text())
    return {"builtin": value}


def _set_table(ns) -> dict | None:
    if getattr(ns, "points", None):
        return {"points": ns.points}
    if getattr(ns, "interval", None):
        return {"intervals": [iv for iv in ns.interval]}
    if getattr(ns, "set_forbidden", None):
        return {"sft": {"J": 1, "forbidden": ns.set_forbidden}}
    return None


def _subshift_table(ns) -> dict | None:
    if getattr(ns, "generator", None):
        return {"generator": ns.generator, "truncation": ns.truncation}
    if getattr(ns, "forbidden", None):
        return {"J": ns.J, "forbidden": ns.forbidden}
    return None


def _config_from_args(ns) -> ExperimentConfig:
    d: dict = {"command": ns.command, "output": ns.out}
    if getattr(ns, "seed", None) is not None:
        d["seed"] = ns.seed
    if getattr(ns, "filter", None):
        d["filter"] = _filter_table(ns.filter)
    st = _set_table(ns)
    if getattr(ns, "construct", None):
        if st is None:
            raise ConfigError("--construct", "give the set B with --points, --interval or --set-forbidden")
        d["filter"] = {"construct": {"theorem": "1" if ns.construct == "thm1" else "prop", "B": st}}
        if ns.epsilon:
            d["filter"]["construct"]["epsilon"] = ns.epsilon
        if ns.k:
            d["filter"]["construct"]["k"] = ns.k
    elif st is not None:
        d["set"] = st
    sub = _subshift_table(ns)
    if sub is not None:
        d["subshift"] = sub
    if ns.command == "simulate":
        d["simulation"] = {"x0": ns.x0, "paths": ns.paths, "steps": ns.steps, "eps": ns.eps}
    if ns.command == "eval-product":
        d["spectral"] = {"x": ns.x, "k_max": ns.k_max, "t_max": ns.t_max}
    if ns.command == "cohen":
        d["cohen"] = {"T": [list(iv) for iv in ns.T] or [["-1/2", "1/2"]], "j_max": ns.j_max, "grid_n": ns.grid_n}
    return cfgmod.config_from_dict(d)


def _add_set_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("set (subset of [0,1])")
    g.add_argument("--points", nargs="+", metavar="R", help='finite set, e.g. --points 1/3 2/3')
    g.add_argument(
        "--interval", nargs="+", action="append", metavar="X",
        help="LO HI [closed|open|closed-open|open-closed]; repeatable",
    )
    g.add_argument("--set-forbidden", nargs="+", metavar="W", help="tau-image of the binary subshift with these forbidden words")


def _add_subshift_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("subshift")
    g.add_argument("--forbidden", nargs="+", metavar="W", help="forbidden words, e.g. 00 11")
    g.add_argument("--J", type=int, default=1, help="alphabet {0..J} (default 1)")
    g.add_argument("--generator", help="named generator family, e.g. example_3_1")
    g.add_argument("--truncation", type=int, help="truncation index for --generator")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qmfinv", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--out", default=".", help="output directory (default .)")
        return p

    p = common("analyze-subshift", "exit, barrier and star-image analysis of a subshift")
    _add_subshift_args(p)

    p = common("analyze-set", "exit and barrier sets of a subset of [0,1]")
    _add_set_args(p)
    p.add_argument("--filter", help="also check invariance for this filter (builtin name or JSON file)")

    p = common("build-filter", "build or load a filter, verify it and write filter.json")
    p.add_argument("--filter", help="builtin name or JSON file")
    p.add_argument("--construct", choices=["thm1", "prop"], help="construct a filter for the given set")
    p.add_argument("--epsilon", help="neighbourhood size for thm1 (rational, default auto)")
    p.add_argument("--k", type=int, help="exponent for thm1 (default auto)")
    _add_set_args(p)

    p = common("build-g", "construct a g-function for a subshift (or lift a filter) and write g.json")
    _add_subshift_args(p)
    p.add_argument("--filter", help="lift this filter instead (builtin name or JSON file)")
    p.add_argument("--seed", type=int, default=0, help="seed for the residual samples")

    p = common("eval-product", "brackets on phi_hat(x0 + k), |k| <= k_max; writes product.csv and product.gp")
    p.add_argument("--filter", required=True)
    p.add_argument("--x", default="1/3")
    p.add_argument("--k-max", type=int, default=512)
    p.add_argument("--t-max", type=int, default=48)

    p = common("simulate", "Monte Carlo paths of the chain; writes paths.csv")
    p.add_argument("--filter", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--x0", default="1/3")
    p.add_argument("--paths", type=int, default=2000)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--eps", default=str(Fraction(1, 2**20)))

    p = common("cohen", "check the Cohen condition on a congruence set T")
    p.add_argument("--filter", required=True)
    # let "-1/2" parse as a value rather than an option
    p._negative_number_matcher = re.compile(r"^-\d+(/\d+)?$|^-\d*\.\d+$")
    p.add_argument("--T", nargs=2, action="append", default=[], metavar=("LO", "HI"))
    p.add_argument("--j-max", type=int, default=30)
    p.add_argument("--grid-n", type=int, default=4096)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("level", choices=["quick", "full"])
    p.add_argument("--out", default=None, help="write summary.json here")

    p = sub.add_parser("run", help="run a TOML config or a named recipe")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--config", help="TOML experiment config")
    g.add_argument("--recipe", choices=sorted(RECIPES))
    p.add_argument("--out", default=None, help="output directory (overrides the config)")
    return ap


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        if ns.command == "verify":
            passed, _ = verify_all(ns.level, ns.out)
            print(f"{'PASS' if passed else 'FAIL'}: acceptance suite ({ns.level})")
            return 0 if passed else 1
        if ns.command == "run":
            if ns.recipe:
                passed, summary = run_recipe(ns.recipe, ns.out or ".")
            else:
                cfg = cfgmod.load(ns.config)
                if ns.out:
                    cfg.output = ns.out
                passed, summary = run(cfg)
        else:
            if getattr(ns, "epsilon", None):
                rational(ns.epsilon, "--epsilon")
            passed, summary = run(_config_from_args(ns))
    except ConfigError as e:
        print(f"qmfinv: config error at {e}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as e:
        print(f"qmfinv: error: {e}", file=sys.stderr)
        return 2
    print(json.dumps(_jsonable(summary), indent=2, sort_keys=True))
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
