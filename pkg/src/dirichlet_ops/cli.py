"""Command-line front end.

Every subcommand prints deterministic JSON on stdout and, with ``--out``,
writes a CSV table.  Timing goes to stderr.

Exit codes: 0 success, 1 usage error, 2 precondition or parse error,
3 not found, budget exhausted, or a flow/Newton solve that failed.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import io
from ._accel import BACKEND
from .composition import DEFAULT_CLOSURE, compose, monomial_pullback, symbol_digest
from .diophantine import (
    KroneckerQuery,
    kronecker_search,
    prop_algebrab_witnesses,
    verify_kronecker,
    witness_arg_gap,
)
from .errors import FlowError, NewtonError, NotFoundError, PreconditionError
from .experiments import flow_grid, get_preset, preset_registry
from .semigroups import (
    Semigroup,
    flow_koenigs,
    flow_ode,
    generator_recovery_check,
    identity_convergence_scan,
    koebe_spec,
    koenigs_blowup_threshold,
    koenigs_from_generator,
    named_generator,
    semigroup_law_check,
    slit_spec,
    spirallike_koenigs,
)
from .series import GrowthModel, estimate_abscissae, evaluate, sup_norm_estimate
from .symbols import (
    DEFAULT_REGION,
    DEFAULT_VERDICT_THRESHOLD,
    RegionSpec,
    classify,
    compactness_diagnostic,
    probe_G_A,
)

EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_NOT_FOUND = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _Output:
    """JSON payload plus an optional CSV table."""

    def __init__(self, payload, header=None, rows=None, code=EXIT_OK):
        self.payload = payload
        self.header = header
        self.rows = rows
        self.code = code


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def _points(values):
    """Complex literals from the command line; parse errors are precondition errors (exit 2)."""
    return [io.parse_complex(v) for v in values or ()]


def _region(args, M=None) -> RegionSpec:
    return RegionSpec(
        M=math.inf if M is None else M,
        sigma_max=args.grid_sigma_max if args.grid_sigma_max is not None else DEFAULT_REGION.sigma_max,
        T_window=args.grid_t_window if args.grid_t_window is not None else DEFAULT_REGION.T_window,
        grid_step=args.grid_step if args.grid_step is not None else DEFAULT_REGION.grid_step,
    )


def _flat_rows(payload, prefix=""):
    rows = []
    if isinstance(payload, dict):
        for k in sorted(payload):
            rows.extend(_flat_rows(payload[k], f"{prefix}{k}."))
    else:
        rows.append((prefix.rstrip("."), json.dumps(io.to_jsonable(payload), sort_keys=True)))
    return rows


def _koenigs_source(args):
    """``(generator or None, KoenigsSpec)`` from ``--generator`` or ``--spirallike``."""
    if args.spirallike:
        if args.spirallike == "koebe":
            S = koebe_spec(k=args.k, c=args.c)
        else:
            S = slit_spec(c=args.c, a=args.a)
        K = spirallike_koenigs(S)
        return K.H, K
    G = named_generator(args.generator)
    return G, koenigs_from_generator(G)


def _tol(args, default=1e-10):
    return args.tol if args.tol is not None else default


def _cfmt(z):
    return io.format_complex(z)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_eval(args):
    f = io.load_series(args.series)
    out, rows = [], []
    for s in _points(args.s):
        r = evaluate(f, s)
        out.append({"s": s, "value": r.value, "tail_bound": r.tail_bound})
        rows.append((s.real, s.imag, r.value.real, r.value.imag, r.tail_bound))
    return _Output({"results": out}, ("s_re", "s_im", "value_re", "value_im", "tail_bound"), rows)


def cmd_abscissae(args):
    f = io.load_series(args.series)
    model = None if args.growth_exponent is None else GrowthModel(args.growth_exponent)
    rep = estimate_abscissae(f, model)
    return _Output({"abscissae": rep, "chain_holds": rep.chain_holds()})


def cmd_norm(args):
    f = io.load_series(args.series)
    reg = _region(args)
    val = sup_norm_estimate(f, args.sigma, reg.T_window, reg.grid_step)
    return _Output({"sigma": args.sigma, "T_window": reg.T_window, "grid_step": reg.grid_step, "sup_estimate": val})


def cmd_classify(args):
    sym = io.load_symbol(args.symbol)
    region = _region(args, args.M)
    rep = classify(sym, region, tuple(args.delta or (1e-2, 1e-3)), args.threshold)
    return _Output({"symbol": sym.label or args.symbol, "report": rep})


def cmd_probe(args):
    sym = io.load_symbol(args.symbol)
    region = _region(args, args.M)
    probe = probe_G_A(sym, region, tuple(args.delta or (1e-2, 1e-3)), args.threshold)
    payload = {"symbol": sym.label or args.symbol, "M": args.M, "omega": probe.rows(), "verdict": probe.verdict,
               "threshold": probe.threshold, "points_retained": probe.points_retained}
    return _Output(payload, ("delta", "omega", "s1_re", "s1_im", "s2_re", "s2_im"), probe.rows())


def cmd_compact(args):
    sym = io.load_symbol(args.symbol)
    rep = compactness_diagnostic(sym, _region(args))
    return _Output({"symbol": sym.label or args.symbol, "compactness": rep.compactness,
                    "value": rep.compactness_value, "certified": rep.certified})


def _series_output(series, extra):
    payload = {"series": io.series_to_json(series), **extra}
    rows = [(int(n), a.real, a.imag) for n, a in zip(series.indices, series.values)]
    return _Output(payload, ("n", "re", "im"), rows)


def cmd_pullback(args):
    sym = io.load_symbol(args.symbol)
    closure = args.closure or DEFAULT_CLOSURE
    r = monomial_pullback(args.n, sym, closure, tail_sigma=args.tail_sigma)
    return _series_output(r.series, {"source_index": r.source_index, "symbol_digest": r.symbol_digest,
                                     "closure_index": r.closure_index,
                                     "discarded_tail_majorant": r.discarded_tail_majorant})


def cmd_compose(args):
    f = io.load_series(args.series)
    sym = io.load_symbol(args.symbol)
    closure = args.closure or DEFAULT_CLOSURE
    g = compose(f, sym, closure, tail_sigma=args.tail_sigma)
    maj = 0.0 if g.tail is None else g.tail.majorant
    return _series_output(g, {"symbol_digest": symbol_digest(sym), "discarded_tail_majorant": maj})


def cmd_flow(args):
    G, K = _koenigs_source(args)
    tol = _tol(args)
    points = _points(args.s) or list(flow_grid())
    methods = ("ode", "koenigs") if args.method == "both" else (args.method,)
    results = []
    for t in args.t:
        for s in points:
            for m in methods:
                if m == "ode":
                    r = flow_ode(G, s, t, tol, koenigs=K)
                else:
                    r = flow_koenigs(K, s, t, tol)
                results.append(r)
    payload = {"flows": [{"t": r.t, "s": r.s, "phi_t_s": r.phi_t_s, "method": r.method,
                          "residual": r.residual} for r in results]}
    return _Output(payload, ("t", "s_re", "s_im", "phi_re", "phi_im", "residual", "method"),
                   [r.row() for r in results])


def cmd_koenigs(args):
    _, K = _koenigs_source(args)
    points = _points(args.s) or [complex(1.0)]
    vals = [{"s": s, "h": K.h(s), "h_prime": complex(K.h_prime(np.complex128(s)))} for s in points]
    payload = {"label": K.label, "anchor": K.anchor, "anchor_value": K.anchor_value, "values": vals}
    if args.blowup_level is not None:
        payload["blowup_sigma_star"] = koenigs_blowup_threshold(K, args.blowup_level)
    rows = [(v["s"].real, v["s"].imag, v["h"].real, v["h"].imag) for v in vals]
    return _Output(payload, ("s_re", "s_im", "h_re", "h_im"), rows)


def cmd_semigroup_check(args):
    G, K = _koenigs_source(args)
    tol = _tol(args)
    method = "koenigs_newton" if args.method == "koenigs" else "ode"
    sg = Semigroup(G, K, method=method, tol=tol)
    pts = flow_grid()[::4] if args.smoke else flow_grid()
    law = semigroup_law_check(sg, pts, args.t, args.u)
    ladder = (1.0, 0.1, 1e-2, 1e-3)
    ident = identity_convergence_scan(sg, pts, ladder)
    rec = generator_recovery_check(sg, G, pts, (1e-2, 1e-3))
    payload = {"method": method, "t": args.t, "u": args.u, "semigroup_law_residual": law,
               "identity_scan": [(t, v) for t, v, _ in ident.rows],
               "identity_nonincreasing": ident.nonincreasing_as_t_decreases(),
               "generator_recovery": [(t, v) for t, v, _ in rec.rows],
               "recovery_ratio": rec.values[0] / rec.values[1] if rec.values[1] > 0 else None}
    rows = [("identity", t, v) for t, v, _ in ident.rows] + [("recovery", t, v) for t, v, _ in rec.rows]
    return _Output(payload, ("scan", "t", "value"), rows)


def cmd_kronecker(args):
    if args.frequencies:
        freqs = [io.parse_real_expr(x) for x in args.frequencies.split(",")]
    else:
        freqs = [math.log(int(b)) for b in args.bases.split(",")]
    targets = [io.parse_real_expr(x) for x in args.targets.split(",")]
    q = KroneckerQuery(tuple(freqs), tuple(targets), args.eps, args.t_max)
    t = kronecker_search(q, use_grid=not args.no_grid)
    if t is None:
        return _Output({"found": False, "query": q}, code=EXIT_NOT_FOUND)
    errs = q.errors(t)
    return _Output({"found": True, "t": t, "errors": errs, "verified": verify_kronecker(q, t), "query": q},
                   ("t", "max_error"), [(t, float(np.max(errs)))])


def cmd_witnesses(args):
    pairs = prop_algebrab_witnesses(args.delta, count=args.count)
    out = [{"s1": p.s1, "s2": p.s2, "gap": p.gap, "value_gap": p.value_gap, "arg_gap": witness_arg_gap(p)}
           for p in pairs]
    rows = [(_cfmt(p.s1), _cfmt(p.s2), p.gap, p.value_gap) for p in pairs]
    return _Output({"delta": args.delta, "witnesses": out}, ("s1", "s2", "gap", "value_gap"), rows)


def _preset_overrides(args, preset):
    over = {}
    for item in args.set or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise PreconditionError(f"--set expects key=value, got {item!r}")
        try:
            over[key] = json.loads(val)
        except json.JSONDecodeError:
            over[key] = val
    params = preset.parameters
    if args.delta is not None and "delta" in params:
        over["delta"] = args.delta
    if args.seed is not None and "seed" in params:
        over["seed"] = args.seed
    if args.tol is not None and "tol" in params:
        over["tol"] = args.tol
    if args.closure is not None and "closure" in params:
        over["closure"] = args.closure
    return over


def cmd_preset(args):
    if args.list:
        reg = [{"name": p.name, "parameters": p.parameters, "expected": p.expected, "description": p.description}
               for p in preset_registry()]
        return _Output({"presets": reg})
    if args.all:
        presets = preset_registry()
    elif args.name:
        presets = [get_preset(args.name)]
    else:
        raise PreconditionError("give a preset name, --all or --list")
    results, rows = [], []
    for p in presets:
        t0 = time.perf_counter()
        r = p.run(_preset_overrides(args, p), smoke=args.smoke)
        dt = time.perf_counter() - t0
        print(f"[preset] {p.name}: {dt:.2f} s", file=sys.stderr)
        results.append(r)
        crit = None if p.expected is None else p.expected["criterion"]
        rows.append((p.name, crit, r["passed"]))
    payload = results[0] if len(results) == 1 else {"results": results}
    return _Output(payload, ("preset", "criterion", "passed"), rows)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _common():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--out", help="write the result table as CSV to this path")
    g.add_argument("--tol", type=float, help="solver tolerance")
    g.add_argument("--grid-sigma-max", type=float, help="largest Re s of the sampling grid")
    g.add_argument("--grid-t-window", type=float, help="half-height of the sampling window in Im s")
    g.add_argument("--grid-step", type=float, help="sampling grid step")
    g.add_argument("--closure", type=int, help="largest kept index for coefficient composition")
    g.add_argument("--seed", type=int, help="random seed for randomized presets")
    g.add_argument("--smoke", action="store_true", help="reduced budgets")
    return p


def _add_flow_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--generator", help="named generator (unit, inv_1plus2s, one_minus_2s, koebe)")
    src.add_argument("--spirallike", choices=("koebe", "slit"), help="spirallike Koenigs data")
    p.add_argument("--c", type=float, default=1.0, help="spirallike parameter c")
    p.add_argument("--k", type=int, default=2, help="spirallike base k (koebe)")
    p.add_argument("--a", type=float, default=0.5, help="slit start a (slit)")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="dirichlet-ops", description="Dirichlet series, composition operators and semigroups.")
    parser.add_argument("--version", action="version", version=f"%(prog)s 0.1.0 ({BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(func=fn)
        return p

    p = add("eval", cmd_eval, "evaluate a series at points")
    p.add_argument("--series", required=True, help="series JSON file, inline JSON, zeta:N or alt:N")
    p.add_argument("--s", action="append", required=True, help="point a+bi (repeatable)")

    p = add("abscissae", cmd_abscissae, "estimate the abscissae of a coefficient stream")
    p.add_argument("--series", required=True)
    p.add_argument("--growth-exponent", type=float, help="assumed growth exponent of unseen coefficients")

    p = add("norm", cmd_norm, "sampled sup of |f| on a vertical line")
    p.add_argument("--series", required=True)
    p.add_argument("--sigma", type=float, default=0.0)

    for name, fn, help_ in (("classify", cmd_classify, "class membership diagnostics for a symbol"),
                            ("probe-ga", cmd_probe, "sampled modulus of continuity on A_M")):
        p = add(name, fn, help_)
        p.add_argument("--symbol", required=True, help="symbol JSON file, inline JSON or builtin name")
        p.add_argument("--M", type=float, default=None, help="A_M level (default: no upper cut)")
        p.add_argument("--delta", type=float, action="append", help="probe distance (repeatable)")
        p.add_argument("--threshold", type=float, default=DEFAULT_VERDICT_THRESHOLD)

    p = add("compact", cmd_compact, "compactness diagnostic")
    p.add_argument("--symbol", required=True)

    p = add("pullback", cmd_pullback, "coefficients of n^{-Phi}")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--symbol", required=True)
    p.add_argument("--tail-sigma", type=float, default=0.0)

    p = add("compose", cmd_compose, "coefficients of f o Phi")
    p.add_argument("--series", required=True)
    p.add_argument("--symbol", required=True)
    p.add_argument("--tail-sigma", type=float, default=0.0)

    p = add("flow", cmd_flow, "semigroup flow Phi_t(s)")
    _add_flow_source(p)
    p.add_argument("--s", action="append", help="start point (repeatable; default grid)")
    p.add_argument("--t", type=float, action="append", required=True, help="flow time (repeatable)")
    p.add_argument("--method", choices=("ode", "koenigs", "both"), default="ode")

    p = add("koenigs", cmd_koenigs, "Koenigs function values")
    _add_flow_source(p)
    p.add_argument("--s", action="append")
    p.add_argument("--blowup-level", type=float, help="also report sigma* with |h(sigma*)| = level")

    p = add("semigroup-check", cmd_semigroup_check, "semigroup law, identity convergence, generator recovery")
    _add_flow_source(p)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--u", type=float, default=0.5)
    p.add_argument("--method", choices=("ode", "koenigs"), default="ode")

    p = add("kronecker", cmd_kronecker, "simultaneous approximation t * freq_i = target_i mod 2 pi")
    fr = p.add_mutually_exclusive_group(required=True)
    fr.add_argument("--bases", help="comma-separated integers; frequencies are their logs")
    fr.add_argument("--frequencies", help="comma-separated expressions, e.g. 'log(2),log(3)'")
    p.add_argument("--targets", required=True, help="comma-separated angle expressions, e.g. '0,pi'")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--t-max", type=float, default=1e9)
    p.add_argument("--no-grid", action="store_true", help="disable the grid fallback")

    p = add("witnesses", cmd_witnesses, "witness pairs for the non-uniformly-continuous example")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--count", type=int, default=1)

    p = add("preset", cmd_preset, "run a named experiment")
    p.add_argument("name", nargs="?")
    p.add_argument("--all", action="store_true")
    p.add_argument("--list", action="store_true")
    p.add_argument("--delta", type=float, action="append", help="delta override (prop-algebrab)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="parameter override, VALUE as JSON")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        res = args.func(args)
    except NotFoundError as exc:
        print(f"dirichlet-ops: not found: {exc}", file=sys.stderr)
        return EXIT_NOT_FOUND
    except (FlowError, NewtonError) as exc:
        print(f"dirichlet-ops: solver failed: {exc}", file=sys.stderr)
        return EXIT_NOT_FOUND
    except (PreconditionError, ValueError, OSError) as exc:
        print(f"dirichlet-ops: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    sys.stdout.write(io.dumps(res.payload) + "\n")
    if args.out:
        if res.header is None:
            io.write_csv(args.out, ("key", "value"), _flat_rows(io.to_jsonable(res.payload)))
        else:
            io.write_csv(args.out, res.header, res.rows)
    print(f"[{args.command}] {time.perf_counter() - t0:.3f} s", file=sys.stderr)
    return res.code


if __name__ == "__main__":
    sys.exit(main())
