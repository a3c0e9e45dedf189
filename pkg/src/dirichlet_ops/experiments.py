"""Named, reproducible experiments.

Each :class:`ExperimentPreset` bundles default parameters, a runner and,
for the thirteen acceptance-linked presets, an ``expected`` descriptor
(criterion number, observed quantity, target and tolerance).  Runners
return plain dicts; ``passed`` is filled in when ``expected`` exists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .composition import compose, monomial_pullback
from .diophantine import (
    VALUE_GAP_BOUND,
    KroneckerQuery,
    kronecker_search,
    prop_algebrab_witnesses,
    verify_kronecker,
    witness_arg_gap,
)
from .diskmaps import Koebe
from .errors import PreconditionError
from .semigroups import (
    Semigroup,
    compact_transition_scan,
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
from .series import TruncatedDirichletSeries, coefficient_stream, estimate_abscissae, evaluate
from .symbols import (
    RegionSpec,
    Symbol,
    builtin_symbol,
    classify_G,
    compactness_diagnostic,
    probe_G_A,
)

__all__ = [
    "ExperimentPreset",
    "preset_registry",
    "get_preset",
    "run_preset",
    "flow_grid",
    "random_composition_case",
    "random_coefficient_stream",
]

LN2 = math.log(2.0)


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    parameters: dict
    runner: object = field(repr=False, compare=False)
    expected: dict | None = None
    description: str = ""

    def run(self, overrides: dict | None = None, *, smoke: bool = False) -> dict:
        params = dict(self.parameters)
        for k, v in (overrides or {}).items():
            if k not in params:
                raise PreconditionError(f"preset {self.name!r} has no parameter {k!r}")
            params[k] = v
        observed = self.runner(params, smoke)
        passed = None
        if self.expected is not None:
            passed = bool(observed.pop("passed"))
        out = {"preset": self.name, "parameters": params, "expected": self.expected,
               "observed": observed, "passed": passed}
        return out


# ---------------------------------------------------------------------------
# shared grids and random cases
# ---------------------------------------------------------------------------

def flow_grid() -> np.ndarray:
    """Twenty points ``sigma + i tau``, ``sigma in {0.2, 0.5, 1, 2, 3}``, ``tau in {-3, -1, 1, 3}``."""
    sig = np.array([0.2, 0.5, 1.0, 2.0, 3.0])
    tau = np.array([-3.0, -1.0, 1.0, 3.0])
    return (sig[:, None] + 1j * tau[None, :]).ravel()


def random_composition_case(rng: np.random.Generator):
    """A random Dirichlet polynomial ``f`` (``N <= 50``) and a symbol in G_infty with a small ``phi - a_1``.

    ``c = 0`` symbols get ``Re a_1 >= 1`` and ``||phi - a_1||_1 <= 0.45``;
    ``c = 1`` symbols get ``Re a_1 >= 0.5``.  Both map ``C_+`` into itself.
    """
    N = int(rng.integers(1, 51))
    coeffs = (rng.normal(size=N) + 1j * rng.normal(size=N)) / np.arange(1, N + 1)
    f = TruncatedDirichletSeries.dense(coeffs)
    c = int(rng.integers(0, 2))
    support = rng.choice([2, 3, 4, 5, 6], size=int(rng.integers(1, 4)), replace=False)
    w = rng.uniform(0.05, 1.0, size=len(support))
    w *= rng.uniform(0.05, 0.45) / w.sum()
    phase = np.exp(2j * math.pi * rng.uniform(size=len(support)))
    a1 = complex(rng.uniform(1.0, 2.0) if c == 0 else rng.uniform(0.5, 1.5), rng.uniform(-1, 1))
    phi = {1: a1}
    for n, wn, ph in zip(support, w, phase):
        phi[int(n)] = complex(wn * ph)
    return f, Symbol.from_series(c, phi)


def _closure_for(f, sym, sigma0: float, target: float, start: int = 1 << 12, cap: int = 1 << 22):
    closure = max(start, int(f.indices[-1]) ** sym.characteristic)
    while True:
        g = compose(f, sym, closure, tail_sigma=sigma0)
        maj = 0.0 if g.tail is None else g.tail.majorant
        if maj < target or closure >= cap:
            return g, closure, maj
        closure *= 2


def random_coefficient_stream(rng: np.random.Generator, N: int = 4096):
    """Coefficients ``n^{-alpha}`` times a random sign or phase pattern."""
    alpha = rng.uniform(-0.5, 1.5)
    kind = int(rng.integers(0, 3))
    n = np.arange(1, N + 1, dtype=float)
    if kind == 0:
        pat = np.ones(N)
    elif kind == 1:
        pat = rng.choice([-1.0, 1.0], size=N)
    else:
        pat = np.exp(2j * math.pi * rng.uniform(size=N))
    return coefficient_stream(pat * n ** (-alpha))


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def _run_pullback(p, smoke):
    sym = builtin_symbol("shift1_plus_2s")
    r = monomial_pullback(p["n"], sym, p["closure"])
    errs = []
    for j in range(p["j_max"] + 1):
        oracle = 0.5 * (-LN2) ** j / math.factorial(j)
        errs.append(abs(r.series.coeff(2 ** (j + 1)) - oracle))
    worst = max(errs)
    return {"max_abs_error": worst, "coefficient_at_4": r.series.coeff(4),
            "discarded_tail_majorant": r.discarded_tail_majorant, "passed": worst <= 1e-12}


def _run_composition(p, smoke):
    rng = np.random.default_rng(p["seed"])
    cases = 10 if smoke else p["cases"]
    worst, closures = 0.0, []
    for _ in range(cases):
        f, sym = random_composition_case(rng)
        g, closure, _ = _closure_for(f, sym, 0.5, p["majorant_target"])
        closures.append(closure)
        for _ in range(p["points"]):
            s = complex(rng.uniform(0.5, 3.0), rng.uniform(-10.0, 10.0))
            oracle = complex(f(sym(s)))
            got = evaluate(g, s).value
            worst = max(worst, abs(got - oracle) / (1 + abs(oracle)))
    return {"cases": cases, "max_relative_error": worst, "max_closure": max(closures),
            "passed": worst <= 1e-8}


def _run_hprime_1plus2s(p, smoke):
    G = named_generator("inv_1plus2s")
    K = koenigs_from_generator(G)
    pts = flow_grid()[::4] if smoke else flow_grid()
    res, agree = 0.0, 0.0
    for t in p["times"]:
        for s in pts:
            a = flow_ode(G, s, t, p["tol"], koenigs=K)
            b = flow_koenigs(K, s, t, p["tol"])
            res = max(res, a.residual)
            agree = max(agree, abs(a.phi_t_s - b.phi_t_s))
    return {"max_koenigs_residual": res, "max_method_gap": agree, "points": len(pts),
            "passed": res <= 1e-8 and agree <= 1e-8}


def koebe_closed_form(s: complex, t: float) -> complex:
    """``Phi_t(s)`` for the Koebe data (``c = 1``, ``k = 2``) via the quadratic root in the disc."""
    z = 2.0 ** (-complex(s))
    q = 2.0 ** (-t) * z / (1 - z) ** 2
    zt = complex(Koebe().inverse(q))
    w = -np.log(zt) / LN2
    # the log branch: the flow moves continuously from s
    period = 2 * math.pi / LN2
    m = round(((s + t) - w).imag / period)
    return complex(w + 1j * period * m)


def _run_koebe(p, smoke):
    K = spirallike_koenigs(koebe_spec())
    pts = flow_grid()[::4] if smoke else flow_grid()
    worst = 0.0
    for t in p["times"]:
        for s in pts:
            oracle = koebe_closed_form(s, t)
            a = flow_ode(K.H, s, t, p["tol"]).phi_t_s
            b = flow_koenigs(K, s, t, p["tol"]).phi_t_s
            worst = max(worst, abs(a - oracle), abs(b - oracle))
    return {"max_error_vs_closed_form": worst, "passed": worst <= 1e-8}


def _run_semigroup_law(p, smoke):
    pts = flow_grid()[::4] if smoke else flow_grid()
    out = {}
    worst = 0.0
    for name in ("inv_1plus2s", "koebe"):
        G = named_generator(name)
        for method in ("ode", "koenigs_newton"):
            if method == "koenigs_newton" and name == "koebe":
                sg = Semigroup(koenigs=spirallike_koenigs(koebe_spec()), method=method, tol=p["tol"])
            else:
                sg = Semigroup(G, method=method, tol=p["tol"])
            r = semigroup_law_check(sg, pts, p["t"], p["u"])
            out[f"{name}/{method}"] = r
            worst = max(worst, r)
    return {"residuals": out, "max_residual": worst, "passed": worst <= 1e-6}


def identity_grid():
    """``Re s in {1e-3, 0.1, 1}`` by ``Im s in {-2, ..., 2}``."""
    sig = np.array([1e-3, 0.1, 1.0])
    tau = np.arange(-2.0, 3.0)
    return (sig[:, None] + 1j * tau[None, :]).ravel()


def _run_identity(p, smoke):
    sg = Semigroup(named_generator("inv_1plus2s"), method="ode", tol=p["tol"])
    scan = identity_convergence_scan(sg, identity_grid(), p["t_ladder"])
    at = scan.value_at(1e-3)
    mono = scan.nonincreasing_as_t_decreases()
    return {"rows": [(t, v, w) for t, v, w in scan.rows], "sup_at_1e-3": at, "nonincreasing": mono,
            "passed": mono and at <= 2e-3}


def recovery_grid():
    """``sigma in {0.1, 0.5, 1}`` by ``tau in [-2, 2]`` (nine values)."""
    sig = np.array([0.1, 0.5, 1.0])
    tau = np.linspace(-2.0, 2.0, 9)
    return (sig[:, None] + 1j * tau[None, :]).ravel()


def _run_recovery(p, smoke):
    G = named_generator("inv_1plus2s")
    sg = Semigroup(G, method="ode", tol=p["tol"])
    scan = generator_recovery_check(sg, G, recovery_grid(), p["t_ladder"])
    e1, e2 = scan.value_at(p["t_ladder"][0]), scan.value_at(p["t_ladder"][1])
    ratio = e1 / e2
    return {"rows": [(t, v, w) for t, v, w in scan.rows], "ratio": ratio, "passed": 5.0 <= ratio <= 20.0}


def _run_prop_algebrab(p, smoke):
    deltas = p["delta"] if isinstance(p["delta"], (list, tuple)) else [p["delta"]]
    rows, ok = [], True
    for d in deltas:
        pairs = prop_algebrab_witnesses(float(d))
        for pr in pairs:
            arg = witness_arg_gap(pr)
            rows.append({"delta": float(d), "s1": pr.s1, "s2": pr.s2, "gap": pr.gap,
                         "value_gap": pr.value_gap, "arg_gap": arg})
            ok = ok and pr.value_gap >= 0.41 and abs(arg - math.pi) <= 1e-6 and pr.gap <= d
        ok = ok and bool(pairs)
    return {"witnesses": rows, "bound": VALUE_GAP_BOUND, "passed": ok}


def _run_kronecker(p, smoke):
    q = KroneckerQuery.for_logs([2, 3], [0.0, math.pi], p["epsilon"], p["T_max"])
    t = kronecker_search(q)
    if t is None:
        return {"t": None, "passed": False}
    miss = abs(0.5 * 2.0 ** (-1j * t) - 0.5 * 3.0 ** (-1j * t) - 1)
    return {"t": t, "value_miss": miss, "verified": verify_kronecker(q, t),
            "passed": miss <= 1e-2 and abs(t) <= 1e7}


def _run_compactness(p, smoke):
    a = compactness_diagnostic(builtin_symbol("shift1"))
    b = compactness_diagnostic(builtin_symbol("shift1_plus_2s"))
    ok = (a.compactness == "compact" and a.compactness_value >= 1 - 1e-9
          and b.compactness == "noncompact_evidence" and b.compactness_value <= 0.05)
    return {"shift1": [a.compactness, a.compactness_value],
            "shift1_plus_2s": [b.compactness, b.compactness_value], "passed": ok}


def _run_example1(p, smoke):
    region = RegionSpec(p["M"], p["sigma_max"], p["T_window"], p["grid_step"])
    g_in = classify_G(builtin_symbol("G_member"))
    g_out = classify_G(builtin_symbol("G_nonmember"))
    ex1 = probe_G_A(builtin_symbol("example1_not_GA"), region, p["deltas"])
    ctrl = probe_G_A(builtin_symbol("shift1_plus_2s"), region, p["deltas"])
    w_ex1 = ex1.omega[list(ex1.deltas).index(1e-3)]
    w_ctrl = ctrl.omega[list(ctrl.deltas).index(1e-3)]
    ok = (g_in.in_G is True and g_out.in_G is False and g_out.in_G_infty is True
          and w_ex1 >= 0.3 and w_ctrl <= 5e-3)
    return {"G_member_in_G": g_in.in_G, "G_nonmember_in_G": g_out.in_G,
            "G_nonmember_in_G_infty": g_out.in_G_infty, "omega_example1": ex1.rows(),
            "omega_control": ctrl.rows(), "verdict_example1": ex1.verdict, "passed": ok}


def _run_example2(p, smoke):
    sym = builtin_symbol("example2_GA_not_UC")
    region = RegionSpec(p["M"], p["sigma_max"], p["T_window"], p["grid_step"])
    probe = probe_G_A(sym, region, p["deltas"])
    # growth of |Phi| approaching the pole of T at 2^{-s} = 1
    growth = [(sg, abs(complex(sym(complex(sg, 0.0))))) for sg in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5)]
    return {"omega_on_A_M": probe.rows(), "verdict": probe.verdict, "abs_phi_near_pole": growth}


def _run_hprime_1over(p, smoke):
    G = named_generator("one_minus_2s")
    K = koenigs_from_generator(G)
    sigma_star = koenigs_blowup_threshold(K, p["level"])
    sg = Semigroup(G, method="ode", tol=p["tol"])
    pts = flow_grid()[::4] if smoke else flow_grid()
    law = semigroup_law_check(sg, pts, 0.5, 0.5)
    return {"blowup_sigma_star": sigma_star, "blowup_level": p["level"], "semigroup_law_residual": law}


def _run_compact_transition(p, smoke):
    K = spirallike_koenigs(slit_spec(c=p["c"], a=p["a"]))
    n_tau = 60 if smoke else p["n_tau"]
    scan = compact_transition_scan(K, p["t_ladder"], n_tau=n_tau)
    rows = [{"t": t, "inf_re": v, "where": w, "failures": n} for t, v, w, n in scan.rows]
    lo = scan.value_at(0.5)
    hi = scan.value_at(2.0)
    return {"rows": rows, "t0": 1.0 / p["c"], "passed": lo <= 0.05 and hi > 0}


def _run_abscissae(p, smoke):
    N = p["N"]
    zeta = estimate_abscissae(coefficient_stream(np.ones(N)))
    alt = estimate_abscissae(coefficient_stream((-1.0) ** np.arange(N)))
    rng = np.random.default_rng(p["seed"])
    streams = 20 if smoke else p["streams"]
    chain = sum(estimate_abscissae(random_coefficient_stream(rng)).chain_holds() for _ in range(streams))
    ok = (abs(zeta.sigma_c_est - 1) <= 0.1 and abs(zeta.sigma_a_est - 1) <= 0.1
          and abs(alt.sigma_c_est) <= 0.1 and abs(alt.sigma_a_est - 1) <= 0.1 and chain == streams)
    return {"zeta": [zeta.sigma_c_est, zeta.sigma_a_est], "alternating": [alt.sigma_c_est, alt.sigma_a_est],
            "chain_holds": f"{chain}/{streams}", "passed": ok}


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

def _expect(n, quantity, target, tolerance):
    return {"criterion": n, "quantity": quantity, "target": target, "tolerance": tolerance}


_PRESETS = (
    ExperimentPreset(
        "pullback-closedform", {"n": 2, "closure": 4096, "j_max": 10}, _run_pullback,
        _expect(1, "max_j |coef at 2^(j+1) - (1/2)(-ln2)^j/j!|", 0.0, 1e-12),
        "monomial pullback 2^{-Phi} for Phi = s+1+2^{-s} against its Taylor coefficients"),
    ExperimentPreset(
        "composition-oracle", {"seed": 20240601, "cases": 50, "points": 20, "majorant_target": 1e-10},
        _run_composition,
        _expect(2, "max relative |compose(f,Phi)(s) - f(Phi(s))|", 0.0, 1e-8),
        "coefficient composition against scalar evaluation on random cases"),
    ExperimentPreset(
        "hprime-1plus2s", {"times": [0.1, 1.0, 10.0], "tol": 1e-10}, _run_hprime_1plus2s,
        _expect(3, "max |h(Phi_t(s)) - h(s) - t| and ODE/Koenigs gap", 0.0, 1e-8),
        "semigroup with h'(s) = 1 + 2^{-s}"),
    ExperimentPreset(
        "koebe-flow", {"times": [0.3, 0.5, 1.0], "tol": 1e-10}, _run_koebe,
        _expect(4, "max |Phi_t(s) - closed form|", 0.0, 1e-8),
        "Koebe spirallike semigroup (c = 1, k = 2) against the quadratic-root inversion"),
    ExperimentPreset(
        "semigroup-law", {"t": 0.5, "u": 0.5, "tol": 1e-10}, _run_semigroup_law,
        _expect(5, "max |Phi_{t+u} - Phi_t o Phi_u|", 0.0, 1e-6),
        "semigroup law for both flow methods"),
    ExperimentPreset(
        "identity-convergence", {"t_ladder": [1.0, 0.1, 1e-2, 1e-3], "tol": 1e-12}, _run_identity,
        _expect(6, "sup |Phi_t - id| at t = 1e-3, nonincreasing in t", 0.0, 2e-3),
        "uniform convergence to the identity, grid reaching Re s = 1e-3"),
    ExperimentPreset(
        "generator-recovery", {"t_ladder": [1e-2, 1e-3], "tol": 1e-13}, _run_recovery,
        _expect(7, "error ratio between t = 1e-2 and t = 1e-3", [5.0, 20.0], None),
        "difference quotient (Phi_t - id)/t against H"),
    ExperimentPreset(
        "prop-algebrab", {"delta": [1e-2, 1e-3]}, _run_prop_algebrab,
        _expect(8, "value_gap of witness pairs; |Arg gap| - pi", 2 * math.exp(-math.pi / 2), 1e-6),
        "non-uniformly-continuous bounded Dirichlet series: witness pairs"),
    ExperimentPreset(
        "kronecker-23", {"epsilon": 1e-2, "T_max": 1e7}, _run_kronecker,
        _expect(9, "|(1/2)2^{-it} - (1/2)3^{-it} - 1|", 0.0, 1e-2),
        "simultaneous approximation for log 2, log 3 with targets (0, pi)"),
    ExperimentPreset(
        "compactness", {}, _run_compactness,
        _expect(10, "compact eps for s+1; observed inf Re for s+1+2^{-s}", [1.0, 0.0], [1e-9, 0.05]),
        "compactness criterion on two translation symbols"),
    ExperimentPreset(
        "example1-not-ga", {"M": 3.0, "sigma_max": 0.5, "T_window": 2 * math.pi / LN2, "grid_step": 2e-3,
                            "deltas": [1e-2, 1e-3]},
        _run_example1,
        _expect(11, "G membership pair; omega(1e-3) on A_3 (example / control)", [0.3, 5e-3], None),
        "class separation: G vs G_infty and the sampled modulus of continuity on A_M"),
    ExperimentPreset(
        "compact-transition", {"c": 1.0, "a": 0.5, "t_ladder": [0.5, 1.0, 1.1, 2.0], "n_tau": 400},
        _run_compact_transition,
        {**_expect(12, "observed inf Re Phi_t at t = 0.5 (<= 0.05) and t = 2 (> 0)", 0.0, 0.05), "t0": "1/c"},
        "slit-disc semigroup (slit from 1/2): noncompact before t0 = 1/c, compact after"),
    ExperimentPreset(
        "abscissae", {"N": 10_000, "seed": 7, "streams": 100}, _run_abscissae,
        _expect(13, "sigma_c, sigma_a for zeta and alternating; chain on random streams", [1.0, 0.0, 1.0], 0.1),
        "abscissa estimates and the chain sigma_c <= sigma_a <= sigma_c + 1"),
    ExperimentPreset(
        "example2-ga-not-uc", {"M": 3.0, "sigma_max": 0.5, "T_window": 2 * math.pi / LN2, "grid_step": 5e-3,
                               "deltas": [1e-2, 1e-3]},
        _run_example2, None,
        "half-strip symbol: continuous on each A_M, unbounded near the boundary"),
    ExperimentPreset(
        "hprime-1over-1minus2s", {"level": 10.0, "tol": 1e-10}, _run_hprime_1over, None,
        "semigroup with h'(s) = 1/(1 - 2^{-s}): Koenigs blow-up near Re s = 0"),
)


def preset_registry() -> list:
    return list(_PRESETS)


def get_preset(name: str) -> ExperimentPreset:
    for p in _PRESETS:
        if p.name == name:
            return p
    raise PreconditionError(f"unknown preset {name!r}; known: {', '.join(p.name for p in _PRESETS)}")


def run_preset(name: str, overrides: dict | None = None, *, smoke: bool = False) -> dict:
    return get_preset(name).run(overrides, smoke=smoke)
