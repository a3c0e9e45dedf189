"""Acceptance suite: one test per criterion, one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (the summary lines appear at
the end of the terminal report) or ``python tests/test_acceptance.py``.
Oracles are computed here independently of the library code paths they check.
"""
import cmath
import math
import sys
import time

import numpy as np
import pytest

from dirichlet_ops import (
    compose,
    estimate_abscissae,
    evaluate,
    monomial_pullback,
)
from dirichlet_ops.diophantine import KroneckerQuery, kronecker_search, prop_algebrab_witnesses
from dirichlet_ops.experiments import identity_grid, random_coefficient_stream, random_composition_case, recovery_grid
from dirichlet_ops.semigroups import (
    Semigroup,
    compact_transition_scan,
    flow_koenigs,
    flow_ode,
    generator_recovery_check,
    identity_convergence_scan,
    koebe_spec,
    koenigs_from_generator,
    named_generator,
    semigroup_law_check,
    slit_spec,
    spirallike_koenigs,
)
from dirichlet_ops.series import ESTIMATOR_TOLERANCE, coefficient_stream
from dirichlet_ops.symbols import RegionSpec, builtin_symbol, classify_G, compactness_diagnostic, probe_G_A

LN2 = math.log(2)
PERIOD = 2 * math.pi / LN2
RESULTS = {}


def record(n, ok, detail):
    RESULTS[n] = (bool(ok), detail)
    assert ok, f"criterion {n}: {detail}"


@pytest.fixture(scope="module", autouse=True)
def summary(request):
    yield
    tr = request.config.pluginmanager.getplugin("terminalreporter")
    lines = [f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}" for n, (ok, detail) in sorted(RESULTS.items())]
    if tr is not None:
        tr.write_sep("=", "acceptance criteria")
        for line in lines:
            tr.write_line(line)
    else:
        print("\n".join(lines))


def grid20():
    sig = np.array([0.2, 0.5, 1.0, 2.0, 3.0])
    tau = np.array([-3.0, -1.0, 1.0, 3.0])
    return (sig[:, None] + 1j * tau[None, :]).ravel()


def koebe_oracle(s, t):
    """Phi_t(s) for f = z/(1-z)^2, c = 1, k = 2 from the quadratic root inside the disc."""
    z = 2.0 ** (-s)
    q = 2.0 ** (-t) * z / (1 - z) ** 2
    disc = cmath.sqrt((2 * q + 1) ** 2 - 4 * q * q)
    zt = min((((2 * q + 1) + disc) / (2 * q), ((2 * q + 1) - disc) / (2 * q)), key=abs)
    w = -cmath.log(zt) / LN2
    return w + 1j * PERIOD * round(((s + t) - w).imag / PERIOD)


def test_criterion_01_pullback_closed_form():
    t0 = time.perf_counter()
    r = monomial_pullback(2, builtin_symbol("shift1_plus_2s"), 1 << 12)
    err = max(abs(r.series.coeff(2 ** (j + 1)) - 0.5 * (-LN2) ** j / math.factorial(j)) for j in range(11))
    dt = time.perf_counter() - t0
    record(1, err <= 1e-12 and dt < 1.0, f"max coefficient error {err:.2e} (tol 1e-12), {dt:.2f} s (< 1 s)")


def test_criterion_02_composition_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for _ in range(50):
        f, sym = random_composition_case(rng)
        phi = sym.phi.as_dict()
        c = sym.characteristic
        closure = max(1 << 12, int(f.indices[-1]) ** c)
        g = compose(f, sym, closure, tail_sigma=0.5)
        while g.tail is not None and g.tail.majorant >= 1e-10 and closure < 1 << 22:
            closure *= 2
            g = compose(f, sym, closure, tail_sigma=0.5)
        for _ in range(20):
            s = complex(rng.uniform(0.5, 3.0), rng.uniform(-20, 20))
            w = c * s + sum(b * cmath.exp(-s * math.log(k)) for k, b in phi.items())
            oracle = sum(f.coeff(int(n)) * cmath.exp(-w * math.log(n)) for n in f.indices)
            worst = max(worst, abs(evaluate(g, s).value - oracle) / (1 + abs(oracle)))
    dt = time.perf_counter() - t0
    record(2, worst <= 1e-8 and dt < 30, f"max relative error {worst:.2e} over 50x20 (tol 1e-8), {dt:.1f} s (< 30 s)")


def test_criterion_03_koenigs_residual():
    t0 = time.perf_counter()
    G = named_generator("inv_1plus2s")
    K = koenigs_from_generator(G)

    def h(s):
        return s - 2.0 ** (-s) / LN2

    res, gap = 0.0, 0.0
    for t in (0.1, 1.0, 10.0):
        for s in grid20():
            a = flow_ode(G, s, t, 1e-10).phi_t_s
            b = flow_koenigs(K, s, t, 1e-10).phi_t_s
            res = max(res, abs(h(a) - h(s) - t))
            gap = max(gap, abs(a - b))
    dt = time.perf_counter() - t0
    record(3, res <= 1e-8 and gap <= 1e-8 and dt < 60,
           f"Koenigs residual {res:.2e}, ODE/Newton gap {gap:.2e} (tol 1e-8), {dt:.1f} s (< 60 s)")


def test_criterion_04_koebe_flow():
    K = spirallike_koenigs(koebe_spec())
    worst = 0.0
    for t in (0.3, 0.5, 1.0):
        for s in grid20():
            oracle = koebe_oracle(s, t)
            worst = max(worst, abs(flow_ode(K.H, s, t, 1e-11).phi_t_s - oracle),
                        abs(flow_koenigs(K, s, t, 1e-11).phi_t_s - oracle))
    record(4, worst <= 1e-8, f"max error vs quadratic closed form {worst:.2e} (tol 1e-8)")


def test_criterion_05_semigroup_law():
    worst = {}
    gen = named_generator("inv_1plus2s")
    koebe = spirallike_koenigs(koebe_spec())
    cases = {
        "1+2^-s/ode": Semigroup(gen, method="ode"),
        "1+2^-s/newton": Semigroup(gen, method="koenigs_newton"),
        "koebe/ode": Semigroup(named_generator("koebe"), method="ode"),
        "koebe/newton": Semigroup(koenigs=koebe, method="koenigs_newton"),
    }
    for name, sg in cases.items():
        worst[name] = semigroup_law_check(sg, grid20(), 0.5, 0.5)
    m = max(worst.values())
    record(5, m <= 1e-6, f"max |Phi_1 - Phi_0.5 o Phi_0.5| {m:.2e} (tol 1e-6)")


def test_criterion_06_identity_convergence():
    sg = Semigroup(named_generator("inv_1plus2s"), method="ode", tol=1e-12)
    scan = identity_convergence_scan(sg, identity_grid(), (1.0, 0.1, 1e-2, 1e-3))
    at = scan.value_at(1e-3)
    mono = scan.nonincreasing_as_t_decreases()
    record(6, mono and at <= 2e-3, f"sup|Phi_t - id| at t=1e-3 is {at:.3e} (<= 2e-3), nonincreasing={mono}")


def test_criterion_07_generator_recovery():
    G = named_generator("inv_1plus2s")
    sg = Semigroup(G, method="ode", tol=1e-13)
    scan = generator_recovery_check(sg, G, recovery_grid(), (1e-2, 1e-3))
    ratio = scan.values[0] / scan.values[1]
    record(7, 5 <= ratio <= 20, f"error ratio t=1e-2 : t=1e-3 is {ratio:.3f} (in [5, 20])")


def test_criterion_08_prop_algebrab():
    t0 = time.perf_counter()

    def F(s):
        z = 0.5 * 2.0 ** (-s) - 0.5 * 3.0 ** (-s)
        return cmath.exp(1j * cmath.log((1 + z) / (1 - z)))

    def arg_gap(s1, s2):
        # Arg f = log|T| for f = exp(i log T)
        z1 = 0.5 * 2.0 ** (-s1) - 0.5 * 3.0 ** (-s1)
        z2 = 0.5 * 2.0 ** (-s2) - 0.5 * 3.0 ** (-s2)
        return abs(math.log(abs((1 + z1) / (1 - z1))) - math.log(abs((1 + z2) / (1 - z2))))

    ok, notes = True, []
    for delta in (1e-2, 1e-3):
        p = prop_algebrab_witnesses(delta)[0]
        vg = abs(F(p.s1) - F(p.s2))
        ag = arg_gap(p.s1, p.s2)
        ok = ok and vg >= 0.41 and abs(ag - math.pi) <= 1e-6 and p.gap <= delta and p.s2.real > 0
        notes.append(f"delta={delta:g}: gap {vg:.4f}, |Arg gap - pi| {abs(ag - math.pi):.1e}")
    dt = time.perf_counter() - t0
    record(8, ok and dt < 120, "; ".join(notes) + f", {dt:.1f} s (< 120 s)")


def test_criterion_09_kronecker():
    t0 = time.perf_counter()
    t = kronecker_search(KroneckerQuery.for_logs([2, 3], [0.0, math.pi], 1e-2, 1e7))
    miss = abs(0.5 * cmath.exp(-1j * t * LN2) - 0.5 * cmath.exp(-1j * t * math.log(3)) - 1)
    dt = time.perf_counter() - t0
    record(9, abs(t) <= 1e7 and miss <= 1e-2 and dt < 60,
           f"t = {t:.6f}, |phi(it) - 1| = {miss:.2e} (<= 1e-2), {dt:.2f} s (< 60 s)")


def test_criterion_10_compactness():
    a = compactness_diagnostic(builtin_symbol("shift1"))
    b = compactness_diagnostic(builtin_symbol("shift1_plus_2s"))
    ok = (a.compactness == "compact" and a.compactness_value >= 1 - 1e-9
          and b.compactness == "noncompact_evidence" and b.compactness_value <= 0.05)
    record(10, ok, f"s+1: {a.compactness} eps={a.compactness_value:.6f}; "
                   f"s+1+2^-s: {b.compactness} inf={b.compactness_value:.3e}")


def test_criterion_11_class_separation():
    g_in = classify_G(builtin_symbol("G_member"))
    g_out = classify_G(builtin_symbol("G_nonmember"))
    # oracle: inf Re(a + 2^{-s}/8) over C_+ is a - 1/8
    assert 0.75 - 0.125 > 0.5 and 0.3 - 0.125 < 0.5
    region = RegionSpec(3.0, 0.5, PERIOD, 2e-3)
    ex1 = builtin_symbol("example1_not_GA")
    pe = probe_G_A(ex1, region, (1e-3,))
    pc = probe_G_A(builtin_symbol("shift1_plus_2s"), region, (1e-3,))
    pair = pe.worst_pairs[0]
    direct = abs(complex(ex1(pair.s1)) - complex(ex1(pair.s2)))
    ok = (g_in.in_G and g_out.in_G is False and g_out.in_G_infty
          and pe.omega[0] >= 0.3 and direct >= 0.3 and pair.gap <= 1e-3 + 1e-15 and pc.omega[0] <= 5e-3)
    record(11, ok, f"G: {g_in.in_G}/{g_out.in_G}; omega(1e-3) example1 {pe.omega[0]:.3f} (>= 0.3), "
                   f"s+1+2^-s {pc.omega[0]:.2e} (<= 5e-3)")


def test_criterion_12_compact_transition():
    K = spirallike_koenigs(slit_spec(c=1.0, a=0.5))
    scan = compact_transition_scan(K, (0.5, 2.0), n_tau=400)
    lo, hi = scan.values
    record(12, lo <= 0.05 and hi > 0, f"inf Re Phi_t: t=0.5 -> {lo:.2e} (<= 0.05), t=2 -> {hi:.3f} (> 0)")


def test_criterion_13_abscissae():
    N = 10_000
    z = estimate_abscissae(coefficient_stream(np.ones(N)))
    a = estimate_abscissae(coefficient_stream((-1.0) ** np.arange(N)))
    rng = np.random.default_rng(7)
    chain, strict = 0, 0
    for _ in range(100):
        r = estimate_abscissae(random_coefficient_stream(rng))
        # the chain invariant carries the estimator tolerance
        c, s = r.sigma_c_est, r.sigma_a_est
        chain += c - ESTIMATOR_TOLERANCE <= s <= c + 1 + ESTIMATOR_TOLERANCE
        strict += c - 1e-9 <= s <= c + 1 + 1e-9
    ok = (abs(z.sigma_c_est - 1) <= 0.1 and abs(z.sigma_a_est - 1) <= 0.1
          and abs(a.sigma_c_est) <= 0.1 and abs(a.sigma_a_est - 1) <= 0.1 and chain == 100)
    record(13, ok, f"zeta ({z.sigma_c_est:.3f}, {z.sigma_a_est:.3f}); alternating ({a.sigma_c_est:.3f}, "
                   f"{a.sigma_a_est:.3f}); chain {chain}/100 within tol {ESTIMATOR_TOLERANCE} "
                   f"({strict}/100 up to roundoff 1e-9)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
