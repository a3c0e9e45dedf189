import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dirichlet_ops import (
    PreconditionError,
    TailBound,
    TruncatedDirichletSeries,
    compose,
    evaluate,
    monomial_pullback,
    multiply,
    verify_contraction,
)
from dirichlet_ops.symbols import RegionSpec, Symbol, builtin_symbol

D = TruncatedDirichletSeries
LN2 = math.log(2)
GRID = RegionSpec(math.inf, 2.0, 10.0, 0.05)


def taylor_oracle(j):
    """Coefficient of 2^{-(j+1)s} in 2^{-1} 2^{-s} exp(-ln2 * 2^{-s})."""
    return 0.5 * (-LN2) ** j / math.factorial(j)


def test_pullback_identity_and_shift():
    r = monomial_pullback(7, Symbol.identity(), 64)
    assert r.series.as_dict() == {7: 1}
    r = monomial_pullback(5, builtin_symbol("shift1"), 64)
    assert r.series.as_dict() == pytest.approx({5: 0.2})


def test_pullback_closed_form():
    r = monomial_pullback(2, builtin_symbol("shift1_plus_2s"), 1 << 12)
    for j in range(11):
        assert abs(r.series.coeff(2 ** (j + 1)) - taylor_oracle(j)) <= 1e-12
    assert r.series.coeff(4) == pytest.approx(-LN2 / 2, abs=1e-15)
    assert r.closure_index <= 1 << 12
    assert r.source_index == 2 and len(r.symbol_digest) == 16


def test_pullback_preconditions():
    sym = builtin_symbol("shift1")
    with pytest.raises(PreconditionError):
        monomial_pullback(0, sym, 64)
    with pytest.raises(PreconditionError):
        monomial_pullback(100, sym, 64)
    with pytest.raises(PreconditionError):
        monomial_pullback(2, builtin_symbol("example1_not_GA"), 64)


@given(st.integers(1, 40), st.integers(0, 2), st.lists(st.integers(2, 9), min_size=1, max_size=3, unique=True))
def test_pullback_support_law(n, c, support):
    phi = {1: 2.0}
    for k in support:
        phi[k] = 0.1
    sym = Symbol.from_series(c, phi)
    closure = max(1 << 12, n ** c)
    r = monomial_pullback(n, sym, closure)
    shift = n ** c
    assert all(int(i) % shift == 0 for i in r.series.indices)


def test_compose_examples():
    f = D.dense(np.arange(1, 51, dtype=float) ** -2)
    g = compose(f, Symbol.identity(), 64)
    assert g.as_dict() == pytest.approx(f.as_dict())
    g = compose(f, builtin_symbol("shift1"), 64)
    for n in range(1, 51):
        assert g.coeff(n) == pytest.approx(f.coeff(n) / n, rel=1e-14)
    f = D.from_mapping({1: 1.0, 2: 1.0})
    sym = builtin_symbol("shift1_plus_2s")
    g = compose(f, sym, 1 << 12)
    want = 1 + 2.0 ** (-sym(1.3))
    assert abs(evaluate(g, 1.3).value - want) <= 1e-10


def test_compose_truncated_f_rules():
    sym = builtin_symbol("shift1")
    ok = D.dense(np.ones(4), 4, TailBound(0.1, 0.0))
    g = compose(ok, sym, 64)
    assert g.tail is not None and g.tail.majorant >= 0.1
    with pytest.raises(PreconditionError):
        compose(D.dense(np.ones(4), 4, TailBound(0.1, 1.0)), sym, 64)


@st.composite
def symbols(draw):
    c = draw(st.integers(0, 1))
    support = draw(st.lists(st.integers(2, 6), min_size=1, max_size=3, unique=True))
    amp = draw(st.lists(st.floats(0.01, 0.15), min_size=len(support), max_size=len(support)))
    phi = {k: a for k, a in zip(support, amp)}
    phi[1] = 1.0 + sum(amp)
    return Symbol.from_series(c, phi)


@st.composite
def polys(draw, max_n=12):
    idx = draw(st.lists(st.integers(1, max_n), min_size=1, max_size=5, unique=True))
    vals = draw(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
                         min_size=len(idx), max_size=len(idx)))
    return D(idx, vals)


def _close(a, b, tol):
    keys = set(a.as_dict()) | set(b.as_dict())
    return all(abs(a.coeff(k) - b.coeff(k)) <= tol for k in keys)


@given(polys(), polys(), symbols(), st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_linearity(f, g, sym, a, b):
    closure = 1 << 10
    lhs = compose(f.scale(a) + g.scale(b), sym, closure)
    rhs = compose(f, sym, closure).scale(a) + compose(g, sym, closure).scale(b)
    assert _close(lhs, rhs, 1e-12 * (1 + abs(a) + abs(b)) * 10)


@given(polys(max_n=8), polys(max_n=8), symbols())
def test_multiplicativity(f, g, sym):
    closure = 1 << 10
    lhs = compose(multiply(f, g), sym, closure)
    rhs = multiply(compose(f, sym, closure), compose(g, sym, closure), limit=closure)
    keys = [k for k in set(lhs.as_dict()) | set(rhs.as_dict()) if k <= closure]
    scale = (f.abs_sum() + 1) * (g.abs_sum() + 1)
    assert all(abs(lhs.coeff(k) - rhs.coeff(k)) <= 1e-12 * scale for k in keys)


def test_oracle_equivalence_random():
    from dirichlet_ops.experiments import random_composition_case

    rng = np.random.default_rng(99)
    for _ in range(8):
        f, sym = random_composition_case(rng)
        closure = max(1 << 12, int(f.indices[-1]) ** sym.characteristic)
        g = compose(f, sym, closure, tail_sigma=0.5)
        while g.tail is not None and g.tail.majorant >= 1e-10:
            closure *= 2
            g = compose(f, sym, closure, tail_sigma=0.5)
        for _ in range(20):
            s = complex(rng.uniform(0.5, 3.0), rng.uniform(-10, 10))
            w = sym(s)
            oracle = sum(f.coeff(int(n)) * np.exp(-w * math.log(n)) for n in f.indices)
            assert abs(evaluate(g, s).value - oracle) <= 1e-8 * (1 + abs(oracle))


def test_contraction_examples():
    r = verify_contraction(D.monomial(2), builtin_symbol("shift1"), GRID)
    assert r.ratio == pytest.approx(0.5, rel=1e-6) and r.holds
    r = verify_contraction(D.from_mapping({2: 0.5, 3: -0.5}), builtin_symbol("shift1_plus_2s"), GRID)
    assert r.ratio <= 1 and r.holds
    r = verify_contraction(D.unit(), builtin_symbol("shift1_plus_2s"), GRID)
    assert r.ratio == pytest.approx(1.0)
