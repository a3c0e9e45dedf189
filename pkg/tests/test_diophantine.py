import cmath
import math

import numpy as np
import pytest

from dirichlet_ops import BudgetExhausted, PreconditionError, TruncatedDirichletSeries
from dirichlet_ops.diophantine import (
    VALUE_GAP_BOUND,
    KroneckerQuery,
    continued_fraction,
    kronecker_search,
    lll_reduce,
    nonseparability_demo,
    prop_algebrab_witnesses,
    recurrence_sequence,
    verify_kronecker,
    witness_arg_gap,
)

PHI = TruncatedDirichletSeries.from_mapping({2: 0.5, 3: -0.5})


def dist_2pi(x):
    return abs((x + math.pi) % (2 * math.pi) - math.pi)


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------

def test_query_invariants():
    with pytest.raises(PreconditionError):
        KroneckerQuery((), (), 0.1)
    with pytest.raises(PreconditionError):
        KroneckerQuery((1.0, 1.0), (0.0, 0.0), 0.1)
    with pytest.raises(PreconditionError):
        KroneckerQuery((1.0,), (0.0,), math.pi)
    with pytest.raises(PreconditionError):
        KroneckerQuery((1.0,), (0.0, 1.0), 0.1)
    with pytest.raises(PreconditionError):
        KroneckerQuery(tuple(np.log(np.arange(2, 11))), (0.0,) * 9, 0.1)


def test_zero_targets_give_zero():
    q = KroneckerQuery.for_logs([2, 3, 5], [0.0, 0.0, 0.0], 1e-3)
    assert kronecker_search(q) == 0.0


def test_single_frequency_exact():
    q = KroneckerQuery.for_logs([2], [math.pi], 0.0)
    t = kronecker_search(q)
    assert t == pytest.approx(math.pi / math.log(2), rel=1e-15)


def test_two_three_target_zero_pi():
    q = KroneckerQuery.for_logs([2, 3], [0.0, math.pi], 1e-2, 1e7)
    t = kronecker_search(q)
    assert t is not None and abs(t) <= 1e7
    # direct-scan oracle: both angle constraints and the value miss
    assert dist_2pi(t * math.log(2)) <= 1e-2 + 1e-9
    assert dist_2pi(t * math.log(3) - math.pi) <= 1e-2 + 1e-9
    miss = abs(0.5 * cmath.exp(-1j * t * math.log(2)) - 0.5 * cmath.exp(-1j * t * math.log(3)) - 1)
    assert miss <= 1e-2


@pytest.mark.parametrize("bases", [[2, 3, 5], [2, 3, 5, 7]])
def test_lattice_search_several_frequencies(bases):
    rng = np.random.default_rng(len(bases))
    targets = list(rng.uniform(-math.pi, math.pi, len(bases)))
    q = KroneckerQuery.for_logs(bases, targets, 0.2, 1e8)
    t = kronecker_search(q)
    assert t is not None and verify_kronecker(q, t)
    for b, th in zip(bases, targets):
        assert dist_2pi(t * math.log(b) - th) <= 0.2 + 1e-9


def test_not_found_is_none():
    q = KroneckerQuery.for_logs([2, 3], [0.0, math.pi], 1e-6, 10.0)
    assert kronecker_search(q) is None


def test_grid_budget():
    q = KroneckerQuery.for_logs([2, 3, 5], [0.3, 1.0, 2.0], 1e-9, 1e9)
    with pytest.raises(BudgetExhausted):
        kronecker_search(q)


def test_budget_env_var_validated(monkeypatch):
    monkeypatch.setenv("DSL_BUDGET_SECONDS", "soon")
    q = KroneckerQuery.for_logs([2, 3], [0.1, 0.2], 1e-6, 1e3)
    with pytest.raises(PreconditionError):
        kronecker_search(q)


def test_verify_rejects_out_of_range():
    q = KroneckerQuery.for_logs([2], [0.0], 0.1, 5.0)
    assert not verify_kronecker(q, 2 * math.pi / math.log(2) * 3)
    assert not verify_kronecker(q, None)


def test_continued_fraction_of_log_ratio():
    cf = continued_fraction(math.log(3) / math.log(2), depth=6)
    assert [a for a, _, _ in cf[:6]] == [1, 1, 1, 2, 2, 3]
    # convergents p/q: 19/12 and 65/41 are the familiar tuning approximations
    assert (19, 12) in [(p, q) for _, p, q in cf] and (65, 41) in [(p, q) for _, p, q in cf]


def test_lll_reduces_known_basis():
    red = lll_reduce(np.array([[1.0, 1.0, 1.0], [-1.0, 0.0, 2.0], [3.0, 5.0, 6.0]]))
    norms = sorted(np.linalg.norm(red, axis=1))
    assert norms[0] <= math.sqrt(2) + 1e-12
    assert abs(abs(np.linalg.det(red)) - 3.0) < 1e-9


# ---------------------------------------------------------------------------
# recurrence sequences
# ---------------------------------------------------------------------------

def test_recurrence_toward_one():
    ts = recurrence_sequence(PHI, 1.0, [0.1, 0.01])
    for t, eps in zip(ts, [0.1, 0.01]):
        assert abs(complex(PHI(1j * t)) - 1) <= eps


def test_recurrence_toward_zero():
    ts = recurrence_sequence(PHI, 0.0, [1e-3])
    assert ts == [0.0]


def test_recurrence_general_target():
    w = 0.6 * cmath.exp(1.1j)
    t = recurrence_sequence(PHI, w, [1e-3])[0]
    assert abs(complex(PHI(1j * t)) - w) <= 1e-3


def test_recurrence_rejections():
    with pytest.raises(PreconditionError):
        recurrence_sequence(PHI, 1.0, [0.0])
    with pytest.raises(PreconditionError):
        recurrence_sequence(PHI, 1.5, [0.1])
    with pytest.raises(PreconditionError):
        recurrence_sequence(TruncatedDirichletSeries.from_mapping({2: 1.0, 5: 1.0}), 1.0, [0.1])


def test_phi_never_reaches_one():
    # |phi(it)| = 1 forces 2^{-it} = -3^{-it}; the recurrence only approaches 1
    t = np.linspace(-2000, 2000, 2_000_001)
    assert np.max(np.abs(PHI(1j * t))) < 1.0


# ---------------------------------------------------------------------------
# witnesses
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("delta", [1e-2, 1e-3])
def test_witness_pairs(delta):
    pairs = prop_algebrab_witnesses(delta, count=2)
    assert pairs
    assert VALUE_GAP_BOUND == pytest.approx(0.4157592, abs=1e-7)
    for p in pairs:
        assert p.s1.real > 0 and p.s2.real > 0
        assert p.gap <= delta
        assert p.value_gap >= VALUE_GAP_BOUND - 1e-3
        assert p.value_gap >= 0.41588
        assert abs(witness_arg_gap(p) - math.pi) <= 1e-6
        # independent recomputation of F = exp(i log T(phi)) at both points
        z, w = complex(PHI(p.s1)), complex(PHI(p.s2))
        F = [cmath.exp(1j * cmath.log((1 + x) / (1 - x))) for x in (z, w)]
        assert abs(F[0] - F[1]) == pytest.approx(p.value_gap, rel=1e-9)


def test_witness_delta_checked():
    with pytest.raises(PreconditionError):
        prop_algebrab_witnesses(0.5)


def test_nonseparability_demo():
    taus = np.exp(2j * np.pi * np.arange(5) / 5 + 0.3j)
    gaps = nonseparability_demo(taus)
    off = gaps[~np.eye(5, dtype=bool)]
    assert np.all(off >= math.exp(-math.pi / 2))
