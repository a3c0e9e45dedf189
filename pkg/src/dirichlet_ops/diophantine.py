"""Kronecker-type simultaneous approximation on the imaginary axis.

Given frequencies ``omega_i`` (logs of integers) and target angles
``theta_i`` we look for a real ``t`` with ``t omega_i = theta_i (mod 2 pi)``
up to ``eps``.  Rational independence of the frequencies makes such ``t``
exist for every ``eps > 0`` (Kronecker); the searches below find one.

* one frequency: solved exactly,
* two frequencies: inhomogeneous continued-fraction (Ostrowski) descent on
  ``beta = omega_2 / omega_1``,
* more: LLL reduction of a Kannan embedding lattice, then a small
  enumeration around the reduced basis,
* always: a brute-force grid scan as fallback, capped by the
  ``DSL_BUDGET_SECONDS`` environment variable.

Every answer is re-verified by direct evaluation before it is returned.
"""
from __future__ import annotations

import cmath
import itertools
import math
import os
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import _accel
from .errors import BudgetExhausted, NotFoundError, PreconditionError
from .series import TruncatedDirichletSeries
from .symbols import WitnessPair

__all__ = [
    "KroneckerQuery",
    "kronecker_search",
    "verify_kronecker",
    "recurrence_sequence",
    "prop_algebrab_witnesses",
    "nonseparability_demo",
    "witness_arg_gap",
    "lll_reduce",
    "continued_fraction",
    "VALUE_GAP_BOUND",
    "DEFAULT_T_MAX",
]

TWO_PI = 2.0 * math.pi
VALUE_GAP_BOUND = 2.0 * math.exp(-math.pi / 2)
DEFAULT_T_MAX = 1e9
MAX_FREQUENCIES = 8
GRID_MAX_POINTS = 1 << 27


def _wrap(x):
    """Reduce angles to ``[-pi, pi)``."""
    return x - TWO_PI * np.floor(np.asarray(x) / TWO_PI + 0.5)


def _budget_seconds():
    raw = os.environ.get("DSL_BUDGET_SECONDS", "").strip()
    if not raw:
        return math.inf
    try:
        val = float(raw)
    except ValueError:
        raise PreconditionError(f"DSL_BUDGET_SECONDS must be a number, got {raw!r}") from None
    return val if val > 0 else math.inf


@dataclass(frozen=True)
class KroneckerQuery:
    frequencies: tuple
    targets: tuple
    epsilon: float
    T_max: float = DEFAULT_T_MAX

    def __post_init__(self):
        fr = tuple(float(x) for x in self.frequencies)
        tg = tuple(float(x) for x in self.targets)
        object.__setattr__(self, "frequencies", fr)
        object.__setattr__(self, "targets", tg)
        if not fr:
            raise PreconditionError("need at least one frequency")
        if len(fr) > MAX_FREQUENCIES:
            raise PreconditionError(f"at most {MAX_FREQUENCIES} frequencies are supported")
        if len(tg) != len(fr):
            raise PreconditionError("one target angle per frequency")
        if any(not (f > 0 and math.isfinite(f)) for f in fr):
            raise PreconditionError("frequencies must be positive and finite")
        if len(set(fr)) != len(fr):
            raise PreconditionError("frequencies must be pairwise distinct")
        if not (0 <= self.epsilon < math.pi):
            raise PreconditionError("epsilon must lie in [0, pi)")
        if not self.T_max > 0:
            raise PreconditionError("T_max must be positive")

    @classmethod
    def for_logs(cls, bases, targets, epsilon, T_max=DEFAULT_T_MAX):
        return cls(tuple(math.log(b) for b in bases), tuple(targets), epsilon, T_max)

    def errors(self, t: float) -> np.ndarray:
        w = np.asarray(self.frequencies)
        return np.abs(_wrap(t * w - np.asarray(self.targets)))


def verify_kronecker(q: KroneckerQuery, t: float, slack: float = 1e-12) -> bool:
    """Direct check of a candidate ``t`` (``slack`` absorbs rounding of ``t * omega``)."""
    if t is None or not math.isfinite(t) or abs(t) > q.T_max:
        return False
    tol = q.epsilon + slack * max(1.0, abs(t) * max(q.frequencies))
    return bool(np.all(q.errors(t) <= tol))


# ---------------------------------------------------------------------------
# one and two frequencies
# ---------------------------------------------------------------------------

def continued_fraction(x: float, depth: int = 40):
    """Partial quotients and convergents ``(a_j, p_j, q_j)`` of a real ``x`` (exact on its binary value)."""
    fx = Fraction(x)
    out = []
    p0, q0, p1, q1 = 1, 0, int(math.floor(fx)), 1
    a = p1
    out.append((a, p1, q1))
    rem = fx - a
    for _ in range(depth):
        if rem == 0:
            break
        fx = 1 / rem
        a = int(math.floor(fx))
        rem = fx - a
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        out.append((a, p1, q1))
    return out


def _search_one(q: KroneckerQuery):
    w, th = q.frequencies[0], q.targets[0]
    # smallest |t|; the tie at +-pi resolves to the positive time
    r = float(_wrap(th))
    if r == -math.pi:
        r = math.pi
    t = r / w
    return t if abs(t) <= q.T_max else None


def _inhomogeneous(beta: float, y: float, k_max: int, eta: float):
    """Integer ``k`` with ``|k| <= k_max`` and ``||k beta - y|| <= eta`` by Ostrowski descent.

    ``d_j = q_j beta - p_j`` alternate in sign and shrink like ``1/q_{j+1}``;
    the residual ``y - k beta`` is expanded greedily in these, coarse to
    fine, which keeps ``|k|`` of the order of the last ``q_j`` used.
    """
    cf = continued_fraction(beta, 60)
    r = y - round(y)
    k = 0
    for a_j, p_j, q_j in cf[1:]:
        d = q_j * beta - p_j
        if d == 0:
            break
        c = round(r / d)
        if c:
            k_try = k + c * q_j
            if abs(k_try) > k_max:
                break
            k = k_try
            r = (y - k * beta) - round(y - k * beta)
        if abs(r) <= eta:
            return k
    r = (y - k * beta) - round(y - k * beta)
    return k if abs(r) <= eta else None


def _search_two(q: KroneckerQuery):
    w1, w2 = q.frequencies
    th1, th2 = q.targets
    beta = w2 / w1
    # t_k = (th1 + 2 pi k)/w1 meets constraint 1 exactly; constraint 2 becomes
    # ||k beta - y|| <= eps / (2 pi) with y = (th2 - th1 beta)/(2 pi)
    y = (th2 - th1 * beta) / TWO_PI
    k_max = int(q.T_max * w1 / TWO_PI)
    eta = q.epsilon / TWO_PI
    if eta == 0:
        return None
    k = _inhomogeneous(beta, y, k_max, eta * 0.999)
    if k is None:
        return None
    t = (th1 + TWO_PI * k) / w1
    # balance both errors with a small shift of t
    e2 = float(_wrap(t * w2 - th2))
    t_bal = t - e2 / (w1 + w2)
    for cand in (t_bal, t):
        if verify_kronecker(q, cand):
            return cand
    return None


# ---------------------------------------------------------------------------
# lattice reduction
# ---------------------------------------------------------------------------

def lll_reduce(basis, delta: float = 0.99):
    """LLL-reduce the rows of ``basis`` (float arithmetic; intended for dimension <= 10)."""
    b = np.array(basis, dtype=np.float64)
    n = b.shape[0]

    def gram_schmidt(b):
        bs = np.zeros_like(b)
        mu = np.zeros((n, n))
        for i in range(n):
            v = b[i].copy()
            for j in range(i):
                mu[i, j] = b[i] @ bs[j] / (bs[j] @ bs[j])
                v -= mu[i, j] * bs[j]
            bs[i] = v
        return bs, mu

    bs, mu = gram_schmidt(b)
    k = 1
    guard = 0
    while k < n:
        guard += 1
        if guard > 100000:
            break
        for j in range(k - 1, -1, -1):
            r = round(mu[k, j])
            if r:
                b[k] -= r * b[j]
                bs, mu = gram_schmidt(b)
        if bs[k] @ bs[k] >= (delta - mu[k, k - 1] ** 2) * (bs[k - 1] @ bs[k - 1]):
            k += 1
        else:
            b[[k, k - 1]] = b[[k - 1, k]]
            bs, mu = gram_schmidt(b)
            k = max(k - 1, 1)
    return b


def _search_lattice(q: KroneckerQuery):
    w = np.asarray(q.frequencies)
    th = np.asarray(q.targets)
    m = w.size
    beta = w[1:] / w[0]
    y = (th[1:] - th[0] * beta) / TWO_PI
    k_max = q.T_max * w[0] / TWO_PI
    eta = q.epsilon / TWO_PI
    if eta == 0:
        return None
    scale = 1.0 / eta
    # rows: k-row, one row per integer shift, Kannan embedding row
    dim = m + 1
    basis = np.zeros((dim, dim))
    basis[0, 0] = 1.0 / k_max
    basis[0, 1:m] = beta * scale
    for i in range(1, m):
        basis[i, i] = scale
    basis[m, 1:m] = -y * scale
    basis[m, m] = 1.0
    red = lll_reduce(basis)
    best = None
    # read candidates k from lattice vectors whose embedding coordinate is +-1
    for coeffs in itertools.product((-1, 0, 1), repeat=dim):
        v = np.asarray(coeffs, float) @ red
        if abs(abs(v[m]) - 1.0) > 1e-6:
            continue
        v = v * np.sign(v[m])
        k = int(round(v[0] * k_max))
        if abs(k) > k_max:
            continue
        t = (th[0] + TWO_PI * k) / w[0]
        if verify_kronecker(q, t):
            if best is None or abs(t) < abs(best):
                best = t
    return best


# ---------------------------------------------------------------------------
# grid fallback
# ---------------------------------------------------------------------------

def _search_grid(q: KroneckerQuery, budget: float):
    w = np.asarray(q.frequencies)
    th = np.asarray(q.targets)
    if q.epsilon == 0:
        return None
    dt = q.epsilon / w.max()
    total = q.T_max / dt + 1
    if total > GRID_MAX_POINTS:
        raise BudgetExhausted(f"grid fallback would need {total:.3g} points per sign (cap {GRID_MAX_POINTS})")
    chunk = 1 << 22
    start = time.monotonic()
    t0 = 0.0
    while t0 <= q.T_max:
        count = int(min(chunk, (q.T_max - t0) / dt + 1))
        for sign in (1.0, -1.0):
            j = _accel.kronecker_scan(w, th, q.epsilon, sign * t0, sign * dt, count)
            if j >= 0:
                t = sign * (t0 + j * dt)
                if verify_kronecker(q, t):
                    return t
        t0 += chunk * dt
        if time.monotonic() - start > budget:
            raise BudgetExhausted(f"grid scan stopped at |t| = {t0:.3g} after the {budget:g}s budget")
    return None


def kronecker_search(q: KroneckerQuery, *, use_grid: bool = True):
    """A verified ``t`` with ``|t| <= T_max`` meeting every angular constraint, or ``None``.

    ``None`` means the lattice search and the grid scan found nothing
    within ``T_max``.  :class:`~dirichlet_ops.errors.BudgetExhausted` is
    raised when ``DSL_BUDGET_SECONDS`` stops the grid scan first.
    """
    if np.all(q.errors(0.0) <= q.epsilon):
        return 0.0
    m = len(q.frequencies)
    if m == 1:
        t = _search_one(q)
    elif m == 2:
        t = _search_two(q)
    else:
        t = _search_lattice(q)
    if t is not None and verify_kronecker(q, t):
        return float(t)
    if use_grid:
        t = _search_grid(q, _budget_seconds())
        if t is not None and verify_kronecker(q, t):
            return float(t)
    return None


# ---------------------------------------------------------------------------
# recurrence sequences for phi = a 2^{-s} + b 3^{-s}
# ---------------------------------------------------------------------------

def _two_three(phi: TruncatedDirichletSeries):
    if not phi.is_exact or set(int(n) for n in phi.indices) != {2, 3}:
        raise PreconditionError("recurrence_sequence needs an exact series supported on {2, 3}")
    return phi.coeff(2), phi.coeff(3)


def _triangle_angles(a: complex, b: complex, w: complex):
    """Angles ``(x2, x3)`` with ``a e^{i x2} + b e^{i x3} = w``."""
    ra, rb, rw = abs(a), abs(b), abs(w)
    if rw == 0:
        return 0.0, cmath.phase(-a / b)
    cos_g = (rw * rw + ra * ra - rb * rb) / (2 * rw * ra)
    g = math.acos(min(1.0, max(-1.0, cos_g)))
    u = ra * cmath.exp(1j * (cmath.phase(w) + g))
    v = w - u
    return cmath.phase(u) - cmath.phase(a), cmath.phase(v) - cmath.phase(b)


def recurrence_sequence(phi: TruncatedDirichletSeries, w: complex, ladder, *,
                        T_max: float = DEFAULT_T_MAX, polish: bool = True):
    """Real ``t_n`` with ``|phi(i t_n) - w| <= eps_n`` for each rung of ``ladder``.

    ``phi(it) = a e^{-it log 2} + b e^{-it log 3}``: the target ``w`` fixes
    the two angles up to the triangle ambiguity, and a two-frequency
    Kronecker query with precision ``eps_n/(|a|+|b|)`` meets the rung.
    With ``polish`` the result is improved by a bounded scalar search on
    ``|phi(it) - w|``.  A rung already met by the previous ``t`` reuses it.
    """
    a, b = _two_three(phi)
    w = complex(w)
    lo, hi = abs(abs(a) - abs(b)), abs(a) + abs(b)
    if abs(w) > hi * (1 + 1e-15) or abs(w) < lo * (1 - 1e-15):
        raise PreconditionError(f"|w| = {abs(w):.6g} is outside the attainable ring [{lo:.6g}, {hi:.6g}]")
    ladder = [float(e) for e in ladder]
    if any(not e > 0 for e in ladder):
        raise PreconditionError("exact attainment (eps = 0) cannot be certified at finite t")
    x2, x3 = _triangle_angles(a, b, w)
    freqs = (math.log(2.0), math.log(3.0))
    # phi(it) uses e^{-it log p}: t log p = -x_p (mod 2 pi)
    targets = (-x2, -x3)

    def miss(t):
        return abs(complex(phi(1j * t)) - w)

    out = []
    t_prev = None
    for eps in ladder:
        if t_prev is not None and miss(t_prev) <= eps:
            out.append(t_prev)
            continue
        q = KroneckerQuery(freqs, targets, min(eps / (abs(a) + abs(b)), math.pi * 0.999), T_max)
        t = kronecker_search(q)
        if t is None:
            raise NotFoundError(f"no t with |t| <= {T_max:g} reaches eps = {eps:g}")
        if polish:
            span = 2 * q.epsilon / freqs[0] + 1e-12
            res = minimize_scalar(miss, bounds=(t - span, t + span), method="bounded",
                                  options={"xatol": 1e-13 * max(1.0, abs(t))})
            if res.fun < miss(t):
                t = float(res.x)
        if miss(t) > eps:
            raise NotFoundError(f"candidate t = {t:.17g} misses eps = {eps:g}")
        out.append(float(t))
        t_prev = float(t)
    return out


# ---------------------------------------------------------------------------
# witnesses for a bounded, non-uniformly-continuous Dirichlet series
# ---------------------------------------------------------------------------

def _algebrab_phi():
    return TruncatedDirichletSeries.from_mapping({2: 0.5, 3: -0.5})


def _cayley(z):
    return (1 + z) / (1 - z)


def _annulus_f(z):
    return cmath.exp(1j * cmath.log(_cayley(z)))


def prop_algebrab_witnesses(delta: float, *, count: int = 1, max_rungs: int = 40,
                            T_max: float = DEFAULT_T_MAX):
    """Pairs ``(s_n, r_n)`` with ``|s_n - r_n| <= delta`` and ``|F(s_n) - F(r_n)| >= 2 e^{-pi/2}``.

    ``F = f o phi`` with ``phi = 2^{-s}/2 - 3^{-s}/2``, ``T`` the Cayley map
    and ``f = exp(i log T)``.  For each rung: a recurrence time ``t_n`` with
    ``phi(i t_n)`` near 1, ``s_n = h_n + i t_n``, a real shift ``eps'``
    with ``(2^{-eps'} + 3^{-eps'})/2 <= 1 - 2 e^pi / |T(z_n)|``, and the
    point ``r_n`` on ``[s_n, s_n + eps']`` where ``|T(z_n)/T(phi(r_n))| = e^pi``.
    Then ``f(z_n)`` and ``f(phi(r_n))`` have opposite arguments.
    The heights ``h_n = (delta/2) 2^{-n}`` shrink geometrically and the
    recurrence precision follows ``h_n``.
    """
    if not 0 < delta <= 0.1:
        raise PreconditionError("delta must lie in (0, 0.1]")
    phi = _algebrab_phi()
    e_pi = math.exp(math.pi)
    found = []
    t_prev = None
    for n in range(1, max_rungs + 1):
        h = 0.5 * delta * 2.0 ** (-n)
        eps_t = h / 4
        if t_prev is not None and abs(complex(phi(1j * t_prev)) - 1) <= eps_t:
            t = t_prev
        else:
            t = recurrence_sequence(phi, 1.0, [eps_t], T_max=T_max)[0]
        t_prev = t
        s = complex(h, t)
        z = complex(phi(s))
        big_t = abs(_cayley(z))
        need = 1.0 - 2.0 * e_pi / big_t
        if need <= 0:
            continue

        def shrink(e):
            return 0.5 * (2.0 ** (-e) + 3.0 ** (-e)) - need

        eps_r = brentq(shrink, 0.0, 60.0, xtol=1e-300)
        eps_r = max(eps_r, eps_r * (1 + 1e-12))
        if eps_r > delta:
            continue
        log_tz = math.log(big_t)

        def ratio(alpha):
            wv = complex(phi(s + alpha * eps_r))
            return log_tz - math.log(abs(_cayley(wv))) - math.pi

        if ratio(1.0) < 0:
            continue
        alpha = brentq(ratio, 0.0, 1.0, xtol=1e-16)
        r = s + alpha * eps_r
        wv = complex(phi(r))
        fz, fw = _annulus_f(z), _annulus_f(wv)
        pair = WitnessPair(s, r, abs(r - s), abs(fz - fw))
        if pair.gap <= delta and pair.value_gap >= VALUE_GAP_BOUND - 1e-12:
            found.append(pair)
            if len(found) >= count:
                return found
    raise BudgetExhausted(f"no certified witness pair within {max_rungs} rungs")


def witness_arg_gap(pair: WitnessPair) -> float:
    """``|Arg f(phi(s2)) - Arg f(phi(s1))|`` through ``log |T|`` (the unwrapped argument of ``f``)."""
    phi = _algebrab_phi()
    z, w = complex(phi(pair.s1)), complex(phi(pair.s2))
    return abs(math.log(abs(_cayley(z))) - math.log(abs(_cayley(w))))


def nonseparability_demo(taus, *, eps: float = 1e-4, n_h: int = 400):
    """Sampled lower bounds for ``sup |F_tau - F_tau'|`` with ``F_tau = f(conj(tau) phi)``.

    For each ``tau`` a recurrence time brings ``phi(it)`` close to ``tau``;
    on the horizontal segment above it ``F_tau`` winds around the annulus
    while ``F_tau'`` barely moves.  Returns the matrix of the largest gaps
    seen (diagonal zero).
    """
    phi = _algebrab_phi()
    taus = [complex(x) / abs(complex(x)) for x in taus]
    hs = np.geomspace(1e-8, 1e-1, n_h)
    lines = []
    for tau in taus:
        t = recurrence_sequence(phi, tau * (1 - 1e-12), [eps])[0]
        lines.append(hs + 1j * t)
    m = len(taus)
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            best = 0.0
            for line in (lines[i], lines[j]):
                z = phi(line)
                with np.errstate(divide="ignore", invalid="ignore"):
                    fi = np.exp(1j * np.log(_cayley(np.conj(taus[i]) * z)))
                    fj = np.exp(1j * np.log(_cayley(np.conj(taus[j]) * z)))
                best = max(best, float(np.nanmax(np.abs(fi - fj))))
            out[i, j] = best
    return out
