"""Continuous semigroups ``{Phi_t}`` of symbols with Denjoy-Wolff point at infinity.

A semigroup is described either by its infinitesimal generator ``H``
(``d/dt Phi_t = H(Phi_t)``) or by its Koenigs function ``h``
(``h o Phi_t = h + t``, ``h' = 1/H``).  Two independent routes compute
``Phi_t(s)``:

* :func:`flow_ode` integrates the Cauchy problem,
* :func:`flow_koenigs` solves ``h(w) = h(s) + t`` by Newton's method.

Spirallike maps ``f`` on the disc give Koenigs functions in closed form,
``h(s) = -(1/(c log k)) log f(k^{-s})``.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp
from scipy.optimize import brentq

from . import diskmaps
from .errors import FlowError, NewtonError, PreconditionError
from .series import TruncatedDirichletSeries
from .symbols import RegionSpec, sigma_grid

__all__ = [
    "GeneratorSpec",
    "KoenigsSpec",
    "SpirallikeSpec",
    "FlowResult",
    "Semigroup",
    "ScanTable",
    "validate_generator",
    "flow_ode",
    "koenigs_from_generator",
    "flow_koenigs",
    "spirallike_koenigs",
    "spirallike_certificate",
    "semigroup_law_check",
    "identity_convergence_scan",
    "generator_recovery_check",
    "compact_transition_scan",
    "denjoy_wolff_escape",
    "gronwall_check",
    "koenigs_blowup_threshold",
    "named_generator",
    "koebe_spec",
    "slit_spec",
    "GENERATOR_NAMES",
]

GENERATOR_REGION = RegionSpec(M=math.inf, sigma_max=4.0, T_window=20.0, grid_step=0.05)
RANGE_SLACK = 1e-9
MAX_STEPS = 10 ** 6


def _region_points(region: RegionSpec) -> np.ndarray:
    m = int(math.floor(region.T_window / region.grid_step + 1e-9))
    ts = region.grid_step * np.arange(-m, m + 1, dtype=float)
    sig = sigma_grid(region)
    return (sig[:, None] + 1j * ts[None, :]).ravel()


def _call(fn, s):
    return complex(np.asarray(fn(np.complex128(s))).reshape(()))


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorSpec:
    """Validated generator ``H``; ``H_prime_bound`` is a certified ``sup |H'|`` when known."""

    H: object
    validation_grid: RegionSpec
    re_H_min: float
    label: str = ""
    H_prime_bound: float | None = None

    def __call__(self, s):
        return self.H(s)


def validate_generator(H, grid: RegionSpec = GENERATOR_REGION, *, label: str = "",
                       H_prime_bound: float | None = None) -> GeneratorSpec:
    """Check the range condition ``Re H >= 0`` on the grid.

    A Dirichlet polynomial ``H`` gets the certified bound
    ``sup |H'| <= sum |a_n| log n`` automatically.
    """
    pts = _region_points(grid)
    vals = np.asarray(H(pts), dtype=np.complex128)
    if not np.all(np.isfinite(vals)):
        bad = pts[~np.isfinite(vals)][0]
        raise PreconditionError(f"generator not finite at s = {complex(bad)}")
    j = int(np.argmin(vals.real))
    re_min = float(vals.real[j])
    if re_min < -RANGE_SLACK:
        raise PreconditionError(f"Re H = {re_min:.6g} < 0 at s = {complex(pts[j])}; not a generator")
    if H_prime_bound is None and isinstance(H, TruncatedDirichletSeries) and H.is_exact:
        H_prime_bound = math.fsum(np.abs(H.values) * H.log_indices)
    return GeneratorSpec(H, grid, re_min, label, H_prime_bound)


# ---------------------------------------------------------------------------
# Koenigs functions
# ---------------------------------------------------------------------------

def _segment_integral(fn, a: complex, b: complex, tol: float = 1e-13) -> complex:
    """``int_a^b fn`` along the straight segment."""
    if a == b:
        return 0j
    d = b - a
    with warnings.catch_warnings():
        # roundoff notices near the requested floor are expected at 1e-13
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(lambda u: _call(fn, a + u * d), 0.0, 1.0, complex_func=True,
                      epsabs=tol, epsrel=tol, limit=400)
    return complex(val) * d


@dataclass(frozen=True)
class KoenigsSpec:
    """Koenigs function data: ``h'`` always, ``h`` in closed form when available.

    Without a closed form ``h(s) = anchor_value + int_anchor^s h'`` along
    the segment (the half-plane is convex).  ``inverse`` is an optional
    closed form of ``h^{-1}`` used only to seed Newton.
    """

    h_prime: object
    anchor: complex = 1.0
    anchor_value: complex = 0.0
    h_closed: object = None
    inverse: object = None
    label: str = ""
    validation_grid: RegionSpec = field(default=GENERATOR_REGION, compare=False)

    def H(self, s):
        return 1.0 / self.h_prime(s)

    def h(self, s) -> complex:
        if self.h_closed is not None:
            return _call(self.h_closed, s)
        return self.anchor_value + _segment_integral(self.h_prime, self.anchor, complex(s))

    def increment(self, a: complex, b: complex) -> complex:
        """``h(b) - h(a)``."""
        if self.h_closed is not None:
            return _call(self.h_closed, b) - _call(self.h_closed, a)
        return _segment_integral(self.h_prime, complex(a), complex(b))


def koenigs_from_generator(G: GeneratorSpec) -> KoenigsSpec:
    """``h' = 1/H`` with ``h(1) = 0``; ``h`` by adaptive quadrature on segments."""
    pts = _region_points(G.validation_grid)
    vals = np.asarray(G.H(pts), dtype=np.complex128)
    j = int(np.argmin(np.abs(vals)))
    if vals[j] == 0:
        raise PreconditionError(f"H vanishes at s = {complex(pts[j])}")

    H = G.H

    def h_prime(s):
        v = np.asarray(H(s), dtype=np.complex128)
        if np.any(v == 0):
            raise PreconditionError("H vanishes on the integration path")
        return 1.0 / v

    return KoenigsSpec(h_prime, 1.0, 0.0, label=G.label, validation_grid=G.validation_grid)


# ---------------------------------------------------------------------------
# flows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlowResult:
    t: float
    s: complex
    phi_t_s: complex
    method: str
    residual: float | None = None
    iterations: int = 0

    def row(self):
        res = math.nan if self.residual is None else self.residual
        return (self.t, self.s.real, self.s.imag, self.phi_t_s.real, self.phi_t_s.imag, res, self.method)


class _StepCap(Exception):
    pass


def flow_ode(G, s: complex, t: float, tol: float = 1e-10, *, koenigs: KoenigsSpec | None = None,
             max_steps: int = MAX_STEPS) -> FlowResult:
    """Integrate ``w' = H(w)``, ``w(0) = s`` up to ``t`` with an adaptive embedded RK pair.

    ``G`` is a :class:`GeneratorSpec` or any evaluator of ``H``.  With a
    ``koenigs`` spec the Koenigs residual ``|h(w) - h(s) - t|`` is reported.
    """
    s = complex(s)
    t = float(t)
    if not s.real > 0:
        raise PreconditionError("flows start in Re s > 0")
    if t < 0:
        raise PreconditionError("flow time must be nonnegative")
    H = G.H if isinstance(G, GeneratorSpec) else G
    if t == 0:
        return FlowResult(0.0, s, s, "ode", 0.0 if koenigs is not None else None)
    calls = [0]
    cap = 12 * max_steps

    def rhs(_, y):
        calls[0] += 1
        if calls[0] > cap:
            raise _StepCap
        return np.array([_call(H, y[0])])

    try:
        sol = solve_ivp(rhs, (0.0, t), np.array([s]), method="DOP853", rtol=tol, atol=tol * 1e-2)
    except _StepCap:
        raise FlowError(f"step budget of {max_steps} exhausted", None) from None
    if sol.status != 0:
        raise FlowError(f"integration stopped: {sol.message}", (sol.t, sol.y[0]))
    w = complex(sol.y[0, -1])
    res = None
    if koenigs is not None:
        res = abs(koenigs.increment(s, w) - t)
    return FlowResult(t, s, w, "ode", res, int(sol.nfev))


def flow_koenigs(K: KoenigsSpec, s: complex, t: float, tol: float = 1e-10, *,
                 seed: complex | None = None, max_iter: int = 60) -> FlowResult:
    """Solve ``h(w) = h(s) + t`` by Newton's method with ``h'`` as derivative.

    Seeds: an explicit ``seed``; ``s`` itself when ``t <= 0.1``; otherwise a
    coarse ODE solve at tolerance 1e-3.  ``h(w) - h(s)`` is tracked
    incrementally along the Newton steps so no path crosses the boundary.
    """
    s = complex(s)
    t = float(t)
    if not s.real > 0:
        raise PreconditionError("flows start in Re s > 0")
    if t < 0:
        raise PreconditionError("flow time must be nonnegative")
    if t == 0:
        return FlowResult(0.0, s, s, "koenigs_newton", 0.0, 0)
    if seed is None:
        seed = s if t <= 0.1 else flow_ode(K.H, s, t, 1e-3).phi_t_s
    w = complex(seed)
    if not w.real > 0:
        w = complex(max(s.real, 1e-12), w.imag)
    closed = K.h_closed is not None
    if closed:
        target = _call(K.h_closed, s) + t
        resid = _call(K.h_closed, w) - target
    else:
        acc = K.increment(s, w)
        resid = acc - t
    iters = 0
    floor = 1e-14 * (1.0 + abs(t))
    while iters < max_iter and abs(resid) > floor:
        iters += 1
        d = _call(K.h_prime, w)
        step = -resid / d
        lam = 1.0
        while True:
            w_new = w + lam * step
            if w_new.real > 0:
                if closed:
                    r_new = _call(K.h_closed, w_new) - target
                else:
                    acc_new = acc + K.increment(w, w_new)
                    r_new = acc_new - t
                if abs(r_new) < abs(resid) or lam < 1e-6:
                    break
            lam *= 0.5
            if lam < 1e-12:
                raise NewtonError("Newton step left the half-plane", w, abs(resid))
        small_step = abs(w_new - w) <= 1e-15 * (1.0 + abs(w))
        w, resid = w_new, r_new
        if not closed:
            acc = acc_new
        if small_step:
            break
    if not math.isfinite(abs(resid)) or abs(resid) > max(tol, floor):
        raise NewtonError(f"Newton did not converge (residual {abs(resid):.3g})", w, abs(resid))
    return FlowResult(t, s, w, "koenigs_newton", abs(resid), iters)


class Semigroup:
    """Callable ``Phi_t(s)`` backed by one of the two flow methods."""

    def __init__(self, generator=None, koenigs: KoenigsSpec | None = None, method: str = "ode",
                 tol: float = 1e-10, label: str = ""):
        if method not in ("ode", "koenigs_newton"):
            raise PreconditionError("method must be 'ode' or 'koenigs_newton'")
        if generator is None and koenigs is None:
            raise PreconditionError("need a generator or a Koenigs spec")
        if method == "koenigs_newton" and koenigs is None:
            koenigs = koenigs_from_generator(generator)
        if method == "ode" and generator is None:
            generator = koenigs.H
        self.generator = generator
        self.koenigs = koenigs
        self.method = method
        self.tol = tol
        self.label = label

    def H(self, s):
        g = self.generator
        return g.H(s) if isinstance(g, GeneratorSpec) else g(s)

    def flow(self, s, t) -> FlowResult:
        if self.method == "ode":
            return flow_ode(self.generator, s, t, self.tol, koenigs=self.koenigs)
        return flow_koenigs(self.koenigs, s, t, self.tol)

    def __call__(self, s, t) -> complex:
        return self.flow(s, t).phi_t_s


# ---------------------------------------------------------------------------
# spirallike maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpirallikeSpec:
    f: object
    c: complex = 1.0
    k: int = 2

    def __post_init__(self):
        c = complex(self.c)
        if c == 0 or c.real < 0:
            raise PreconditionError("spirallike parameter needs Re c >= 0 and c != 0")
        if int(self.k) != self.k or self.k < 2:
            raise PreconditionError("k must be an integer >= 2")
        if not hasattr(self.f, "derivative"):
            raise PreconditionError("spirallike map needs a derivative")


def _disc_grid(r_max=0.995, n_r=40, n_theta=256):
    r = np.linspace(0.02, r_max, n_r)
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    return (r[:, None] * np.exp(1j * th[None, :])).ravel()


def spirallike_certificate(S: SpirallikeSpec, z=None) -> float:
    """Sampled ``min Re(z f'(z) / (c f(z)))`` over a polar disc grid."""
    z = _disc_grid() if z is None else np.asarray(z, dtype=np.complex128)
    q = z * S.f.derivative(z) / (complex(S.c) * S.f(z))
    return float(np.min(q.real))


def spirallike_koenigs(S: SpirallikeSpec, *, check: bool = True) -> KoenigsSpec:
    """``h(s) = -(1/(c log k)) log f(k^{-s})`` with a continuous logarithm.

    Writing ``log f(z) = log z + L(z)`` with ``L = log(f(z)/z)`` (``f(z)/z``
    is zero-free on the disc) gives ``h(s) = s/c - L(k^{-s})/(c log k)``.
    For starlike maps (real ``c``) ``|arg f(z)/z| < pi`` and the principal
    branch of ``L`` is continuous; otherwise ``L`` is continued radially
    from ``z = 0``.  The additive constant makes ``log f(1/k)`` principal,
    so ``h(1)`` is the principal value rather than 0.
    """
    if check:
        cert = spirallike_certificate(S)
        if not cert > 0:
            raise PreconditionError(f"spirallike certificate fails: min Re(z f'/(c f)) = {cert:.3g}")
    f = S.f
    c = complex(S.c)
    k = int(S.k)
    log_k = math.log(k)
    fp0 = complex(f.derivative(0j))
    if fp0 == 0:
        raise PreconditionError("f'(0) = 0: f is not univalent at the origin")
    starlike = c.imag == 0

    def L(z):
        z = np.asarray(z, dtype=np.complex128)
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(z == 0, fp0, f(z) / np.where(z == 0, 1.0, z))
        if np.any(q == 0):
            raise PreconditionError("f vanishes away from the origin")
        if starlike:
            return np.log(q)
        # radial continuation of the argument from q(0) = f'(0)
        r = np.linspace(0.0, 1.0, 129)[:, None]
        zz = r * z.ravel()[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            qq = np.where(zz == 0, fp0, f(zz) / np.where(zz == 0, 1.0, zz))
        ang = np.unwrap(np.angle(qq), axis=0)[-1]
        return (np.log(np.abs(q.ravel())) + 1j * ang).reshape(z.shape)

    z1 = 1.0 / k
    raw = -math.log(k) + complex(L(z1))
    principal = cmath.log(complex(f(z1)))
    shift = principal - raw  # 2 pi i m
    const = -shift / (c * log_k)

    def h_closed(s):
        s = np.asarray(s, dtype=np.complex128)
        z = np.exp(-s * log_k)
        return s / c - L(z) / (c * log_k) + const

    def h_prime(s):
        s = np.asarray(s, dtype=np.complex128)
        z = np.exp(-s * log_k)
        return z * f.derivative(z) / (c * f(z))

    inverse = None
    if hasattr(f, "inverse"):
        period = 2j * math.pi / log_k

        def inverse(w):
            w = complex(w)
            zeta = complex(f.inverse(cmath.exp(-c * log_k * w)))
            s0 = -cmath.log(zeta) / log_k
            j = round(((w - _call(h_closed, s0)) * c / period).real)
            return s0 + j * period

    anchor_value = _call(h_closed, 1.0)
    return KoenigsSpec(h_prime, 1.0, anchor_value, h_closed, inverse,
                       label=f"spirallike({getattr(f, 'name', 'f')}, c={c:g}, k={k})")


# ---------------------------------------------------------------------------
# scans and checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanTable:
    """Per-t rows ``(t, value, where)``."""

    rows: tuple

    @property
    def ts(self):
        return [r[0] for r in self.rows]

    @property
    def values(self):
        return [r[1] for r in self.rows]

    def nonincreasing_as_t_decreases(self, tol: float = 1e-12) -> bool:
        ordered = sorted(self.rows, key=lambda r: -r[0])
        vals = [r[1] for r in ordered]
        return all(b <= a + tol for a, b in zip(vals, vals[1:]))

    def value_at(self, t):
        for r in self.rows:
            if r[0] == t:
                return r[1]
        raise KeyError(t)


def semigroup_law_check(flow, s_grid, t: float, u: float) -> float:
    """``max |Phi_{t+u}(s) - Phi_t(Phi_u(s))|`` over the grid."""
    worst = 0.0
    for s in np.asarray(s_grid, dtype=np.complex128).ravel():
        a = flow(complex(s), t + u)
        b = flow(flow(complex(s), u), t)
        worst = max(worst, abs(a - b))
    return worst


def identity_convergence_scan(flow, s_grid, t_ladder) -> ScanTable:
    """``sup_s |Phi_t(s) - s|`` for each t of the ladder."""
    pts = np.asarray(s_grid, dtype=np.complex128).ravel()
    rows = []
    for t in t_ladder:
        gaps = [abs(flow(complex(s), float(t)) - s) for s in pts]
        j = int(np.argmax(gaps))
        rows.append((float(t), float(gaps[j]), complex(pts[j])))
    return ScanTable(tuple(rows))


def generator_recovery_check(flow, H, s_grid, t_ladder) -> ScanTable:
    """``max_s |(Phi_t(s) - s)/t - H(s)|`` for each t; expected to decay like t."""
    pts = np.asarray(s_grid, dtype=np.complex128).ravel()
    Hf = H.H if isinstance(H, GeneratorSpec) else H
    rows = []
    for t in t_ladder:
        t = float(t)
        errs = [abs((flow(complex(s), t) - s) / t - _call(Hf, s)) for s in pts]
        j = int(np.argmax(errs))
        rows.append((t, float(errs[j]), complex(pts[j])))
    return ScanTable(tuple(rows))


def compact_transition_scan(K: KoenigsSpec, t_ladder, sigmas=(1e-2, 1e-3, 1e-4, 1e-5, 1e-6),
                            n_tau: int = 400, period: float | None = None, tol: float = 1e-10,
                            refine: bool = True) -> ScanTable:
    """Observed ``inf Re Phi_t`` over points approaching the boundary, per t.

    The grid covers one vertical period; near the smallest sigma the best
    column is refined in tau.  Rows are ``(t, inf_estimate, argmin, failures)``
    where ``failures`` counts Newton failures (skipped points).
    """
    if period is None:
        period = 2 * math.pi / math.log(2)
    taus = period * np.arange(n_tau) / n_tau
    rows = []
    for t in t_ladder:
        t = float(t)
        best, where, fails = math.inf, None, 0

        def phi(s):
            seed = K.inverse(K.h(s) + t) if K.inverse is not None else None
            return flow_koenigs(K, s, t, tol, seed=seed).phi_t_s

        for sg in sigmas:
            for tau in taus:
                s = complex(sg, tau)
                try:
                    v = phi(s).real
                except (NewtonError, FlowError, PreconditionError):
                    fails += 1
                    continue
                if v < best:
                    best, where = v, s
        if refine and where is not None:
            step = period / n_tau
            sg = min(sigmas)
            for tau in np.linspace(where.imag - step, where.imag + step, 81):
                s = complex(sg, tau)
                try:
                    v = phi(s).real
                except (NewtonError, FlowError, PreconditionError):
                    fails += 1
                    continue
                if v < best:
                    best, where = v, s
        rows.append((t, best, where, fails))
    return ScanTable(tuple(rows))


def denjoy_wolff_escape(flow, s: complex = 1.0, threshold: float = 10.0, t_max: float = 1e4):
    """First doubling time ``t`` with ``|Phi_t(s)| > threshold`` and the sampled moduli.

    Returns ``(t_escape or None, [(t, |Phi_t(s)|), ...], increasing_tail)``.
    """
    t = 0.125
    samples = []
    t_escape = None
    while t <= t_max:
        m = abs(flow(complex(s), t))
        samples.append((t, m))
        if m > threshold and t_escape is None:
            t_escape = t
            # a few more samples to judge the tail
            for extra in (2 * t, 4 * t):
                samples.append((extra, abs(flow(complex(s), extra))))
            break
        t *= 2
    mods = [m for _, m in samples]
    tail = mods[-4:]
    increasing = all(b > a for a, b in zip(tail, tail[1:]))
    return t_escape, samples, increasing


def gronwall_check(flow, pairs, t: float, M: float) -> float:
    """``max |Phi_t(s1) - Phi_t(s2)| / (|s1 - s2| e^{M t})`` over the pairs (should be <= 1)."""
    worst = 0.0
    for s1, s2 in pairs:
        d0 = abs(complex(s1) - complex(s2))
        d = abs(flow(complex(s1), t) - flow(complex(s2), t))
        worst = max(worst, d / (d0 * math.exp(M * t)))
    return worst


def koenigs_blowup_threshold(K: KoenigsSpec, level: float = 10.0, lo: float = 1e-9, hi: float = 1.0) -> float:
    """Largest real ``sigma*`` in ``[lo, hi]`` with ``|h(sigma)| = level`` (``|h|`` decreasing there)."""
    def g(x):
        return abs(K.h(complex(x, 0.0))) - level

    if g(lo) < 0 or g(hi) > 0:
        raise PreconditionError("no crossing of the requested level in [lo, hi]")
    return brentq(g, lo, hi, xtol=1e-14, rtol=1e-12)


# ---------------------------------------------------------------------------
# named examples
# ---------------------------------------------------------------------------

LN2 = math.log(2.0)


def _h_inv_1plus2s(s):
    return 1.0 / (1.0 + np.exp(-np.asarray(s, dtype=np.complex128) * LN2))


def _h_koebe(s):
    s = np.asarray(s, dtype=np.complex128)
    return (1 - np.exp(-s * LN2)) / (1 + np.exp(-s * LN2))


GENERATOR_NAMES = ("unit", "inv_1plus2s", "one_minus_2s", "koebe")


def named_generator(name: str) -> GeneratorSpec:
    """Named generators.

    ``unit``          ``H = 1`` (translations).
    ``inv_1plus2s``   ``H = 1/(1 + 2^{-s})``, i.e. ``h' = 1 + 2^{-s}``.
    ``one_minus_2s``  ``H = 1 - 2^{-s}``, i.e. ``h' = 1/(1 - 2^{-s})``.
    ``koebe``         ``H = (1 - 2^{-s})/(1 + 2^{-s})`` from the Koebe function with ``c = 1, k = 2``.
    """
    if name == "unit":
        return validate_generator(TruncatedDirichletSeries.constant(1.0), label=name)
    if name == "inv_1plus2s":
        return validate_generator(_h_inv_1plus2s, label=name)
    if name == "one_minus_2s":
        return validate_generator(TruncatedDirichletSeries.from_mapping({1: 1.0, 2: -1.0}), label=name)
    if name == "koebe":
        return validate_generator(_h_koebe, label=name)
    raise PreconditionError(f"unknown generator {name!r}; known: {', '.join(GENERATOR_NAMES)}")


def koebe_spec(k: int = 2, c: complex = 1.0) -> SpirallikeSpec:
    return SpirallikeSpec(diskmaps.Koebe(), c, k)


def slit_spec(c: float = 1.0, a: float = 0.5) -> SpirallikeSpec:
    return SpirallikeSpec(diskmaps.SlitDisc(a), c, 2)
