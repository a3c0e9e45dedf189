"""Finite-truncation Dirichlet series: storage, algebra, evaluation, abscissae.

A :class:`TruncatedDirichletSeries` holds the coefficients ``a_n`` for
``1 <= n <= N`` sparsely.  It is either an exact Dirichlet polynomial
(``tail is None``) or a truncation of an infinite series together with a
:class:`TailBound`: a number ``R`` such that ``|sum_{n>N} a_n n^{-s}| <= R``
whenever ``Re s >= valid_from``.  The algebra below keeps that bookkeeping
sound; nothing is silently dropped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
from scipy.optimize import minimize_scalar

from . import _accel
from .errors import PreconditionError

__all__ = [
    "TailBound",
    "TruncatedDirichletSeries",
    "EvaluationResult",
    "AbscissaeReport",
    "GrowthModel",
    "evaluate",
    "add",
    "multiply",
    "exp_series",
    "estimate_abscissae",
    "coefficient_stream",
    "sup_norm_estimate",
    "ESTIMATOR_TOLERANCE",
]

ESTIMATOR_TOLERANCE = 0.15


@dataclass(frozen=True)
class TailBound:
    majorant: float
    valid_from: float

    def __post_init__(self):
        object.__setattr__(self, "majorant", float(self.majorant))
        object.__setattr__(self, "valid_from", float(self.valid_from))
        if not (self.majorant >= 0.0 and math.isfinite(self.majorant)):
            raise PreconditionError(f"tail majorant must be finite and >= 0, got {self.majorant}")
        if not math.isfinite(self.valid_from):
            raise PreconditionError("tail valid_from must be finite")


class TruncatedDirichletSeries:
    """Sparse coefficients ``a_n`` (``1 <= n <= truncation``) plus tail metadata.

    Instances are immutable; the index and value arrays are read-only.
    Exact zeros are not stored.
    """

    __slots__ = ("indices", "values", "truncation", "tail", "_log_n")

    def __init__(self, indices, values, truncation: int | None = None, tail: TailBound | None = None):
        idx = np.asarray(indices, dtype=np.int64).ravel()
        val = np.asarray(values, dtype=np.complex128).ravel()
        if idx.shape != val.shape:
            raise PreconditionError("indices and values differ in length")
        if idx.size:
            order = np.argsort(idx, kind="stable")
            idx, val = idx[order], val[order]
            if idx[0] < 1:
                raise PreconditionError("Dirichlet indices start at 1")
            if np.any(np.diff(idx) == 0):
                uniq, inv = np.unique(idx, return_inverse=True)
                merged = np.zeros(uniq.size, np.complex128)
                np.add.at(merged, inv, val)
                idx, val = uniq, merged
            keep = val != 0
            idx, val = idx[keep], val[keep]
        top = int(idx[-1]) if idx.size else 1
        if truncation is None:
            truncation = top
        truncation = int(truncation)
        if truncation < 1:
            raise PreconditionError("truncation index must be >= 1")
        if idx.size and top > truncation:
            raise PreconditionError(f"index {top} exceeds truncation {truncation}")
        idx.setflags(write=False)
        val.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)
        object.__setattr__(self, "truncation", truncation)
        object.__setattr__(self, "tail", tail)
        log_n = np.log(idx.astype(np.float64))
        log_n.setflags(write=False)
        object.__setattr__(self, "_log_n", log_n)

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedDirichletSeries is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_mapping(cls, coeffs: Mapping[int, complex] | Iterable[tuple[int, complex]],
                     truncation: int | None = None, tail: TailBound | None = None):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        pairs = [(int(n), complex(a)) for n, a in items]
        idx = [p[0] for p in pairs]
        val = [p[1] for p in pairs]
        return cls(idx, val, truncation, tail)

    @classmethod
    def dense(cls, coeffs, truncation: int | None = None, tail: TailBound | None = None):
        """Build from ``coeffs[0] = a_1, coeffs[1] = a_2, ...``."""
        coeffs = np.asarray(coeffs, dtype=np.complex128).ravel()
        n = np.arange(1, coeffs.size + 1)
        return cls(n, coeffs, truncation if truncation is not None else max(1, coeffs.size), tail)

    @classmethod
    def monomial(cls, n: int, coeff: complex = 1.0):
        return cls([n], [coeff], n)

    @classmethod
    def constant(cls, c: complex):
        return cls([1], [c], 1)

    @classmethod
    def zero(cls):
        return cls([], [], 1)

    @classmethod
    def unit(cls):
        return cls([1], [1.0], 1)

    # -- inspection ---------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.tail is None

    @property
    def tail_kind(self) -> str:
        return "exact_polynomial" if self.tail is None else "truncated_with_bound"

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    @property
    def log_indices(self) -> np.ndarray:
        return self._log_n

    def coeff(self, n: int) -> complex:
        pos = np.searchsorted(self.indices, n)
        if pos < self.indices.size and self.indices[pos] == n:
            return complex(self.values[pos])
        return 0j

    def as_dict(self) -> dict[int, complex]:
        return {int(n): complex(a) for n, a in zip(self.indices, self.values)}

    def abs_sum(self, sigma: float = 0.0, *, skip_constant: bool = False) -> float:
        """``sum |a_n| n^{-sigma}`` over the stored coefficients."""
        w = np.abs(self.values) * np.exp(-sigma * self._log_n)
        if skip_constant and self.indices.size and self.indices[0] == 1:
            w = w[1:]
        return math.fsum(w)

    def split_constant(self) -> tuple[complex, "TruncatedDirichletSeries"]:
        """Return ``(a_1, f - a_1)``."""
        a1 = self.coeff(1)
        if a1 == 0:
            return 0j, self
        return a1, TruncatedDirichletSeries(self.indices[1:], self.values[1:], self.truncation, self.tail)

    def __call__(self, s):
        """Plain compensated evaluation of the stored part (vectorised, no tail)."""
        arr = np.asarray(s, dtype=np.complex128)
        out = _accel.dirichlet_sum(self._log_n, self.values, arr.ravel())
        if arr.ndim == 0:
            return complex(out[0])
        return out.reshape(arr.shape)

    def derivative(self):
        """Termwise ``d/ds``: coefficients ``-a_n log n``; the tail is not differentiated."""
        if self.tail is not None:
            raise PreconditionError("derivative of a truncated series has no tail control")
        return TruncatedDirichletSeries(self.indices, -self.values * self._log_n, self.truncation)

    # -- algebra sugar ------------------------------------------------------

    def scale(self, c: complex) -> "TruncatedDirichletSeries":
        c = complex(c)
        tail = None if self.tail is None else TailBound(abs(c) * self.tail.majorant, self.tail.valid_from)
        return TruncatedDirichletSeries(self.indices, self.values * c, self.truncation, tail)

    def dilate(self, m: int) -> "TruncatedDirichletSeries":
        """Multiply by the monomial ``m^{-s}``: every index ``n`` moves to ``m*n``."""
        tail = None
        if self.tail is not None:
            tail = TailBound(self.tail.majorant * m ** (-self.tail.valid_from), self.tail.valid_from)
        return TruncatedDirichletSeries(self.indices * m, self.values, self.truncation * m, tail)

    def __add__(self, other):
        if isinstance(other, TruncatedDirichletSeries):
            return add(self, other)
        if np.isscalar(other):
            return add(self, TruncatedDirichletSeries.constant(other))
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        if isinstance(other, TruncatedDirichletSeries):
            return add(self, -other)
        if np.isscalar(other):
            return add(self, TruncatedDirichletSeries.constant(-complex(other)))
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, TruncatedDirichletSeries):
            return multiply(self, other)
        if np.isscalar(other):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return self.scale(other)
        return NotImplemented

    def __repr__(self):
        head = ", ".join(f"{n}: {complex(a):.6g}" for n, a in zip(self.indices[:6], self.values[:6]))
        more = ", ..." if self.indices.size > 6 else ""
        tail = "exact" if self.tail is None else f"tail<={self.tail.majorant:.3g} for Re s>={self.tail.valid_from:g}"
        return f"TruncatedDirichletSeries({{{head}{more}}}, N={self.truncation}, {tail})"


@dataclass(frozen=True)
class EvaluationResult:
    value: complex
    tail_bound: float | None = None


def evaluate(f: TruncatedDirichletSeries, s: complex) -> EvaluationResult:
    """Compensated partial sum at ``s`` with the tail bound attached when it applies."""
    s = complex(s)
    value = complex(_accel.dirichlet_sum(f.log_indices, f.values, np.array([s]))[0])
    bound = None
    if f.tail is not None and s.real >= f.tail.valid_from:
        bound = f.tail.majorant
    return EvaluationResult(value, bound)


# ---------------------------------------------------------------------------
# sparse helpers (raw arrays, shared with composition)
# ---------------------------------------------------------------------------

def _reduce(keys, vals):
    if keys.size == 0:
        return np.empty(0, np.int64), np.empty(0, np.complex128)
    uniq, inv = np.unique(keys, return_inverse=True)
    re = np.bincount(inv, weights=vals.real, minlength=uniq.size)
    im = np.bincount(inv, weights=vals.imag, minlength=uniq.size)
    out = re + 1j * im
    keep = out != 0
    return uniq[keep], out[keep]


def _sparse_mul(ia, va, ib, vb, limit):
    """Dirichlet convolution of two sparse vectors, indices kept ``<= limit``."""
    pa, pb = _accel.pair_enum(ia, ib, limit)
    return _reduce(ia[pa] * ib[pb], va[pa] * vb[pb])


def _dropped_pair_mass(ia, wa, ib, wb, limit):
    """``sum |a_d||b_e| (de)^{-sigma}`` over pairs with ``d*e > limit``; weights pre-scaled."""
    if len(ia) == 0 or len(ib) == 0:
        return 0.0
    # for each d the dropped partners are the e > limit // d, a suffix of the sorted ib
    suffix = np.concatenate([np.cumsum(wb[::-1])[::-1], [0.0]])
    pos = np.searchsorted(ib, limit // np.asarray(ia), side="right")
    return math.fsum(wa * suffix[pos])


def _weights(f: TruncatedDirichletSeries, sigma: float) -> np.ndarray:
    return np.abs(f.values) * np.exp(-sigma * f.log_indices)


def _tail_sigma(*series, default=0.0):
    vals = [g.tail.valid_from for g in series if g.tail is not None]
    return max(vals) if vals else default


def add(f: TruncatedDirichletSeries, g: TruncatedDirichletSeries) -> TruncatedDirichletSeries:
    """Coefficientwise sum.

    For two exact polynomials the result is exact.  Otherwise the truncation
    index is the smallest one among the truncated operands; known
    coefficients of an exact operand beyond it are folded into the tail.
    """
    idx = np.concatenate([f.indices, g.indices])
    val = np.concatenate([f.values, g.values])
    if f.is_exact and g.is_exact:
        idx, val = _reduce(idx, val)
        return TruncatedDirichletSeries(idx, val, max(f.truncation, g.truncation))
    n_cut = min(h.truncation for h in (f, g) if h.tail is not None)
    sigma0 = _tail_sigma(f, g)
    idx, val = _reduce(idx, val)
    over = idx > n_cut
    dropped = math.fsum(np.abs(val[over]) * np.exp(-sigma0 * np.log(idx[over].astype(float))))
    majorant = dropped + sum(h.tail.majorant for h in (f, g) if h.tail is not None)
    return TruncatedDirichletSeries(idx[~over], val[~over], n_cut, TailBound(majorant, sigma0))


def multiply(f: TruncatedDirichletSeries, g: TruncatedDirichletSeries, *,
             limit: int | None = None, tail_sigma: float = 0.0) -> TruncatedDirichletSeries:
    """Dirichlet convolution ``c_n = sum_{d|n} a_d b_{n/d}``.

    Exact polynomials keep the full product closure ``N_f * N_g`` unless
    ``limit`` caps it; any mass cut off by ``limit`` becomes a tail bound
    valid for ``Re s >= tail_sigma``.  With a truncated operand the result
    stops at the smallest truncated index, since coefficients beyond it
    depend on unknown tails.
    """
    if f.is_exact and g.is_exact:
        cut = f.truncation * g.truncation
        if limit is not None:
            cut = min(cut, int(limit))
        idx, val = _sparse_mul(f.indices, f.values, g.indices, g.values, cut)
        dropped = _dropped_pair_mass(f.indices, _weights(f, tail_sigma), g.indices, _weights(g, tail_sigma), cut)
        if dropped == 0.0:
            return TruncatedDirichletSeries(idx, val, cut)
        return TruncatedDirichletSeries(idx, val, cut, TailBound(dropped, tail_sigma))

    cut = min(h.truncation for h in (f, g) if h.tail is not None)
    if limit is not None:
        cut = min(cut, int(limit))
    sigma0 = _tail_sigma(f, g)
    wf, wg = _weights(f, sigma0), _weights(g, sigma0)
    idx, val = _sparse_mul(f.indices, f.values, g.indices, g.values, cut)
    dropped = _dropped_pair_mass(f.indices, wf, g.indices, wg, cut)
    rf = f.tail.majorant if f.tail is not None else 0.0
    rg = g.tail.majorant if g.tail is not None else 0.0
    majorant = dropped + math.fsum(wf) * rg + rf * math.fsum(wg) + rf * rg
    return TruncatedDirichletSeries(idx, val, cut, TailBound(majorant, sigma0))


# ---------------------------------------------------------------------------
# exponentials
# ---------------------------------------------------------------------------

class _PowerTable:
    """Sparse powers ``psi^j`` (``j = 0..J``) of a series without constant term, cut at ``limit``.

    Also keeps the matching powers of ``|psi|`` weighted by ``m^{-sigma0}``
    so that tails of ``exp(x psi)`` can be bounded for any ``|x|`` and any
    cut ``L <= limit``.
    """

    def __init__(self, psi: TruncatedDirichletSeries, limit: int, sigma0: float):
        self.limit = int(limit)
        self.sigma0 = sigma0
        self.psi_abs_sum = psi.abs_sum(sigma0)
        idx = psi.indices[psi.indices <= self.limit]
        val = psi.values[psi.indices <= self.limit]
        wabs = np.abs(val)
        self.powers = [(np.array([1], np.int64), np.array([1.0 + 0j]))]
        self.abs_powers = [(np.array([1], np.int64), np.array([1.0]))]
        cur_i, cur_v = self.powers[0]
        abs_i, abs_v = self.abs_powers[0]
        while True:
            cur_i, cur_v = _sparse_mul(cur_i, cur_v, idx, val, self.limit)
            abs_i, abs_c = _sparse_mul(abs_i, abs_v.astype(np.complex128), idx, wabs.astype(np.complex128), self.limit)
            abs_v = abs_c.real
            if abs_i.size == 0:
                break
            self.powers.append((cur_i, cur_v))
            self.abs_powers.append((abs_i, abs_v))

    @property
    def order(self) -> int:
        return len(self.powers) - 1

    def combine(self, x: complex, cut: int):
        """Coefficients of ``exp(x psi)`` at indices ``<= cut``."""
        keys, vals = [], []
        w = 1.0 + 0j
        for j, (i, v) in enumerate(self.powers):
            if j:
                w = w * x / j
            m = i <= cut
            keys.append(i[m])
            vals.append(v[m] * w)
        return _reduce(np.concatenate(keys), np.concatenate(vals))

    def dropped_majorant(self, x_abs: float, cut: int) -> float:
        """Bound on ``sum_{m>cut} |[exp(x psi)]_m| m^{-sigma0}`` for ``|x| = x_abs``."""
        big_psi = self.psi_abs_sum
        total = 0.0
        w = 1.0
        for j, (i, v) in enumerate(self.abs_powers):
            if j:
                w *= x_abs / j
            kept = math.fsum(v[i <= cut] * np.exp(-self.sigma0 * np.log(i[i <= cut].astype(float))))
            total += w * max(0.0, big_psi ** j - kept)
        # powers past the table have no index <= limit at all
        y = x_abs * big_psi
        j = self.order + 1
        term = y ** j / math.factorial(j) if y > 0 else 0.0
        while term > 0 and term > 1e-18 * max(total, 1e-300):
            total += term
            j += 1
            term *= y / j
        return total


def exp_series(f: TruncatedDirichletSeries, *, limit: int | None = None,
               tail_sigma: float = 0.0) -> TruncatedDirichletSeries:
    """Coefficients of ``exp(f) = sum_j f^j / j!`` up to the truncation index.

    ``f`` must have zero constant term; then ``f^j`` lives on indices
    ``>= 2^j`` and the sum is finite below any cut.  The cut defaults to
    ``f.truncation`` (capped by ``limit``; an exact ``f`` may take a larger
    ``limit``).  The result carries a tail bound valid for
    ``Re s >= max(tail_sigma, f.tail.valid_from)``.
    """
    if f.coeff(1) != 0:
        raise PreconditionError("exp_series needs a zero constant term; factor exp(a_1) out first")
    if f.nnz == 0 and f.is_exact:
        return TruncatedDirichletSeries.unit()
    if limit is None:
        cut = f.truncation
    elif f.is_exact:
        cut = int(limit)
    else:
        cut = min(f.truncation, int(limit))
    sigma0 = tail_sigma if f.tail is None else max(tail_sigma, f.tail.valid_from)
    table = _PowerTable(f, cut, sigma0)
    idx, val = table.combine(1.0, cut)
    majorant = table.dropped_majorant(1.0, cut)
    if f.tail is not None:
        majorant += math.exp(f.abs_sum(sigma0)) * math.expm1(f.tail.majorant)
    return TruncatedDirichletSeries(idx, val, cut, TailBound(majorant, sigma0))


# ---------------------------------------------------------------------------
# abscissae
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GrowthModel:
    """Assumed size of the unseen coefficients: ``|a_n| = O(n^exponent)`` for ``n > N``."""

    exponent: float


@dataclass(frozen=True)
class AbscissaeReport:
    sigma_c_est: float
    sigma_a_est: float
    sigma_u_interval: tuple[float, float]
    samples_used: int

    def chain_holds(self, tol: float = ESTIMATOR_TOLERANCE) -> bool:
        if self.samples_used == 0:
            return True
        c, a = self.sigma_c_est, self.sigma_a_est
        return c <= a + tol and a <= c + 1.0 + tol


def _slope(ms, values):
    ok = values > 0
    if ok.sum() < 2:
        return None
    x = np.log(ms[ok].astype(float))
    y = np.log(values[ok])
    return float(np.polyfit(x, y, 1)[0])


def _ladder(n_total: int, top: int) -> np.ndarray:
    base = n_total ** 0.125
    rungs = []
    j = 0
    while base * 2 ** j <= top:
        rungs.append(int(base * 2 ** j))
        j += 1
    return np.unique(np.asarray(rungs, dtype=np.int64).clip(1))


def _block_profiles(a: np.ndarray, rungs: np.ndarray):
    """Per block ``(M_j, M_{j+1}]``: the mass ``sum |a_n|`` and the oscillation ``max |S_m - S_{M_j}|``."""
    abs_cum = np.concatenate([[0.0], np.cumsum(np.abs(a))])
    mass = abs_cum[rungs[1:]] - abs_cum[rungs[:-1]]
    osc = np.empty(rungs.size - 1)
    for j, (lo, hi) in enumerate(zip(rungs[:-1], rungs[1:])):
        osc[j] = np.max(np.abs(np.cumsum(a[lo:hi])))
    return mass, osc


def coefficient_stream(coeffs, growth: GrowthModel | None = None) -> TruncatedDirichletSeries:
    """Wrap the first ``N`` coefficients of an infinite series as a truncated series.

    The unseen coefficients are assumed to obey ``|a_n| <= C n^e`` with ``e``
    from ``growth`` (default: the smallest exponent fitting the given
    coefficients) and ``C`` fitted likewise, so on ``Re s >= e + 2`` the tail
    is at most ``C/N``.
    """
    a = np.asarray(coeffs, dtype=np.complex128).ravel()
    N = a.size
    if N < 2:
        raise PreconditionError("a coefficient stream needs at least two terms")
    n = np.arange(1, N + 1, dtype=float)
    mag = np.abs(a)
    if growth is None:
        nz = (mag[1:] > 0)
        e = float(np.max(np.log(mag[1:][nz]) / np.log(n[1:][nz]))) if nz.any() else 0.0
    else:
        e = float(growth.exponent)
    C = max(1.0, float(np.max(mag * n ** (-e))))
    return TruncatedDirichletSeries.dense(a, N, TailBound(C / N, e + 2.0))


def estimate_abscissae(f: TruncatedDirichletSeries, tail_model: GrowthModel | None = None,
                       *, min_terms: int = 32) -> AbscissaeReport:
    """Slope-fit estimates of the convergence and absolute-convergence abscissae.

    The partial sums are read on the ladder ``M = N^{1/8} 2^j`` and the
    fit uses the rungs ``M >= N^{1/4}``.  Between consecutive rungs the
    block mass ``sum |a_n|`` and the block oscillation ``max |S_m - S_M|``
    both scale like ``M^sigma`` (with ``sigma = sigma_a`` and
    ``sigma = sigma_c``) whatever the sign of ``sigma``, so one
    least-squares slope per profile covers growing and convergent sums
    alike and no unknown ``sum_{n > N}`` enters.
    """
    if f.is_exact or f.nnz < min_terms:
        inf = -math.inf
        return AbscissaeReport(inf, inf, (inf, inf), 0)
    n_total = f.truncation
    a = np.zeros(n_total, np.complex128)
    a[f.indices - 1] = f.values
    rungs = _ladder(n_total, n_total)
    rungs = rungs[rungs >= n_total ** 0.25]
    if rungs.size < 3:
        rungs = _ladder(n_total, n_total)[-3:]
    mass, osc = _block_profiles(a, rungs)
    starts = rungs[:-1]
    sigma_a = _slope(starts, mass)
    sigma_c = _slope(starts, osc)
    # no mass past N^{1/4}: nothing to fit, the data look like a polynomial
    sigma_a = -math.inf if sigma_a is None else sigma_a
    sigma_c = -math.inf if sigma_c is None else sigma_c
    if tail_model is not None:
        sigma_c = max(sigma_c, tail_model.exponent)
        sigma_a = max(sigma_a, tail_model.exponent + 1.0)
    return AbscissaeReport(sigma_c, sigma_a, (sigma_c, sigma_a), 2 * starts.size)


# ---------------------------------------------------------------------------
# sup norm on a vertical line
# ---------------------------------------------------------------------------

def sup_norm_estimate(f: TruncatedDirichletSeries, sigma: float, T_window: float, grid_step: float,
                      *, refine: bool = True) -> float:
    """Sampled ``max |f|`` on ``Re s = sigma``, ``|Im s| <= T_window``.

    Every returned value is attained at a sampled point, so it is a lower
    bound for the sup over the half-plane ``Re s >= sigma``.  With
    ``refine`` the best grid cell is polished by bounded scalar maximisation.
    """
    if sigma < 0:
        raise PreconditionError("sigma must be >= 0")
    if T_window <= 0 or grid_step <= 0:
        raise PreconditionError("T_window and grid_step must be positive")
    if f.nnz == 0:
        return 0.0
    count = int(math.floor(2 * T_window / grid_step)) + 1
    best, j = _accel.line_max_abs(f.log_indices, f.values, complex(sigma, -T_window), complex(0, grid_step), count)
    if refine and count > 1:
        t_best = -T_window + j * grid_step
        lo, hi = max(-T_window, t_best - grid_step), min(T_window, t_best + grid_step)

        def neg_abs(t):
            return -abs(f(complex(sigma, t)))

        res = minimize_scalar(neg_abs, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        best = max(best, -float(res.fun))
    return float(best)
