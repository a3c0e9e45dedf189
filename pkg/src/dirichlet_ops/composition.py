"""Coefficient-level composition ``f o Phi`` for series-backed symbols.

For ``Phi(s) = c s + a_1 + psi(s)`` (``psi`` without constant term)

    n^{-Phi(s)} = n^{-a_1} * (n^c)^{-s} * exp(-log(n) * psi(s)),

so the pullback of a monomial is an exponential of a Dirichlet series,
scaled and moved to the indices ``n^c * m``.  All pullbacks in one
:func:`compose` call share a single table of powers ``psi^j``.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .series import TailBound, TruncatedDirichletSeries, _PowerTable, _reduce, sup_norm_estimate
from .symbols import RegionSpec, Symbol, sigma_grid, t_grid

__all__ = [
    "PullbackResult",
    "ContractionReport",
    "DEFAULT_CLOSURE",
    "monomial_pullback",
    "compose",
    "compose_symbols",
    "verify_contraction",
    "symbol_digest",
]

DEFAULT_CLOSURE = 1 << 16


@dataclass(frozen=True)
class PullbackResult:
    series: TruncatedDirichletSeries
    source_index: int
    symbol_digest: str
    closure_index: int

    @property
    def discarded_tail_majorant(self) -> float:
        return 0.0 if self.series.tail is None else self.series.tail.majorant


def symbol_digest(sym: Symbol) -> str:
    """Short content hash of a series-backed symbol."""
    h = hashlib.sha1()
    h.update(str(sym.characteristic).encode())
    phi = sym.phi
    h.update(phi.indices.tobytes())
    h.update(phi.values.tobytes())
    h.update(str(phi.truncation).encode())
    if phi.tail is not None:
        h.update(repr((phi.tail.majorant, phi.tail.valid_from)).encode())
    return h.hexdigest()[:16]


class _Pullbacks:
    """Shared state for the pullbacks of one symbol up to one closure."""

    def __init__(self, sym: Symbol, closure: int, sigma0: float):
        if not sym.is_series_backed:
            raise PreconditionError("coefficient pullback needs a series-backed symbol")
        self.sym = sym
        self.c = sym.characteristic
        self.closure = int(closure)
        self.a1, self.psi = sym.phi.split_constant()
        phi_tail = sym.phi.tail
        self.sigma0 = sigma0 if phi_tail is None else max(sigma0, phi_tail.valid_from)
        self.psi_tail = 0.0 if phi_tail is None else phi_tail.majorant
        # the smallest n >= 2 needs the longest table
        top = self.closure // (2 ** self.c) if self.c else self.closure
        self.table = _PowerTable(self.psi, max(1, top), self.sigma0) if top >= 1 else None
        self.digest = symbol_digest(sym)

    def pullback(self, n: int) -> PullbackResult:
        if n < 1:
            raise PreconditionError("pullback index must be >= 1")
        shift = n ** self.c
        if shift > self.closure:
            raise PreconditionError(f"closure {self.closure} is below n^c = {shift}")
        if n == 1:
            unit = TruncatedDirichletSeries([1], [1.0], self.closure)
            return PullbackResult(unit, 1, self.digest, 1)
        cut = self.closure // shift
        log_n = math.log(n)
        idx, val = self.table.combine(-log_n, cut)
        scale = np.exp(-self.a1 * log_n)
        dil = shift ** (-self.sigma0) if self.c else 1.0
        majorant = self.table.dropped_majorant(log_n, cut)
        if self.psi_tail:
            majorant += math.exp(log_n * self.psi.abs_sum(self.sigma0)) * math.expm1(log_n * self.psi_tail)
        majorant *= abs(scale) * dil
        tail = None
        if majorant > 0 or self.sym.phi.tail is not None:
            tail = TailBound(majorant, self.sigma0)
        out = TruncatedDirichletSeries(idx * shift, val * scale, self.closure, tail)
        return PullbackResult(out, n, self.digest, int(cut * shift))


def monomial_pullback(n: int, sym: Symbol, closure: int = DEFAULT_CLOSURE, *,
                      tail_sigma: float = 0.0) -> PullbackResult:
    """Coefficients of ``n^{-Phi}`` up to ``closure``.

    The discarded part is bounded on ``Re s >= tail_sigma`` and returned as
    the series tail.
    """
    if n < 1:
        raise PreconditionError("pullback index must be >= 1")
    return _Pullbacks(sym, closure, tail_sigma).pullback(int(n))


def compose(f: TruncatedDirichletSeries, sym: Symbol, closure: int = DEFAULT_CLOSURE, *,
            tail_sigma: float = 0.0) -> TruncatedDirichletSeries:
    """``f o Phi = sum_n a_n n^{-Phi}`` summed coefficientwise, kept up to ``closure``.

    A truncated ``f`` is accepted when its tail bound holds on ``Re w >= 0``:
    ``Phi`` maps the half-plane into itself, so the bound transfers.
    """
    if f.tail is not None and f.tail.valid_from > 0:
        raise PreconditionError("f's tail bound must hold on Re s >= 0 to transfer through Phi")
    pb = _Pullbacks(sym, closure, tail_sigma)
    if f.nnz and f.indices[-1] ** sym.characteristic > closure:
        raise PreconditionError(f"closure {closure} is below N_f^c = {int(f.indices[-1]) ** sym.characteristic}")
    keys, vals = [], []
    majorant = 0.0 if f.tail is None else f.tail.majorant
    sigma0 = pb.sigma0
    exact = f.tail is None
    for n, a in zip(f.indices, f.values):
        r = pb.pullback(int(n)).series
        keys.append(r.indices)
        vals.append(r.values * a)
        if r.tail is not None:
            majorant += abs(a) * r.tail.majorant
            exact = exact and r.tail.majorant == 0 and sym.phi.tail is None
    if keys:
        idx, val = _reduce(np.concatenate(keys), np.concatenate(vals))
    else:
        idx, val = np.empty(0, np.int64), np.empty(0, np.complex128)
    if exact:
        return TruncatedDirichletSeries(idx, val, closure)
    return TruncatedDirichletSeries(idx, val, closure, TailBound(majorant, sigma0))


def compose_symbols(outer: Symbol, inner: Symbol, closure: int = DEFAULT_CLOSURE) -> Symbol:
    """``Phi o Psi`` for series-backed symbols: characteristic ``c_Phi c_Psi``."""
    if not (outer.is_series_backed and inner.is_series_backed):
        raise PreconditionError("symbol composition needs series-backed symbols")
    phi = compose(outer.phi, inner, closure)
    if outer.characteristic:
        phi = phi + inner.phi.scale(outer.characteristic)
    return Symbol(outer.characteristic * inner.characteristic, type(outer.part)(phi))


@dataclass(frozen=True)
class ContractionReport:
    sup_composed: float
    sup_f: float
    ratio: float
    holds: bool


def verify_contraction(f: TruncatedDirichletSeries, sym: Symbol, grid: RegionSpec,
                       tol: float = 1e-9) -> ContractionReport:
    """Sampled ``sup |f(Phi(s))|`` against the sampled ``sup |f|`` on ``Re s = 0``.

    ``f o Phi`` is evaluated pointwise, so periodic symbols are accepted too.
    """
    sig = sigma_grid(grid)
    ts = t_grid(sym, grid)
    sup_c = 0.0
    for sg in sig:
        w = sym(sg + 1j * ts)
        sup_c = max(sup_c, float(np.max(np.abs(f(w)))))
    sup_f = sup_norm_estimate(f, 0.0, grid.T_window, grid.grid_step)
    ratio = sup_c / sup_f if sup_f > 0 else (0.0 if sup_c == 0 else math.inf)
    return ContractionReport(sup_c, sup_f, ratio, sup_c <= sup_f + tol)
