"""Symbols ``Phi(s) = c s + phi(s)`` on the right half-plane and their class diagnostics.

A :class:`Symbol` couples a nonnegative integer characteristic ``c`` with a
part ``phi`` that is one of

* :class:`SeriesPart`: a (truncated) Dirichlet series,
* :class:`PeriodicPart`: ``g(scale * k^{-s}) + offset`` for a named disc map ``g``,
* :class:`ComposedPart`: ``g(psi(s)) + offset`` where ``psi`` is a Dirichlet
  series mapping the half-plane into the disc.

Every class verdict here is sample-based evidence: grids find
counterexamples and witnesses, they never prove membership.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import minimize_scalar

from . import diskmaps
from .errors import PreconditionError
from .series import TailBound, TruncatedDirichletSeries

__all__ = [
    "SeriesPart",
    "PeriodicPart",
    "ComposedPart",
    "Symbol",
    "RegionSpec",
    "WitnessPair",
    "ContinuityProbe",
    "ClassReport",
    "evaluate_symbol",
    "classify_G_infty",
    "classify_G",
    "probe_G_A",
    "compactness_diagnostic",
    "classify",
    "builtin_symbol",
    "translate_symbol",
    "lipschitz_bound",
    "sigma_grid",
    "t_grid",
    "filtered_points",
    "BUILTIN_NAMES",
    "DEFAULT_VERDICT_THRESHOLD",
]

DEFAULT_VERDICT_THRESHOLD = 0.1


# ---------------------------------------------------------------------------
# parts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeriesPart:
    phi: TruncatedDirichletSeries
    kind = "series"

    def __call__(self, s):
        return self.phi(s)

    def derivative(self, s):
        return self.phi.derivative()(s) if self.phi.is_exact else _fd(self, s)

    def translate(self, h):
        phi = self.phi
        vals = phi.values * np.exp(-h * phi.log_indices)
        tail = None if phi.tail is None else TailBound(phi.tail.majorant, phi.tail.valid_from - h)
        return SeriesPart(TruncatedDirichletSeries(phi.indices, vals, phi.truncation, tail))


@dataclass(frozen=True)
class PeriodicPart:
    """``g(scale * k^{-s}) + offset``; ``|scale| <= 1`` keeps the argument in the disc."""

    k: int
    g: object
    scale: complex = 1.0
    offset: complex = 0.0
    kind = "periodic"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise PreconditionError("periodic base k must be an integer >= 2")
        if abs(self.scale) > 1.0:
            raise PreconditionError("periodic scale must satisfy |scale| <= 1")

    @property
    def period(self) -> float:
        return 2.0 * math.pi / math.log(self.k)

    def inner(self, s):
        return self.scale * np.exp(-np.asarray(s, dtype=np.complex128) * math.log(self.k))

    def __call__(self, s):
        return self.g(self.inner(s)) + self.offset

    def derivative(self, s):
        if not hasattr(self.g, "derivative"):
            return _fd(self, s)
        z = self.inner(s)
        return self.g.derivative(z) * (-math.log(self.k)) * z

    def translate(self, h):
        return PeriodicPart(self.k, self.g, self.scale * self.k ** (-h), self.offset)


@dataclass(frozen=True)
class ComposedPart:
    """``g(psi(s)) + offset`` with ``psi`` a Dirichlet series valued in the unit disc."""

    g: object
    inner_series: TruncatedDirichletSeries
    offset: complex = 0.0
    kind = "composed"

    def inner(self, s):
        return self.inner_series(s)

    def __call__(self, s):
        return self.g(self.inner_series(s)) + self.offset

    def derivative(self, s):
        if not hasattr(self.g, "derivative") or not self.inner_series.is_exact:
            return _fd(self, s)
        return self.g.derivative(self.inner_series(s)) * self.inner_series.derivative()(s)

    def translate(self, h):
        return ComposedPart(self.g, SeriesPart(self.inner_series).translate(h).phi, self.offset)


def _fd(fn, s, h=1e-6):
    s = np.asarray(s, dtype=np.complex128)
    return (fn(s + h) - fn(s - h)) / (2 * h)


# ---------------------------------------------------------------------------
# region / grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegionSpec:
    """Sampling region: ``0 < Re s <= sigma_max``, ``|Im s| <= T_window``, A_M level ``M``.

    The sigma grid is geometric (ratio 2) from ``sigma_min`` up to
    ``grid_step`` and uniform with step ``grid_step`` above; t is uniform.
    """

    M: float
    sigma_max: float
    T_window: float
    grid_step: float
    sigma_min: float = 1e-6

    def __post_init__(self):
        for name in ("M", "sigma_max", "T_window", "grid_step", "sigma_min"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v) or (name == "M" and v == math.inf)):
                raise PreconditionError(f"RegionSpec.{name} must be positive, got {v}")
        if not self.grid_step < self.sigma_max:
            raise PreconditionError("grid_step must be smaller than sigma_max")


DEFAULT_REGION = RegionSpec(M=math.inf, sigma_max=4.0, T_window=1000.0, grid_step=0.05)


def sigma_grid(region: RegionSpec) -> np.ndarray:
    geo = []
    s = region.sigma_min
    while s < region.grid_step:
        geo.append(s)
        s *= 2.0
    n_uni = int(math.floor(region.sigma_max / region.grid_step + 1e-9))
    uni = region.grid_step * np.arange(1, n_uni + 1)
    return np.concatenate([np.asarray(geo, float), uni])


def _strip_period(sym) -> float | None:
    part = sym.part
    if isinstance(part, PeriodicPart):
        return part.period
    return None


def t_grid(sym: "Symbol", region: RegionSpec) -> np.ndarray:
    """Uniform t samples; periodic parts only need one period strip when ``c == 0``."""
    window = region.T_window
    period = _strip_period(sym)
    if period is not None and sym.characteristic == 0:
        window = min(window, period / 2.0)
    m = int(math.floor(window / region.grid_step + 1e-9))
    return region.grid_step * np.arange(-m, m + 1, dtype=float)


# ---------------------------------------------------------------------------
# symbol
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Symbol:
    characteristic: int
    part: object
    label: str = ""
    validation_region: RegionSpec = field(default=DEFAULT_REGION, compare=False)

    def __post_init__(self):
        c = self.characteristic
        if int(c) != c or c < 0:
            raise PreconditionError(f"characteristic must be a nonnegative integer, got {c}")
        object.__setattr__(self, "characteristic", int(c))
        if not isinstance(self.part, (SeriesPart, PeriodicPart, ComposedPart)):
            raise PreconditionError("symbol part must be SeriesPart, PeriodicPart or ComposedPart")

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_series(cls, c: int, phi: TruncatedDirichletSeries | dict, label: str = ""):
        if isinstance(phi, dict):
            phi = TruncatedDirichletSeries.from_mapping(phi)
        return cls(c, SeriesPart(phi), label)

    @classmethod
    def identity(cls):
        return cls.from_series(1, TruncatedDirichletSeries.zero(), "identity")

    @classmethod
    def periodic(cls, c: int, k: int, g, scale=1.0, offset=0.0, label: str = ""):
        return cls(c, PeriodicPart(k, g, scale, offset), label)

    # -- evaluation -------------------------------------------------------

    @property
    def is_series_backed(self) -> bool:
        return isinstance(self.part, SeriesPart)

    @property
    def phi(self) -> TruncatedDirichletSeries:
        if not self.is_series_backed:
            raise PreconditionError("symbol is not series-backed")
        return self.part.phi

    def __call__(self, s):
        s_arr = np.asarray(s, dtype=np.complex128)
        val = self.characteristic * s_arr + self.part(s_arr)
        return complex(val) if s_arr.ndim == 0 else val

    def derivative(self, s):
        s_arr = np.asarray(s, dtype=np.complex128)
        val = self.characteristic + self.part.derivative(s_arr)
        return complex(val) if s_arr.ndim == 0 else val

    @cached_property
    def self_map_evidence(self) -> float:
        """Grid minimum of ``Re Phi`` over :attr:`validation_region` (``>= 0`` supports a self-map)."""
        return _grid_min_re(self, self.validation_region)[0]

    def __repr__(self):
        tag = f" {self.label!r}" if self.label else ""
        return f"Symbol{tag}(c={self.characteristic}, part={self.part.kind})"


def evaluate_symbol(sym: Symbol, s: complex) -> complex:
    s = complex(s)
    if not s.real > 0:
        raise PreconditionError(f"symbols live on Re s > 0, got s = {s}")
    return sym(s)


def lipschitz_bound(sym: Symbol) -> float | None:
    """Certified ``sup |Phi'|`` on the half-plane via ``c + sum |a_n| log n``; None when uncertifiable."""
    if not sym.is_series_backed or sym.phi.tail is not None:
        return None
    phi = sym.phi
    return sym.characteristic + math.fsum(np.abs(phi.values) * phi.log_indices)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WitnessPair:
    s1: complex
    s2: complex
    gap: float
    value_gap: float

    @classmethod
    def of(cls, fn, s1, s2):
        s1, s2 = complex(s1), complex(s2)
        gap = abs(s1 - s2)
        if not gap > 0:
            raise PreconditionError("witness points must differ")
        return cls(s1, s2, gap, abs(complex(fn(s2)) - complex(fn(s1))))


@dataclass(frozen=True)
class ContinuityProbe:
    region: RegionSpec
    deltas: tuple
    omega: tuple
    worst_pairs: tuple
    threshold: float
    verdict: str
    points_retained: int

    def rows(self):
        """``(delta, omega, s1_re, s1_im, s2_re, s2_im)`` table rows."""
        out = []
        for d, w, p in zip(self.deltas, self.omega, self.worst_pairs):
            if p is None:
                out.append((d, w, math.nan, math.nan, math.nan, math.nan))
            else:
                out.append((d, w, p.s1.real, p.s1.imag, p.s2.real, p.s2.imag))
        return out


@dataclass(frozen=True)
class ClassReport:
    in_G_infty: bool | None = None
    G_infty_counterexample: complex | None = None
    in_G: bool | None = None
    G_counterexample: complex | None = None
    G_A_evidence: str | None = None
    G_A_witness: WitnessPair | None = None
    compactness: str | None = None
    compactness_value: float | None = None
    certified: bool = False

    def merge(self, other: "ClassReport") -> "ClassReport":
        vals = {}
        for name in self.__dataclass_fields__:
            mine, theirs = getattr(self, name), getattr(other, name)
            vals[name] = theirs if theirs not in (None, False) else mine
        return ClassReport(**vals)


# ---------------------------------------------------------------------------
# grid scans
# ---------------------------------------------------------------------------

def _grid_min_re(sym: Symbol, region: RegionSpec):
    """``(min Re Phi, argmin point, sigma index, t index)`` over the region grid."""
    sig = sigma_grid(region)
    ts = t_grid(sym, region)
    best, best_pt, best_ij = math.inf, None, (0, 0)
    for i, sg in enumerate(sig):
        vals = sym(sg + 1j * ts).real
        j = int(np.argmin(vals))
        if vals[j] < best:
            best, best_pt, best_ij = float(vals[j]), complex(sg, ts[j]), (i, j)
    return best, best_pt, best_ij[0], best_ij[1]


def classify_G_infty(sym: Symbol, grid: RegionSpec = DEFAULT_REGION) -> ClassReport:
    """Structural check plus the sampled range condition ``Re Phi >= 0``."""
    lo, pt, _, _ = _grid_min_re(sym, grid)
    if lo < 0:
        return ClassReport(in_G_infty=False, G_infty_counterexample=pt)
    return ClassReport(in_G_infty=True)


def classify_G(sym: Symbol, grid: RegionSpec = DEFAULT_REGION) -> ClassReport:
    """``c >= 1`` is in G outright; ``c = 0`` needs the range inside ``Re w >= 1/2``."""
    base = classify_G_infty(sym, grid)
    if not base.in_G_infty:
        return base.merge(ClassReport(in_G=False, G_counterexample=base.G_infty_counterexample))
    if sym.characteristic >= 1:
        return base.merge(ClassReport(in_G=True))
    lo, pt, _, _ = _grid_min_re(sym, grid)
    if lo < 0.5:
        return ClassReport(in_G_infty=True, in_G=False, G_counterexample=pt)
    return base.merge(ClassReport(in_G=True))


_STENCIL = np.exp(1j * np.pi * np.arange(8) / 4.0)


def filtered_points(sym: Symbol, region: RegionSpec) -> np.ndarray:
    """Grid points ``s`` with ``0 < Re Phi(s) < M``."""
    sig = sigma_grid(region)
    ts = t_grid(sym, region)
    keep = []
    for sg in sig:
        s = sg + 1j * ts
        v = sym(s).real
        keep.append(s[(v > 0) & (v < region.M)])
    return np.concatenate(keep)


def probe_G_A(sym: Symbol, region: RegionSpec, deltas, threshold: float = DEFAULT_VERDICT_THRESHOLD,
              fn=None) -> ContinuityProbe:
    """Sampled modulus of continuity of ``fn`` (default ``Phi``) on ``A_M``.

    Each retained grid point ``s`` is paired with ``s + delta e^{i theta}``
    for eight directions; both points must lie in ``A_M`` and the right
    half-plane.  ``omega(delta)`` is the largest value gap found, realised by
    the returned pair, so it is a lower estimate of the true modulus.  The
    verdict is ``violated`` when ``omega`` at the smallest delta exceeds the
    caller's ``threshold``.
    """
    deltas = sorted((float(d) for d in deltas), reverse=True)
    if not deltas or deltas[-1] <= 0:
        raise PreconditionError("deltas must be positive")
    fn = sym if fn is None else fn
    sig = sigma_grid(region)
    ts = t_grid(sym, region)
    best = [0.0] * len(deltas)
    pairs = [None] * len(deltas)
    retained = 0
    for sg in sig:
        s = sg + 1j * ts
        phi_s = sym(s)
        ok = (phi_s.real > 0) & (phi_s.real < region.M)
        if not ok.any():
            continue
        retained += int(ok.sum())
        s = s[ok]
        f_s = phi_s[ok] if fn is sym else fn(s)
        for k, d in enumerate(deltas):
            for e in _STENCIL:
                s2 = s + d * e
                if s2[0].real <= 0:
                    continue
                phi2 = sym(s2)
                ok2 = (phi2.real > 0) & (phi2.real < region.M)
                if not ok2.any():
                    continue
                f2 = phi2 if fn is sym else fn(s2)
                gaps = np.where(ok2, np.abs(f2 - f_s), -1.0)
                j = int(np.argmax(gaps))
                if gaps[j] > best[k]:
                    best[k] = float(gaps[j])
                    pairs[k] = WitnessPair(complex(s[j]), complex(s2[j]), float(abs(d * e)), float(gaps[j]))
    if retained == 0:
        raise PreconditionError(f"no grid point satisfies 0 < Re Phi < M = {region.M}; M too small")
    verdict = "violated" if best[-1] > threshold else "consistent"
    return ContinuityProbe(region, tuple(deltas), tuple(best), tuple(pairs), threshold, verdict, retained)


def _certified_series_floor(sym: Symbol) -> float | None:
    """``inf_{sigma >= 0} (c sigma + Re a_1 - sum_{n>=2} |a_n| n^{-sigma}) - tail``.

    The bracket is concave in sigma, so its infimum over ``[0, inf)`` sits at
    ``sigma = 0`` (the limit ``Re a_1`` at infinity when ``c = 0`` is larger).
    """
    if not sym.is_series_backed:
        return None
    phi = sym.phi
    if phi.tail is not None and phi.tail.valid_from > 0:
        return None
    a1 = phi.coeff(1)
    bound = a1.real - phi.abs_sum(0.0, skip_constant=True)
    if phi.tail is not None:
        bound -= phi.tail.majorant
    return bound


def _refine_min(sym: Symbol, sig: np.ndarray, ts: np.ndarray, i: int, j: int, step: float):
    """Bounded scalar descent in sigma, then t, then sigma again from a grid cell."""
    s_best = complex(sig[i], ts[j])
    best = sym(s_best).real

    def along_sigma(lo, hi, t):
        res = minimize_scalar(lambda x: sym(complex(x, t)).real, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-6})
        return complex(res.x, t), float(res.fun)

    def along_t(sg, lo, hi):
        res = minimize_scalar(lambda y: sym(complex(sg, y)).real, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-6})
        return complex(sg, res.x), float(res.fun)

    s_lo = sig[i - 1] if i > 0 else sig[0] * 1e-3
    s_hi = sig[i + 1] if i + 1 < sig.size else sig[i]
    for pt, val in (along_sigma(s_lo, s_hi, s_best.imag),):
        if val < best:
            s_best, best = pt, val
    pt, val = along_t(s_best.real, s_best.imag - step, s_best.imag + step)
    if val < best:
        s_best, best = pt, val
    pt, val = along_sigma(s_lo, s_hi, s_best.imag)
    if val < best:
        s_best, best = pt, val
    return best, s_best


def compactness_diagnostic(sym: Symbol, grid: RegionSpec = DEFAULT_REGION) -> ClassReport:
    """``compact(eps)`` when ``Re Phi >= eps > 0`` is certified, else the observed infimum.

    Series-backed symbols use the coefficient majorant (exact, no grid);
    other parts use the grid minimum less a Lipschitz padding estimated
    from sampled derivatives over one grid cell.
    """
    sig = sigma_grid(grid)
    ts = t_grid(sym, grid)
    lo, pt, i, j = _grid_min_re(sym, grid)
    observed, _ = _refine_min(sym, sig, ts, i, j, grid.grid_step)
    observed = min(observed, lo)

    floor = _certified_series_floor(sym)
    if floor is not None:
        if floor > 0:
            return ClassReport(compactness="compact", compactness_value=floor, certified=True)
        return ClassReport(compactness="noncompact_evidence", compactness_value=observed)

    # padding: local |Phi'| times the half-diagonal of the coarsest cell touching the minimum
    dmax = 0.0
    for sg in sig:
        dmax = max(dmax, float(np.max(np.abs(sym.derivative(sg + 1j * ts)))))
    pad = dmax * grid.grid_step * math.sqrt(0.5) + dmax * grid.sigma_min
    eps = lo - pad
    if eps > 0:
        return ClassReport(compactness="compact", compactness_value=eps)
    return ClassReport(compactness="noncompact_evidence", compactness_value=observed)


def classify(sym: Symbol, region: RegionSpec = DEFAULT_REGION, deltas=(1e-2, 1e-3),
             threshold: float = DEFAULT_VERDICT_THRESHOLD) -> ClassReport:
    """All diagnostics in one report."""
    rep = classify_G(sym, region)
    if rep.in_G_infty:
        try:
            probe = probe_G_A(sym, region, deltas, threshold)
            evid = "violated" if probe.verdict == "violated" else "consistent"
            rep = rep.merge(ClassReport(G_A_evidence=evid,
                                        G_A_witness=probe.worst_pairs[-1] if evid == "violated" else None))
        except PreconditionError:
            rep = rep.merge(ClassReport(G_A_evidence="consistent"))
        rep = rep.merge(compactness_diagnostic(sym, region))
    return rep


# ---------------------------------------------------------------------------
# builtins and translation
# ---------------------------------------------------------------------------

def _algebrab_phi():
    return TruncatedDirichletSeries.from_mapping({2: 0.5, 3: -0.5})


def builtin_symbol(name: str) -> Symbol:
    """Named constructions.

    ``example1_not_GA``
        ``f(2^{-s}) + 1`` with ``f(z) = exp((z+1)/(z-1))``; bounded, in G_infty, not in G_A.
    ``example2_GA_not_UC``
        ``T(2^{-s})`` with ``T`` the half-strip map of :class:`~dirichlet_ops.diskmaps.HalfStrip`.
    ``prop_algebrab_phi``
        ``(1/2) 2^{-s} - (1/2) 3^{-s}``.
    ``prop_algebrab_F``
        ``exp(i log((1+phi)/(1-phi)))`` with the previous ``phi``; a bounded
        Dirichlet series that is not uniformly continuous.

    Extra shorthands: ``identity``, ``shift1`` (``s+1``), ``shift1_plus_2s``
    (``s+1+2^{-s}``), ``G_member`` (``3/4 + 2^{-s}/8``), ``G_nonmember``
    (``0.3 + 2^{-s}/8``).
    """
    if name == "example1_not_GA":
        return Symbol.periodic(0, 2, diskmaps.SingularInner(1.0), label=name)
    if name == "example2_GA_not_UC":
        return Symbol.periodic(0, 2, diskmaps.HalfStrip(), label=name)
    if name == "prop_algebrab_phi":
        return Symbol.from_series(0, _algebrab_phi(), name)
    if name == "prop_algebrab_F":
        return Symbol(0, ComposedPart(diskmaps.AnnulusLog(), _algebrab_phi()), name)
    if name == "identity":
        return Symbol.identity()
    if name == "shift1":
        return Symbol.from_series(1, {1: 1.0}, name)
    if name == "shift1_plus_2s":
        return Symbol.from_series(1, {1: 1.0, 2: 1.0}, name)
    if name == "G_member":
        return Symbol.from_series(0, {1: 0.75, 2: 0.125}, name)
    if name == "G_nonmember":
        return Symbol.from_series(0, {1: 0.3, 2: 0.125}, name)
    raise PreconditionError(f"unknown builtin symbol {name!r}; known: {', '.join(BUILTIN_NAMES)}")


BUILTIN_NAMES = ("example1_not_GA", "example2_GA_not_UC", "prop_algebrab_phi", "prop_algebrab_F",
                 "identity", "shift1", "shift1_plus_2s", "G_member", "G_nonmember")


def translate_symbol(sym: Symbol, h: float) -> Symbol:
    """``s -> Phi(s + h)``; the characteristic contributes the constant ``c h``."""
    if not h > 0:
        raise PreconditionError("translation step must be positive")
    part = sym.part.translate(h)
    shift = sym.characteristic * h
    if shift:
        if isinstance(part, SeriesPart):
            part = SeriesPart(part.phi + TruncatedDirichletSeries.constant(shift))
        elif isinstance(part, PeriodicPart):
            part = PeriodicPart(part.k, part.g, part.scale, part.offset + shift)
        else:
            part = ComposedPart(part.g, part.inner_series, part.offset + shift)
    label = f"{sym.label}(s+{h:g})" if sym.label else ""
    return Symbol(sym.characteristic, part, label, sym.validation_region)
