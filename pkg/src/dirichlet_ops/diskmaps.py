"""Named closed-form holomorphic maps on the unit disc.

Each map is a small immutable object with a vectorised ``__call__``, a
``derivative`` where one is needed downstream, and ``name``/``params`` for
serialisation.  They are the ``g`` in periodic symbols ``c s + g(k^{-s})``
and the ``f`` in spirallike Koenigs functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError

__all__ = [
    "SingularInner",
    "HalfStrip",
    "AnnulusLog",
    "Cayley",
    "Koebe",
    "SlitDisc",
    "LinearFractional",
    "disc_map_from_dict",
]


def _arr(z):
    return np.asarray(z, dtype=np.complex128)


def _out(z, val):
    return complex(val) if np.ndim(z) == 0 else val


@dataclass(frozen=True)
class SingularInner:
    """``exp((z+1)/(z-1)) + offset``: the atomic singular inner function, bounded by 1, no limit at ``z = 1``."""

    offset: float = 0.0
    name = "singular_inner"

    @property
    def params(self):
        return {"offset": self.offset}

    def __call__(self, z):
        z = _arr(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.exp((z + 1) / (z - 1)) + self.offset
        return _out(z, val)

    def derivative(self, z):
        z = _arr(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.exp((z + 1) / (z - 1)) * (-2.0 / (z - 1) ** 2)
        return _out(z, val)

    @property
    def sup_bound(self):
        return 1.0 + abs(self.offset)


@dataclass(frozen=True)
class HalfStrip:
    """Conformal map of the disc onto ``{Re w > 0, |Im w| < 1}`` with ``1 -> infinity``.

    ``T(z) = (2/pi) asinh((1+z)/(1-z))``: the Cayley map lands in the right
    half-plane and ``asinh`` sends that onto the half-strip
    ``{Re > 0, |Im| < pi/2}``.  ``T(0) = (2/pi) asinh(1)``; ``T(-1) = 0``.
    """

    name = "half_strip"

    @property
    def params(self):
        return {}

    def __call__(self, z):
        z = _arr(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (2.0 / math.pi) * np.arcsinh((1 + z) / (1 - z))
        return _out(z, val)

    def derivative(self, z):
        z = _arr(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = (1 + z) / (1 - z)
            val = (2.0 / math.pi) / np.sqrt(1 + w * w) * 2.0 / (1 - z) ** 2
        return _out(z, val)


@dataclass(frozen=True)
class AnnulusLog:
    """``exp(i log((1+z)/(1-z)))`` with the principal log; the disc lands in ``e^{-pi/2} < |w| < e^{pi/2}``."""

    name = "annulus_log"

    @property
    def params(self):
        return {}

    def __call__(self, z):
        z = _arr(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.exp(1j * np.log((1 + z) / (1 - z)))
        return _out(z, val)


@dataclass(frozen=True)
class Cayley:
    """``(1+z)/(1-z)``: disc onto the right half-plane."""

    name = "cayley"

    @property
    def params(self):
        return {}

    def __call__(self, z):
        z = _arr(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (1 + z) / (1 - z)
        return _out(z, val)


@dataclass(frozen=True)
class Koebe:
    """Koebe function ``z/(1-z)^2``: univalent and starlike onto the plane minus ``(-inf, -1/4]``."""

    name = "koebe"

    @property
    def params(self):
        return {}

    def __call__(self, z):
        z = _arr(z)
        return _out(z, z / (1 - z) ** 2)

    def derivative(self, z):
        z = _arr(z)
        return _out(z, (1 + z) / (1 - z) ** 3)

    def inverse(self, q):
        """Root of ``q z^2 - (2q+1) z + q = 0`` inside the disc (the two roots have product 1)."""
        q = _arr(q)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.sqrt(4 * q + 1)
            z1 = ((2 * q + 1) - r) / (2 * q)
            z2 = ((2 * q + 1) + r) / (2 * q)
        z = np.where(np.abs(z1) <= np.abs(z2), z1, z2)
        z = np.where(q == 0, 0j, z)
        return _out(q, z)


@dataclass(frozen=True)
class LinearFractional:
    """``(a z + b) / (c z + d)``."""

    a: complex
    b: complex
    c: complex
    d: complex
    name = "linear_fractional"

    def __post_init__(self):
        if self.a * self.d - self.b * self.c == 0:
            raise PreconditionError("degenerate linear fractional map")

    @property
    def params(self):
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}

    def __call__(self, z):
        z = _arr(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (self.a * z + self.b) / (self.c * z + self.d)
        return _out(z, val)

    def derivative(self, z):
        z = _arr(z)
        det = self.a * self.d - self.b * self.c
        with np.errstate(divide="ignore", invalid="ignore"):
            val = det / (self.c * z + self.d) ** 2
        return _out(z, val)


class SlitDisc:
    """Riemann map of the disc onto the disc slit along ``[a, 1)``, normalised by ``f(0)=0``, ``f'(0)>0``.

    Built as an explicit chain of elementary maps; the inverse ``g`` is the
    same chain run backwards and fixes the normalising rotation and
    Moebius centre.  The image is starlike about 0, so the map also serves
    as a spirallike (``c = 1``) Koenigs datum.
    """

    name = "slit_disc"

    def __init__(self, a: float = 0.5):
        if not 0.0 < a < 1.0:
            raise PreconditionError("slit start must lie in (0, 1)")
        self.a = float(a)
        z0 = self._g_raw(0j)
        dg0 = self._g_raw_derivative(0j)
        self.z0 = z0
        # f = g^{-1}; f(0) = 0 forces the centre z0, f'(0) > 0 fixes the rotation
        self.lam = complex(np.conj(dg0) / abs(dg0))

    @property
    def params(self):
        return {"a": self.a}

    def __eq__(self, other):
        return isinstance(other, SlitDisc) and other.a == self.a

    def __hash__(self):
        return hash(("slit_disc", self.a))

    def __repr__(self):
        return f"SlitDisc(a={self.a})"

    # forward (image -> unit disc) map g, before normalisation
    def _g_chain(self, w):
        a = self.a
        m = (w - a) / (1 - a * w)
        # square root with the cut along the slit image [0, 1): arg in (0, 2 pi)
        r = np.abs(m)
        th = np.angle(m)
        th = np.where(th <= 0, th + 2 * math.pi, th)
        v = np.sqrt(r) * np.exp(0.5j * th)
        x = (1 + v) / (1 - v)
        y = x * x
        return m, v, x, y

    def _g_raw(self, w):
        w = _arr(w)
        _, _, _, y = self._g_chain(w)
        return (y - 1j) / (y + 1j)

    def _g_raw_derivative(self, w):
        w = _arr(w)
        a = self.a
        m, v, x, y = self._g_chain(w)
        dm = (1 - a * a) / (1 - a * w) ** 2
        dv = 1.0 / (2 * v)
        dx = 2.0 / (1 - v) ** 2
        dy = 2 * x
        dc = 2j / (y + 1j) ** 2
        return dc * dy * dx * dv * dm

    def inverse(self, w):
        """``f^{-1}``: slit disc onto the unit disc."""
        w = _arr(w)
        zeta = self._g_raw(w)
        z1 = (zeta - self.z0) / (1 - np.conj(self.z0) * zeta)
        return _out(w, z1 * self.lam)

    def _chain(self, z):
        a = self.a
        z1 = z / self.lam
        zeta = (z1 + self.z0) / (1 + np.conj(self.z0) * z1)
        with np.errstate(divide="ignore", invalid="ignore"):
            y = 1j * (1 + zeta) / (1 - zeta)
        x = np.sqrt(y)
        v = (x - 1) / (x + 1)
        u = v * v
        w = (u + a) / (1 + a * u)
        return z1, zeta, y, x, v, u, w

    def __call__(self, z):
        z = _arr(z)
        return _out(z, self._chain(z)[-1])

    def derivative(self, z):
        z = _arr(z)
        a = self.a
        z1, zeta, y, x, v, u, w = self._chain(z)
        d = 1.0 / self.lam
        d = d * (1 - abs(self.z0) ** 2) / (1 + np.conj(self.z0) * z1) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            d = d * 2j / (1 - zeta) ** 2
        d = d / (2 * x)
        d = d * 2 / (x + 1) ** 2
        d = d * 2 * v
        d = d * (1 - a * a) / (1 + a * u) ** 2
        return _out(z, d)


_REGISTRY = {
    "singular_inner": lambda p: SingularInner(float(p.get("offset", 0.0))),
    "half_strip": lambda p: HalfStrip(),
    "annulus_log": lambda p: AnnulusLog(),
    "cayley": lambda p: Cayley(),
    "koebe": lambda p: Koebe(),
    "slit_disc": lambda p: SlitDisc(float(p.get("a", 0.5))),
    "linear_fractional": lambda p: LinearFractional(*(complex(p[k]) for k in "abcd")),
}


def disc_map_from_dict(name: str, params: dict | None = None):
    try:
        make = _REGISTRY[name]
    except KeyError:
        raise PreconditionError(f"unknown disc map {name!r}; known: {sorted(_REGISTRY)}") from None
    return make(params or {})
