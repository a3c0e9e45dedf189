"""Hot numeric kernels.

Every kernel has a numba implementation and a pure-numpy implementation with
identical semantics.  The numba path is used when numba imports cleanly and
the environment variable ``DIRICHLET_OPS_DISABLE_NUMBA`` is unset (or ``0``).
Both variants stay importable as ``<name>_nb`` / ``<name>_np`` so tests and
benchmarks can compare them directly.
"""
from __future__ import annotations

import math
import os

import numpy as np

_DISABLED = os.environ.get("DIRICHLET_OPS_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("numba disabled by DIRICHLET_OPS_DISABLE_NUMBA")
    import numba

    njit = numba.njit(cache=True, nogil=True)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False

    def njit(func):
        return func


BACKEND = "numba" if HAVE_NUMBA else "numpy"

# rows * terms per chunk in the numpy fallbacks
_CHUNK = 1 << 21


# ---------------------------------------------------------------------------
# Dirichlet sums  sum_k c_k exp(-s * log_n_k), compensated
# ---------------------------------------------------------------------------

@njit
def _dirichlet_sum_nb(log_n, coeffs, s):
    out = np.empty(s.size, np.complex128)
    for p in range(s.size):
        sr = s[p].real
        si = s[p].imag
        acc_r = 0.0
        comp_r = 0.0
        acc_i = 0.0
        comp_i = 0.0
        for k in range(log_n.size):
            mag = math.exp(-sr * log_n[k])
            ang = -si * log_n[k]
            tr = mag * math.cos(ang)
            ti = mag * math.sin(ang)
            a = coeffs[k]
            vr = a.real * tr - a.imag * ti
            vi = a.real * ti + a.imag * tr
            # Neumaier
            t = acc_r + vr
            if abs(acc_r) >= abs(vr):
                comp_r += (acc_r - t) + vr
            else:
                comp_r += (vr - t) + acc_r
            acc_r = t
            t = acc_i + vi
            if abs(acc_i) >= abs(vi):
                comp_i += (acc_i - t) + vi
            else:
                comp_i += (vi - t) + acc_i
            acc_i = t
        out[p] = complex(acc_r + comp_r, acc_i + comp_i)
    return out


def _neumaier_columns(terms):
    """Compensated sum over axis 1, vectorised across rows."""
    acc = np.zeros(terms.shape[0])
    comp = np.zeros(terms.shape[0])
    for k in range(terms.shape[1]):
        v = terms[:, k]
        t = acc + v
        big = np.abs(acc) >= np.abs(v)
        comp += np.where(big, (acc - t) + v, (v - t) + acc)
        acc = t
    return acc + comp


def _dirichlet_sum_np(log_n, coeffs, s):
    out = np.empty(s.size, np.complex128)
    n_terms = log_n.size
    if n_terms == 0:
        out[:] = 0.0
        return out
    rows = max(1, _CHUNK // n_terms)
    for start in range(0, s.size, rows):
        block = s[start:start + rows]
        terms = coeffs[None, :] * np.exp(-np.outer(block, log_n))
        if n_terms <= 64:
            re = _neumaier_columns(terms.real)
            im = _neumaier_columns(terms.imag)
        else:
            re = np.array([math.fsum(r) for r in terms.real])
            im = np.array([math.fsum(r) for r in terms.imag])
        out[start:start + rows] = re + 1j * im
    return out


def dirichlet_sum(log_n, coeffs, s):
    """Evaluate ``sum_k coeffs[k] * exp(-s * log_n[k])`` at every point of ``s``."""
    log_n = np.ascontiguousarray(log_n, dtype=np.float64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    s = np.ascontiguousarray(np.atleast_1d(s), dtype=np.complex128).ravel()
    if HAVE_NUMBA:
        return _dirichlet_sum_nb(log_n, coeffs, s)
    return _dirichlet_sum_np(log_n, coeffs, s)


# ---------------------------------------------------------------------------
# max |f| along an arithmetic progression of points s0 + j*ds
# ---------------------------------------------------------------------------

@njit
def _line_max_abs_nb(log_n, coeffs, s0, ds, count):
    best = -1.0
    best_j = -1
    for j in range(count):
        s = s0 + j * ds
        sr = s.real
        si = s.imag
        vr = 0.0
        vi = 0.0
        for k in range(log_n.size):
            mag = math.exp(-sr * log_n[k])
            ang = -si * log_n[k]
            tr = mag * math.cos(ang)
            ti = mag * math.sin(ang)
            a = coeffs[k]
            vr += a.real * tr - a.imag * ti
            vi += a.real * ti + a.imag * tr
        m = math.hypot(vr, vi)
        if m > best:
            best = m
            best_j = j
    return best, best_j


def _line_max_abs_np(log_n, coeffs, s0, ds, count):
    best = -1.0
    best_j = -1
    rows = max(1, _CHUNK // max(1, log_n.size))
    for start in range(0, count, rows):
        j = np.arange(start, min(count, start + rows))
        s = s0 + j * ds
        vals = np.abs(np.exp(-np.outer(s, log_n)) @ coeffs)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best = float(vals[k])
            best_j = int(j[k])
    return best, best_j


def line_max_abs(log_n, coeffs, s0, ds, count):
    """Return ``(max |f(s0 + j ds)|, argmax j)`` for ``0 <= j < count``.

    Ties resolve to the smallest ``j`` so the result is deterministic.
    """
    log_n = np.ascontiguousarray(log_n, dtype=np.float64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    if count <= 0:
        return 0.0, -1
    if log_n.size == 0:
        return 0.0, 0
    if HAVE_NUMBA:
        best, j = _line_max_abs_nb(log_n, coeffs, complex(s0), complex(ds), int(count))
    else:
        best, j = _line_max_abs_np(log_n, coeffs, complex(s0), complex(ds), int(count))
    return float(best), int(j)


# ---------------------------------------------------------------------------
# Sparse Dirichlet convolution: enumerate index pairs with a*b <= limit
# ---------------------------------------------------------------------------

@njit
def _pair_enum_nb(idx_a, idx_b, limit):
    total = 0
    for i in range(idx_a.size):
        cap = limit // idx_a[i]
        for j in range(idx_b.size):
            if idx_b[j] > cap:
                break
            total += 1
    ia = np.empty(total, np.int64)
    ib = np.empty(total, np.int64)
    pos = 0
    for i in range(idx_a.size):
        cap = limit // idx_a[i]
        for j in range(idx_b.size):
            if idx_b[j] > cap:
                break
            ia[pos] = i
            ib[pos] = j
            pos += 1
    return ia, ib


def _pair_enum_np(idx_a, idx_b, limit):
    cuts = np.searchsorted(idx_b, limit // idx_a, side="right")
    total = int(cuts.sum())
    ia = np.repeat(np.arange(idx_a.size, dtype=np.int64), cuts)
    starts = np.repeat(np.cumsum(cuts) - cuts, cuts)
    ib = np.arange(total, dtype=np.int64) - starts
    return ia, ib


def pair_enum(idx_a, idx_b, limit):
    """Positions ``(i, j)`` with ``idx_a[i] * idx_b[j] <= limit``; inputs sorted ascending, all >= 1."""
    idx_a = np.ascontiguousarray(idx_a, dtype=np.int64)
    idx_b = np.ascontiguousarray(idx_b, dtype=np.int64)
    if idx_a.size == 0 or idx_b.size == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    if HAVE_NUMBA:
        return _pair_enum_nb(idx_a, idx_b, np.int64(limit))
    return _pair_enum_np(idx_a, idx_b, np.int64(limit))


# ---------------------------------------------------------------------------
# Kronecker scan: first t = t0 + j*dt with all angles within eps of targets
# ---------------------------------------------------------------------------

_TWO_PI = 2.0 * math.pi


@njit
def _kronecker_scan_nb(freqs, targets, eps, t0, dt, count):
    two_pi = 2.0 * math.pi
    for j in range(count):
        t = t0 + j * dt
        ok = True
        for i in range(freqs.size):
            x = t * freqs[i] - targets[i]
            x = x - two_pi * math.floor(x / two_pi + 0.5)
            if abs(x) > eps:
                ok = False
                break
        if ok:
            return j
    return -1


def _kronecker_scan_np(freqs, targets, eps, t0, dt, count):
    rows = max(1, _CHUNK // max(1, freqs.size))
    for start in range(0, count, rows):
        j = np.arange(start, min(count, start + rows))
        t = t0 + j * dt
        x = np.outer(t, freqs) - targets[None, :]
        x -= _TWO_PI * np.floor(x / _TWO_PI + 0.5)
        hit = np.flatnonzero(np.all(np.abs(x) <= eps, axis=1))
        if hit.size:
            return int(j[hit[0]])
    return -1


def kronecker_scan(freqs, targets, eps, t0, dt, count):
    """Index of the first grid time meeting every angular constraint, or -1."""
    freqs = np.ascontiguousarray(freqs, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    if count <= 0:
        return -1
    if HAVE_NUMBA:
        return int(_kronecker_scan_nb(freqs, targets, float(eps), float(t0), float(dt), int(count)))
    return _kronecker_scan_np(freqs, targets, float(eps), float(t0), float(dt), int(count))


# explicit handles for benchmarks and backend-equivalence tests
dirichlet_sum_np = _dirichlet_sum_np
line_max_abs_np = _line_max_abs_np
pair_enum_np = _pair_enum_np
kronecker_scan_np = _kronecker_scan_np
if HAVE_NUMBA:
    dirichlet_sum_nb = _dirichlet_sum_nb
    line_max_abs_nb = _line_max_abs_nb
    pair_enum_nb = _pair_enum_nb
    kronecker_scan_nb = _kronecker_scan_nb
else:  # pragma: no cover
    dirichlet_sum_nb = line_max_abs_nb = pair_enum_nb = kronecker_scan_nb = None
