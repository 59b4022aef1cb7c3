"""
Periodic trapezoid quadrature on the boundary grid, Cauchy integrals with
interior (and near-boundary) evaluation, and argument-principle zero finding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import Domain, _winding


class QuadratureError(ValueError):
    pass


class ZeroCountError(QuadratureError):
    """Argument-principle count is ambiguous or disagrees with the expectation."""


# largest upsampling factor used for near-boundary evaluation
MAX_UPSAMPLE = 64


def resample(values: np.ndarray, M: int) -> np.ndarray:
    """Spectral (band-limited) resampling of periodic samples along the last axis."""
    values = np.asarray(values, dtype=complex)
    N = values.shape[-1]
    if M == N:
        return values
    spec = np.fft.fft(values, axis=-1)
    out = np.zeros(values.shape[:-1] + (M,), dtype=complex)
    if M > N:
        h = N // 2
        out[..., :h] = spec[..., :h]
        out[..., M - h + 1:] = spec[..., h + 1:]
        # split the Nyquist mode symmetrically
        out[..., h] = 0.5 * spec[..., h]
        out[..., M - h] += 0.5 * spec[..., h]
    else:
        h = M // 2
        out[..., :h] = spec[..., :h]
        out[..., h + 1:] = spec[..., N - h + 1:]
        out[..., h] = spec[..., h] + spec[..., N - h]
    return np.fft.ifft(out, axis=-1) * (M / N)


def d_dt(values: np.ndarray) -> np.ndarray:
    """Spectral derivative in the curve parameter t along the last axis."""
    values = np.asarray(values, dtype=complex)
    N = values.shape[-1]
    k = np.fft.fftfreq(N, 1.0 / N)
    k[N // 2] = 0.0
    return np.fft.ifft(1j * k * np.fft.fft(values, axis=-1), axis=-1)


@dataclass(frozen=True, eq=False)
class BoundaryFunction:
    """Complex samples of a function on every boundary curve, shape (..., n, N)."""

    domain: Domain
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape[-2:] != (self.domain.n, self.domain.N):
            raise QuadratureError(
                f"samples of shape {v.shape} do not match grid {(self.domain.n, self.domain.N)}")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, domain: Domain, fn: Callable) -> "BoundaryFunction":
        return cls(domain, fn(domain.z))

    def fourier(self) -> np.ndarray:
        return np.fft.fft(self.values, axis=-1) / self.domain.N

    def tail_ratio(self) -> float:
        """max |coefficient| over the top decile of |mode| relative to the max."""
        c = np.abs(self.fourier())
        N = self.domain.N
        k = np.abs(np.fft.fftfreq(N, 1.0 / N))
        top = k >= 0.9 * (N // 2)
        return float(c[..., top].max() / max(c.max(), np.finfo(float).tiny))

    def d_dz(self) -> "BoundaryFunction":
        """Derivative along the boundary, df/dz = (df/dt) / z'(t)."""
        return BoundaryFunction(self.domain, d_dt(self.values) / self.domain.dz)

    def conj(self) -> "BoundaryFunction":
        return BoundaryFunction(self.domain, np.conj(self.values))

    def upsample(self, M: int) -> np.ndarray:
        return resample(self.values, M)


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, BoundaryFunction) else np.asarray(f, dtype=complex)


def integrate_closed(f, weight: str | None = None, domain: Domain | None = None):
    """sum over curves of (2 pi / N) sum_i f(t_i) w(t_i), w = 1, z'(t_i) or |z'(t_i)|."""
    if isinstance(f, BoundaryFunction):
        domain = f.domain
    if domain is None:
        raise QuadratureError("raw samples need an explicit domain")
    v = _values(f)
    if v.shape[-2:] != (domain.n, domain.N):
        raise QuadratureError("grid mismatch")
    if weight in (None, "none", "1"):
        w = 1.0
    elif weight == "dz":
        w = domain.dz
    elif weight == "ds":
        w = domain.speed
    else:
        raise ValueError(f"unknown weight {weight!r}")
    return (v * w).sum(axis=(-1, -2)) * domain.dt


def _upsample_factor(domain: Domain, dist: np.ndarray, order: int) -> np.ndarray:
    # node spacing below dist/(6+order) keeps the trapezoid error near roundoff
    need = 2 * np.pi * domain.max_speed * (6 + order) / np.maximum(dist, 1e-300)
    f = np.clip(need / domain.N, 1.0, 2.0 * MAX_UPSAMPLE)
    return 2 ** np.ceil(np.log2(f)).astype(int)


def cauchy_eval(f, z, order: int = 0, domain: Domain | None = None,
                near: str = "raise") -> np.ndarray:
    """Evaluate (order!/2 pi i) closed integral of f(zeta)/(zeta - z)^(order+1) dzeta.

    f is the boundary trace of a function holomorphic in the domain.  Targets
    close to the boundary are handled by spectrally upsampling the trace.
    When even the largest upsampling is too coarse, near="raise" raises and
    near="subtract" (order 0 only) subtracts the value at the nearest node.
    Returns an array of shape f.shape[:-2] + z.shape.
    """
    if isinstance(f, BoundaryFunction):
        domain = f.domain
    if domain is None:
        raise QuadratureError("raw samples need an explicit domain")
    v = _values(f)
    lead = v.shape[:-2]
    v = v.reshape((-1,) + v.shape[-2:])
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    out = np.empty((v.shape[0], flat.size), dtype=complex)
    if flat.size == 0:
        return out.reshape(lead + z.shape)

    dist = domain.boundary_distance(flat)
    factor = _upsample_factor(domain, dist, order)
    too_close = factor > MAX_UPSAMPLE
    if too_close.any() and (near == "raise" or order > 0):
        bad = flat[too_close][0]
        raise QuadratureError(f"target {bad} is too close to the boundary "
                              f"(distance {dist[too_close].min():.3g})")
    factor = np.minimum(factor, MAX_UPSAMPLE)
    scale = math.factorial(order) / (2j * np.pi)

    for fac in np.unique(factor):
        idx = np.nonzero(factor == fac)[0]
        M = domain.N * int(fac)
        s = domain.samples(M)
        zeta = s.z.reshape(-1)
        w = (s.dz * (2 * np.pi / M)).reshape(-1)
        vv = resample(v, M).reshape(v.shape[0], -1) if fac > 1 else v.reshape(v.shape[0], -1)
        chunk = max(1, 1_000_000 // zeta.size)
        for c0 in range(0, idx.size, chunk):
            ii = idx[c0:c0 + chunk]
            diff = zeta[:, None] - flat[None, ii]
            base = w[:, None] / diff
            wind = base.sum(axis=0) / (2j * np.pi)
            close = too_close[ii]
            if close.any():
                # the capped grid cannot resolve the winding integral there
                wind[close] = sum(_winding(p, flat[ii][close]) for p in s.z)
            if np.any(np.abs(wind - 1) > 0.5):
                bad = flat[ii][np.abs(wind - 1) > 0.5][0]
                raise QuadratureError(f"target {bad} is outside the domain")
            for _ in range(order):
                base /= diff
            res = vv @ base
            res *= scale
            if close.any():
                jj = np.nonzero(close)[0]
                nearest = np.abs(diff[:, jj]).argmin(axis=0)
                f0 = vv[:, nearest]
                res[:, jj] = f0 + np.einsum("bij,ij->bj", vv[:, :, None] - f0[:, None, :],
                                             base[:, jj]) * scale
            out[:, ii] = res
    return out.reshape(lead + z.shape)


def cauchy_derivative_eval(f, z, m: int, domain: Domain | None = None) -> np.ndarray:
    return cauchy_eval(f, z, order=m, domain=domain)


def cauchy_boundary_limit(f, domain: Domain | None = None) -> np.ndarray:
    """Interior boundary limit of the Cauchy integral of (not necessarily holomorphic) f.

    F_+(z) = f(z) + (1/2 pi i) closed integral of (f(zeta) - f(z))/(zeta - z) dzeta,
    the diagonal term being f'(t) dt / (2 pi i).
    """
    if isinstance(f, BoundaryFunction):
        domain = f.domain
    v = _values(f)
    lead = v.shape[:-2]
    v = v.reshape((-1, domain.n * domain.N))
    zeta = domain.z.reshape(-1)
    w = (domain.dz * domain.dt).reshape(-1)
    diff = zeta[None, :] - zeta[:, None]          # [target, source]
    np.fill_diagonal(diff, 1.0)
    kern = w[None, :] / diff / (2j * np.pi)
    np.fill_diagonal(kern, 0.0)
    dv = d_dt(v.reshape((-1, domain.n, domain.N))).reshape(v.shape)
    out = v + v @ kern.T - v * kern.sum(axis=1)[None, :] + dv * domain.dt / (2j * np.pi)
    return out.reshape(lead + (domain.n, domain.N))


# -- argument principle ---------------------------------------------------

def _numeric_derivative(f: Callable, z: np.ndarray, scale: float) -> np.ndarray:
    h = 1e-6 * scale
    return (f(z + h) - f(z - h)) / (2 * h)


def _circle_contour(center: complex, radius: float, M: int):
    th = 2 * np.pi * np.arange(M) / M
    e = np.exp(1j * th)
    return center + radius * e, 1j * radius * e * (2 * np.pi / M)


def _box_contour(box, M: int):
    """Gauss-Legendre nodes and weights (dz) along a counterclockwise rectangle."""
    x0, x1, y0, y1 = box
    x, w = np.polynomial.legendre.leggauss(M)
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    pts, wts = [], []
    for a, b in zip(corners, corners[1:] + corners[:1]):
        pts.append(0.5 * (a + b) + 0.5 * (b - a) * x)
        wts.append(0.5 * (b - a) * w)
    return np.concatenate(pts), np.concatenate(wts)


def _contour_moments(f, fprime, pts, wts, scale, powers=(0,)):
    fv = f(pts)
    if np.any(fv == 0) or np.min(np.abs(fv)) < 1e-300:
        raise ZeroCountError("function vanishes on the contour")
    dfv = fprime(pts) if fprime is not None else _numeric_derivative(f, pts, scale)
    ratio = dfv / fv * wts / (2j * np.pi)
    return [np.sum(ratio * pts ** p) for p in powers]


def _round_count(val: complex, tol: float = 0.1) -> int:
    k = int(round(val.real))
    if abs(val - k) > tol:
        raise ZeroCountError(f"winding integral {val:.4g} is not near an integer")
    return k


def argument_principle_count(f: Callable, center: complex, radius: float,
                             fprime: Callable | None = None, M: int = 512) -> int:
    """Number of zeros of f inside the circle |z - center| = radius."""
    pts, wts = _circle_contour(center, radius, M)
    (val,) = _contour_moments(f, fprime, pts, wts, radius)
    return _round_count(val)


def box_count(f: Callable, box, fprime: Callable | None = None, M: int = 48) -> int:
    pts, wts = _box_contour(box, M)
    (val,) = _contour_moments(f, fprime, pts, wts, max(box[1] - box[0], box[3] - box[2]))
    return _round_count(val)


def newton_polish(f: Callable, z0: complex, scale: float, fprime: Callable | None = None,
                  tol: float = 1e-13, maxiter: int = 50) -> complex:
    z = complex(z0)
    for _ in range(maxiter):
        fz = f(np.array([z]))[0]
        d = (fprime(np.array([z])) if fprime is not None
             else _numeric_derivative(f, np.array([z]), scale))[0]
        if d == 0:
            break
        step = fz / d
        z -= step
        if abs(step) < tol * scale:
            break
    return z


def locate_zeros(f: Callable, region, expected: int, fprime: Callable | None = None,
                 max_depth: int = 12, ftol: float | None = None) -> np.ndarray:
    """Zeros of the analytic function f in a rectangle (x0, x1, y0, y1).

    Quadtree subdivision by argument-principle counts, then Newton polishing.
    f must accept and return complex arrays.
    """
    x0, x1, y0, y1 = map(float, region)
    size0 = max(x1 - x0, y1 - y0)
    total = box_count(f, (x0, x1, y0, y1), fprime)
    if total != expected:
        raise ZeroCountError(f"expected {expected} zeros in region, argument principle gives {total}")
    found: list[complex] = []

    def split(box, count, depth):
        if count == 0:
            return
        bx0, bx1, by0, by1 = box
        size = max(bx1 - bx0, by1 - by0)
        if count == 1:
            pts, wts = _box_contour(box, 48)
            _, m1 = _contour_moments(f, fprime, pts, wts, size, powers=(0, 1))
            z = newton_polish(f, m1, size, fprime)
            if not (bx0 - 0.1 * size <= z.real <= bx1 + 0.1 * size
                    and by0 - 0.1 * size <= z.imag <= by1 + 0.1 * size):
                z = m1
            found.append(z)
            return
        if depth >= max_depth:
            raise ZeroCountError(
                f"{count} zeros remain in a box of size {size:.2e}: zeros are not simple")
        # off-center split avoids zeros sitting exactly on a symmetry line
        for shift in (0.5123, 0.4731, 0.5377):
            xm = bx0 + shift * (bx1 - bx0)
            ym = by0 + shift * (by1 - by0)
            kids = [(bx0, xm, by0, ym), (xm, bx1, by0, ym), (bx0, xm, ym, by1), (xm, bx1, ym, by1)]
            try:
                counts = [box_count(f, b, fprime) for b in kids]
            except ZeroCountError:
                continue
            if sum(counts) == count:
                break
        else:
            raise ZeroCountError("could not subdivide region consistently")
        for b, c in zip(kids, counts):
            split(b, c, depth + 1)

    split((x0, x1, y0, y1), total, 0)
    zeros = np.array(found, dtype=complex)
    if ftol is None:
        ftol = 1e-8 * max(1.0, float(np.max(np.abs(f(_box_contour((x0, x1, y0, y1), 8)[0])))))
    if zeros.size and np.max(np.abs(f(zeros))) > ftol:
        raise ZeroCountError("Newton polishing did not converge below tolerance")
    if zeros.size > 1:
        sep = np.abs(zeros[:, None] - zeros[None, :]) + np.eye(zeros.size) * size0
        if sep.min() < 1e-10 * size0:
            raise ZeroCountError("zeros are not pairwise distinct")
    return zeros[np.lexsort((zeros.imag, zeros.real))]
