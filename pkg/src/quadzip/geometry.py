"""
Multiply connected planar domains bounded by trigonometric-polynomial curves.

Each boundary curve is stored as a truncated Fourier series

    z(t) = sum_{|m| <= M} c_m exp(i m t),    0 <= t < 2 pi,

so points, tangents and speeds on the sample grid t_i = 2 pi i / N are exact
(the series is differentiated term by term).  A `Domain` always carries the
standard positive orientation of its boundary: the outer curve runs
counterclockwise and every inner curve clockwise.
"""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class DomainError(ValueError):
    """Invalid boundary description (parse failure, bad nesting, crossing)."""


class Location(enum.Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    NEAR_BOUNDARY = "near-boundary"


class BoundaryPoint(NamedTuple):
    curve: int
    t: float
    z: complex
    tangent: complex
    speed: float


class Samples(NamedTuple):
    """Boundary samples of every curve at one grid resolution, shape (n, N)."""

    z: np.ndarray
    dz: np.ndarray
    d2z: np.ndarray

    @property
    def speed(self) -> np.ndarray:
        return np.abs(self.dz)

    @property
    def tangent(self) -> np.ndarray:
        return self.dz / np.abs(self.dz)


@dataclass(frozen=True, eq=False)
class Curve:
    coeffs: np.ndarray
    offset: int
    role: str = "outer"

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).ravel()
        if c.size == 0:
            raise DomainError("curve has no Fourier coefficients")
        object.__setattr__(self, "coeffs", c)
        c.setflags(write=False)

    @property
    def modes(self) -> np.ndarray:
        return np.arange(self.coeffs.size) - self.offset

    @property
    def degree(self) -> int:
        m = self.modes[np.abs(self.coeffs) > 0]
        return int(np.max(np.abs(m))) if m.size else 0

    def derivative(self, t, order: int = 0) -> np.ndarray:
        """d^order z / dt^order at parameter values t."""
        t = np.asarray(t, dtype=float)
        m = self.modes
        w = (1j * m) ** order * self.coeffs
        return np.exp(1j * np.multiply.outer(t, m)) @ w

    def __call__(self, t) -> np.ndarray:
        return self.derivative(t, 0)

    def sample(self, N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Values and first two derivatives at t_i = 2 pi i / N, by FFT."""
        out = []
        for order in range(3):
            spec = np.zeros(N, dtype=complex)
            w = (1j * self.modes) ** order * self.coeffs
            # aliasing onto the N-point grid is exact for the trig polynomial
            np.add.at(spec, self.modes % N, w)
            out.append(np.fft.ifft(spec) * N)
        return tuple(out)

    def signed_area(self) -> float:
        """(1/2i) closed integral of conj(z) dz; positive when counterclockwise."""
        return float(np.pi * np.sum(self.modes * np.abs(self.coeffs) ** 2))

    def reversed(self) -> "Curve":
        # z(-t): c_m -> c_{-m}
        return Curve(self.coeffs[::-1].copy(), self.coeffs.size - 1 - self.offset, self.role)

    def with_role(self, role: str) -> "Curve":
        return Curve(self.coeffs, self.offset, role)


def _winding(poly: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Winding number of the closed polygon `poly` about each point of z."""
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    out = np.empty(flat.size, dtype=int)
    chunk = max(1, 1_000_000 // max(poly.size, 1))
    for s in range(0, flat.size, chunk):
        d = poly[None, :] - flat[s:s + chunk, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            ang = np.angle(np.roll(d, -1, axis=1) / d)
        out[s:s + chunk] = np.rint(ang.sum(axis=1) / (2 * np.pi))
    return out.reshape(z.shape)


def _segments_cross(p: np.ndarray, q: np.ndarray, skip_adjacent: bool) -> bool:
    """True if any segment of closed polygon p properly crosses one of q."""
    a0, a1 = p, np.roll(p, -1)
    b0, b1 = q, np.roll(q, -1)

    def orient(u, v, w):
        return np.sign(((v - u).conj() * (w - u)).imag)

    n = p.size
    chunk = max(1, 2_000_000 // max(q.size, 1))
    for s in range(0, n, chunk):
        i = np.arange(s, min(n, s + chunk))
        A0, A1 = a0[i, None], a1[i, None]
        o1 = orient(A0, A1, b0[None, :])
        o2 = orient(A0, A1, b1[None, :])
        o3 = orient(b0[None, :], b1[None, :], A0)
        o4 = orient(b0[None, :], b1[None, :], A1)
        hit = (o1 * o2 < 0) & (o3 * o4 < 0)
        if skip_adjacent:
            j = np.arange(q.size)[None, :]
            gap = np.abs(i[:, None] - j)
            gap = np.minimum(gap, n - gap)
            hit &= gap > 1
        if hit.any():
            return True
    return False


@dataclass(frozen=True, eq=False)
class Domain:
    """Bounded n-connected domain; curves[0] is the outer boundary curve.

    Use `Domain.from_curves` (or `load_domain`) to build one: it resolves the
    outer curve, normalizes orientation and validates nesting.
    """

    curves: tuple
    N: int
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_curves(cls, curves: Iterable[Curve], N: int) -> "Domain":
        curves = list(curves)
        if not curves:
            raise DomainError("domain needs at least one boundary curve")
        if N < 8 or N & (N - 1):
            raise DomainError(f"grid size must be a power of two >= 8, got {N}")
        maxdeg = max(c.degree for c in curves)
        if N < 4 * maxdeg:
            raise DomainError(f"grid N={N} below the bound 4*degree={4 * maxdeg}")

        polys = []
        for c in curves:
            z, dz, _ = c.sample(N)
            if np.min(np.abs(dz)) <= 1e-12 * np.max(np.abs(dz)):
                raise DomainError("curve is not immersed (z'(t) vanishes)")
            if _segments_cross(z, z, skip_adjacent=True):
                raise DomainError("self-intersecting boundary curve")
            polys.append(z)
        for i in range(len(curves)):
            for j in range(i + 1, len(curves)):
                if _segments_cross(polys[i], polys[j], skip_adjacent=False):
                    raise DomainError(f"boundary curves {i} and {j} intersect")

        # the outer curve encloses every other curve
        outer = None
        for i, p in enumerate(polys):
            others = [polys[j][0] for j in range(len(polys)) if j != i]
            if all(abs(w) == 1 for w in _winding(p, np.array(others))):
                outer = i
                break
        if outer is None:
            raise DomainError("no curve encloses all others (nested-inclusion violation)")
        inner = [i for i in range(len(curves)) if i != outer]
        for i in inner:
            for j in inner:
                if i != j and _winding(polys[j], np.array([polys[i][0]]))[0] != 0:
                    raise DomainError(f"inner curve {i} lies inside inner curve {j}")

        ordered = []
        for i, role in [(outer, "outer")] + [(i, "inner") for i in inner]:
            c = curves[i]
            ccw = c.signed_area() > 0
            if (role == "outer") != ccw:
                c = c.reversed()
            ordered.append(c.with_role(role))
        return cls(tuple(ordered), int(N))

    # -- samples ---------------------------------------------------------

    def samples(self, N: int | None = None) -> Samples:
        N = self.N if N is None else int(N)
        key = ("samples", N)
        if key not in self._cache:
            parts = [c.sample(N) for c in self.curves]
            s = Samples(*(np.array([p[k] for p in parts]) for k in range(3)))
            for a in s:
                a.setflags(write=False)
            self._cache[key] = s
        return self._cache[key]

    @property
    def n(self) -> int:
        return len(self.curves)

    @cached_property
    def t(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.N) / self.N

    @property
    def dt(self) -> float:
        return 2 * np.pi / self.N

    @property
    def z(self) -> np.ndarray:
        return self.samples().z

    @property
    def dz(self) -> np.ndarray:
        return self.samples().dz

    @property
    def speed(self) -> np.ndarray:
        return self.samples().speed

    @property
    def tangent(self) -> np.ndarray:
        return self.samples().tangent

    @cached_property
    def curvature(self) -> np.ndarray:
        s = self.samples()
        return (np.conj(s.dz) * s.d2z).imag / np.abs(s.dz) ** 3

    @cached_property
    def area(self) -> float:
        return float(sum(c.signed_area() for c in self.curves))

    @cached_property
    def diameter(self) -> float:
        z = self.z[0]
        return float(np.max(np.abs(z[:, None] - z[None, :])))

    @cached_property
    def max_speed(self) -> float:
        return float(self.speed.max())

    def with_grid(self, N: int) -> "Domain":
        return Domain.from_curves(self.curves, N)

    # -- queries ---------------------------------------------------------

    def boundary_distance(self, z) -> np.ndarray:
        """Distance from each z to the boundary curves.

        Nearest grid node first, then Newton iterations on the curve parameter.
        """
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        pts = self.z.reshape(-1)
        idx = np.empty(flat.size, dtype=int)
        chunk = max(1, 1_000_000 // pts.size)
        for s in range(0, flat.size, chunk):
            idx[s:s + chunk] = np.abs(flat[s:s + chunk, None] - pts[None, :]).argmin(axis=1)
        k, i = np.divmod(idx, self.N)
        t = self.t[i].copy()
        out = np.abs(flat - pts[idx])
        for c in range(self.n):
            sel = np.nonzero(k == c)[0]
            if sel.size == 0:
                continue
            cv, p, tc = self.curves[c], flat[sel], t[sel]
            for _ in range(4):
                d0 = cv.derivative(tc, 0) - p
                d1 = cv.derivative(tc, 1)
                d2 = cv.derivative(tc, 2)
                g = (np.conj(d0) * d1).real
                gp = np.abs(d1) ** 2 + (np.conj(d0) * d2).real
                step = np.where(gp > 0, g / np.where(gp > 0, gp, 1.0), 0.0)
                tc = tc - np.clip(step, -self.dt, self.dt)
            out[sel] = np.minimum(out[sel], np.abs(cv.derivative(tc, 0) - p))
        return out.reshape(z.shape)

    def winding(self, z) -> np.ndarray:
        """Total winding number of the positively oriented boundary about z."""
        z = np.asarray(z, dtype=complex)
        w = np.zeros(z.shape, dtype=int)
        for p in self.samples(4 * self.N).z:
            w += _winding(p, z)
        return w

    def inside(self, z, delta: float = 0.0) -> np.ndarray:
        """Boolean mask: strictly inside and farther than delta from the boundary."""
        from matplotlib.path import Path

        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        xy = np.column_stack([flat.real, flat.imag])
        mask = np.ones(flat.size, dtype=bool)
        for k, p in enumerate(self.samples(4 * self.N).z):
            hit = Path(np.column_stack([p.real, p.imag])).contains_points(xy)
            mask &= hit if k == 0 else ~hit
        if delta > 0 and mask.any():
            mask[mask] = self.boundary_distance(flat[mask]) >= delta
        return mask.reshape(z.shape)

    def to_json(self) -> dict:
        return {
            "curves": [
                {"coeffs": [[float(c.real), float(c.imag)] for c in cv.coeffs],
                 "degree_offset": int(cv.offset)}
                for cv in self.curves
            ],
            "grid": int(self.N),
        }


def load_domain(spec) -> Domain:
    """Build a Domain from a JSON document, a path to one, or a parsed dict.

    Format: {"curves": [{"coeffs": [[re, im], ...], "degree_offset": M}],
    "grid": N}, coefficients listed c_{-M} .. c_{K}.
    """
    if isinstance(spec, (str, os.PathLike)):
        text = str(spec)
        if not text.lstrip().startswith("{"):
            with open(spec) as fh:
                text = fh.read()
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"cannot parse domain document: {exc}") from exc
    try:
        N = int(spec.get("grid", 256))
        curves = []
        for entry in spec["curves"]:
            coeffs = np.array([complex(re, im) for re, im in entry["coeffs"]])
            curves.append(Curve(coeffs, int(entry.get("degree_offset", 0))))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed domain document: {exc}") from exc
    return Domain.from_curves(curves, N)


def boundary_grid(domain: Domain, k: int, N: int | None = None) -> list[BoundaryPoint]:
    N = domain.N if N is None else int(N)
    if N < 4 * domain.curves[k].degree:
        raise DomainError(f"grid N={N} too coarse for curve degree {domain.curves[k].degree}")
    s = domain.samples(N)
    t = 2 * np.pi * np.arange(N) / N
    return [
        BoundaryPoint(k, float(t[i]), complex(s.z[k, i]), complex(s.tangent[k, i]),
                      float(s.speed[k, i]))
        for i in range(N)
    ]


def contains(domain: Domain, z: complex, delta: float | None = None) -> Location:
    if delta is None:
        delta = domain.dt * domain.max_speed
    if domain.boundary_distance(np.array([z]))[0] < delta:
        return Location.NEAR_BOUNDARY
    return Location.INSIDE if domain.winding(np.array([z]))[0] == 1 else Location.OUTSIDE


def circle(radius: float = 1.0, center: complex = 0.0) -> Curve:
    return Curve(np.array([0.0, center, radius], dtype=complex), 1)
