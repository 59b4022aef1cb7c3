"""
Szego kernel by the Kerzman-Stein second-kind integral equation, and the
kernels derived from it: Garabedian kernel, Ahlfors maps, Szego-kernel zeros
and antiholomorphic parameter derivatives of S.

Conventions.  With C(z, w) = T(w) / (2 pi i (w - z)) the Cauchy kernel with
respect to arc length,

    A(z, w) = conj(C(w, z)) - C(z, w)
            = [conj(T(z)) / conj(w - z) - T(w) / (w - z)] / (2 pi i)

is smooth and skew-Hermitian, and the boundary trace of S(., a) solves

    S(z, a) + integral A(z, w) S(w, a) ds(w) = conj(C(a, z)).

The system is discretized on arc-length-weighted unknowns sqrt(w_i) S(z_i, a)
so the matrix is exactly I plus a skew-Hermitian matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from .geometry import Domain
from .quadrature import (BoundaryFunction, QuadratureError, cauchy_eval, d_dt,
                         newton_polish)


class KernelError(RuntimeError):
    pass


class ZeroSimplicityError(KernelError):
    """The Szego kernel has a (numerically) multiple zero; re-choose the base point."""


def _check_interior(domain: Domain, a: complex):
    a = complex(a)
    if domain.winding(np.array([a]))[0] != 1:
        raise KernelError(f"base point {a} is not inside the domain")
    if domain.boundary_distance(np.array([a]))[0] < 2 * domain.dt * domain.max_speed:
        raise KernelError(f"base point {a} is too close to the boundary")
    return a


class KSOperator:
    """Dense Kerzman-Stein system I + A on one domain, LU-factored once."""

    def __init__(self, domain: Domain):
        self.domain = domain
        z = domain.z.reshape(-1)
        T = domain.tangent.reshape(-1)
        self.sqrt_w = np.sqrt(domain.speed.reshape(-1) * domain.dt)
        diff = z[None, :] - z[:, None]          # [i, j] = z_j - z_i
        np.fill_diagonal(diff, 1.0)
        A = (np.conj(T)[:, None] / np.conj(diff) - T[None, :] / diff) / (2j * np.pi)
        # the curvature parts of C and its adjoint cancel: A(z, z) = 0
        np.fill_diagonal(A, 0.0)
        B = self.sqrt_w[:, None] * A * self.sqrt_w[None, :]
        self.skew_residual = float(np.max(np.abs(B + B.conj().T)))
        self.matrix = 0.5 * (B - B.conj().T)
        self._lu = sla.lu_factor(np.eye(z.size) + self.matrix)

    @classmethod
    def for_domain(cls, domain: Domain) -> "KSOperator":
        op = domain._cache.get("ks_operator")
        if op is None:
            op = domain._cache["ks_operator"] = cls(domain)
        return op

    @cached_property
    def condition(self) -> float:
        lam = np.linalg.eigvals(self.matrix)
        mod = np.abs(1 + lam)
        return float(mod.max() / mod.min())

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve (I + A) X = rhs for boundary traces rhs of shape (..., n, N)."""
        d = self.domain
        rhs = np.asarray(rhs, dtype=complex)
        lead = rhs.shape[:-2]
        flat = rhs.reshape(-1, d.n * d.N).T * self.sqrt_w[:, None]
        x = sla.lu_solve(self._lu, flat) / self.sqrt_w[:, None]
        return x.T.reshape(lead + (d.n, d.N))


def cauchy_rhs(domain: Domain, w, m: int = 0) -> np.ndarray:
    """(d/d conj(w))^m of conj(C(w, z)) on the boundary grid, one trace per w."""
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    zb = np.conj(domain.z)[None] - np.conj(w)[:, None, None]
    return (1j / (2 * np.pi)) * math.factorial(m) * np.conj(domain.tangent)[None] / zb ** (m + 1)


def szego_traces(domain: Domain, points, m: int = 0) -> np.ndarray:
    """Boundary traces of S^(m)(., w) for every w in points, shape (k, n, N)."""
    return KSOperator.for_domain(domain).solve(cauchy_rhs(domain, points, m))


def garabedian_traces(domain: Domain, szego: np.ndarray) -> np.ndarray:
    """L(z, a) = i conj(S(z, a)) conj(T(z)) on the boundary."""
    return 1j * np.conj(szego) * np.conj(domain.tangent)


@dataclass(frozen=True, eq=False)
class SzegoField:
    domain: Domain
    a: complex
    trace: BoundaryFunction

    def __call__(self, z, order: int = 0) -> np.ndarray:
        return cauchy_eval(self.trace, z, order=order)

    @cached_property
    def diagonal(self) -> float:
        """S(a, a), real and positive."""
        return complex(self(np.array([self.a]))[0])

    def hermitian_residual(self, other: "SzegoField") -> float:
        """|S(a', a) - conj(S(a, a'))| for another base point a'."""
        s1 = self(np.array([other.a]))[0]
        s2 = other(np.array([self.a]))[0]
        return float(abs(s1 - np.conj(s2)))


def solve_szego(domain: Domain, a: complex) -> SzegoField:
    a = _check_interior(domain, a)
    op = KSOperator.for_domain(domain)
    if op.skew_residual > 1e-10:
        raise KernelError(f"Kerzman-Stein matrix not skew-Hermitian ({op.skew_residual:.2e})")
    trace = op.solve(cauchy_rhs(domain, a))[0]
    return SzegoField(domain, a, BoundaryFunction(domain, trace))


def szego_wbar_derivative(domain: Domain, w0: complex, m: int) -> BoundaryFunction:
    """Boundary trace of (d/d conj(w))^m S(., w) at w = w0."""
    if m < 0:
        raise ValueError("derivative order must be >= 0")
    w0 = _check_interior(domain, w0)
    return BoundaryFunction(domain, szego_traces(domain, [w0], m)[0])


@dataclass(frozen=True, eq=False)
class GarabedianField:
    domain: Domain
    a: complex
    trace: BoundaryFunction

    @cached_property
    def _regular(self) -> BoundaryFunction:
        pp = 1.0 / (2 * np.pi * (self.domain.z - self.a))
        return BoundaryFunction(self.domain, self.trace.values - pp)

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return 1.0 / (2 * np.pi * (z - self.a)) + cauchy_eval(self._regular, z)

    def regular_part(self, z, order: int = 0) -> np.ndarray:
        return cauchy_eval(self._regular, z, order=order)

    def residue(self, radius: float | None = None, M: int = 64) -> complex:
        """(1/2 pi i) times the integral of L(., a) over a small circle about a."""
        if radius is None:
            radius = 0.25 * float(self.domain.boundary_distance(np.array([self.a]))[0])
        th = 2 * np.pi * np.arange(M) / M
        e = radius * np.exp(1j * th)
        return complex(np.mean(self(self.a + e) * e))

    def boundary_identity_residual(self, szego: SzegoField) -> float:
        """max |(1/i) L(z, a) T(z) - conj(S(z, a))| on the grid."""
        lhs = self.trace.values * self.domain.tangent / 1j
        return float(np.max(np.abs(lhs - np.conj(szego.trace.values))))


def garabedian(szego: SzegoField) -> GarabedianField:
    d = szego.domain
    return GarabedianField(d, szego.a, BoundaryFunction(d, garabedian_traces(d, szego.trace.values)))


def boundary_winding(domain: Domain, values: np.ndarray) -> int:
    """Total winding number of the sampled boundary values about 0."""
    total = 0.0
    for row in np.asarray(values):
        total += np.sum(np.angle(np.roll(row, -1) / row)) / (2 * np.pi)
    return int(round(total))


@dataclass(frozen=True, eq=False)
class AhlforsMap:
    domain: Domain
    a: complex
    trace: BoundaryFunction
    szego: SzegoField
    garabedian: GarabedianField

    def __call__(self, z, order: int = 0) -> np.ndarray:
        return cauchy_eval(self.trace, z, order=order)

    @cached_property
    def derivative_at_base(self) -> complex:
        return complex(self(np.array([self.a]), order=1)[0])

    def invariants(self) -> dict:
        d = self.domain
        s_aa = self.szego.diagonal
        fa = complex(self(np.array([self.a]))[0])
        target = 2 * np.pi * s_aa
        return {
            "f(a)": abs(fa),
            "|f|-1 on boundary": float(np.max(np.abs(np.abs(self.trace.values) - 1))),
            "f'(a) - 2 pi S(a,a) (relative)": abs(self.derivative_at_base - target) / abs(target),
            "S(a,a) imag": abs(s_aa.imag),
            "winding": boundary_winding(d, self.trace.values),
            "n": d.n,
        }


def ahlfors(domain: Domain, a: complex, tol: float = 1e-6) -> AhlforsMap:
    s = solve_szego(domain, a)
    L = garabedian(s)
    f = AhlforsMap(domain, s.a, BoundaryFunction(domain, s.trace.values / L.trace.values), s, L)
    inv = f.invariants()
    scale = max(1.0, 1.0 / domain.diameter)
    bad = [k for k in ("f(a)", "|f|-1 on boundary", "f'(a) - 2 pi S(a,a) (relative)")
           if inv[k] > tol * (scale if k == "f(a)" else 1.0)]
    if inv["winding"] != domain.n:
        bad.append("winding")
    if f.szego.diagonal.real <= 0:
        bad.append("S(a,a) > 0")
    if bad:
        raise KernelError(f"Ahlfors map invariants violated: {bad} ({inv})")
    return f


def szego_zeros(domain: Domain, a: complex, simple_tol: float = 1e-6) -> np.ndarray:
    """The n - 1 zeros of S(., a) in the domain, each checked to be simple.

    Power sums of the zeros come from boundary moments of S'/S; the zeros of
    the resulting polynomial are polished by Newton iteration on the interior
    Cauchy evaluator.
    """
    s = solve_szego(domain, a)
    m = domain.n - 1
    if m == 0:
        return np.zeros(0, dtype=complex)
    tr = s.trace.values
    dlog = d_dt(tr) / tr * domain.dt / (2j * np.pi)
    z = domain.z
    sums = [complex(np.sum(dlog * z ** p)) for p in range(m + 1)]
    count = sums[0]
    if abs(count - m) > 0.1:
        raise KernelError(f"argument principle gives {count:.4g} zeros, expected {m}")
    # Newton identities: power sums -> monic polynomial coefficients
    e = [1.0 + 0j]
    for k in range(1, m + 1):
        e.append(sum((-1) ** (i - 1) * e[k - i] * sums[i] for i in range(1, k + 1)) / k)
    poly = [(-1) ** k * e[k] for k in range(m + 1)]
    guesses = np.roots(poly)

    scale = domain.diameter
    f = lambda w: s(w)
    fp = lambda w: s(w, order=1)
    zeros = np.array([newton_polish(f, g, scale, fp) for g in guesses])
    if not np.all(domain.inside(zeros)):
        raise KernelError("a Szego-kernel zero left the domain during polishing")
    deriv = np.abs(fp(zeros))
    ref = abs(s.diagonal) / scale
    if np.any(deriv < simple_tol * ref):
        raise ZeroSimplicityError(
            f"S(., {a}) has a non-simple zero (|S'| = {deriv.min():.2e}); perturb the base point")
    if m > 1:
        sep = np.abs(zeros[:, None] - zeros[None, :]) + np.eye(m) * scale
        if sep.min() < 1e-6 * scale:
            raise ZeroSimplicityError("Szego-kernel zeros coalesce; perturb the base point")
    return zeros[np.lexsort((zeros.imag, zeros.real))]


def choose_base_point(domain: Domain, rng: np.random.Generator, depth: float = 0.15,
                      tries: int = 50) -> complex:
    """Random interior base point whose Szego kernel has simple zeros."""
    x0, x1 = domain.z.real.min(), domain.z.real.max()
    y0, y1 = domain.z.imag.min(), domain.z.imag.max()
    g = np.linspace(0, 1, 41)
    lat = ((x0 + (x1 - x0) * g)[None, :] + 1j * (y0 + (y1 - y0) * g)[:, None]).ravel()
    lat = lat[domain.inside(lat)]
    # depth relative to the deepest lattice point keeps thin domains usable
    delta = min(depth * domain.diameter, 0.5 * float(domain.boundary_distance(lat).max()))
    for _ in range(tries):
        a = complex(rng.uniform(x0, x1), rng.uniform(y0, y1))
        if not domain.inside(np.array([a]), delta=delta)[0]:
            continue
        try:
            szego_zeros(domain, a)
        except (ZeroSimplicityError, KernelError, QuadratureError):
            continue
        return a
    raise KernelError("no admissible base point found")
