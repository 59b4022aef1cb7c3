"""
Harmonic measures, the functions F_j' = 2 d(omega_j)/dz, and their period matrix.

omega is represented as the real part of a Cauchy integral of a real density
(a double layer) plus one logarithmic source inside each hole:

    omega(z) = Re (1/2 pi i) closed integral mu(zeta)/(zeta - z) dzeta
               + sum_k A_k log|z - z_k|,

with the side conditions "integral of mu ds over every inner curve = 0" that
remove the null space of the double-layer operator on an n-connected domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from .geometry import Domain
from .quadrature import BoundaryFunction, cauchy_boundary_limit, cauchy_eval, d_dt


class HarmonicError(RuntimeError):
    pass


def source_points(domain: Domain) -> np.ndarray:
    """One point inside each hole (the centroid when it lies inside)."""
    pts = []
    for k in range(1, domain.n):
        zk = domain.z[k]
        c = zk.mean()
        from .geometry import _winding
        if _winding(zk, np.array([c]))[0] == 0:
            # nonconvex hole: step inward from the boundary along the normal
            s = domain.samples()
            inward = 1j * s.tangent[k]        # holes run clockwise
            cand = zk + 0.25 * np.abs(zk - c).min() * inward
            ok = [p for p in cand if _winding(zk, np.array([p]))[0] != 0]
            if not ok:
                raise HarmonicError(f"cannot place a source inside hole {k}")
            c = ok[0]
        pts.append(c)
    return np.array(pts, dtype=complex)


class DirichletSolver:
    """LU-factored bordered double-layer system for one domain."""

    def __init__(self, domain: Domain):
        self.domain = domain
        d = domain
        n, N = d.n, d.N
        M = n * N
        zeta = d.z.reshape(-1)
        w = (d.dz * d.dt).reshape(-1)
        diff = zeta[None, :] - zeta[:, None]
        np.fill_diagonal(diff, 1.0)
        kern = (w[None, :] / diff / (2j * np.pi)).real
        np.fill_diagonal(kern, 0.0)
        op = np.eye(M) + kern - np.diag(kern.sum(axis=1))
        self.sources = source_points(d)
        m = n - 1
        big = np.zeros((M + m, M + m))
        big[:M, :M] = op
        if m:
            big[:M, M:] = np.log(np.abs(zeta[:, None] - self.sources[None, :]))
            ds = (d.speed * d.dt)
            for k in range(1, n):
                big[M + k - 1, (k * N):(k + 1) * N] = ds[k]
        self.system = big
        self._lu = sla.lu_factor(big)
        self.condition = float(np.linalg.cond(big))
        if not np.isfinite(self.condition) or self.condition > 1e10:
            raise HarmonicError(f"completed double-layer system is singular (cond {self.condition:.2e})")

    @classmethod
    def for_domain(cls, domain: Domain) -> "DirichletSolver":
        s = domain._cache.get("dirichlet_solver")
        if s is None:
            s = domain._cache["dirichlet_solver"] = cls(domain)
        return s

    def solve(self, data: np.ndarray):
        d = self.domain
        data = np.asarray(data, dtype=float).reshape(-1, d.n * d.N)
        rhs = np.zeros((data.shape[0], self.system.shape[0]))
        rhs[:, :d.n * d.N] = data
        x = sla.lu_solve(self._lu, rhs.T).T
        mu = x[:, :d.n * d.N].reshape(-1, d.n, d.N)
        return mu, x[:, d.n * d.N:]


@dataclass(frozen=True, eq=False)
class HarmonicMeasure:
    domain: Domain
    j: int
    density: BoundaryFunction
    strengths: np.ndarray
    sources: np.ndarray

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        u = cauchy_eval(self.density, z).real
        for A, zk in zip(self.strengths, self.sources):
            u = u + A * np.log(np.abs(z - zk))
        return u

    def boundary_values(self, t) -> np.ndarray:
        """Boundary limits at arbitrary parameters t (shape (n, len(t)))."""
        d = self.domain
        F = cauchy_boundary_limit(self.density)
        spec = np.fft.fft(F, axis=-1) / d.N
        k = np.fft.fftfreq(d.N, 1.0 / d.N)
        t = np.asarray(t, dtype=float)
        vals = spec @ np.exp(1j * np.outer(k, t))
        out = vals.real
        for c in range(d.n):
            zc = d.curves[c](t)
            for A, zk in zip(self.strengths, self.sources):
                out[c] += A * np.log(np.abs(zc - zk))
        return out


@dataclass(frozen=True, eq=False)
class FPrimeField:
    domain: Domain
    j: int
    trace: BoundaryFunction
    measure: HarmonicMeasure

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = cauchy_eval(self.measure.density, z, order=1)
        for A, zk in zip(self.measure.strengths, self.measure.sources):
            out = out + A / (z - zk)
        return out


def dirichlet_solve(domain: Domain, data, j: int = -1) -> HarmonicMeasure:
    """Harmonic function with the given real boundary data (shape (n, N))."""
    solver = DirichletSolver.for_domain(domain)
    mu, A = solver.solve(data)
    return HarmonicMeasure(domain, j, BoundaryFunction(domain, mu[0]), A[0], solver.sources)


def harmonic_measure(domain: Domain, j: int) -> HarmonicMeasure:
    """omega_j: 1 on inner curve j (1 <= j <= n - 1), 0 on the others."""
    if not 1 <= j <= domain.n - 1:
        raise ValueError(f"harmonic measure index must be in 1..{domain.n - 1}, got {j}")
    key = ("omega", j)
    if key not in domain._cache:
        data = np.zeros((domain.n, domain.N))
        data[j] = 1.0
        domain._cache[key] = dirichlet_solve(domain, data, j)
    return domain._cache[key]


def f_prime(domain: Domain, j: int) -> FPrimeField:
    w = harmonic_measure(domain, j)
    d = domain
    F = cauchy_boundary_limit(w.density)
    tr = d_dt(F) / d.dz
    for A, zk in zip(w.strengths, w.sources):
        tr = tr + A / (d.z - zk)
    return FPrimeField(d, j, BoundaryFunction(d, tr), w)


def f_primes(domain: Domain) -> list[FPrimeField]:
    return [f_prime(domain, j) for j in range(1, domain.n)]


def period_matrix(domain: Domain, fields: list[FPrimeField] | None = None,
                  tol: float = 1e-6) -> np.ndarray:
    """P[k, i] = (1/i) closed integral over curve i of F_k' dz (Hermitian)."""
    if fields is None:
        fields = f_primes(domain)
    m = len(fields)
    P = np.zeros((m, m), dtype=complex)
    for k, F in enumerate(fields):
        for i in range(m):
            P[k, i] = np.sum(F.trace.values[i + 1] * domain.dz[i + 1]) * domain.dt / 1j
    resid = float(np.max(np.abs(P - P.conj().T))) if m else 0.0
    if resid > tol * max(1.0, float(np.abs(P).max()) if m else 1.0):
        raise HarmonicError(f"period matrix not Hermitian (residual {resid:.2e})")
    return 0.5 * (P + P.conj().T)
