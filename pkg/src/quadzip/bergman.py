"""
Bergman kernel from the Szego kernel and the functions F_j':

    K(z, w) = 4 pi S(z, w)^2 + sum_{i,j} A_ij F_i'(z) conj(F_j'(w)).

The coefficients A_ij come from the reproducing property applied to each F_k'.
By Green's theorem every inner product involved reduces to a boundary integral:

    F_k'(w) - 4 pi conj(q_k(w)) = sum_j [sum_i conj(A_ij) P_ki] F_j'(w),
    q_k(w) = (1/i) closed integral over curve k of S(z, w)^2 dz,

which is collapsed over a scattered sample of interior w by least squares.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .geometry import Domain
from .harmonic import FPrimeField, f_primes, period_matrix
from .kernels import szego_traces
from .quadrature import BoundaryFunction, cauchy_eval


class BergmanError(RuntimeError):
    pass


def interior_sample(domain: Domain, count: int, rng: np.random.Generator,
                    depth: float = 0.1) -> np.ndarray:
    """Random interior points at distance >= depth * (deepest point's depth)."""
    x0, x1 = domain.z.real.min(), domain.z.real.max()
    y0, y1 = domain.z.imag.min(), domain.z.imag.max()
    # depth relative to the deepest lattice point keeps thin domains usable
    g = np.linspace(0, 1, 41)
    lat = (x0 + (x1 - x0) * g)[None, :] + 1j * (y0 + (y1 - y0) * g)[:, None]
    lat = lat[domain.inside(lat)]
    dmax = float(domain.boundary_distance(lat).max())
    delta = min(depth * domain.diameter, 0.5 * dmax)
    pts: list[complex] = []
    while len(pts) < count:
        cand = rng.uniform(x0, x1, 4 * count) + 1j * rng.uniform(y0, y1, 4 * count)
        cand = cand[domain.inside(cand, delta=delta)]
        pts.extend(cand[: count - len(pts)])
    return np.array(pts)


@dataclass(eq=False)
class BergmanKernel:
    domain: Domain
    fprimes: list
    coefficients: np.ndarray
    periods: np.ndarray
    lsq_residual: float = 0.0
    _memo: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def szego_trace(self, w: complex) -> np.ndarray:
        """Boundary trace of S(., w); at most one solve per distinct w."""
        w = complex(w)
        with self._lock:
            tr = self._memo.get(w)
            if tr is None:
                tr = self._memo[w] = szego_traces(self.domain, [w])[0]
        return tr

    def fprime_at(self, w: complex) -> np.ndarray:
        return np.array([F(np.array([w]))[0] for F in self.fprimes])

    def __call__(self, z, w: complex) -> np.ndarray:
        return bergman_eval(self, z, w)


def bergman_coefficients(domain: Domain, seed: int = 0, samples: int | None = None,
                         tol: float = 1e-6) -> BergmanKernel:
    """Solve for A_ij and return the assembled kernel."""
    m = domain.n - 1
    if m == 0:
        return BergmanKernel(domain, [], np.zeros((0, 0), dtype=complex), np.zeros((0, 0)))
    fps = f_primes(domain)
    P = period_matrix(domain, fps)
    rng = np.random.default_rng(seed)
    ws = interior_sample(domain, samples or 8 * m, rng)
    S = szego_traces(domain, ws)                       # (s, n, N)
    Fw = np.array([F(ws) for F in fps]).T               # (s, m)
    q = np.empty((ws.size, m), dtype=complex)
    for k in range(m):
        q[:, k] = (S[:, k + 1] ** 2 * domain.dz[k + 1]).sum(-1) * domain.dt / 1j
    lhs = Fw - 4 * np.pi * np.conj(q)                  # (s, m): row s, column k
    # lhs[s, k] = sum_j C[k, j] Fw[s, j]
    Ct, *_ = np.linalg.lstsq(Fw, lhs, rcond=None)
    C = Ct.T
    resid = float(np.max(np.abs(Fw @ Ct - lhs)) / max(np.abs(lhs).max(), 1e-300))
    if resid > tol:
        raise BergmanError(f"reproducing-property least squares residual {resid:.2e}")
    A = np.conj(np.linalg.solve(P, C))
    herm = float(np.max(np.abs(A - A.conj().T)))
    if herm > tol * max(1.0, float(np.abs(A).max())):
        raise BergmanError(f"coefficient matrix not Hermitian ({herm:.2e})")
    K = BergmanKernel(domain, fps, 0.5 * (A + A.conj().T), P, resid)
    for w, tr in zip(ws, S):
        K._memo[complex(w)] = tr
    return K


def bergman_eval(K: BergmanKernel, z, w: complex, near: str = "raise") -> np.ndarray:
    """4 pi S(z, w)^2 + sum A_ij F_i'(z) conj(F_j'(w)).

    S(., w) and the F_i' are evaluated together as Cauchy integrals of their
    boundary traces.
    """
    z = np.asarray(z, dtype=complex)
    traces = [K.szego_trace(w)] + [F.trace.values for F in K.fprimes]
    vals = cauchy_eval(BoundaryFunction(K.domain, np.array(traces)), z, near=near)
    out = 4 * np.pi * vals[0] ** 2
    if K.fprimes:
        Fw = K.fprime_at(w)
        out = out + np.einsum("i...,ij,j->...", vals[1:], K.coefficients, np.conj(Fw))
    return out


def _midpoint_grid(domain: Domain, grid: int):
    x0, x1 = domain.z.real.min(), domain.z.real.max()
    y0, y1 = domain.z.imag.min(), domain.z.imag.max()
    hx, hy = (x1 - x0) / grid, (y1 - y0) / grid
    xs = x0 + hx * (np.arange(grid) + 0.5)
    ys = y0 + hy * (np.arange(grid) + 0.5)
    Z = (xs[None, :] + 1j * ys[:, None]).ravel()
    return Z[domain.inside(Z)], hx * hy


def reproducing_residuals(K: BergmanKernel, fs, w: complex, grid: int = 400) -> np.ndarray:
    """reproducing_check for several f at once, sharing one kernel evaluation."""
    key = ("midpoint", grid)
    cached = K.domain._cache.get(key)
    if cached is None:
        cached = K.domain._cache[key] = _midpoint_grid(K.domain, grid)
    Z, cell = cached
    Kbar = np.conj(bergman_eval(K, Z, w, near="subtract"))
    w_arr = np.array([complex(w)])
    return np.array([abs((f(Z) * Kbar).sum() * cell - f(w_arr)[0]) for f in fs])


def reproducing_check(K: BergmanKernel, f, w: complex, grid: int = 400) -> float:
    """|integral of f(z) conj(K(z, w)) dA(z) - f(w)| by midpoint quadrature.

    Verification only: a grid x grid midpoint rule on the bounding box,
    cells kept when their midpoint is inside the domain.
    """
    return float(reproducing_residuals(K, [f], w, grid)[0])
