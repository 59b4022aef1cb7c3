"""
Reference geometries and closed-form / series oracles for the disc and annulus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Curve, Domain, DomainError, circle


class OracleError(ValueError):
    pass


def disc_domain(R: float = 1.0, c: complex = 0.0, N: int = 256) -> Domain:
    return Domain.from_curves([circle(R, c)], N)


def annulus_domain(r: float = 0.5, N: int = 256) -> Domain:
    return Domain.from_curves([circle(1.0), circle(r)], N)


@dataclass(frozen=True)
class DiscOracle:
    R: float = 1.0
    c: complex = 0.0
    name: str = "disc"

    def S(self, z, w):
        z, w = np.asarray(z) - self.c, np.asarray(w) - self.c
        return self.R / (2 * np.pi * (self.R ** 2 - z * np.conj(w)))

    def L(self, z, w):
        return 1.0 / (2 * np.pi * (np.asarray(z) - np.asarray(w)))

    def K(self, z, w):
        z, w = np.asarray(z) - self.c, np.asarray(w) - self.c
        return self.R ** 2 / (np.pi * (self.R ** 2 - z * np.conj(w)) ** 2)

    def ahlfors(self, z, a):
        z, a = np.asarray(z) - self.c, a - self.c
        return self.R * (z - a) / (self.R ** 2 - z * np.conj(a))

    def ahlfors_prime(self, z, a):
        z, a = np.asarray(z) - self.c, a - self.c
        return self.R * (self.R ** 2 - abs(a) ** 2) / (self.R ** 2 - z * np.conj(a)) ** 2

    def schwarz(self, z):
        """The function equal to conj(z) on the circle: conj(c) + R^2/(z - c)."""
        return np.conj(self.c) + self.R ** 2 / (np.asarray(z) - self.c)


@dataclass(frozen=True)
class AnnulusOracle:
    """Kernels of r < |z| < 1 by truncated bilateral series, |n| <= terms."""

    r: float = 0.5
    terms: int = 60
    name: str = "annulus"

    def __post_init__(self):
        if not 0 < self.r < 1:
            raise OracleError("annulus needs 0 < r < 1")

    @property
    def n(self):
        return np.arange(-self.terms, self.terms + 1)

    def tail_bound(self, z, w) -> float:
        """Geometric bound on the dropped Szego-series terms at the pairs (z, w)."""
        x = np.abs(np.asarray(z) * np.conj(np.asarray(w))).ravel()
        qp = np.max(x)
        qm = np.max(self.r ** 2 / x)
        k = self.terms + 1
        tail = 0.0
        for q, pref in ((qp, 1.0), (qm, 1.0 / self.r)):
            if q >= 1:
                return float("inf")
            tail += pref * q ** k / (1 - q)
        return float(tail / (2 * np.pi))

    def check(self, tol: float, z, w):
        if self.tail_bound(z, w) > tol:
            raise OracleError(f"series truncation |n| <= {self.terms} too short for tolerance {tol}")

    def _pow(self, x, n):
        x = np.asarray(x, dtype=complex)[..., None]
        return x ** n

    def S(self, z, w):
        n = self.n
        x = np.asarray(z) * np.conj(np.asarray(w))
        return (self._pow(x, n) / (1 + self.r ** (2 * n + 1))).sum(-1) / (2 * np.pi)

    def L(self, z, a):
        """Garabedian kernel: pole part 1/(2 pi (z - a)) plus its regular Laurent part."""
        z = np.asarray(z, dtype=complex)
        n = self.n
        r = self.r
        coef = np.where(n >= 0, -(r ** (2 * n + 1)) / (1 + r ** (2 * n + 1)),
                        1.0 / (1 + r ** (2 * n + 1)))
        reg = (coef * a ** n * self._pow(z, -n - 1)).sum(-1) / (2 * np.pi)
        return 1.0 / (2 * np.pi * (z - a)) + reg

    def ahlfors(self, z, a):
        return self.S(z, a) / self.L(z, a)

    def bergman_norms(self):
        n = self.n.astype(float)
        r = self.r
        with np.errstate(divide="ignore", invalid="ignore"):
            nrm = np.pi * (1 - r ** (2 * n + 2)) / (n + 1)
        nrm[self.n == -1] = 2 * np.pi * np.log(1 / r)
        return nrm

    def K(self, z, w):
        x = np.asarray(z) * np.conj(np.asarray(w))
        return (self._pow(x, self.n) / self.bergman_norms()).sum(-1)

    def omega(self, z):
        return np.log(np.abs(z)) / np.log(self.r)

    def F_prime(self, z):
        return 1.0 / (np.asarray(z) * np.log(self.r))

    def period(self) -> float:
        return -2 * np.pi / np.log(self.r)


def disc_oracle(R: float = 1.0, c: complex = 0.0) -> DiscOracle:
    if R <= 0:
        raise OracleError("radius must be positive")
    return DiscOracle(R, c)


def annulus_oracle(r: float = 0.5, terms: int = 60) -> AnnulusOracle:
    return AnnulusOracle(r, terms)


def _perturbed_circle(center, radius, rng, amp, K=3) -> Curve:
    a = amp * (rng.normal(size=K) + 1j * rng.normal(size=K)) / np.sqrt(2 * K)
    b = amp * (rng.normal(size=K) + 1j * rng.normal(size=K)) / np.sqrt(2 * K)
    # radius * e^{it} (1 + sum a_k e^{ikt} + b_k e^{-ikt})
    modes = np.arange(-K + 1, K + 2)
    coeffs = np.zeros(modes.size, dtype=complex)
    off = K - 1
    coeffs[1 + off] += radius
    coeffs[0 + off] += center
    for k in range(1, K + 1):
        coeffs[1 + k + off] += radius * a[k - 1]
        if 1 - k + off >= 0:
            coeffs[1 - k + off] += radius * b[k - 1]
    return Curve(coeffs, off)


def blob_domain(n: int, seed: int, amp: float = 0.08, N: int = 256, retries: int = 20) -> Domain:
    """Randomized smooth n-connected domain (perturbed circles), n in {2, 3}."""
    if n not in (2, 3):
        raise ValueError("blob_domain supports n = 2 or 3")
    rng = np.random.default_rng(seed)
    layout = {2: [(0.0, 0.4)], 3: [(-0.45, 0.22), (0.45, 0.22)]}[n]
    last = None
    for _ in range(retries):
        curves = [_perturbed_circle(0.0, 1.0, rng, amp)]
        for c, rad in layout:
            jitter = 0.05 * (rng.normal() + 1j * rng.normal())
            curves.append(_perturbed_circle(c + jitter, rad, rng, amp))
        try:
            return Domain.from_curves(curves, N)
        except DomainError as exc:
            last = exc
    raise DomainError(f"blob_domain failed validation after {retries} retries: {last}")
