"""
Zipping: the data of a quadrature domain g(Omega) reduced to the boundary
Fourier coefficients of g plus finitely many principal parts.

    Q(w)  = (1/2 pi i) closed integral over b g(Omega) of conj(zeta)/(zeta - w) dzeta
    h(w)  = sum_j P_j(w) + Q(w)                      (boundary values conj(w))
    g'(z) = (1/2 pi i) closed integral over bOmega of g(zeta)/(zeta - z)^2 dzeta
    H(z)  = P(z) + (1/2 pi i) closed integral over bOmega of conj(g(zeta))/(zeta - z) dzeta

The Bergman kernels of Omega and g(Omega) are tied together by
K_Omega(z, w) = g'(z) conj(g'(w)) K_g(Omega)(g(z), g(w)).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .geometry import Curve, Domain, DomainError, load_domain
from .gustafsson import (GustafssonMap, QuadratureData, _isolation, image_curves,
                         quadrature_data)
from .quadrature import BoundaryFunction, cauchy_eval


class ArchiveError(ValueError):
    pass


class ZipError(RuntimeError):
    pass


FORMAT = "quadzip-archive/1"


@dataclass(frozen=True)
class PrincipalPart:
    """sum_k p[k-1] / (w - pole)^k."""

    pole: complex
    p: tuple

    def __post_init__(self):
        if len(self.p) == 0 or self.p[-1] == 0:
            raise ZipError("principal part must end in a nonzero coefficient")

    @property
    def order(self) -> int:
        return len(self.p)

    def __call__(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        u = 1.0 / (w - self.pole)
        out = np.zeros_like(w)
        for k in range(self.order, 0, -1):
            out = (out + self.p[k - 1]) * u
        return out

    def to_json(self) -> dict:
        return {"w": _cpx(self.pole), "p": [_cpx(x) for x in self.p]}

    @classmethod
    def from_json(cls, doc) -> "PrincipalPart":
        return cls(_uncpx(doc["w"]), tuple(_uncpx(x) for x in doc["p"]))


def _cpx(x) -> list:
    x = complex(x)
    return [x.real, x.imag]


def _uncpx(v) -> complex:
    re, im = v
    return complex(float(re), float(im))


def contour_coefficients(fn, pole: complex, radius: float, kmax: int = 3,
                         M: int = 64, weight=None) -> np.ndarray:
    """(1/2 pi i) closed integral of fn(z) (z - pole)^(k-1) dz over |z - pole| = radius."""
    e = radius * np.exp(2j * np.pi * np.arange(M) / M)
    v = fn(pole + e) * e
    return np.array([np.mean(v * e ** (k - 1)) for k in range(1, kmax + 1)])


def _trim(coeffs: np.ndarray, scale: float, tol: float = 1e-8) -> tuple:
    k = len(coeffs)
    while k > 1 and abs(coeffs[k - 1]) <= tol * max(1.0, abs(coeffs[0])) * scale ** (k - 1):
        k -= 1
    return tuple(complex(c) for c in coeffs[:k])


@dataclass(frozen=True, eq=False)
class ZipArchive:
    g_coeffs: tuple                  # per curve: (coefficients c_{-K..K}, K)
    h_poles: tuple                   # PrincipalPart in the w-plane
    H_poles: tuple                   # PrincipalPart in the z-plane
    meta: dict
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- serialization

    def payload(self) -> dict:
        return {
            "format": FORMAT,
            "g_coeffs": [[_cpx(c) for c in coeffs] for coeffs, _ in self.g_coeffs],
            "g_offsets": [int(k) for _, k in self.g_coeffs],
            "h_poles": [p.to_json() for p in self.h_poles],
            "H_poles": [p.to_json() for p in self.H_poles],
            "meta": self.meta,
        }

    @staticmethod
    def _digest(payload: dict) -> str:
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def dumps(self) -> str:
        payload = self.payload()
        payload["sha256"] = self._digest(payload)
        return json.dumps(payload, sort_keys=True, indent=1)

    @classmethod
    def loads(cls, text: str) -> "ZipArchive":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ArchiveError(f"archive is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict) or "sha256" not in doc:
            raise ArchiveError("archive has no checksum")
        digest = doc.pop("sha256")
        if digest != cls._digest(doc):
            raise ArchiveError("archive checksum mismatch")
        if doc.get("format") != FORMAT:
            raise ArchiveError(f"unknown archive format {doc.get('format')!r}")
        try:
            g = tuple((np.array([_uncpx(c) for c in coeffs]), int(k))
                      for coeffs, k in zip(doc["g_coeffs"], doc["g_offsets"]))
            h = tuple(PrincipalPart.from_json(p) for p in doc["h_poles"])
            H = tuple(PrincipalPart.from_json(p) for p in doc["H_poles"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ArchiveError(f"malformed archive: {exc}") from exc
        return cls(g, h, H, doc["meta"])

    # -- reconstruction

    @cached_property
    def domain(self) -> Domain:
        """The source domain Omega."""
        return load_domain(self.meta["domain"])

    @cached_property
    def g_boundary(self) -> BoundaryFunction:
        """g sampled on the source grid."""
        d = self.domain
        vals = np.array([Curve(c, k)(d.t) for c, k in self.g_coeffs])
        return BoundaryFunction(d, vals)

    @cached_property
    def image(self) -> Domain:
        """g(Omega) as a Domain, its boundary parametrized by the archived coefficients."""
        curves = [Curve(c, k) for c, k in self.g_coeffs]
        deg = max(c.degree for c in curves)
        N = max(self.domain.N, 1 << int(math.ceil(math.log2(4 * max(deg, 1)))))
        try:
            return Domain.from_curves(curves, N)
        except DomainError as exc:
            raise ZipError(f"image boundary is not a valid domain: {exc}") from exc

    def size_bytes(self) -> int:
        return len(self.dumps().encode())


def pack(g: GustafssonMap, data: QuadratureData | None = None,
         kmax: int = 3, order_tol: float = 1e-8) -> ZipArchive:
    """Archive g's boundary coefficients with the principal parts of h and H."""
    if data is None:
        data = quadrature_data(g, order_tol=order_tol, kmax=kmax)
    d = g.domain
    curves = image_curves(g)
    h = tuple(PrincipalPart(complex(w), tuple(complex(x) for x in pk[:k]))
              for w, pk, k in zip(data.nodes, data.principal, data.orders))
    H = []
    for p in g.poles:
        rho = 0.3 * _isolation(d, p, g.poles)
        co = contour_coefficients(g.H_refl, complex(p), rho, kmax)
        H.append(PrincipalPart(complex(p), _trim(co, d.diameter, order_tol)))
    meta = {
        "n": d.n,
        "grid": d.N,
        "variant": g.variant,
        "a": _cpx(g.a),
        "fit_residual": float(g.fit_residual),
        "domain": d.to_json(),
    }
    return ZipArchive(tuple((c.coeffs.copy(), c.offset) for c in curves), h, tuple(H), meta)


def q_transform(image: Domain, w) -> np.ndarray:
    """Cauchy integral of conj(zeta) over the boundary of `image`."""
    return cauchy_eval(np.conj(image.z), w, domain=image)


def unzip_h(archive: ZipArchive, w) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    out = q_transform(archive.image, w)
    for P in archive.h_poles:
        out = out + P(w)
    return out


def unzip_gprime(archive: ZipArchive, z) -> np.ndarray:
    return cauchy_eval(archive.g_boundary, z, order=1)


def unzip_g(archive: ZipArchive, z) -> np.ndarray:
    return cauchy_eval(archive.g_boundary, z)


def unzip_H(archive: ZipArchive, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    out = cauchy_eval(archive.g_boundary.conj(), z)
    for P in archive.H_poles:
        out = out + P(z)
    return out


def bergman_pullback_check(archive: ZipArchive, pairs, domain: Domain | None = None,
                           seed: int = 0) -> float:
    """max over (z, w) of |K_Omega(z, w) - g'(z) conj(g'(w)) K_image(g(z), g(w))|."""
    from .bergman import bergman_coefficients, bergman_eval

    d = archive.domain if domain is None else domain
    pairs = np.asarray(pairs, dtype=complex).reshape(-1, 2)
    K0 = bergman_coefficients(d, seed=seed)
    K1 = bergman_coefficients(archive.image, seed=seed)
    zs, ws = pairs[:, 0], pairs[:, 1]
    gz, gw = unzip_g(archive, zs), unzip_g(archive, ws)
    dz, dw = unzip_gprime(archive, zs), unzip_gprime(archive, ws)
    worst = 0.0
    for i in range(len(pairs)):
        k0 = bergman_eval(K0, zs[i:i + 1], ws[i])[0]
        k1 = bergman_eval(K1, gz[i:i + 1], gw[i])[0]
        worst = max(worst, abs(k0 - dz[i] * np.conj(dw[i]) * k1))
    return float(worst)


def compression_ratio(archive: ZipArchive, grid: int | None = None) -> float:
    """Bytes of a raw complex kernel table on the boundary grid over archive bytes."""
    d = archive.domain
    N = d.N if grid is None else int(grid)
    raw = (d.n * N) ** 2 * 16
    return raw / archive.size_bytes()
