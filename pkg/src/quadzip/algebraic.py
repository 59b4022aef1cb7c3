"""
Numerical algebraicity tests: bivariate polynomial relations P(u, v) = 0 on
sampled data, located as the smallest right singular vector of the monomial
matrix, with a degree search driven by the singular-value drop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class AmbiguousRankError(RuntimeError):
    """No degree gives a clean singular-value drop; `gaps` records what was seen."""

    def __init__(self, message: str, gaps: dict):
        super().__init__(message)
        self.gaps = gaps


def monomial_exponents(degree: int) -> list[tuple[int, int]]:
    """(s, t) with s + t <= degree, ordered by total degree then by s descending."""
    return [(tot - t, t) for tot in range(degree + 1) for t in range(tot + 1)]


@dataclass(frozen=True)
class AlgebraicRelation:
    degree: int
    exponents: tuple                # (s, t) per coefficient
    coeffs: np.ndarray              # unit norm, for u^s v^t
    residual: float                 # max |sum q_st u^s v^t| over samples, monomials normalized
    singular_values: np.ndarray     # relative, descending
    gap: float                      # second smallest / smallest singular value

    def __call__(self, u, v) -> np.ndarray:
        u = np.asarray(u, dtype=complex)
        v = np.asarray(v, dtype=complex)
        return sum(q * u ** s * v ** t for q, (s, t) in zip(self.coeffs, self.exponents))

    @property
    def nontrivial(self) -> bool:
        """True unless the relation involves only one of the variables."""
        big = np.abs(self.coeffs) > 1e-8 * np.abs(self.coeffs).max()
        uses_u = any(s > 0 for (s, t), b in zip(self.exponents, big) if b)
        uses_v = any(t > 0 for (s, t), b in zip(self.exponents, big) if b)
        return uses_u and uses_v

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "terms": [{"s": s, "t": t, "q": [float(q.real), float(q.imag)]}
                      for (s, t), q in zip(self.exponents, self.coeffs) if q != 0],
            "residual": self.residual,
            "gap": self.gap,
        }


def _monomials(u, v, exps):
    return np.stack([u ** s * v ** t for s, t in exps], axis=1)


def _null_vector(M: np.ndarray):
    """Smallest right singular vector of M after column normalization."""
    scale = np.linalg.norm(M, axis=0) / np.sqrt(M.shape[0])
    scale[scale == 0] = 1.0
    Mn = M / scale
    _, sv, vh = np.linalg.svd(Mn, full_matrices=False)
    q = vh[-1].conj()
    resid = float(np.max(np.abs(Mn @ q)))
    coeffs = q / scale
    coeffs /= np.linalg.norm(coeffs)
    rel = sv / sv[0]
    gap = float(rel[-2] / max(rel[-1], 1e-300)) if rel.size > 1 else np.inf
    return coeffs, resid, rel, gap


def fit_algebraic_relation(u, v, degree: int) -> AlgebraicRelation:
    """Unit-norm polynomial of total degree <= degree nearest to vanishing on (u, v)."""
    u = np.asarray(u, dtype=complex).ravel()
    v = np.asarray(v, dtype=complex).ravel()
    if u.shape != v.shape:
        raise ValueError("u and v need the same number of samples")
    need = 3 * (degree + 1) ** 2
    if u.size < need:
        raise ValueError(f"degree {degree} needs at least {need} samples, got {u.size}")
    exps = monomial_exponents(degree)
    coeffs, resid, rel, gap = _null_vector(_monomials(u, v, exps))
    return AlgebraicRelation(degree, tuple(exps), coeffs, resid, rel, gap)


def search_relation(u, v, max_degree: int = 12, drop: float = 1e-6,
                    accept: float = 1e-6) -> AlgebraicRelation:
    """Lowest degree whose smallest singular value falls by >= 1/drop from the
    previous degree and whose residual is below accept."""
    gaps = {}
    prev = None
    for d in range(1, max_degree + 1):
        rel = fit_algebraic_relation(u, v, d)
        smin = rel.singular_values[-1]
        gaps[d] = {"smallest": float(smin), "residual": rel.residual, "gap": rel.gap}
        base = 1.0 if prev is None else prev
        if smin <= drop * base and rel.residual <= accept:
            return rel
        prev = smin
    raise AmbiguousRankError(f"no relation of degree <= {max_degree} passes the "
                             f"singular-value drop test", gaps)


@dataclass(frozen=True)
class RationalRelation:
    degree: int
    exponents: tuple
    numerator: np.ndarray          # A(u, v)
    denominator: np.ndarray        # B(u, v)
    residual: float

    def __call__(self, u, v) -> np.ndarray:
        u = np.asarray(u, dtype=complex)
        v = np.asarray(v, dtype=complex)
        num = sum(q * u ** s * v ** t for q, (s, t) in zip(self.numerator, self.exponents))
        den = sum(q * u ** s * v ** t for q, (s, t) in zip(self.denominator, self.exponents))
        return num / den

    def to_json(self) -> dict:
        pack = lambda c: [[float(x.real), float(x.imag)] for x in c]
        return {"degree": self.degree, "exponents": [list(e) for e in self.exponents],
                "numerator": pack(self.numerator), "denominator": pack(self.denominator),
                "residual": self.residual}


def fit_rational_relation(u, v, y, degree: int) -> RationalRelation:
    """y ~ A(u, v) / B(u, v) with A, B of total degree <= degree, from the null
    vector of [monomials, -y * monomials]; residual is max |y - A/B| / max |y|."""
    u = np.asarray(u, dtype=complex).ravel()
    v = np.asarray(v, dtype=complex).ravel()
    y = np.asarray(y, dtype=complex).ravel()
    exps = monomial_exponents(degree)
    M = _monomials(u, v, exps)
    coeffs, _, _, _ = _null_vector(np.hstack([M, -y[:, None] * M]))
    k = len(exps)
    num, den = coeffs[:k], coeffs[k:]
    B = M @ den
    if np.min(np.abs(B)) == 0:
        resid = np.inf
    else:
        resid = float(np.max(np.abs(y - (M @ num) / B)) / max(np.abs(y).max(), 1e-300))
    return RationalRelation(degree, tuple(exps), num, den, resid)


def search_rational(u, v, y, max_degree: int = 8, accept: float = 1e-6) -> RationalRelation:
    best = None
    for d in range(0, max_degree + 1):
        rel = fit_rational_relation(u, v, y, d)
        if best is None or rel.residual < best.residual:
            best = rel
        if rel.residual <= accept:
            return rel
    raise AmbiguousRankError(f"no rational relation of degree <= {max_degree} "
                             f"(best residual {best.residual:.2e})", {"best": best.residual})
