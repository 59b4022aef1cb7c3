"""
Gustafsson functions: maps g, C-infinity close to the identity, that extend
meromorphically to the double, so that g(Omega) is a quadrature domain.

Two constructions are provided.

thm16   g(z) = a + sum_j c_j S(z, b_j) / L(z, a), where sum_j c_j S(., b_j)
        fits (z - a) L(z, a) on the boundary.  On the boundary conj(g) agrees
        with  H(z) = conj(a) + sum_j conj(c_j) L(z, b_j) / S(z, a),  whose poles
        in Omega are the b_j and the zeros of S(., a).

thm17   g(z) = [sum_j c_j S(z, b_j) - sum_k mu_k S(z, B_k)] / S(z, a), where the
        first sum fits z S(z, a) and the mu_k make the numerator vanish at the
        zeros of S(., a) (and pin g(a) = a).  The reflected function
        H(z) = [sum_j conj(c_j) L(z, b_j) - sum_k conj(mu_k) L(z, B_k)] / L(z, a)
        has simple poles only at the b_j and B_k, all inside a prescribed disc.

In both cases the poles p of H map to the quadrature nodes g(p) of g(Omega).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .geometry import Curve, Domain, DomainError, _segments_cross
from .kernels import (KernelError, garabedian_traces, solve_szego, szego_traces,
                      szego_zeros, _check_interior, boundary_winding)
from .quadrature import BoundaryFunction, cauchy_eval, d_dt, resample


class GustafssonError(RuntimeError):
    pass


class FitStagnation(GustafssonError):
    """The greedy fit stopped above tolerance; `fit` holds the best fit found."""

    def __init__(self, message: str, fit: "DensityFit"):
        super().__init__(message)
        self.fit = fit


class InjectivityError(GustafssonError):
    pass


# -- greedy density fit -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DensityFit:
    points: np.ndarray          # selected b_j
    coeffs: np.ndarray          # c_j
    residual: float             # max over the boundary of |r| and |dr/dz|
    history: np.ndarray         # Sobolev-norm residual after each greedy step
    traces: np.ndarray          # S(., b_j) boundary traces, shape (J, n, N)


def resolvable_depth(domain: Domain, tail: float = 1e-11) -> float:
    """Interior depth at which a kernel singularity mirrored across the
    boundary still leaves a Fourier tail below `tail` on the grid."""
    h = 2 * np.pi * domain.max_speed / domain.N
    # a pole at distance d decays like exp(-k d / speed) in mode k
    return float(-np.log(tail) * h / np.pi)


def candidate_lattice(domain: Domain, spacing: float | None = None,
                      depth: float | None = None) -> np.ndarray:
    """Square lattice through the centre of the bounding box, kept at depth."""
    if spacing is None:
        spacing = domain.diameter / 40
    if depth is None:
        depth = resolvable_depth(domain)
    x0, x1 = domain.z.real.min(), domain.z.real.max()
    y0, y1 = domain.z.imag.min(), domain.z.imag.max()
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    kx = np.arange(-math.ceil((cx - x0) / spacing), math.ceil((x1 - cx) / spacing) + 1)
    ky = np.arange(-math.ceil((cy - y0) / spacing), math.ceil((y1 - cy) / spacing) + 1)
    lat = ((cx + spacing * kx)[None, :] + 1j * (cy + spacing * ky)[:, None]).ravel()
    lat = lat[domain.inside(lat, delta=depth)]
    if lat.size == 0:
        raise GustafssonError("no lattice candidates at resolvable depth; refine the grid")
    return lat


def disc_lattice(w0: complex, eps: float, rings: int = 6) -> np.ndarray:
    """Concentric rings in the closed disc of radius 0.9 eps about w0."""
    pts = [complex(w0)]
    for k in range(1, rings + 1):
        r = 0.9 * eps * k / rings
        m = 6 * k
        th = 2 * np.pi * (np.arange(m) + 0.5 * (k % 2)) / m
        pts.extend(w0 + r * np.exp(1j * th))
    return np.array(pts)


def _sobolev_rows(domain: Domain, values: np.ndarray) -> np.ndarray:
    """Stack sqrt(ds)-weighted values and boundary derivatives as row vectors."""
    ws = np.sqrt(domain.speed * domain.dt)
    dv = d_dt(values) / domain.dz
    lead = values.shape[:-2]
    return np.concatenate([(values * ws).reshape(lead + (-1,)),
                           (dv * ws).reshape(lead + (-1,))], axis=-1)


def _c1_norm(domain: Domain, values: np.ndarray) -> float:
    dv = d_dt(values) / domain.dz
    return float(max(np.abs(values).max(), np.abs(dv).max()))


def greedy_fit(domain: Domain, target: np.ndarray, candidates: np.ndarray, tol: float,
               max_terms: int = 400, rcond: float = 1e-14, window: int = 25,
               weight: np.ndarray | None = None,
               divisor: np.ndarray | None = None) -> DensityFit:
    """Fit target ~ sum c_j S(., b_j) over b_j chosen greedily from candidates.

    Orthogonal matching in the Sobolev-1 boundary norm of weight * residual:
    each step adds the candidate that most reduces the residual after
    re-projection.  Stops when the C^1 sup of residual / divisor (default: the
    plain residual) drops below tol; raises FitStagnation when the Sobolev residual stops improving
    or the candidates run out.
    """
    candidates = np.asarray(candidates, dtype=complex)
    traces = szego_traces(domain, candidates)
    keep = np.array([BoundaryFunction(domain, t).tail_ratio() < 1e-3 * tol
                     for t in traces])
    if not keep.any():
        keep[:] = True
    candidates, traces = candidates[keep], traces[keep]
    wt = np.ones(domain.z.shape) if weight is None else np.asarray(weight)
    A = _sobolev_rows(domain, traces * wt).T.copy()            # (rows, J)
    y = _sobolev_rows(domain, np.asarray(target, dtype=complex) * wt)
    ws = np.sqrt(domain.speed * domain.dt) * wt
    nN = ws.size

    R = A.copy()
    r = y.copy()
    norms0 = np.linalg.norm(A, axis=0)
    sel: list[int] = []
    hist: list[float] = []
    best = np.inf

    div = np.ones(domain.z.shape) if divisor is None else np.asarray(divisor)

    def sup(res):
        return _c1_norm(domain, res[:nN].reshape(ws.shape) / ws / div)

    status = "stagnated"
    while len(sel) < min(max_terms, candidates.size):
        nr = np.linalg.norm(R, axis=0)
        ok = nr > 1e-11 * norms0
        ok[sel] = False
        if not ok.any():
            status = "exhausted"
            break
        score = np.where(ok, np.abs(R.conj().T @ r) / np.where(ok, nr, 1.0), -1.0)
        j = int(np.argmax(score))
        sel.append(j)
        q = R[:, j] / nr[j]
        for _ in range(2):          # second pass restores orthogonality
            R -= np.outer(q, q.conj() @ R)
            r = r - q * (q.conj() @ r)
        hist.append(float(np.linalg.norm(r)))
        best = min(best, sup(r))
        if best < tol:
            status = "converged"
            break
        if len(hist) > window and hist[-1] > 0.5 * hist[-1 - window]:
            break
    else:
        status = "max_terms"

    sel_arr = np.array(sel, dtype=int)
    c, *_ = np.linalg.lstsq(A[:, sel_arr], y, rcond=rcond)
    resid = _c1_norm(domain, (np.asarray(target) - np.tensordot(c, traces[sel_arr], 1)) / div)
    fit = DensityFit(candidates[sel_arr], c, resid, np.array(hist), traces[sel_arr])
    if resid >= tol:
        raise FitStagnation(f"greedy fit {status} at residual {resid:.3e} "
                            f"with {len(sel)} terms (tolerance {tol:.1e})", fit)
    return fit


def fit_density_16(domain: Domain, a: complex, tol: float = 1e-6,
                   candidates=None, max_terms: int = 400) -> DensityFit:
    """Fit (z - a) L(z, a) by a combination of S(z, b_j)."""
    a = _check_interior(domain, a)
    s = solve_szego(domain, a)
    L = garabedian_traces(domain, s.trace.values[None])[0]
    target = (domain.z - a) * L
    if candidates is None:
        candidates = candidate_lattice(domain)
    # g - id = -(residual) / L: weight the fit by 1/|L| and stop on the C^1 norm of g - id
    return greedy_fit(domain, target, candidates, tol, max_terms, weight=1 / np.abs(L),
                      divisor=L)


# -- Gustafsson map ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GustafssonMap:
    domain: Domain
    variant: str
    a: complex
    zeros: np.ndarray              # zeros of S(., a) in the domain
    b: np.ndarray
    c: np.ndarray
    B: np.ndarray
    mu: np.ndarray
    fit_residual: float
    g_trace: BoundaryFunction
    H_trace: BoundaryFunction      # reflected extension assembled from L traces
    _num_regular: BoundaryFunction = field(repr=False)
    _num_poles: np.ndarray = field(repr=False)
    _num_weights: np.ndarray = field(repr=False)
    _szego_a: BoundaryFunction = field(repr=False)
    _garabedian_regular: BoundaryFunction = field(repr=False)
    _g_numerator: BoundaryFunction = field(repr=False)
    history: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)

    # evaluators

    def __call__(self, z) -> np.ndarray:
        return cauchy_eval(self.g_trace, z)

    def derivative(self, z) -> np.ndarray:
        return cauchy_eval(self.g_trace, z, order=1)

    def _L_a(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return 1.0 / (2 * np.pi * (z - self.a)) + cauchy_eval(self._garabedian_regular, z)

    def direct(self, z) -> np.ndarray:
        """g from its defining quotient (not via the boundary Cauchy integral)."""
        z = np.asarray(z, dtype=complex)
        num = cauchy_eval(self._g_numerator, z)
        if self.variant == "thm16":
            return self.a + num / self._L_a(z)
        return num / cauchy_eval(self._szego_a, z)

    def H_refl(self, z) -> np.ndarray:
        """Meromorphic extension of conj(g) from the boundary into the domain."""
        z = np.asarray(z, dtype=complex)
        num = cauchy_eval(self._num_regular, z)
        for p, alpha in zip(self._num_poles, self._num_weights):
            num = num + alpha / (2 * np.pi * (z - p))
        if self.variant == "thm16":
            return np.conj(self.a) + num / cauchy_eval(self._szego_a, z)
        return num / self._L_a(z)

    @property
    def poles(self) -> np.ndarray:
        """Poles of H_refl in the domain."""
        if self.variant == "thm16":
            return np.concatenate([self.b, self.zeros])
        return np.concatenate([self.b, self.B])

    # invariants

    @cached_property
    def closeness(self) -> float:
        """sup over the boundary of |g - z| and |g' - 1|."""
        d = self.domain
        return _c1_norm(d, self.g_trace.values - d.z)

    @cached_property
    def boundary_identity(self) -> float:
        """max |H_refl - conj(g)| on the boundary grid."""
        return float(np.max(np.abs(self.H_trace.values - np.conj(self.g_trace.values))))

    def image_polygons(self, factor: int = 4) -> np.ndarray:
        return resample(self.g_trace.values, factor * self.domain.N)

    def check_injective(self, samples: int = 16, seed: int = 0) -> None:
        """Raise InjectivityError unless g(bOmega) is n disjoint simple curves
        with the orientation of bOmega and g - w has one zero for sampled w."""
        polys = self.image_polygons()
        for k, p in enumerate(polys):
            if _segments_cross(p, p, skip_adjacent=True):
                raise InjectivityError(f"image of boundary curve {k} self-intersects")
            area = 0.5 * np.sum((np.conj(p) * np.roll(p, -1)).imag)
            if (area > 0) != (k == 0):
                raise InjectivityError(f"image of boundary curve {k} changed orientation")
        for i in range(len(polys)):
            for j in range(i + 1, len(polys)):
                if _segments_cross(polys[i], polys[j], skip_adjacent=False):
                    raise InjectivityError(f"images of curves {i} and {j} intersect")
        from .bergman import interior_sample
        zs = interior_sample(self.domain, samples, np.random.default_rng(seed))
        for w in self(zs):
            count = boundary_winding(self.domain, self.g_trace.values - w)
            if count != 1:
                raise InjectivityError(f"g takes the value {w:.6g} {count} times")

    def pole_residuals(self, radius_factor: float = 0.3, M: int = 64) -> np.ndarray:
        """|(1/2 pi i) closed integral of g| around each zero of f_a (g must be regular)."""
        pts = [self.a] + list(self.zeros)
        out = []
        for p in pts:
            rho = radius_factor * _isolation(self.domain, p, self.poles)
            e = rho * np.exp(2j * np.pi * np.arange(M) / M)
            out.append(abs(np.mean(self.direct(p + e) * e)))
        return np.array(out)

    def to_json(self) -> dict:
        cpx = lambda v: [[float(x.real), float(x.imag)] for x in np.atleast_1d(v)]
        return {
            "variant": self.variant,
            "a": cpx(self.a)[0],
            "szego_zeros": cpx(self.zeros),
            "b": cpx(self.b),
            "c": cpx(self.c),
            "B": cpx(self.B),
            "mu": cpx(self.mu),
            "fit_residual": float(self.fit_residual),
            "closeness_c1": self.closeness,
            "boundary_identity": self.boundary_identity,
            "domain": self.domain.to_json(),
        }


def _isolation(domain: Domain, p: complex, others: np.ndarray) -> float:
    """Distance from p to the boundary and to the nearest other point of `others`."""
    d = float(domain.boundary_distance(np.array([p]))[0])
    o = np.abs(np.asarray(others) - p)
    o = o[o > 0]
    return min(d, float(o.min())) if o.size else d


def assemble(domain: Domain, variant: str, a: complex, b, c, B=(), mu=(),
             fit_residual: float = 0.0, zeros=None, history=None) -> GustafssonMap:
    """Build the map and its reflected extension from the defining data."""
    if variant not in ("thm16", "thm17"):
        raise ValueError(f"unknown variant {variant!r}")
    a = complex(a)
    b = np.asarray(b, dtype=complex)
    c = np.asarray(c, dtype=complex)
    B = np.asarray(B, dtype=complex)
    mu = np.asarray(mu, dtype=complex)
    if zeros is None:
        zeros = szego_zeros(domain, a)
    s_a = solve_szego(domain, a).trace.values
    L_a = garabedian_traces(domain, s_a[None])[0]
    z = domain.z
    pts = np.concatenate([b, B])
    tr = szego_traces(domain, pts) if pts.size else np.zeros((0, domain.n, domain.N), complex)
    Ltr = garabedian_traces(domain, tr)
    coef = np.concatenate([c, -mu])
    numer = np.tensordot(coef, tr, 1) if pts.size else np.zeros_like(z)
    alpha = np.conj(coef)
    Lsum = np.tensordot(alpha, Ltr, 1) if pts.size else np.zeros_like(z)
    pp = sum((al / (2 * np.pi * (z - p)) for p, al in zip(pts, alpha)), np.zeros_like(z))
    if variant == "thm16":
        g = a + numer / L_a
        H = np.conj(a) + Lsum / s_a
    else:
        g = numer / s_a
        H = Lsum / L_a
    pp_a = 1.0 / (2 * np.pi * (z - a))
    return GustafssonMap(
        domain, variant, a, np.asarray(zeros), b, c, B, mu, float(fit_residual),
        BoundaryFunction(domain, g), BoundaryFunction(domain, H),
        BoundaryFunction(domain, Lsum - pp), pts, alpha,
        BoundaryFunction(domain, s_a), BoundaryFunction(domain, L_a - pp_a),
        BoundaryFunction(domain, numer),
        np.zeros(0) if history is None else np.asarray(history))


def _validate(g: GustafssonMap, tol: float, identity_tol: float = 1e-8) -> GustafssonMap:
    if g.boundary_identity > identity_tol:
        raise GustafssonError(f"reflected extension misses conj(g) on the boundary "
                              f"({g.boundary_identity:.2e})")
    g.check_injective()
    return g


def build_g_16(domain: Domain, a: complex, tol: float = 1e-6, candidates=None,
               max_terms: int = 400) -> GustafssonMap:
    """Gustafsson map of the first kind; raises FitStagnation or InjectivityError."""
    fit = fit_density_16(domain, a, tol, candidates, max_terms)
    g = assemble(domain, "thm16", a, fit.points, fit.coeffs,
                 fit_residual=fit.residual, history=fit.history)
    return _validate(g, tol)


def _cleanup_points(domain: Domain, w0: complex, eps: float, count: int,
                    avoid: np.ndarray, zeros: np.ndarray, a: complex,
                    cond_max: float = 1e12) -> tuple[np.ndarray, np.ndarray]:
    """B_0..B_{count-1} on a circle in the disc with S(a_j, B_k) well conditioned."""
    targets = np.concatenate([[a], zeros])
    for turn in np.linspace(0, 1, 7, endpoint=False):
        th = 2 * np.pi * (np.arange(count) / count + turn / count) + 0.1
        B = w0 + 0.55 * eps * np.exp(1j * th)
        if avoid.size and np.min(np.abs(B[:, None] - avoid[None, :])) < 0.02 * eps:
            continue
        tr = szego_traces(domain, B)
        M = cauchy_eval(BoundaryFunction(domain, tr), targets).T     # M[j, k] = S(a_j, B_k)
        if np.linalg.cond(M) < cond_max:
            return B, M
    raise GustafssonError("cleanup matrix S(a_j, B_k) is singular for every trial placement")


def build_g_17(domain: Domain, a: complex, w0: complex, eps: float, tol: float = 1e-3,
               candidates=None, max_terms: int = 200) -> GustafssonMap:
    """Gustafsson map whose quadrature nodes all lie in the disc D_eps(w0)."""
    a = _check_interior(domain, a)
    w0 = complex(w0)
    if eps <= 0:
        raise ValueError("disc radius must be positive")
    if not domain.inside(np.array([w0]), delta=1.05 * eps)[0]:
        raise GustafssonError(f"disc D_{eps}({w0}) is not compactly inside the domain")
    zeros = szego_zeros(domain, a)
    s_a = solve_szego(domain, a)
    target = domain.z * s_a.trace.values
    if candidates is None:
        candidates = disc_lattice(w0, eps)
    # g - id = -(residual) / S(., a) up to the small cleanup terms
    fit = greedy_fit(domain, target, candidates, tol, max_terms,
                     weight=1 / np.abs(s_a.trace.values), divisor=s_a.trace.values)
    B, M = _cleanup_points(domain, w0, eps, domain.n, fit.points, zeros, a)
    pts = np.concatenate([[a], zeros])
    Lfit = cauchy_eval(BoundaryFunction(domain, np.tensordot(fit.coeffs, fit.traces, 1)), pts)
    Hval = pts * cauchy_eval(s_a.trace, pts)
    mu = np.linalg.solve(M, Lfit - Hval)
    g = assemble(domain, "thm17", a, fit.points, fit.coeffs, B, mu,
                 fit_residual=fit.residual, zeros=zeros, history=fit.history)
    _validate(g, tol)
    scale = max(1.0, float(np.abs(g.g_trace.values).max()))
    bad = g.pole_residuals()
    if np.any(bad > 1e-8 * scale):
        raise GustafssonError(f"g keeps a pole at a zero of f_a (residue {bad.max():.2e})")
    return g


# -- quadrature data -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QuadratureData:
    nodes: np.ndarray                 # w_j
    orders: np.ndarray                # n_j
    weights: list                     # weights[j][k] multiplies f^(k)(w_j)
    principal: list                   # contour coefficients p_{j,1..kmax} of h
    sources: list                     # poles of H_refl mapped to each node
    dropped: list = field(default_factory=list)

    def apply(self, fk) -> complex:
        """sum_j sum_k c_jk f^(k)(w_j), fk(k, w) returning the k-th derivative."""
        return complex(sum(wk * fk(k, w) for w, row in zip(self.nodes, self.weights)
                           for k, wk in enumerate(row)))

    def to_json(self) -> dict:
        cpx = lambda v: [float(v.real), float(v.imag)]
        return {
            "nodes": [cpx(w) for w in self.nodes],
            "orders": [int(k) for k in self.orders],
            "weights": [[cpx(x) for x in row] for row in self.weights],
        }


def principal_parts(g: GustafssonMap, p: complex, kmax: int = 3, radius: float | None = None,
                    M: int = 64) -> np.ndarray:
    """Coefficients of (w - g(p))^-k, k = 1..kmax, in the expansion of h = H o g^-1.

    (1/2 pi i) closed integral over a small circle about p of
    H(z) (g(z) - g(p))^(k-1) g'(z) dz.
    """
    if radius is None:
        radius = 0.3 * _isolation(g.domain, p, g.poles)
    e = radius * np.exp(2j * np.pi * np.arange(M) / M)
    z = p + e
    H = g.H_refl(z)
    gz = g(z)
    gp = g.derivative(z)
    w = g(np.array([p]))[0]
    return np.array([np.mean(H * (gz - w) ** (k - 1) * gp * e) for k in range(1, kmax + 1)])


def quadrature_data(g: GustafssonMap, order_tol: float = 1e-8, kmax: int = 3,
                    merge_tol: float = 1e-9) -> QuadratureData:
    """Nodes g(p), orders and weights c_jk = pi p_{j,k+1} / k! from the poles p of H_refl."""
    d = g.domain
    poles = g.poles
    for p in poles:
        if d.boundary_distance(np.array([p]))[0] < 2 * d.dt * d.max_speed:
            raise GustafssonError(f"pole {p} is too close to the boundary")
    images = g(poles)
    nodes: list[complex] = []
    parts: list[np.ndarray] = []
    sources: list[list[complex]] = []
    for p, w in zip(poles, images):
        pk = principal_parts(g, p, kmax)
        for i, w2 in enumerate(nodes):
            if abs(w - w2) <= merge_tol * d.diameter:
                parts[i] = parts[i] + pk
                sources[i].append(complex(p))
                break
        else:
            nodes.append(complex(w))
            parts.append(pk)
            sources.append([complex(p)])

    area = abs(_image_moment(g, 0))
    out_nodes, orders, weights, principal, srcs, dropped = [], [], [], [], [], []
    for w, pk, src in zip(nodes, parts, sources):
        scale = max(abs(pk[0]), 1e-300)
        k = kmax
        while k > 1 and abs(pk[k - 1]) <= order_tol * max(1.0, scale) * d.diameter ** (k - 1):
            k -= 1
        wk = [np.pi * pk[j] / math.factorial(j) for j in range(k)]
        if max(abs(x) for x in wk) < 1e-12 * area:
            dropped.append(w)
            continue
        out_nodes.append(w)
        orders.append(k)
        weights.append(np.array(wk))
        principal.append(pk)
        srcs.append(src)
    return QuadratureData(np.array(out_nodes), np.array(orders, dtype=int), weights,
                          principal, srcs, dropped)


def _image_moment(g: GustafssonMap, m: int) -> complex:
    """(1/2i) closed integral over g(bOmega) of w^m conj(w) dw."""
    d = g.domain
    w = g.g_trace.values
    dw = d_dt(w)
    return complex(np.sum(w ** m * np.conj(w) * dw) * d.dt / 2j)


def verify_quadrature(g: GustafssonMap, data: QuadratureData, max_degree: int = 10) -> list[dict]:
    """Residual table comparing area moments of g(Omega) with the quadrature sum."""
    d = g.domain
    w = g.g_trace.values
    ds = np.abs(d_dt(w))
    rows = []
    for m in range(max_degree + 1):
        lhs = _image_moment(g, m)

        def fk(k, x, m=m):
            if k > m:
                return 0.0
            return math.factorial(m) / math.factorial(m - k) * x ** (m - k)

        rhs = data.apply(fk)
        norm = 0.5 * float(np.sum(np.abs(w) ** (m + 1) * ds) * d.dt)
        rows.append({"m": m, "area_moment": lhs, "quadrature": rhs,
                     "abs_residual": abs(lhs - rhs), "rel_residual": abs(lhs - rhs) / norm})
    return rows


def image_curves(g: GustafssonMap, tail: float = 1e-12) -> list[Curve]:
    """Fourier coefficients of g on each boundary curve, truncated at relative tail."""
    d = g.domain
    N = d.N
    spec = np.fft.fft(g.g_trace.values, axis=-1) / N
    k = np.fft.fftfreq(N, 1.0 / N).astype(int)
    curves = []
    for row in spec:
        big = np.abs(row) > tail * np.abs(row).max()
        K = int(np.abs(k[big]).max())
        modes = np.arange(-K, K + 1)
        curves.append(Curve(row[modes % N], K))
    return curves


def image_domain(g: GustafssonMap, N: int | None = None) -> Domain:
    curves = image_curves(g)
    deg = max(c.degree for c in curves)
    if N is None:
        N = max(g.domain.N, 1 << int(math.ceil(math.log2(4 * max(deg, 1)))))
    try:
        return Domain.from_curves(curves, N)
    except DomainError as exc:
        raise InjectivityError(f"image boundary is not a valid domain: {exc}") from exc
