"""
Command-line front end.

    quadzip kernels     --domain D --out DIR
    quadzip quadratize  --domain D --out DIR [--variant thm16|thm17] [--tol T]
    quadzip zip         --domain D --out DIR
    quadzip unzip       ARCHIVE --out DIR
    quadzip algebraic   (--domain D | --archive ARCHIVE) --out DIR

Exit codes: 0 pass, 2 I/O or configuration error, 3 construction failure or
residual over bound, 4 ambiguous numerical rank decision.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .algebraic import (AmbiguousRankError, fit_algebraic_relation, search_rational,
                        search_relation)
from .bergman import BergmanError, bergman_coefficients, bergman_eval, interior_sample
from .geometry import Curve, Domain, DomainError, load_domain
from .gustafsson import (GustafssonError, build_g_16, build_g_17, quadrature_data,
                         verify_quadrature)
from .harmonic import HarmonicError, f_primes, period_matrix
from .kernels import (AhlforsMap, KernelError, KSOperator,
                      choose_base_point, garabedian, solve_szego)
from .quadrature import BoundaryFunction, QuadratureError, cauchy_boundary_limit
from .testdomains import annulus_domain, blob_domain, disc_domain
from .zip import (ArchiveError, ZipArchive, ZipError, bergman_pullback_check,
                  compression_ratio, pack, unzip_g, unzip_gprime, unzip_h, unzip_H)

ENV_THREADS = "QUADZIP_THREADS"
EXIT_OK, EXIT_IO, EXIT_FAIL, EXIT_AMBIGUOUS = 0, 2, 3, 4

CONSTRUCTION_ERRORS = (GustafssonError, KernelError, HarmonicError, BergmanError,
                       QuadratureError, ZipError, np.linalg.LinAlgError)

CSV_HELP = """\
CSV files (one header row, then data):
  kernels:    szego.csv, garabedian.csv, ahlfors.csv  curve,t,re,im
              fprime.csv                               j,curve,t,re,im
              bergman.csv                              x,y,re,im   (K(z, a) on an interior grid)
  quadratize: nodes.csv                                node,re,im,order,weight_re,weight_im
              verification.csv                         m,abs_residual,rel_residual
              fit_history.csv                          step,residual
  zip:        archive.json plus nodes.csv as above
  unzip:      unzip.csv                                x,y,h_re,h_im,H_re,H_im,gprime_re,gprime_im,route_gap
  algebraic:  singular_values.csv                      degree,smallest,residual,gap
Domain argument: a JSON file or one of disc, disc:R, annulus, annulus:r, blob:n:seed.
Default thread count comes from the QUADZIP_THREADS environment variable.
"""


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    out: Path
    domain: str | None = None
    archive: str | None = None
    grid: int | None = None
    tol: float = 1e-6
    variant: str = "thm16"
    w0: complex | None = None
    eps: float | None = None
    max_degree: int = 10
    seed: int = 0
    threads: int | None = None
    base: complex | None = None
    bound: float = 1e-6

    def __post_init__(self):
        if not self.tol > 0 or not self.bound > 0:
            raise ConfigError("tolerances must be positive")
        if self.grid is not None and (self.grid < 64 or self.grid & (self.grid - 1)):
            raise ConfigError(f"grid must be a power of two >= 64, got {self.grid}")
        if self.variant not in ("thm16", "thm17"):
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.variant == "thm17" and self.command in ("quadratize", "zip"):
            if self.w0 is None or self.eps is None:
                raise ConfigError("variant thm17 needs --w0 and --eps")
        if self.max_degree < 0:
            raise ConfigError("max degree must be >= 0")


# -- output ----------------------------------------------------------------------

def _plain(obj):
    """JSON-ready copy: complex -> [re, im], numpy scalars and arrays unwrapped."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Path, doc) -> None:
    write_atomic(path, json.dumps(_plain(doc), indent=1, sort_keys=True) + "\n")


def write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    write_atomic(path, buf.getvalue())


def _trace_rows(domain: Domain, values: np.ndarray):
    for k in range(domain.n):
        for t, v in zip(domain.t, values[k]):
            yield k, float(t), float(v.real), float(v.imag)


# -- inputs ----------------------------------------------------------------------

def resolve_domain(spec: str, grid: int | None = None) -> Domain:
    """A domain file or a built-in name."""
    name, *args = spec.split(":")
    builtin = {"disc": lambda R=1.0: disc_domain(float(R)),
               "annulus": lambda r=0.5: annulus_domain(float(r)),
               "blob": lambda n, seed: blob_domain(int(n), int(seed))}
    if not os.path.exists(spec) and name in builtin:
        try:
            d = builtin[name](*args)
        except TypeError as exc:
            raise ConfigError(f"bad built-in domain {spec!r}") from exc
    else:
        try:
            with open(spec) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read domain file {spec}: {exc}") from exc
        d = load_domain(json.loads(text) if text.strip() else {})
    return d if grid is None or grid == d.N else d.with_grid(grid)


def read_archive(path: str) -> ZipArchive:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read archive {path}: {exc}") from exc
    return ZipArchive.loads(text)


def _base_point(cfg: RunConfig, d: Domain) -> complex:
    if cfg.base is not None:
        return complex(cfg.base)
    return choose_base_point(d, np.random.default_rng(cfg.seed))


# -- commands --------------------------------------------------------------------

def _ahlfors_unchecked(d: Domain, a: complex) -> AhlforsMap:
    s = solve_szego(d, a)
    L = garabedian(s)
    return AhlforsMap(d, s.a, BoundaryFunction(d, s.trace.values / L.trace.values), s, L)


def _interior_grid(d: Domain, size: int = 40) -> np.ndarray:
    x0, x1 = d.z.real.min(), d.z.real.max()
    y0, y1 = d.z.imag.min(), d.z.imag.max()
    g = (np.arange(size) + 0.5) / size
    Z = ((x0 + (x1 - x0) * g)[None, :] + 1j * (y0 + (y1 - y0) * g)[:, None]).ravel()
    return Z[d.inside(Z, delta=0.02 * d.diameter)]


def cmd_kernels(cfg: RunConfig) -> int:
    d = resolve_domain(cfg.domain, cfg.grid)
    a = _base_point(cfg, d)
    f = _ahlfors_unchecked(d, a)
    inv = f.invariants()
    L = f.garabedian
    min_s = float(np.abs(f.szego.trace.values).min())
    checks = [
        ("boundary identity (1/i) L T = conj(S)", L.boundary_identity_residual(f.szego), 1e-8),
        ("Garabedian contour integral - i", abs(2j * np.pi * L.residue() - 1j), 1e-8),
        ("f(a)", inv["f(a)"], 1e-10),
        ("|f|-1 on boundary", inv["|f|-1 on boundary"], 1e-8),
        ("f'(a) - 2 pi S(a,a) (relative)", inv["f'(a) - 2 pi S(a,a) (relative)"], 1e-6),
        ("skew-Hermitian A + A*", KSOperator.for_domain(d).skew_residual, 1e-12),
    ]
    report = {"n": d.n, "grid": d.N, "a": a, "S(a,a)": f.szego.diagonal,
              "winding": {"value": inv["winding"], "expected": d.n,
                          "pass": inv["winding"] == d.n},
              "min |S| on boundary": {"value": min_s, "pass": min_s > 0}}
    report["checks"] = {k: {"value": float(v), "bound": b, "pass": bool(v <= b)}
                        for k, v, b in checks}
    out = cfg.out
    write_csv(out / "szego.csv", ["curve", "t", "re", "im"], _trace_rows(d, f.szego.trace.values))
    write_csv(out / "garabedian.csv", ["curve", "t", "re", "im"], _trace_rows(d, L.trace.values))
    write_csv(out / "ahlfors.csv", ["curve", "t", "re", "im"], _trace_rows(d, f.trace.values))
    fps = f_primes(d)
    rows = [(j + 1,) + r for j, F in enumerate(fps) for r in _trace_rows(d, F.trace.values)]
    write_csv(out / "fprime.csv", ["j", "curve", "t", "re", "im"], rows)
    if fps:
        report["period_matrix"] = period_matrix(d, fps)
    else:
        report["note"] = "simply connected: no F_j' and an empty fprime table"
    K = bergman_coefficients(d, seed=cfg.seed)
    Z = _interior_grid(d)
    Kz = bergman_eval(K, Z, a, near="subtract")
    write_csv(out / "bergman.csv", ["x", "y", "re", "im"],
              ((z.real, z.imag, v.real, v.imag) for z, v in zip(Z, Kz)))
    report["bergman"] = {"coefficients": K.coefficients, "lsq_residual": K.lsq_residual,
                         "hermitian_residual": float(np.max(np.abs(K.coefficients - K.coefficients.conj().T)))
                         if K.coefficients.size else 0.0}
    ok = (report["winding"]["pass"] and report["min |S| on boundary"]["pass"]
          and all(c["pass"] for c in report["checks"].values()))
    report["pass"] = ok
    write_json(out / "report.json", report)
    return EXIT_OK if ok else EXIT_FAIL


def _build(cfg: RunConfig, d: Domain):
    a = _base_point(cfg, d)
    if cfg.variant == "thm16":
        return build_g_16(d, a, cfg.tol)
    return build_g_17(d, a, complex(cfg.w0), float(cfg.eps), cfg.tol)


def _node_rows(data):
    for j, (w, k, wt) in enumerate(zip(data.nodes, data.orders, data.weights)):
        yield j, float(w.real), float(w.imag), int(k), float(wt[0].real), float(wt[0].imag)


def cmd_quadratize(cfg: RunConfig) -> int:
    d = resolve_domain(cfg.domain, cfg.grid)
    g = _build(cfg, d)
    data = quadrature_data(g)
    rows = verify_quadrature(g, data, cfg.max_degree)
    out = cfg.out
    write_json(out / "gustafsson.json", g.to_json())
    doc = data.to_json()
    doc["dropped"] = list(data.dropped)
    doc["principal_parts"] = [list(p) for p in data.principal]
    write_json(out / "quadrature.json", doc)
    write_csv(out / "nodes.csv", ["node", "re", "im", "order", "weight_re", "weight_im"],
              _node_rows(data))
    write_csv(out / "verification.csv", ["m", "abs_residual", "rel_residual"],
              ((r["m"], r["abs_residual"], r["rel_residual"]) for r in rows))
    write_csv(out / "fit_history.csv", ["step", "residual"], enumerate(g.history))
    worst = max(r["rel_residual"] for r in rows)
    report = {"variant": g.variant, "a": g.a, "terms": len(g.b), "nodes": len(data.nodes),
              "closeness_c1": g.closeness, "fit_residual": g.fit_residual,
              "max_rel_residual": worst, "bound": cfg.bound, "pass": worst <= cfg.bound}
    if cfg.variant == "thm17":
        inside = np.abs(data.nodes - complex(cfg.w0)) < cfg.eps
        second = [abs(p[1]) if len(p) > 1 else 0.0 for p in data.principal]
        report["nodes_in_disc"] = bool(inside.all())
        report["orders_all_one"] = bool(np.all(data.orders == 1))
        report["max_second_coefficient"] = max(second, default=0.0)
        report["pass"] = report["pass"] and report["nodes_in_disc"] and report["orders_all_one"]
    write_json(out / "report.json", report)
    return EXIT_OK if report["pass"] else EXIT_FAIL


def cmd_zip(cfg: RunConfig) -> int:
    d = resolve_domain(cfg.domain, cfg.grid)
    g = _build(cfg, d)
    data = quadrature_data(g)
    archive = pack(g, data)
    write_atomic(cfg.out / "archive.json", archive.dumps())
    write_csv(cfg.out / "nodes.csv", ["node", "re", "im", "order", "weight_re", "weight_im"],
              _node_rows(data))
    write_json(cfg.out / "report.json", {
        "bytes": archive.size_bytes(), "compression_ratio": compression_ratio(archive),
        "h_poles": len(archive.h_poles), "H_poles": len(archive.H_poles),
        "closeness_c1": g.closeness})
    return EXIT_OK


def cmd_unzip(cfg: RunConfig) -> int:
    archive = read_archive(cfg.archive)
    d = archive.domain
    rng = np.random.default_rng(cfg.seed)
    z = interior_sample(d, 20, rng)
    gz = unzip_g(archive, z)
    h = unzip_h(archive, gz)
    H = unzip_H(archive, z)
    gp = unzip_gprime(archive, z)
    gap = np.abs(h - H)
    # boundary limit of H must be conj(g)
    Hb = cauchy_boundary_limit(archive.g_boundary.conj())
    for P in archive.H_poles:
        Hb = Hb + P(d.z)
    boundary = float(np.max(np.abs(Hb - np.conj(archive.g_boundary.values))))
    pairs = np.stack([z[:5], z[5:10]], axis=1)
    pull = bergman_pullback_check(archive, pairs, seed=cfg.seed)
    scale = max(1.0, float(np.abs(H).max()))
    report = {"route_gap": float(gap.max()), "route_bound": 1e-6 * scale,
              "boundary_limit_residual": boundary,
              "pullback_residual": pull, "pullback_bound": 1e-5}
    report["pass"] = (report["route_gap"] <= report["route_bound"] and pull <= 1e-5)
    write_csv(cfg.out / "unzip.csv",
              ["x", "y", "h_re", "h_im", "H_re", "H_im", "gprime_re", "gprime_im", "route_gap"],
              ((p.real, p.imag, a.real, a.imag, b.real, b.imag, c.real, c.imag, e)
               for p, a, b, c, e in zip(z, h, H, gp, gap)))
    write_json(cfg.out / "report.json", report)
    return EXIT_OK if report["pass"] else EXIT_FAIL


def boundary_samples(curves: list[Curve], count: int) -> np.ndarray:
    """At least `count` points spread evenly over the curves."""
    per = max(64, 1 << int(math.ceil(math.log2(max(count, 1) / len(curves) + 1))))
    t = 2 * np.pi * np.arange(per) / per
    return np.concatenate([c(t) for c in curves])


def _relation_doc(rel) -> dict:
    doc = rel.to_json()
    doc["nontrivial"] = rel.nontrivial
    return doc


def cmd_algebraic(cfg: RunConfig) -> int:
    need = 3 * (cfg.max_degree + 1) ** 2
    report: dict = {}
    if cfg.archive is not None:
        archive = read_archive(cfg.archive)
        image = archive.image
        curves = [Curve(c, k) for c, k in archive.g_coeffs]
        source = archive.domain
    else:
        image = resolve_domain(cfg.domain, cfg.grid)
        archive, curves, source = None, list(image.curves), image
    w = boundary_samples(curves, need)
    out = cfg.out
    rows = []
    code = EXIT_OK
    try:
        rel = search_relation(w, w.conj(), max_degree=cfg.max_degree)
        report["boundary_relation"] = _relation_doc(rel)
        report["detected_degree"] = rel.degree
    except AmbiguousRankError as exc:
        report["boundary_relation"] = {"ambiguous": str(exc), "gaps": exc.gaps}
        code = EXIT_AMBIGUOUS
    for deg in range(1, cfg.max_degree + 1):
        r = fit_algebraic_relation(w, w.conj(), deg)
        rows.append((deg, float(r.singular_values[-1]), r.residual, r.gap))
    write_csv(out / "singular_values.csv", ["degree", "smallest", "residual", "gap"], rows)

    # a Schwarz-type function h with boundary values conj(w) ties all boundary
    # curves to one irreducible relation; a relation that factors curve by curve
    # (each curve alone satisfies a lower degree) rules h out
    if "detected_degree" in report and len(curves) > 1:
        per_curve = []
        for c in curves:
            wc = boundary_samples([c], need)
            try:
                per_curve.append(search_relation(wc, wc.conj(), cfg.max_degree).degree)
            except AmbiguousRankError:
                per_curve.append(None)
        factored = all(k is not None and k < report["detected_degree"] for k in per_curve)
        report["h_extension"] = {"per_curve_degrees": per_curve, "factored": factored,
                                 "pass": not factored}
    if archive is not None:
        Hb = cauchy_boundary_limit(np.conj(image.z), image)
        for P in archive.h_poles:
            Hb = Hb + P(image.z)
        ext = float(np.max(np.abs(Hb - np.conj(image.z))) / max(1.0, np.abs(image.z).max()))
        report["h_boundary_residual"] = ext
        zs = interior_sample(source, need, np.random.default_rng(cfg.seed))
        ws = unzip_g(archive, zs)
        hs = unzip_h(archive, ws)
        try:
            report["h_dependence"] = _relation_doc(search_relation(ws, hs, cfg.max_degree))
        except AmbiguousRankError as exc:
            report["h_dependence"] = {"ambiguous": str(exc)}

    # Ahlfors maps f_a, f_b of the source domain are algebraically dependent
    rng = np.random.default_rng(cfg.seed)
    a = complex(cfg.base) if cfg.base is not None else choose_base_point(source, rng)
    b = choose_base_point(source, rng)
    fa = _ahlfors_unchecked(source, a).trace.values.ravel()
    fb = _ahlfors_unchecked(source, b).trace.values.ravel()
    dep_deg = min(cfg.max_degree, 2 * source.n + 2)
    if fa.size >= 3 * (dep_deg + 1) ** 2:
        try:
            report["ahlfors_dependence"] = {"a": a, "b": b, **_relation_doc(
                search_relation(fa, fb, dep_deg))}
        except AmbiguousRankError as exc:
            report["ahlfors_dependence"] = {"a": a, "b": b, "ambiguous": str(exc)}

    # T(w)^2 as a quotient of polynomials in (w, conj w) on the boundary
    T2 = image.tangent.ravel() ** 2
    wz = image.z.ravel()
    try:
        report["tangent_squared"] = search_rational(wz, wz.conj(), T2,
                                                    max_degree=min(cfg.max_degree, 8)).to_json()
    except AmbiguousRankError as exc:
        report["tangent_squared"] = {"ambiguous": str(exc)}
    write_json(out / "report.json", report)
    return code


COMMANDS = {"kernels": cmd_kernels, "quadratize": cmd_quadratize, "zip": cmd_zip,
            "unzip": cmd_unzip, "algebraic": cmd_algebraic}


# -- argument parsing ------------------------------------------------------------

def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quadzip", description=__doc__.strip().splitlines()[0],
                                epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name, epilog=CSV_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        if name == "unzip":
            s.add_argument("archive", help="archive written by the zip command")
        else:
            s.add_argument("--domain", help="domain JSON file or built-in name")
        if name == "algebraic":
            s.add_argument("--archive", help="fit the image boundary stored in an archive")
        s.add_argument("--out", required=True, type=Path, help="output directory")
        s.add_argument("--grid", type=int, help="boundary samples per curve (power of two)")
        s.add_argument("--tol", type=float, default=1e-6, help="density fit tolerance")
        s.add_argument("--variant", choices=("thm16", "thm17"), default="thm16")
        s.add_argument("--w0", type=_complex, help="disc center for thm17, e.g. 0.7+0j")
        s.add_argument("--eps", type=float, help="disc radius for thm17")
        s.add_argument("--max-degree", type=int, default=10,
                       help="highest moment degree or relation degree")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--threads", type=int, help=f"BLAS threads (default ${ENV_THREADS})")
        s.add_argument("--base", type=_complex, help="base point a (default: drawn from seed)")
        s.add_argument("--bound", type=float, default=1e-6,
                       help="pass bound for quadrature residuals")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    domain = getattr(ns, "domain", None)
    archive = getattr(ns, "archive", None)
    if ns.command != "unzip" and domain is None and archive is None:
        raise ConfigError("--domain is required")
    threads = ns.threads
    if threads is None and os.environ.get(ENV_THREADS):
        try:
            threads = int(os.environ[ENV_THREADS])
        except ValueError as exc:
            raise ConfigError(f"{ENV_THREADS} must be an integer") from exc
    return RunConfig(command=ns.command, out=ns.out, domain=domain, archive=archive,
                     grid=ns.grid, tol=ns.tol, variant=ns.variant, w0=ns.w0, eps=ns.eps,
                     max_degree=ns.max_degree, seed=ns.seed, threads=threads,
                     base=ns.base, bound=ns.bound)


def run(cfg: RunConfig) -> int:
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=cfg.threads):
        return COMMANDS[cfg.command](cfg)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return run(cfg)
    except (ConfigError, ArchiveError, DomainError, OSError, json.JSONDecodeError) as exc:
        print(f"quadzip: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except AmbiguousRankError as exc:
        print(f"quadzip: ambiguous: {exc}", file=sys.stderr)
        return EXIT_AMBIGUOUS
    except CONSTRUCTION_ERRORS as exc:
        print(f"quadzip: construction failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
