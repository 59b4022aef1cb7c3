"""The boundary of a quadrature domain satisfies a polynomial relation in (w, conj w)."""

import numpy as np

from quadzip import annulus_domain, build_g_16
from quadzip.algebraic import AmbiguousRankError, search_relation
from quadzip.quadrature import resample


def main():
    d = annulus_domain(0.2)
    try:
        search_relation(d.z.ravel(), np.conj(d.z.ravel()), max_degree=3)
    except AmbiguousRankError:
        print("raw annulus: no relation up to degree 3")
    rel = search_relation(d.z.ravel(), np.conj(d.z.ravel()), max_degree=6)
    print(f"raw annulus: degree {rel.degree}, residual {rel.residual:.1e}")

    g = build_g_16(d, np.sqrt(0.2), tol=0.7)
    w = resample(g.g_trace.values, 2048).ravel()
    rel = search_relation(w, np.conj(w), max_degree=16)
    print(f"quadratized annulus ({len(g.poles)} nodes): degree {rel.degree}, "
          f"residual {rel.residual:.1e}")
    print("smallest relative singular values:", np.array2string(rel.singular_values[-3:],
                                                                  precision=2))


if __name__ == "__main__":
    main()
