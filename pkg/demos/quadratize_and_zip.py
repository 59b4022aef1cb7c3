"""Deform the annulus into a quadrature domain, then zip and unzip its Bergman data."""

import numpy as np

from quadzip import (annulus_domain, bergman_pullback_check, build_g_16, pack, quadrature_data,
                     unzip_H, verify_quadrature)
from quadzip.zip import ZipArchive, compression_ratio


def main():
    d = annulus_domain(0.5, N=512)
    g = build_g_16(d, 0.7, tol=1e-6)
    data = quadrature_data(g)
    print(f"g uses {len(g.c)} terms, |g - id|_C1 = {g.closeness:.2e}, {len(data.nodes)} nodes")
    for row in verify_quadrature(g, data, max_degree=6):
        print(f"  z^{row['m']}: area moment {row['area_moment']:.10f}  "
              f"relative residual {row['rel_residual']:.1e}")

    archive = pack(g, data)
    text = archive.dumps()
    assert ZipArchive.loads(text).dumps() == text
    print(f"archive: {len(text)} bytes, compression ratio {compression_ratio(archive, 512):.0f}")

    # sample away from the poles of the reflected extension
    z = np.array([0.83 + 0.07j, 0.03 + 0.61j, -0.57 - 0.29j])
    ref = g.H_refl(z)
    print("H from archive vs direct (relative):", np.abs(unzip_H(archive, z) - ref).max()
          / np.abs(ref).max())
    pairs = [(0.83 + 0.07j, 0.03 + 0.61j), (-0.57 - 0.29j, 0.71 + 0.02j)]
    print("Bergman pullback residual:", bergman_pullback_check(archive, pairs))


if __name__ == "__main__":
    main()
