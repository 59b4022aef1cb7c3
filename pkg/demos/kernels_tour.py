"""Szego, Garabedian and Bergman kernels plus the Ahlfors map on the built-in domains."""

import numpy as np

from quadzip import (ahlfors, annulus_domain, annulus_oracle, bergman_coefficients, bergman_eval,
                     blob_domain, choose_base_point, disc_domain, period_matrix, solve_szego,
                     szego_zeros)


def main():
    for name, d in [("disc", disc_domain()), ("annulus r=0.5", annulus_domain(0.5)),
                    ("3-connected blob", blob_domain(3, 7))]:
        a = choose_base_point(d, np.random.default_rng(0))
        f = ahlfors(d, a)
        inv = f.invariants()
        print(f"{name}: a = {a:.4f}, S(a,a) = {solve_szego(d, a).diagonal.real:.6f}, "
              f"winding {inv['winding']}, ||f|-1| {inv['|f|-1 on boundary']:.1e}")
        print(f"  Szego zeros: {np.round(szego_zeros(d, a), 6)}")
        if d.n > 1:
            print(f"  period matrix:\n{np.round(period_matrix(d).real, 6)}")

    d = annulus_domain(0.5)
    K = bergman_coefficients(d)
    o = annulus_oracle(0.5, terms=200)
    z, w = np.array([0.6 + 0.2j]), 0.75j
    print(f"annulus Bergman kernel at ({z[0]}, {w}): {bergman_eval(K, z, w)[0]:.12f}, "
          f"series {o.K(z[0], w):.12f}")


if __name__ == "__main__":
    main()
