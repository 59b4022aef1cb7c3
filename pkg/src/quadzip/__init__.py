"""
Kernel functions of multiply connected planar domains, conformally equivalent
quadrature domains built from Gustafsson functions, and compression of the
Bergman kernel to boundary data of a single function.
"""

from .algebraic import (AlgebraicRelation, AmbiguousRankError, fit_algebraic_relation,
                        fit_rational_relation, search_rational, search_relation)
from .bergman import (BergmanKernel, bergman_coefficients, bergman_eval, reproducing_check,
                      reproducing_residuals)
from .geometry import Curve, Domain, DomainError, Location, circle, contains, load_domain
from .gustafsson import (GustafssonError, GustafssonMap, InjectivityError, QuadratureData,
                         FitStagnation, build_g_16, build_g_17, image_domain,
                         quadrature_data, verify_quadrature)
from .harmonic import f_prime, f_primes, harmonic_measure, period_matrix
from .kernels import (ahlfors, choose_base_point, garabedian, solve_szego, szego_wbar_derivative,
                      szego_zeros)
from .quadrature import BoundaryFunction, cauchy_eval, integrate_closed
from .testdomains import annulus_domain, annulus_oracle, blob_domain, disc_domain, disc_oracle
from .zip import (ArchiveError, ZipArchive, bergman_pullback_check, pack, q_transform,
                  unzip_g, unzip_gprime, unzip_h, unzip_H)

__version__ = "0.1.0"
