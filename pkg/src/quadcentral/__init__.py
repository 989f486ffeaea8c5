"""Central values of quadratic Dirichlet L-functions for conductors 8d.

The package evaluates L(1/2) for the real even characters n -> (8d/n)
(d odd square-free) through a smoothed functional-equation series, checks
the evaluation against an independent Hurwitz-zeta oracle, and verifies
the supporting identity layer numerically: Gauss-sum closed forms, the
Poisson-summation character identity, Euler-product constants, the
optimal mollifier's coefficient algebra, and the closed-form mollified
moments behind the 7/8 nonvanishing proportion.
"""

from .central import (CensusSummary, CentralValue, LValueCache, a_value,
                      census, central_value, default_kernel, oracle_central,
                      sweep_values, truncation_length)
from .charsums import (GaussSumValue, gauss_brute_batch, gauss_closed,
                       gauss_from_tau, poisson_check, tau_brute)
from .errors import BudgetError, DomainError, FitError
from .mollify import (MollifiedMoments, MollifierSpec, build_mollifier,
                      first_moment_shape, identity_69, lambda_from_xi,
                      mollified_sweep, mollifier_value, moment_unit,
                      predicted_first, predicted_proportion, predicted_second,
                      second_moment_shape, xi_from_lambda, xi_optimal)
from .momentlab import (FitResult, MomentReport, dyadic_assembly, fit_logpoly,
                        moment_suite, predicted_leading, smoothed_moment)
from .ntheory import (EulerProductValue, FactoredInteger, const_C, const_C_over_D,
                      const_D, divisor_j, eta_at_one, factorize, kronecker,
                      lambda_j, mobius, mult_H, mult_g, mult_g1, mult_h,
                      my_weight, phi, ry_weight, sieve_odd_squarefree, sigma,
                      split_l1_l2)
from .smoothing import (OmegaKernel, SmoothWeight, build_omega_kernel,
                        load_kernel, mellin_moment, omega, omega_quadrature,
                        phi_hat0, plateau_weight, save_kernel, standard_bump,
                        tilde_batch, tilde_transform, weight_deriv, weight_eval)

__version__ = "0.1.0"
