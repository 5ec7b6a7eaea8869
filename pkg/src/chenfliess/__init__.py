"""Chen-Fliess series as computable objects.

Words and the shuffle product, generating series with weighted sup-norms,
truncated evaluation of the input-output operator with certified tail bounds,
series of polynomial state-space systems, and RLS identification.
"""
from .catalog import (
    banach_example,
    builtin_series,
    catalan_gevrey,
    catalan_limit,
    factorial_geometric,
    fixed_input_member,
    geometric,
    squared_factorial,
    squared_factorial_partial,
)
from .estimators import ChenFliessOperator, ChenFliessRegressor, IteratedIntegralFeatures
from .exceptions import ChenFliessError, DegenerateDataError, HorizonError, NumericalError, ResourceCapError
from .ident import RlsState, build_regressor, identify, rls_update
from .operator import (
    EvalResult,
    RadiusCheck,
    continuity_probe,
    evaluate_truncated,
    iterated_integral,
    joint_continuity_probe,
    lemma2_bound_check,
    radius_check,
)
from .realization import MultiPoly, StateSpace, lie_derivative, series_from_realization, simulate
from .series import GrowthCertificate, Series, UltrametricParams, linear_combination, order, ultrametric_dist
from .signals import Signal, conjugate_exponent, lp_norm, running_integral
from .topology import (
    ConvergenceReport,
    NormEstimate,
    banach_convergence_check,
    ell_infty_M_norm,
    fit_growth_certificate,
    frechet_membership_probe,
    silva_convergence_check,
)
from .words import (
    Alphabet,
    Polynomial,
    Word,
    char_polynomial,
    enumerate_words,
    enumerate_words_upto,
    multinomial_shuffle_expansion,
    shuffle,
)

__version__ = "0.1.0"
