"""Numerical experiments on polyanalytic extension along chains of circles."""

from .chains import (ChainSpec, CircleT, build_custom_chain, build_horicycle_chain, build_hyperbolic_chain,
                     build_linear_chain, build_mixed_chain, circle_at, discriminant_grid, segment_tracing_chain,
                     t_grid)
from .discriminant import classify_chain, condition_star, discriminant_roots, discriminant_set
from .laurent import analyze_circle, build_extension, merom_test, moment
from .dynamics import I_of_q, count_traveling, track_branches, verify_zp_balance
from .dbar import identity_check, pole_reduction_check
from .polyfit import euclidean_to_hyperbolic, fit, order_detect
from .functions import builtin, list_functions, registry, resolve_function

__version__ = "0.1.0"
