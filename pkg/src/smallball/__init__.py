"""Exact dyadic computations for signed hyperbolic Haar sums.

Builds sums of L-infinity normalized Haar functions over dyadic rectangles
of fixed volume on [0,1)^d, Riesz-product dual functions giving certified
lower bounds on their sup norms, and sign searches that minimize the sup norm.
"""
from .dyadic import (DyadicInterval, DyadicRectangle, count_shapes, enumerate_shapes,
                     haar_value, square_function, synthesize)
from .errors import (DegenerateQError, GridTooLargeError, InstanceTooLargeError,
                     InvalidBlockError, ModeError, ParameterError, ResolutionError,
                     ShapeMismatchError, SignFileError, SmallBallError)
from .grid import GridFunction, cell_budget, inner_product, lp_norm, moment
from .riesz import (Certificate, RieszParams, build_riesz_product,
                    build_riesz_product_excluding, certificate, derive_params, lemma_checks,
                    lp_growth_scan, tail_profile, verify_main_identity)
from .search import SearchResult, exhaustive_min, local_search, scaling_study
from .signs import SignAssignment, all_plus, random_signs
from .sums import (BlockPartition, build_block_sum, build_coincidence_sum,
                   build_hyperbolic_sum, build_rfunction, count_block)

__version__ = "0.1.0"
