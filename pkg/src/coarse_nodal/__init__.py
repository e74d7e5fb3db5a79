"""Coarse nodal counts: persistence of sublevel sets on grids, multiscale dyadic
approximation, and eigenfunction experiments on flat tori."""
__version__ = "0.1.0"

from .barcode import (INF, Bar, CountWindow, GradedBarcode, barcode_p_norm, barcode_total_norm,
                      bottleneck_distance, dualize, kunneth_product, n_delta, n_delta_window,
                      n_delta_zero)
from .cubical import (CoarseCount, CubicalFiltration, GridField, build_filtration, coarse_m,
                      coarse_z, min_product_check, mv_two_set_check, persistent_rank,
                      sublevel_barcode, subadditivity_check)
from .errors import (ConfigError, DepthCapError, InputError, PackingError, QuadratureError,
                     ResolutionError)
from .spectral import (ScalingReport, SharpnessConfig, TrigPoly, VectorTrigField, bump_profile,
                       courant_sweep, gradient_field, norm_field, product, random_combination, sample,
                       sharpness_construct, sobolev_norm_exact, wiggly_example)
from .approx import (DyadicCube, DyadicPartition, MorreyConstants, PolyFit, SobolevParams,
                     averaged_taylor, build_mdp, cube_bar_bound, is_good, mdp_count_check,
                     morrey_constant, sobolev_seminorm)
