"""regpos: regular positions of convex bodies and Monte Carlo experiments
on random sections.

Convex bodies are norm oracles (gauge, support, subgradient) over exact
closed-form families; positions are determinant-one linear images.  The
package computes the ell-position by sample-average approximation, the
alpha-regular typical position by a damped fixed-point iteration over
interpolated bodies, and drives desk-scale Monte Carlo checks of random
section regularity and the random quotient-of-subspace phenomenon.
"""

from .bodies import (
    ConvexBody,
    WeightedLp,
    Ellipsoid,
    PolytopeH,
    PolytopeV,
    LinearImage,
    Complexified,
    DegenerateBodyError,
    ball,
    cube,
    cross_polytope,
    complexify,
    from_spec,
    gauge,
    linear_image,
    polar,
    relative_out_radius,
    support,
)
from .gaussian import EllEstimate, FixedSample, GaussianSample, crn_pair, ell, ell_star, mstar
from .interpolation import (
    InterpolationPair,
    ScalarMapValues,
    interpolate,
    phi,
    property_suite,
    surrogate,
    theta_of_alpha,
)
from .positions import EllPositionResult, PositionMap, balance_scale, ell_product, solve_ell_position
from .regular import (
    FixedPointResult,
    GelfandEstimate,
    RegularityReport,
    find_regular_position,
    fixed_point_map,
    gelfand_upper,
    random_gelfand,
    regularity_report,
)
from .subspaces import (
    Flag,
    SectionBody,
    Subspace,
    geometric_distance_to_ball,
    haar_flag,
    haar_grassmannian,
    in_radius,
    out_radius,
    perp_identity_check,
    project,
    section,
)

__version__ = "0.1.0"
