"""Signed tilings of R^(r+k) from fragment matrices, in exact rational arithmetic."""

from .linalg import (
    BlockPermutation,
    BlockPermutationError,
    DimensionError,
    LinalgError,
    Matrix,
    Rational,
    RankDeficiencyError,
    SingularMatrixError,
    det,
    inverse,
    kernel_vector,
    perm_sign,
    solve,
    vector,
)
from .fragments import (
    DEGENERATE,
    NEGATIVE,
    POSITIVE,
    Decomposition,
    DegenerateFragmentError,
    Dimensions,
    Fragment,
    FragmentSet,
    c_submatrices,
    complement,
    decompose,
    fragment_matrix,
    fragment_set,
    laplace_identity,
    sandc_identity,
    shuffle_sign,
    subsets,
)
from .tiling import (
    CoverageReport,
    GenericDirection,
    GenericityError,
    TileId,
    TilingEngine,
    VerifyReport,
    average_identity,
    certify_direction,
    choose_generic_direction,
    coverage_value,
    enumerate_tiles_at,
    pip_contains,
    verify_constancy,
)
from .facets import (
    CrossingReport,
    DoubleCoverReport,
    FacetCollection,
    FacetGeometry,
    FacetId,
    UpDownPartition,
    collection_of,
    crossing_check,
    double_cover_check,
    facet_collection,
    facet_projections,
    facet_signs,
    h_vector,
    lambda_vector,
    tilde_facet,
    up_down_partition,
)
from .slices import (
    SliceClass,
    SliceLayout,
    SlicePreconditionError,
    slice_coverage,
    slice_layout,
    slice_precondition,
    unimodular_reduce,
)
from .render import RenderConfig, render_svg

__all__ = [name for name in dir() if not name.startswith("_")]
