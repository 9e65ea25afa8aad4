"""Sharp Szemeredi-Trotter grids built from generalized arithmetic progressions over number fields."""

from .construction import (
    ConstructionParams,
    Line,
    PointGrid,
    build_lines,
    classic_construction,
    derive_params,
    evaluate_line_at,
)
from .gap import GapBox, box_for_size, integer_nth_root
from .incidence import (
    CanonicalLine,
    RichnessReport,
    count_incidences,
    count_points_on_line,
    line_through,
    rich_lines_oracle,
    verify_construction,
)
from .numberfield import (
    IntElement,
    MinimalPolynomial,
    RatElement,
    StructureTable,
    c_lambda,
    embed,
    invert,
    mul,
    power_basis_table,
    rational_table,
    validate_table,
)

__version__ = "0.1.0"
