"""Random mixed states, separability volumes and entanglement of formation."""

from .concurrence import concurrence, eof_from_concurrence, flipped_state
from .ensembles import (
    MeasureSpec,
    parse_measure,
    sample_density_matrix,
    sample_gue,
    sample_haar_orthogonal,
    sample_haar_unitary,
    sample_simplex,
    stream,
)
from .errors import EntvolError
from .estimator import WalkParams, estimate_eof, halving_criterion
from .states import (
    BipartiteSplit,
    analyze,
    partial_transpose,
    participation_ratio,
    pt_spectrum_and_negativity,
    renyi_entropy,
    von_neumann_entropy,
)

__version__ = "0.1.0"
