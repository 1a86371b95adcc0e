"""Numerics for counterexamples to maximal p-norm multiplicativity."""

__version__ = "0.1.0"

from .bounds import (  # noqa: E402
    BoundsParams,
    lipschitz_bound,
    product_output_entropy_bound,
    randomizing_norm_bound,
    subspace_dimension_bound,
)
from .channels import (  # noqa: E402
    RandomUnitaryChannel,
    StinespringChannel,
    apply_product_to_state,
    apply_random_unitary,
    apply_stinespring,
    conjugate_channel,
    phi_overlap,
    product_output_on_phi,
    randomizing_deviation,
)
from .ensembles import SeededRng, gaussian_vector, haar_unitary, random_isometry  # noqa: E402
from .entropy import (  # noqa: E402
    EstimatorConfig,
    grouping_decomposition,
    max_p_norm_from_entropy,
    min_output_entropy_estimate,
    renyi_entropy,
)
from .linalg import (  # noqa: E402
    BipartiteDims,
    Spectrum,
    eigen_spectrum,
    max_entangled,
    partial_trace,
    schatten_norm,
    tensor_product,
)
from .weingarten import exact_avg_purity, mc_avg_purity, weingarten_table  # noqa: E402
