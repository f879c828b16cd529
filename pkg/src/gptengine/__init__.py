"""Convex state spaces, instruments and spectral entropy for general probabilistic theories."""

from .core import (
    Effect,
    MatrixModel,
    Measurement,
    ModelError,
    State,
    StateSpace,
    SubState,
    VertexPolytope,
    is_pure,
    membership,
    perfectly_distinguishable,
)
from .instruments import (
    ConditionalKernel,
    Instrument,
    MeasurePrepareInstrument,
    MPPInstrument,
    coarse_grain,
    groenewold_majorizes,
    is_repeatable,
    make_separating_spm,
    refine_to_pure,
)
from .lp import LinearProgram, LPStatus, solve
from .models import get_model, load_omega_bar, min_over_product_states, verify_not_2_symmetric
from .thermo import (
    check_entropy_uniqueness,
    concavity_check,
    cycle_delta_work,
    entropy_oracle,
    enumerate_pdp_decompositions,
    info_gain,
    monotonicity_check,
    shannon_entropy,
)

__all__ = [name for name in dir() if not name.startswith("_")]
