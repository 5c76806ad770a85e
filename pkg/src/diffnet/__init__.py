"""diffnet: gate-sequence compiler built on diffusive epsilon-nets.

Approximates an arbitrary unitary by a finite product of gates from a
fixed set, without requiring inverse gates: successively tighter nets
around the identity are produced by triple products plus post-selection,
with the inverse-using normal-commutator construction as a baseline.
"""

from ._kernels import backend_name
from .compiler import (CompilationResult, NetStack, compile_unitary,
                       predicted_length, residual)
from .gates import (GateSet, augment_with_inverses, cyclic_shifts,
                    evaluate_word, integer_to_word, make_diffusive_qubit_set,
                    word_to_integer)
from .geometry import (distance_d, distance_df, fold_vector,
                       make_generator_basis, sample_haar_unitary,
                       unitary_to_vector, vector_to_unitary)
from .nets import (EpsilonNet, NetPoint, build_sampling_net, load_net,
                   nearest_point, required_point_count, sampling_radius,
                   save_net, select_ball)
from .shrink import (WalkModel, diffusivity_report, expected_survivors,
                     shrink_commutator, shrink_diffusion, walk_cdf,
                     walk_cdf_approx, walk_pdf)

__version__ = "0.1.0"
