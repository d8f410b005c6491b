"""wedgelab: finite-truncation laboratory for twisted Fock-space field models.

Rapidity-grid one-particle spaces, bosonic and exchange-symmetrized Fock spaces,
graded twist unitaries and lightray twists, explicit two-particle S-matrices, and a
finite-dimensional modular-theory toolbox, with a verification harness and CLI.
"""

from .onepspace import (OneParticleOperator, OneParticleVector, RapidityGrid, TestFunction,
                        bump, gaussian, lightray_generator, make_grid, pm_transform,
                        poincare_u1)
from .scatfunc import (ScatteringFunction, conjugate_reciprocal, from_registry,
                       phi_blaschke, phi_constant, phi_reciprocal_pair, rapidity_form,
                       s2_blaschke, s2_constant, validate_inner, validate_s2)
from .fock import (FockOperator, FockSpace, FockVector, annihilate, charge_labels, create,
                   field, field_from_pm, second_quantize, sector_projection,
                   s2_permutation, vacuum)
from .twist import (ChargeGrading, TwistUnitary, build_R_tilde, double_fourier,
                    fourier_component, grading_from_unitary, tau_k, tau_k_inverse,
                    twist_unitary)
from .smatrix import (TwoParticleSMatrix, check_axioms, federbush_smatrix,
                      longo_witten_smatrix)
from .modular import (FiniteAlgebra, ModularData, algebra_closure, commutant_dense,
                      factor_and_minimal_projection, modular_from_vector,
                      twisted_wedge_algebra, verify_commutant_twisted,
                      verify_modular_twisted)
from .verify import (LocalityReport, cyclicity_rank, spectrum_condition,
                     wedge_commutativity, zf_relation_longo_witten,
                     zf_relations_federbush)

__version__ = "0.1.0"
