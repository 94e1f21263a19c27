"""Deformation operators of calibrated 3-dimensional submanifolds in flat
7-dimensional geometry: exact structure algebra, adapted-frame curvature
operators, discrete first-order operators with sub-bundle boundary
conditions, boundary-surface index data, and a verification gallery."""

from .algebra import (AffineMap, DegenerateForm, Form, G2Structure,
                      NotAssociative, Plane, assoc_residual, chi,
                      coassoc_residual, cross, decompose3, free_margin,
                      hodge_star, joyce_involutions, metric_from_3form,
                      p_operator, pullback, reconstruct_section, standard_phi,
                      theta_derivative, wedge)
from .boundary import (IndexData, NonIntegral, assemble_DL, chern_number,
                       check_trace_symmetry, index_of, tensor_relation_check)
from .dirac import (BoundaryConditionSpec, DiscreteDiracOperator, GridDomain,
                    GridSection, ImmersionLost, InvalidFrame, MU_X, NU_X,
                    NotComplexLine, SolverFailure, SpectralReport,
                    assemble_dirac, assemble_dvee, bochner_terms, constrain,
                    dvee_reference_apply, dvee_square_residual, kernel_dims,
                    linearization_residual, nonlinear_residual, perturbed_dvee,
                    selfadjoint_residual, strip_mode_kernel_dim,
                    weitzenbock_block_residual, weitzenbock_residual)
from .gallery import EXAMPLES, RunConfig, run_example, verify_all
from .meshes import (SurfaceMesh, ellipsoid_mesh, flat_torus_mesh, genus2_mesh,
                     icosphere_mesh, load_obj, load_off)
from .patches import (AdaptedFrame, CurvatureOperators, ImmersedPatch,
                      RankDeficient, adapted_frame, adapted_frames,
                      ellipsoid_patch, flat_plane_patch, patch_from_json,
                      rigidity_check, second_fundamental, simons_operators,
                      sphere_patch, torus_patch)

__version__ = "0.1.0"
