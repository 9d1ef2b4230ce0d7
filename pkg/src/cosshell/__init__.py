"""Linear constrained Cosserat shell models up to O(h^5).

Surface geometry kernel, linear and nonlinear strain measures, quadratic
shell-energy functionals (Koiter, conditional and modified Cosserat),
coercivity checkers, and a grid-based minimizer.
"""

from .energy import (ALPHA_STAR, EnergyBreakdown, MaterialParams, ModelConfig,
                     MODELS, W_curv, W_mp_inf, W_shell_inf, W_shell_pair,
                     curv_form_eigenvalues, integrate_energy, lemma_ly_estimate,
                     shell_form_eigenvalues, thickness_check_h3, thickness_check_h5)
from .geometry import (FrameGrid, GeometryFrame, SurfaceChart, evaluate_frame,
                       lifted_tensors, make_chart, numeric_derivatives)
from .kinematics import (DisplacementField, StrainField, StrainState,
                         build_strain_field, change_of_metric, koiter_bending,
                         lifted_strains, rotation_vector, strain_state,
                         transverse_shear_lin)
from .oracle import (linearization_slope_test, nonlinear_strains, polar_rotation,
                     spd_sqrt)
from .solver import DiscreteProblem, SolveResult, assemble, min_eigen_estimate, solve_cg

__version__ = "0.1.0"

__all__ = [
    "ALPHA_STAR", "EnergyBreakdown", "MaterialParams", "ModelConfig", "MODELS",
    "W_curv", "W_mp_inf", "W_shell_inf", "W_shell_pair",
    "curv_form_eigenvalues", "integrate_energy", "lemma_ly_estimate",
    "shell_form_eigenvalues", "thickness_check_h3", "thickness_check_h5",
    "FrameGrid", "GeometryFrame", "SurfaceChart", "evaluate_frame",
    "lifted_tensors", "make_chart", "numeric_derivatives",
    "DisplacementField", "StrainField", "StrainState", "build_strain_field",
    "change_of_metric", "koiter_bending", "lifted_strains", "rotation_vector",
    "strain_state", "transverse_shear_lin",
    "linearization_slope_test", "nonlinear_strains", "polar_rotation", "spd_sqrt",
    "DiscreteProblem", "SolveResult", "assemble", "min_eigen_estimate", "solve_cg",
]
