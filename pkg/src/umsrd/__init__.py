"""Cut-cell finite-volume laboratory for linear advection.

Base first-order upwind transport on 1D/2D cut-cell meshes, stabilized by
weighted state redistribution (SRD) and its update-magnitude blended
variant (UM-SRD), plus a registry of nine reproducible experiments.
"""

from .advection import (CosinePulse, ProductSine, Sine, Step, TiltedField,
                        cfl_dt, exact_solution, fv_step_1d, fv_step_2d_split,
                        initial_condition, upwind_flux)
from .diagnostics import (DivergenceError, StepDiagnostics, StepRecorder,
                          convergence_order, drift, error_norms, mass,
                          total_variation)
from .experiments import (EXPERIMENT_IDS, ExperimentReport, ExperimentSpec,
                          experiment_spec, run_experiment)
from .mesh import (CutCell, Mesh1D, Mesh2D, Neighborhood, NeighborhoodSet,
                   SingleCutMesh2D, TiltedMesh2D, build_mesh_1d,
                   build_mesh_2d_single_cut, build_mesh_2d_tilted,
                   build_neighborhoods, mesh_summary, uniform_mesh_1d)
from .redistribution import (SCHEMES, BlendParams, BlendRecord,
                             BlendRecordSet, blend_parameter, blended_apply,
                             indicator_eta, neighborhood_average, pre_merge,
                             redistribute, srd_apply, umsrd_step,
                             update_magnitude)

__version__ = "0.1.0"
