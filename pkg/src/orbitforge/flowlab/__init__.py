"""Three-dimensional flow layer."""
from .extract import extract_triangular_map, fit_triangular_map, sample_return_grid
from .integrate import Trajectory, flow_jacobian, flow_to, integrate
from .probe import EscapeReport, attractor_cloud, lyapunov_stability_probe
from .rates import RateReport, estimate_splitting_rates
from .sections import ReturnSample, SingularCrossSection, build_section, return_map_sample
from .singularities import SingularityInfo, classify, find_and_classify_singularities
from .system import FlowSystem, IntegratorConfig, Reinjection, linear_field

__all__ = [
    "EscapeReport", "FlowSystem", "IntegratorConfig", "RateReport", "Reinjection",
    "ReturnSample", "SingularCrossSection", "SingularityInfo", "Trajectory",
    "attractor_cloud", "build_section", "classify", "estimate_splitting_rates",
    "extract_triangular_map", "find_and_classify_singularities", "fit_triangular_map",
    "flow_jacobian", "flow_to", "integrate", "linear_field", "lyapunov_stability_probe",
    "return_map_sample", "sample_return_grid",
]
