"""Parabolic obstacle solver."""

from .config import SolverConfig, config_to_text, load_config, parse_config, save_config
from .contact import ContactMetrics, extract_contact_metrics
from .lcp import LCPInfo, solve_lcp
from .problem import ObstacleProblem, stationary_profile, step_lcp
from .simulate import ContactSetHistory, SimulationResult, simulate

__all__ = [
    "SolverConfig", "config_to_text", "load_config", "parse_config", "save_config",
    "ContactMetrics", "extract_contact_metrics", "LCPInfo", "solve_lcp",
    "ObstacleProblem", "stationary_profile", "step_lcp", "ContactSetHistory",
    "SimulationResult", "simulate",
]
