"""Exclusion processes with general jump laws: exact formulas, kernels and scaling limits."""

from .asymptotics import S_limit, ScalingFrame, airy, brownian_epi, eps_S, eps_Sbar, eps_Sbar_epi
from .coeffx import F_n, S_kernel, Sbar_kernel
from .errors import (
    AssumptionError,
    ConfigError,
    ConvergenceError,
    DomainError,
    NegativeProbabilityError,
    SizeCapError,
    TasepError,
)
from .pathkernel import InitialCondition, joint_probability
from .pgf_model import PGFModel, gamma_derivs, scaling_coeffs
from .simulator import height_function, simulate
from .transition import Configuration, brute_force_distribution, transition_probability

__all__ = [
    "AssumptionError",
    "ConfigError",
    "Configuration",
    "ConvergenceError",
    "DomainError",
    "F_n",
    "InitialCondition",
    "NegativeProbabilityError",
    "PGFModel",
    "S_kernel",
    "S_limit",
    "ScalingFrame",
    "Sbar_kernel",
    "SizeCapError",
    "TasepError",
    "airy",
    "brownian_epi",
    "brute_force_distribution",
    "eps_S",
    "eps_Sbar",
    "eps_Sbar_epi",
    "gamma_derivs",
    "height_function",
    "joint_probability",
    "scaling_coeffs",
    "simulate",
    "transition_probability",
]
