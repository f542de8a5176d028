"""Special functions needed by the closed-form capacity expressions."""
from effcap.specfun.expint import e1_scaled, exp_integral_e1, exp_integral_ei, log_e1
from effcap.specfun.gamma import (
    ln_gamma,
    log_lower_inc_gamma,
    log_upper_inc_gamma,
    lower_inc_gamma,
    reg_lower_inc_gamma,
    reg_upper_inc_gamma,
    upper_inc_gamma,
)
from effcap.specfun.hypergeometric import log_tricomi_u, tricomi_u
from effcap.specfun.quadrature import QuadratureSpec, integrate

__all__ = [
    "QuadratureSpec",
    "e1_scaled",
    "exp_integral_e1",
    "exp_integral_ei",
    "integrate",
    "ln_gamma",
    "log_e1",
    "log_lower_inc_gamma",
    "log_tricomi_u",
    "log_upper_inc_gamma",
    "lower_inc_gamma",
    "reg_lower_inc_gamma",
    "reg_upper_inc_gamma",
    "tricomi_u",
    "upper_inc_gamma",
]
