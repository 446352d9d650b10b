"""Bundled physical models: isentropic MHD, its Euler limit, planar Lax
shocks built on top of it, and the biaxial Maxwell crystal.

``build`` backs the registry used by ``hypstab.symbol.registered_system``;
each entry returns the system together with the parameter value the other
modules should pass around (an MHDState, or None for Maxwell whose
coefficients are frequency-only).
"""

from __future__ import annotations

from .maxwell import (
    BiaxialCrystal,
    OpticDoubleRoot,
    cross_matrix,
    discriminant_split,
    dispersion_determinant,
    fresnel_coefficients,
    maxwell_biaxial_system,
    maxwell_double_roots,
    optic_axes,
    pencil_stable_space,
)
from .mhd import (
    GammaLaw,
    MHDState,
    conserved_flux,
    conserved_flux_jacobian,
    conserved_state,
    conserved_state_jacobian,
    coordinate_scaling,
    euler_system,
    householder_frame,
    mhd_eigenvalues,
    mhd_system,
    noncharacteristic_margin,
    rh_residual,
    wave_speeds,
)
from .shock import (
    ShockProblem,
    TransmissionProblem,
    construct_lax_shock,
    continued_shock,
    lax_dimensions,
    majda_lopatinski,
    shock_boundary_problem,
    shock_from_json,
    side_system,
)

__all__ = [
    "build",
    "GammaLaw",
    "MHDState",
    "mhd_system",
    "euler_system",
    "mhd_eigenvalues",
    "wave_speeds",
    "noncharacteristic_margin",
    "rh_residual",
    "conserved_state",
    "conserved_flux",
    "conserved_state_jacobian",
    "conserved_flux_jacobian",
    "coordinate_scaling",
    "householder_frame",
    "ShockProblem",
    "construct_lax_shock",
    "continued_shock",
    "side_system",
    "lax_dimensions",
    "TransmissionProblem",
    "shock_boundary_problem",
    "majda_lopatinski",
    "shock_from_json",
    "BiaxialCrystal",
    "cross_matrix",
    "maxwell_biaxial_system",
    "fresnel_coefficients",
    "dispersion_determinant",
    "discriminant_split",
    "optic_axes",
    "OpticDoubleRoot",
    "maxwell_double_roots",
    "pencil_stable_space",
]


def _pressure_law(doc: dict) -> GammaLaw:
    extra = set(doc) - {"k", "exponent"}
    if extra:
        raise ValueError(f"unknown pressure fields: {sorted(extra)}")
    return GammaLaw(**doc)


def _state_from_config(config: dict, allow_field: bool) -> MHDState:
    known = {"rho", "u", "H", "pressure"}
    extra = set(config) - known
    if extra:
        raise ValueError(f"unknown model config fields: {sorted(extra)}")
    field = config.get("H", (0.0, 0.0, 0.0) if not allow_field else (1.0, 0.0, 0.0))
    if not allow_field and any(abs(float(h)) > 0 for h in field):
        raise ValueError("the Euler model has no magnetic field; drop 'H'")
    # defaults give sound speed exactly 1 and a noncharacteristic boundary
    # (normal velocity 0.5 clears every default wave speed)
    law = _pressure_law(config.get("pressure", {"k": 0.6, "exponent": 5.0 / 3.0}))
    return MHDState(
        rho=config.get("rho", 1.0),
        u=tuple(config.get("u", (0.0, 0.0, 0.5))),
        H=tuple(field),
        pressure_law=law,
    )


def build(name: str, config: dict | None = None):
    """Instantiate a registered model: (system, parameter value)."""
    config = dict(config or {})
    if name == "mhd":
        state = _state_from_config(config, allow_field=True)
        return mhd_system(), state
    if name == "euler-isentropic":
        state = _state_from_config(config, allow_field=False)
        return euler_system(), state
    if name == "maxwell-biaxial":
        extra = set(config) - {"alpha"}
        if extra:
            raise ValueError(f"unknown model config fields: {sorted(extra)}")
        crystal = BiaxialCrystal(tuple(config.get("alpha", (3.0, 2.0, 1.0))))
        return maxwell_biaxial_system(crystal), None
    raise ValueError(
        f"unknown model {name!r}; available: mhd, euler-isentropic, maxwell-biaxial"
    )
