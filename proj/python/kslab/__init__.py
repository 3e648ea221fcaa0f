"""Radial Keller-Segel laboratory in mass-accumulation variables."""

from kslab._core import (
    DatumFamily,
    EnergyParams,
    Formulation,
    Grading,
    InitialDatumSpec,
    Mesh,
    admissibility,
    build_mesh,
    chi,
    hardy_check,
    k_chi,
    make_datum,
    p_bounds,
    run_experiment,
    select_params,
    simulate,
    theta_threshold,
    u_star,
    w_star,
    zeta,
)

__all__ = [
    "DatumFamily",
    "EnergyParams",
    "Formulation",
    "Grading",
    "InitialDatumSpec",
    "Mesh",
    "admissibility",
    "build_mesh",
    "chi",
    "hardy_check",
    "k_chi",
    "make_datum",
    "p_bounds",
    "run_experiment",
    "select_params",
    "simulate",
    "theta_threshold",
    "u_star",
    "w_star",
    "zeta",
]
