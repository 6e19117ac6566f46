"""Worst-case performance estimation for DCA and boosted DCA.

The native extension carries the PEP builder, the conic solver, the
closed-form bounds, the proof-identity sweeps, and the BDCA runner;
:mod:`dcpep.sdpa` adds a pure-python reader for the exported SDPA files.
"""

from ._core import (
    dc_minimum,
    dca_bound,
    descent_chain_sweep,
    gd_pl_alpha_max,
    gd_pl_beta,
    gd_pl_identity_sweep,
    one_iteration_identity_sweep,
    optimal_boost,
    prior_step_length,
    run_bdca,
    run_instance_file,
    sdpa_text,
    solve_gd_pl_pep,
    solve_pep,
)
from .sdpa import read_sdpa

__all__ = [
    "dc_minimum",
    "dca_bound",
    "descent_chain_sweep",
    "gd_pl_alpha_max",
    "gd_pl_beta",
    "gd_pl_identity_sweep",
    "one_iteration_identity_sweep",
    "optimal_boost",
    "prior_step_length",
    "read_sdpa",
    "run_bdca",
    "run_instance_file",
    "sdpa_text",
    "solve_gd_pl_pep",
    "solve_pep",
]
