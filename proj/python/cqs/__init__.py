"""Cascaded quantum systems: master equation, trajectories, wavepacket transforms."""

from ._core import (
    CascadeModel,
    Envelope,
    PhaseSchedule,
    TransformSpec,
    apply_u_time_domain,
    build_h_eff,
    build_h_ex,
    build_jump_operator,
    check_time_reversed_envelope,
    derive_transform_params,
    emit_envelope,
    ensemble_average,
    matched_transform,
    master_observables,
    phase_schedule,
    product_state,
    time_map,
    time_map_inverse,
    to_envelope,
    to_spectrum,
    transfer_experiment,
    transfer_fidelity,
)

__all__ = [name for name in dir() if not name.startswith("_")]
