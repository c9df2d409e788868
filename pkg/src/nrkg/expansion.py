"""Modulated leading terms of the oscillatory expansion and their errors.

The Klein-Gordon solution is compared against the two-term modulated ansatz

    u ~ T1 + eps^2 T2,
    T1 = exp(i t / eps^2) v + c.c.,
    T2 = (1/8) exp(3 i t / eps^2) v^3 + exp(i t / eps^2) w + c.c.,

where v and w are the slow profiles of :mod:`nrkg.profiles`.  With w(0)
chosen by ``w0_from_v0`` the correction term vanishes identically at t = 0,
so the ansatz matches the initial position datum exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nrkg.errors import ContractViolation
from nrkg.klein_gordon import KGState
from nrkg.spectral import SpectralField, l2_norm


def modulation_phase(t: float, eps: float) -> complex:
    """Fast carrier exp(i t / eps^2) shared by both terms."""
    return complex(np.exp(1j * (t / eps**2)))


def first_order_term(v_t: SpectralField, t: float, eps: float) -> SpectralField:
    """Leading modulated term 2 Re(exp(it/eps^2) v(t)); a real field."""
    phase = modulation_phase(t, eps)
    return SpectralField(v_t.grid, (2.0 * np.real(phase * v_t.values)).astype(np.complex128))


def second_order_term(
    v_t: SpectralField, w_t: SpectralField, t: float, eps: float
) -> SpectralField:
    """Correction term 2 Re(exp(3it/eps^2) v^3 / 8 + exp(it/eps^2) w)."""
    if v_t.grid != w_t.grid:
        raise ContractViolation("v and w live on different grids")
    phase = modulation_phase(t, eps)
    z = phase**3 * (0.125 * v_t.values**3) + phase * w_t.values
    return SpectralField(v_t.grid, (2.0 * np.real(z)).astype(np.complex128))


def combined_approximation(
    v_t: SpectralField, w_t: SpectralField, t: float, eps: float
) -> SpectralField:
    """The full two-term ansatz T1 + eps^2 T2 at time t."""
    t1 = first_order_term(v_t, t, eps)
    t2 = second_order_term(v_t, w_t, t, eps)
    return SpectralField(v_t.grid, t1.values + eps**2 * t2.values)


@dataclass(frozen=True)
class ExpansionSample:
    """Per-time comparison of the solution against the modulated ansatz."""

    time: float
    eps: float
    first_term: SpectralField
    second_term: SpectralField
    first_order_error_l2: float
    second_order_error_l2: float
    u_norm_l2: float


def expansion_sample(
    kg_state: KGState,
    v_t: SpectralField,
    w_t: SpectralField,
    profile_time: float,
) -> ExpansionSample:
    """Assemble both terms at the state's time and measure the L2 errors.

    ``profile_time`` is the trajectory time at which (v_t, w_t) were sampled;
    it must agree with the state's clock, since the comparison is only
    meaningful on a common time grid (no temporal interpolation is done).
    """
    if abs(kg_state.time - profile_time) > 1e-12 * max(1.0, abs(kg_state.time)):
        raise ContractViolation(
            f"profile sample time {profile_time} does not match state time "
            f"{kg_state.time}"
        )
    t, eps = kg_state.time, kg_state.eps
    t1 = first_order_term(v_t, t, eps)
    t2 = second_order_term(v_t, w_t, t, eps)
    u = kg_state.u.values.real
    err1 = SpectralField(kg_state.grid, (u - t1.values.real).astype(np.complex128))
    err2 = SpectralField(
        kg_state.grid, (u - t1.values.real - eps**2 * t2.values.real).astype(np.complex128)
    )
    return ExpansionSample(
        time=t,
        eps=eps,
        first_term=t1,
        second_term=t2,
        first_order_error_l2=l2_norm(err1),
        second_order_error_l2=l2_norm(err2),
        u_norm_l2=l2_norm(kg_state.u),
    )


def expansion_errors(
    kg_state: KGState,
    v_t: SpectralField,
    w_t: SpectralField,
    profile_time: float,
) -> tuple[float, float]:
    """L2 norms of (u - T1, u - T1 - eps^2 T2) at the common sample time."""
    s = expansion_sample(kg_state, v_t, w_t, profile_time)
    return s.first_order_error_l2, s.second_order_error_l2
