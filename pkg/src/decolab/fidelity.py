"""Short-time damping coefficients of three decoherence fidelities.

Every fidelity here admits the expansion ``F(t) = 1 - c1 t - c2 t^2 + O(t^3)``
with ``c1 = 0`` exactly; ``c2`` is the coupling variance form evaluated
against the appropriate system mean, and plays the role of a squared damping
rate (``tau2 = c2**-0.5``).  Coefficients are stored as damping coefficients
rather than characteristic times so vanishing rates stay representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .operators import (
    DenseOperator,
    Ket,
    coupling_moments,
    variance_form,
    VARIANCE_NEGATIVE_ERROR,
    _split_system_env,
)

# rates below this are reported as zero (infinite characteristic time)
C2_ZERO_FLOOR = 1e-14
INEQUALITY_SLACK = 1e-10
ENSEMBLE_WEIGHT_ATOL = 1e-12
ENSEMBLE_MIX_ATOL = 1e-10


@dataclass(frozen=True)
class ExpansionCoefficients:
    """Coefficients of F(t) ~= 1 - c1 t - c2 t^2."""

    c1: float
    c2: float

    @property
    def tau2(self) -> float:
        """Quadratic damping time; infinite when the rate vanishes."""
        if self.c2 < C2_ZERO_FLOOR:
            return math.inf
        return self.c2 ** -0.5


@dataclass(frozen=True)
class Ensemble:
    """A pure-state mixture: list of (probability, ket) pairs on one space."""

    members: tuple[tuple[float, Ket], ...]

    def __post_init__(self):
        if not self.members:
            raise ValueError("ensemble needs at least one member")
        space = self.members[0][1].space
        total = 0.0
        for p, psi in self.members:
            if p < 0:
                raise ValueError(f"negative probability {p}")
            if psi.space != space:
                raise ValueError("ensemble members live on different spaces")
            total += p
        if abs(total - 1.0) > ENSEMBLE_WEIGHT_ATOL:
            raise ValueError(f"ensemble probabilities sum to {total}, not 1")

    @property
    def space(self):
        return self.members[0][1].space

    def density(self) -> DenseOperator:
        m = sum(p * np.outer(psi.amplitudes, psi.amplitudes.conj()) for p, psi in self.members)
        return DenseOperator.density_op(self.space, m, check_spectrum=False)


def _clamped_c2(value: float) -> float:
    if value < VARIANCE_NEGATIVE_ERROR:
        raise ValueError(f"damping coefficient is negative beyond rounding noise: {value:.3e}")
    return max(value, 0.0)


def input_output_c2(psi0: Ket, h_i: DenseOperator, rho_env: DenseOperator) -> ExpansionCoefficients:
    """Quadratic damping of the pure-input fidelity: c2 = variance form."""
    return ExpansionCoefficients(0.0, _clamped_c2(variance_form(h_i, psi0.projector(), rho_env)))


def entanglement_c2(rho_s: DenseOperator, h_i: DenseOperator, rho_env: DenseOperator) -> ExpansionCoefficients:
    """Quadratic damping of the entanglement fidelity.

    Intrinsic to ``rho_s``: the system mean in the variance form is taken
    against the density itself, so no purification enters.
    """
    return ExpansionCoefficients(0.0, _clamped_c2(variance_form(h_i, rho_s, rho_env)))


def average_c2(ensemble: Ensemble, h_i: DenseOperator, rho_env: DenseOperator) -> ExpansionCoefficients:
    """Quadratic damping of the ensemble-average fidelity.

    The squared system mean is averaged per member, which makes the result
    depend on the chosen decomposition, not only on the mixed density.
    Equals the probability-weighted mean of the members' pure-input c2.
    """
    rho_mix = ensemble.density()
    ds, de = _split_system_env(h_i, rho_mix, rho_env)
    m2, _ = coupling_moments(h_i, rho_mix, rho_env)
    h4 = h_i.matrix.reshape(ds, de, ds, de)
    msq = 0.0
    for p, psi in ensemble.members:
        amp = psi.amplitudes
        b = np.einsum("u,uesf,s->ef", amp.conj(), h4, amp)
        msq += p * float(np.sum((rho_env.matrix @ b) * b.T).real)
    return ExpansionCoefficients(0.0, _clamped_c2(m2 - msq))


@dataclass(frozen=True)
class RateInequalityReport:
    c2_entanglement: float
    c2_average: float
    holds: bool


def check_rate_inequality(rho_s: DenseOperator, ensemble: Ensemble,
                          h_i: DenseOperator, rho_env: DenseOperator) -> RateInequalityReport:
    """Entanglement damping dominates every decomposition's average damping.

    Verifies that ``ensemble`` actually mixes to ``rho_s`` before comparing.
    """
    mix = ensemble.density()
    dev = np.abs(mix.matrix - rho_s.matrix).max()
    if dev > ENSEMBLE_MIX_ATOL:
        raise ValueError(f"ensemble does not reproduce the density (max deviation {dev:.3e})")
    c2_e = entanglement_c2(rho_s, h_i, rho_env).c2
    c2_a = average_c2(ensemble, h_i, rho_env).c2
    return RateInequalityReport(c2_e, c2_a, c2_e >= c2_a - INEQUALITY_SLACK)
