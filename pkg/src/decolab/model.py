"""L qubits on a 1D chain coupled to a set of discrete boson modes.

The coupling of qubit l at position r_l to mode k is
``g_k (exp(-i k r_l) a_k + exp(i k r_l) a_k^dag) (lambda1 sx_l + lambda2 sy_l)``
and the free parts are ``sum_l (w0_l/2) sz_l`` and ``sum_k w_k n_k``.

For thermal baths the quadratic damping coefficient of the entanglement
fidelity factorizes over qubit pairs:
``(1/2) sum_{l1,l2} Omega^2(r_l1 - r_l2) <dA_l1 dA_l2>`` with the spatial
correlation ``Omega^2(d) = 2 sum_k g_k^2 cos(k d) coth(w_k / 2T)``.  The
half compensates Omega^2's normalization (twice the per-site thermal weight,
so that Omega^2(0) is the conventional rate scale x) and makes the factorized
rate identical to the variance-form coefficient.  Mode sets are required to
be +/-k symmetric so the antisymmetric sin part of the thermal correlator
cancels exactly rather than approximately.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .operators import (
    DenseOperator,
    HilbertSpace,
    Ket,
    boson_ops,
    embed,
    identity,
    kron,
    kron_all,
    pauli,
    thermal_boson_state,
)

MODE_MATCH_RTOL = 1e-12
COVARIANCE_IMAG_ATOL = 1e-10
RATE_NEGATIVE_ERROR = -1e-9


@dataclass(frozen=True)
class QubitLattice:
    """Positions and shared coupling constants of a 1D qubit chain."""

    positions: tuple[float, ...]
    lambda1: float
    lambda2: float
    h0_splittings: tuple[float, ...] = ()

    def __post_init__(self):
        pos = tuple(float(r) for r in self.positions)
        if not pos:
            raise ValueError("lattice needs at least one qubit")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError(f"positions must be strictly increasing, got {pos}")
        splits = tuple(float(w) for w in self.h0_splittings) or (0.0,) * len(pos)
        if len(splits) != len(pos):
            raise ValueError(f"{len(splits)} level splittings for {len(pos)} qubits")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "h0_splittings", splits)

    @property
    def n_qubits(self) -> int:
        return len(self.positions)

    @property
    def coupling_norm(self) -> float:
        """|A| eigenvalue scale: sqrt(lambda1^2 + lambda2^2)."""
        return math.hypot(self.lambda1, self.lambda2)

    def coupling_matrix(self) -> np.ndarray:
        """The 2x2 qubit-side coupling lambda1 sx + lambda2 sy."""
        return self.lambda1 * pauli("x").matrix + self.lambda2 * pauli("y").matrix

    def coupling_eigenstates(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvectors of the coupling: (minus branch, plus branch).

        The branches carry eigenvalues -|lambda| and +|lambda|.
        """
        a = self.coupling_norm
        if a == 0.0:
            raise ValueError("coupling eigenstates are undefined for lambda1 = lambda2 = 0")
        phase = complex(self.lambda1, self.lambda2) / a
        minus = np.array([1.0, -phase], dtype=np.complex128) / math.sqrt(2.0)
        plus = np.array([1.0, phase], dtype=np.complex128) / math.sqrt(2.0)
        return minus, plus

    def qubit_space(self) -> HilbertSpace:
        return HilbertSpace((2,) * self.n_qubits)


@dataclass(frozen=True)
class BathMode:
    k: float
    omega: float
    g: float


@dataclass(frozen=True)
class BathModeSet:
    """Discrete boson modes (k, omega, g) plus a temperature.

    Every mode with k != 0 must have a mirror (-k, omega, g); couplings are
    real (any phase is absorbable into the mode operators).
    """

    modes: tuple[BathMode, ...]
    temperature: float

    def __post_init__(self):
        modes = tuple(BathMode(float(m.k), float(m.omega), float(m.g)) for m in self.modes)
        if not modes:
            raise ValueError("mode set is empty")
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        for m in modes:
            if m.omega <= 0:
                raise ValueError(f"mode frequencies must be positive, got {m.omega}")
        for m in modes:
            if m.k == 0.0:
                continue
            if not any(_mirrors(m, other) for other in modes):
                raise ValueError(f"mode set is not +/-k symmetric: no mirror for k={m.k}")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "temperature", float(self.temperature))

    @classmethod
    def symmetric(cls, pairs: Sequence[tuple[float, float, float]], temperature: float) -> "BathModeSet":
        """Build from (k, omega, g) entries, adding the -k mirror of each k > 0."""
        modes = []
        for k, omega, g in pairs:
            modes.append(BathMode(k, omega, g))
            if k != 0.0:
                modes.append(BathMode(-k, omega, g))
        return cls(tuple(modes), temperature)

    @property
    def n_modes(self) -> int:
        return len(self.modes)


def _mirrors(m: BathMode, other: BathMode) -> bool:
    return (
        math.isclose(other.k, -m.k, rel_tol=MODE_MATCH_RTOL, abs_tol=0.0)
        and math.isclose(other.omega, m.omega, rel_tol=MODE_MATCH_RTOL)
        and math.isclose(other.g, m.g, rel_tol=MODE_MATCH_RTOL)
    )


def _coth(x: float) -> float:
    return 1.0 / math.tanh(x)


def thermal_occupation_factor(omega: float, temperature: float) -> float:
    """coth(omega / 2T) = 2<N> + 1; equals 1 at T = 0."""
    if temperature == 0.0:
        return 1.0
    return _coth(omega / (2.0 * temperature))


@dataclass(frozen=True)
class ModelHamiltonian:
    """The three Hamiltonian pieces on [qubit 1..L, mode 1..K] factors."""

    space: HilbertSpace
    h0: DenseOperator
    h_i: DenseOperator
    h_env: DenseOperator
    lattice: QubitLattice
    modes: BathModeSet
    n_max: int

    def total(self) -> DenseOperator:
        return DenseOperator.hermitian_op(self.space, self.h0.matrix + self.h_i.matrix + self.h_env.matrix)

    def system_space(self) -> HilbertSpace:
        return self.lattice.qubit_space()

    def env_space(self) -> HilbertSpace:
        return HilbertSpace((self.n_max + 1,) * self.modes.n_modes)

    def h0_system_diagonal(self) -> np.ndarray:
        """Diagonal of the free qubit Hamiltonian on the system space alone."""
        diag = np.zeros(2 ** self.lattice.n_qubits)
        for l, w0 in enumerate(self.lattice.h0_splittings):
            sz = embed(pauli("z"), l, self.lattice.qubit_space())
            diag += 0.5 * w0 * np.diagonal(sz.matrix).real
        return diag

    def thermal_env_state(self) -> DenseOperator:
        parts = [thermal_boson_state(m.omega, self.modes.temperature, self.n_max) for m in self.modes.modes]
        return kron_all(parts)


def qubit_coupling_op(lattice: QubitLattice, l: int) -> DenseOperator:
    """lambda1 sx + lambda2 sy on qubit ``l``, embedded in the qubit space."""
    if l < 0 or l >= lattice.n_qubits:
        raise IndexError(f"qubit index {l} out of range for {lattice.n_qubits} qubits")
    a = DenseOperator.hermitian_op(HilbertSpace((2,)), lattice.coupling_matrix())
    return embed(a, l, lattice.qubit_space())


def build_hamiltonian(lattice: QubitLattice, modes: BathModeSet, n_max: int) -> ModelHamiltonian:
    """Assemble the dense model Hamiltonian at truncation level ``n_max``."""
    n_max = int(n_max)
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    L = lattice.n_qubits
    K = modes.n_modes
    qspace = lattice.qubit_space()
    mspace = HilbertSpace((n_max + 1,) * K)
    space = qspace * mspace

    a1, _, num1 = boson_ops(n_max)
    a_embedded = [embed(a1, j, mspace).matrix for j in range(K)]
    n_embedded = [embed(num1, j, mspace).matrix for j in range(K)]

    h_env_m = sum(m.omega * n_embedded[j] for j, m in enumerate(modes.modes))
    h_env = kron(identity(qspace), DenseOperator.hermitian_op(mspace, h_env_m))

    h0_q = np.zeros((qspace.dim, qspace.dim), dtype=np.complex128)
    for l, w0 in enumerate(lattice.h0_splittings):
        h0_q += 0.5 * w0 * embed(pauli("z"), l, qspace).matrix
    h0 = kron(DenseOperator.hermitian_op(qspace, h0_q), identity(mspace))

    coupling = DenseOperator.hermitian_op(HilbertSpace((2,)), lattice.coupling_matrix())
    h_i_m = np.zeros((space.dim, space.dim), dtype=np.complex128)
    for l, r in enumerate(lattice.positions):
        field_m = np.zeros((mspace.dim, mspace.dim), dtype=np.complex128)
        for j, m in enumerate(modes.modes):
            phase = np.exp(-1j * m.k * r)
            field_m += m.g * (phase * a_embedded[j] + np.conj(phase) * a_embedded[j].conj().T)
        a_l = embed(coupling, l, qspace)
        h_i_m += np.kron(a_l.matrix, field_m)
    h_i = DenseOperator.hermitian_op(space, h_i_m)

    return ModelHamiltonian(space, h0, h_i, h_env, lattice, modes, n_max)


def correlation_fn_discrete(modes: BathModeSet, delta_r: float) -> float:
    """Spatial correlation 2 sum_k g_k^2 cos(k dr) coth(w_k / 2T)."""
    t = modes.temperature
    return 2.0 * sum(
        m.g * m.g * math.cos(m.k * delta_r) * thermal_occupation_factor(m.omega, t)
        for m in modes.modes
    )


def _covariances(ops: list[np.ndarray], rho: np.ndarray) -> np.ndarray:
    """Re <dO_i dO_j> matrix; an imaginary residue above tolerance raises."""
    n = len(ops)
    means = np.array([np.trace(rho @ op) for op in ops])
    if np.abs(means.imag).max() > COVARIANCE_IMAG_ATOL:
        raise ValueError("coupling operators have non-real means against the state")
    cov = np.empty((n, n))
    for i in range(n):
        rho_oi = rho @ ops[i]
        for j in range(n):
            raw = np.sum(rho_oi * ops[j].T)  # tr[rho O_i O_j]
            val = raw - means[i] * means[j]
            if abs(val.imag) > COVARIANCE_IMAG_ATOL:
                raise ValueError(f"covariance ({i},{j}) has imaginary residue {val.imag:.3e}")
            cov[i, j] = val.real
    return cov


def _rate_sum(coords: Sequence[float], cov: np.ndarray, omega2: Callable[[float], float]) -> float:
    rate = 0.0
    for i, ri in enumerate(coords):
        for j, rj in enumerate(coords):
            rate += omega2(ri - rj) * cov[i, j]
    rate = 0.5 * float(rate)  # Omega^2 is twice the per-site thermal weight
    if rate < RATE_NEGATIVE_ERROR:
        raise ValueError(f"decoherence rate is negative beyond rounding noise: {rate:.3e}")
    return max(rate, 0.0)


def rate_from_correlation(lattice: QubitLattice, omega2: Callable[[float], float],
                          rho_s: DenseOperator) -> float:
    """Factorized damping rate for an arbitrary spatial correlation function.

    ``(1/2) sum_{l1,l2} omega2(r_l1 - r_l2) <dA_l1 dA_l2>`` over single
    qubits; equals the variance-form damping coefficient when ``omega2`` is
    the bath's thermal correlation.  The coupling operators of distinct qubits
    commute, so the plain (unsymmetrized) covariance is real; a residue above
    1e-10 is rejected.
    """
    if rho_s.space != lattice.qubit_space():
        raise ValueError("state space does not match the lattice qubit space")
    ops = [qubit_coupling_op(lattice, l).matrix for l in range(lattice.n_qubits)]
    cov = _covariances(ops, rho_s.matrix)
    return _rate_sum(lattice.positions, cov, omega2)


def decoherence_rate(lattice: QubitLattice, modes: BathModeSet, rho_s: DenseOperator) -> float:
    """Factorized damping rate under the discrete thermal bath."""
    return rate_from_correlation(lattice, lambda d: correlation_fn_discrete(modes, d), rho_s)


def _pairs(lattice: QubitLattice) -> list[tuple[int, int]]:
    if lattice.n_qubits % 2:
        raise ValueError(f"pair operations need an even qubit count, got {lattice.n_qubits}")
    return [(2 * p, 2 * p + 1) for p in range(lattice.n_qubits // 2)]


PAIR_CONSTANT_RTOL = 0.01


def pair_rate(lattice: QubitLattice, modes: BathModeSet, rho_s: DenseOperator,
              omega2: Callable[[float], float] | None = None) -> float:
    """Damping rate of adjacent qubit pairs under a pair-constant correlation.

    Uses the summed pair couplings A_l + A_l' and evaluates the correlation at
    pair-center separations, i.e. the intra-pair correlation is treated as
    constant (the collective regime this formula is derived for).  A warning
    is emitted when the correlation actually varies across a pair by more
    than 1%; the value is still computed as defined.
    """
    if rho_s.space != lattice.qubit_space():
        raise ValueError("state space does not match the lattice qubit space")
    if omega2 is None:
        omega2 = lambda d: correlation_fn_discrete(modes, d)
    ops = []
    centers = []
    x = omega2(0.0)
    for a, b in _pairs(lattice):
        ops.append(qubit_coupling_op(lattice, a).matrix + qubit_coupling_op(lattice, b).matrix)
        centers.append(0.5 * (lattice.positions[a] + lattice.positions[b]))
        intra = lattice.positions[b] - lattice.positions[a]
        if x != 0.0 and abs(omega2(intra) - x) > PAIR_CONSTANT_RTOL * abs(x):
            warnings.warn(
                f"correlation varies by more than {PAIR_CONSTANT_RTOL:.0%} across the pair at "
                f"{centers[-1]}; the pair-constant approximation is outside its regime",
                stacklevel=2,
            )
    cov = _covariances(ops, rho_s.matrix)
    return _rate_sum(centers, cov, omega2)


def pair_encode(logical: Ket, lattice: QubitLattice) -> Ket:
    """Map an L-qubit state onto 2L qubits, one antisymmetric pair per qubit.

    In the eigenbasis of the coupling A the rule is |-> -> |-,+> and
    |+> -> |+,->, so every output is annihilated by each pair sum A_l + A_l'.
    """
    pairs = _pairs(lattice)
    n_logical = len(pairs)
    if logical.space.factor_dims != (2,) * n_logical:
        raise ValueError(
            f"logical state has factors {logical.space.factor_dims}, expected {n_logical} qubits"
        )
    minus, plus = lattice.coupling_eigenstates()
    step = (
        np.outer(np.kron(minus, plus), minus.conj())
        + np.outer(np.kron(plus, minus), plus.conj())
    )
    enc = step
    for _ in range(n_logical - 1):
        enc = np.kron(enc, step)
    return Ket(lattice.qubit_space(), enc @ logical.amplitudes)
