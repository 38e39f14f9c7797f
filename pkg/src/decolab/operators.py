"""Dense operator algebra on small composite Hilbert spaces.

All objects are plain ``numpy`` complex matrices/vectors tagged with the list
of tensor-factor dimensions of the space they act on.  Units: hbar = k_B = 1,
so propagators are ``exp(-i H t)`` and thermal weights are ``exp(-n w / T)``.

Dense storage only; the intended regime is total dimension <= ~4096.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HERMITIAN_ATOL = 1e-12
DENSITY_TRACE_ATOL = 1e-12
DENSITY_EIG_FLOOR = -1e-10
KET_NORM_ATOL = 1e-12
# eigenvalue checks on densities get expensive; above this dimension the
# positivity check is skipped (constructions preserve it mathematically)
SPECTRUM_CHECK_MAX_DIM = 512

VARIANCE_NEGATIVE_ERROR = -1e-9

DEFAULT_TAIL_WEIGHT = 1e-10


@dataclass(frozen=True)
class HilbertSpace:
    """An ordered list of tensor-factor dimensions."""

    factor_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims:
            raise ValueError("a Hilbert space needs at least one factor")
        if any(d < 1 for d in dims):
            raise ValueError(f"factor dimensions must be positive, got {dims}")
        object.__setattr__(self, "factor_dims", dims)

    @property
    def dim(self) -> int:
        return math.prod(self.factor_dims)

    @property
    def n_factors(self) -> int:
        return len(self.factor_dims)

    def __mul__(self, other: "HilbertSpace") -> "HilbertSpace":
        return HilbertSpace(self.factor_dims + other.factor_dims)


def _as_complex_matrix(m, dim: int) -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    if m.shape != (dim, dim):
        raise ValueError(f"matrix shape {m.shape} does not match space dimension {dim}")
    return m


@dataclass(frozen=True)
class DenseOperator:
    """A complex square matrix bound to a :class:`HilbertSpace`.

    ``hermitian`` / ``density`` record validated structure; operations that
    rely on it (propagation, partial trace, variance forms) require the flag.
    """

    space: HilbertSpace
    matrix: np.ndarray
    hermitian: bool = False
    density: bool = False

    def __post_init__(self):
        object.__setattr__(self, "matrix", _as_complex_matrix(self.matrix, self.space.dim))

    @classmethod
    def operator(cls, space: HilbertSpace, matrix) -> "DenseOperator":
        return cls(space, matrix)

    @classmethod
    def hermitian_op(cls, space: HilbertSpace, matrix, atol: float = HERMITIAN_ATOL) -> "DenseOperator":
        m = _as_complex_matrix(matrix, space.dim)
        dev = np.abs(m - m.conj().T).max()
        if dev > atol:
            raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e})")
        return cls(space, m, hermitian=True)

    @classmethod
    def density_op(
        cls,
        space: HilbertSpace,
        matrix,
        atol: float = DENSITY_TRACE_ATOL,
        check_spectrum: bool | None = None,
    ) -> "DenseOperator":
        m = _as_complex_matrix(matrix, space.dim)
        dev = np.abs(m - m.conj().T).max()
        if dev > HERMITIAN_ATOL:
            raise ValueError(f"density matrix is not Hermitian (max deviation {dev:.3e})")
        tr = np.trace(m)
        if abs(tr - 1.0) > atol:
            raise ValueError(f"density matrix trace {tr} is not 1")
        if check_spectrum is None:
            check_spectrum = space.dim <= SPECTRUM_CHECK_MAX_DIM
        if check_spectrum:
            lo = np.linalg.eigvalsh(m).min()
            if lo < DENSITY_EIG_FLOOR:
                raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")
        return cls(space, m, hermitian=True, density=True)

    def dagger(self) -> "DenseOperator":
        return DenseOperator(self.space, self.matrix.conj().T, hermitian=self.hermitian, density=self.density)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))


@dataclass(frozen=True)
class Ket:
    """A normalized state vector bound to a :class:`HilbertSpace`."""

    space: HilbertSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if v.shape != (self.space.dim,):
            raise ValueError(f"amplitude length {v.shape[0]} does not match dimension {self.space.dim}")
        nrm = np.linalg.norm(v)
        if abs(nrm - 1.0) > KET_NORM_ATOL:
            raise ValueError(f"ket norm {nrm} is not 1")
        object.__setattr__(self, "amplitudes", v)

    def projector(self) -> DenseOperator:
        return DenseOperator(self.space, np.outer(self.amplitudes, self.amplitudes.conj()),
                             hermitian=True, density=True)


def identity(space: HilbertSpace) -> DenseOperator:
    return DenseOperator(space, np.eye(space.dim), hermitian=True)


def kron(a: DenseOperator, b: DenseOperator) -> DenseOperator:
    """Tensor product; the result's factor list is the concatenation."""
    return DenseOperator(
        a.space * b.space,
        np.kron(a.matrix, b.matrix),
        hermitian=a.hermitian and b.hermitian,
        density=a.density and b.density,
    )


def kron_all(ops: list[DenseOperator]) -> DenseOperator:
    out = ops[0]
    for op in ops[1:]:
        out = kron(out, op)
    return out


def partial_trace(rho: DenseOperator, keep) -> DenseOperator:
    """Trace out every tensor factor not listed in ``keep``.

    Parameters
    ----------
    rho : DenseOperator
        Density-flagged operator on a composite space.
    keep : iterable of int
        Indices (into ``rho.space.factor_dims``) of the factors to retain,
        in their original order.

    Returns
    -------
    DenseOperator
        Density on the kept factors; the trace is preserved.
    """
    if not rho.density:
        raise ValueError("partial_trace requires a density-flagged operator")
    dims = rho.space.factor_dims
    n = len(dims)
    keep = sorted(set(int(i) for i in keep))
    if any(i < 0 or i >= n for i in keep):
        raise IndexError(f"keep indices {keep} out of range for {n} factors")
    if len(keep) == n:
        return rho

    tensor = rho.matrix.reshape(dims + dims)
    # einsum integer subscripts: kept factors get distinct row/col labels,
    # traced factors share one label between row and col
    row = list(range(n))
    col = [n + i if i in keep else i for i in range(n)]
    out_idx = [i for i in keep] + [n + i for i in keep]
    reduced = np.einsum(tensor, row + col, out_idx)
    kept_dim = math.prod(dims[i] for i in keep)
    out_space = HilbertSpace(tuple(dims[i] for i in keep))
    return DenseOperator.density_op(out_space, reduced.reshape(kept_dim, kept_dim), check_spectrum=False)


def herm_propagator(h: DenseOperator, t: float) -> DenseOperator:
    """exp(-i h t) for Hermitian ``h``, via eigendecomposition."""
    if not h.hermitian:
        raise ValueError("herm_propagator requires a Hermitian-flagged operator")
    lam, vec = np.linalg.eigh(h.matrix)
    u = (vec * np.exp(-1j * lam * t)) @ vec.conj().T
    return DenseOperator(h.space, u)


def conjugate_density(u: DenseOperator, rho: DenseOperator, trace_atol: float = 1e-10) -> DenseOperator:
    """u rho u^dagger, guarding trace preservation."""
    m = u.matrix @ rho.matrix @ u.matrix.conj().T
    tr = np.trace(m)
    if abs(tr - 1.0) > trace_atol:
        raise ValueError(f"conjugation did not preserve the trace (got {tr})")
    # renormalize rounding residue and symmetrize so the density flag is honest
    m = 0.5 * (m + m.conj().T) / tr.real
    return DenseOperator.density_op(rho.space, m, check_spectrum=False)


def thermal_boson_state(omega: float, temperature: float, n_max: int) -> DenseOperator:
    """Truncated Gibbs state of one oscillator mode, diagonal in Fock space.

    Populations are proportional to ``exp(-n omega / T)`` for n = 0..n_max and
    renormalized on the truncated space; T = 0 returns the vacuum projector.
    """
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    if temperature < 0:
        raise ValueError(f"temperature must be >= 0, got {temperature}")
    n_max = int(n_max)
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    space = HilbertSpace((n_max + 1,))
    # exp(-omega/T) underflows to 0 beyond ~745, indistinguishable from T = 0;
    # the guard also avoids 0 * inf = nan when omega/T overflows
    if temperature == 0.0 or omega / temperature > 745.0:
        pops = np.zeros(n_max + 1)
        pops[0] = 1.0
    else:
        pops = np.exp(-np.arange(n_max + 1) * (omega / temperature))
        pops /= pops.sum()
    return DenseOperator(space, np.diag(pops.astype(np.complex128)), hermitian=True, density=True)


def gibbs_tail_weight(omega: float, temperature: float, n_max: int) -> float:
    """Weight of the untruncated Gibbs distribution beyond level ``n_max``."""
    if temperature == 0.0:
        return 0.0
    r = math.exp(-omega / temperature)
    return r ** (n_max + 1)


def n_max_for_tail(omega: float, temperature: float,
                   tail: float = DEFAULT_TAIL_WEIGHT, floor: int = 2) -> int:
    """Smallest truncation level whose untruncated tail weight is below ``tail``."""
    if temperature == 0.0:
        return floor
    r = math.exp(-omega / temperature)
    n = math.ceil(math.log(tail) / math.log(r)) - 1
    return max(floor, n)


def boson_ops(n_max: int) -> tuple[DenseOperator, DenseOperator, DenseOperator]:
    """(a, a_dagger, number) on the (n_max+1)-dimensional truncated Fock space."""
    n_max = int(n_max)
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    space = HilbertSpace((n_max + 1,))
    a = np.diag(np.sqrt(np.arange(1, n_max + 1)).astype(np.complex128), k=1)
    num = np.diag(np.arange(n_max + 1).astype(np.complex128))
    return (
        DenseOperator(space, a),
        DenseOperator(space, a.conj().T),
        DenseOperator(space, num, hermitian=True),
    )


_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

QUBIT = HilbertSpace((2,))


def pauli(axis: str) -> DenseOperator:
    """Single-qubit Pauli operator; ``axis`` is one of 'x', 'y', 'z'."""
    if axis not in _PAULI:
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}")
    return DenseOperator(QUBIT, _PAULI[axis], hermitian=True)


def embed(op: DenseOperator, factor_index: int, space: HilbertSpace) -> DenseOperator:
    """Place a single-factor operator into ``space`` with identity padding."""
    if op.space.n_factors != 1:
        raise ValueError("embed expects a single-factor operator")
    i = int(factor_index)
    dims = space.factor_dims
    if i < 0 or i >= len(dims):
        raise IndexError(f"factor index {i} out of range for {len(dims)} factors")
    if dims[i] != op.space.dim:
        raise ValueError(f"operator dimension {op.space.dim} does not match factor {i} (dim {dims[i]})")
    left = math.prod(dims[:i])
    right = math.prod(dims[i + 1:])
    m = np.kron(np.kron(np.eye(left), op.matrix), np.eye(right))
    return DenseOperator(space, m, hermitian=op.hermitian)


def purify(rho_s: DenseOperator) -> Ket:
    """A purification of ``rho_s`` on ancilla (one factor of dim n) x system.

    Built from the eigendecomposition as sum_i sqrt(p_i) |i>_ancilla |v_i>_sys
    with eigenvalues in descending order, so tracing out the ancilla (factor 0)
    reproduces ``rho_s``.
    """
    if not rho_s.density:
        raise ValueError("purify requires a density-flagged operator")
    n = rho_s.space.dim
    p, vec = np.linalg.eigh(rho_s.matrix)
    if p.min() < DENSITY_EIG_FLOOR:
        raise ValueError(f"input has negative eigenvalue {p.min():.3e}")
    order = np.argsort(p)[::-1]
    p = np.clip(p[order], 0.0, None)
    p[p < 1e-14 * p.max()] = 0.0  # sqrt would amplify eigensolver noise in null directions
    vec = vec[:, order]
    amp = (np.sqrt(p)[:, None] * vec.T).reshape(-1)
    amp /= np.linalg.norm(amp)
    return Ket(HilbertSpace((n,) + rho_s.space.factor_dims), amp)


def _split_system_env(h_i: DenseOperator, rho_s: DenseOperator, rho_env: DenseOperator) -> tuple[int, int]:
    """Validate the [system factors..., env factors...] layout; return (ds, de)."""
    sys_dims = rho_s.space.factor_dims
    env_dims = rho_env.space.factor_dims
    if h_i.space.factor_dims != sys_dims + env_dims:
        raise ValueError(
            f"coupling factors {h_i.space.factor_dims} are not system {sys_dims} followed by env {env_dims}"
        )
    return rho_s.space.dim, rho_env.space.dim


def coupling_moments(h_i: DenseOperator, rho_s: DenseOperator, rho_env: DenseOperator) -> tuple[float, float]:
    """Second moment of the coupling and the env average of its squared system mean.

    Returns ``(m2, msq)`` with ``m2 = tr[(rho_s x rho_env) H^2]`` and
    ``msq = tr[rho_env B^2]`` where ``B = tr_sys[(rho_s x I) H]`` is the
    system-averaged coupling, an operator on the environment.
    """
    if not (h_i.hermitian and rho_s.density and rho_env.density):
        raise ValueError("coupling_moments requires Hermitian coupling and density-flagged states")
    ds, de = _split_system_env(h_i, rho_s, rho_env)
    h = h_i.matrix
    joint = np.kron(rho_s.matrix, rho_env.matrix)
    m2 = float(np.sum((joint @ h) * h.T).real)

    h4 = h.reshape(ds, de, ds, de)
    b = np.einsum("su,uesf->ef", rho_s.matrix, h4)
    msq = float(np.sum((rho_env.matrix @ b) * b.T).real)
    return m2, msq


def variance_form(h_i: DenseOperator, rho_s: DenseOperator, rho_env: DenseOperator) -> float:
    """<H^2>_{s,env} - <(<H>_s)^2>_env, the short-time damping kernel.

    The result is mathematically >= 0 (Cauchy-Schwarz); tiny negative rounding
    residue is clamped to 0 and anything below -1e-9 raises.
    """
    m2, msq = coupling_moments(h_i, rho_s, rho_env)
    v = m2 - msq
    if v < VARIANCE_NEGATIVE_ERROR:
        raise ValueError(f"variance form is negative beyond rounding noise: {v:.3e}")
    return max(v, 0.0)
