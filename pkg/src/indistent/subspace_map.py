"""The isometry between the measurement space and the measurable subspace.

For a setup ``(Gamma, V)`` every block ``i`` owns the space of
``|Gamma_i|``-particle (anti)symmetric states supported on ``V_i``. The
measurement space is the plain tensor product of these block spaces; the
map

    f(psi_1 (x) ... (x) psi_s) = sqrt(M) X (psi_1 (x) ... (x) psi_s),
    M = N! / prod_i |Gamma_i|!,

with block ``i`` placed on the particle labels of ``Gamma_i``, embeds it
isometrically into the N-particle (anti)symmetric sector. Its image is the
measurable subspace; the orthogonal remainder is filtered out by the
apparatus.

Coordinates on the measurement space are taken against the product of the
block bases returned by :func:`block_basis`, block 0 slowest-varying.
"""

from dataclasses import dataclass, field
import itertools
import math
import threading
import weakref

import numpy as np

from .config import DEFAULT_TOL, ZERO_WEIGHT
from .errors import DimensionError, FilteredOutError, StatisticsError, ValidationError
from .permutation import ProvisionalState, Statistics, project_sector
from .tensor_core import as_matrix, as_vector, check_dim

__all__ = [
    "BlockBasis",
    "MesState",
    "DecompositionResult",
    "LiftedObservable",
    "block_basis",
    "mes_block_dims",
    "mes_dimension",
    "measurable_isometry",
    "measurable_projector",
    "f_forward",
    "f_inverse",
    "decompose",
    "to_block_coordinates",
    "lift_observable",
    "local_lift",
    "expectation",
    "rho_mes",
    "product_mes_state",
]


@dataclass(frozen=True, eq=False)
class BlockBasis:
    """Orthonormal basis of one block space, one ``n**m`` vector per row."""

    block_index: int
    m: int
    n: int
    vectors: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.vectors.shape[0]


@dataclass(frozen=True)
class MesState:
    """State on the measurement space, in product-of-block-bases coordinates."""

    block_dims: tuple
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.block_dims)
        if not dims or any(d < 1 for d in dims):
            raise DimensionError(f"block dimensions must be positive, got {dims}")
        amps = as_vector(self.amplitudes)
        if amps.size != math.prod(dims):
            raise DimensionError(f"{amps.size} amplitudes do not match block dims {dims}")
        object.__setattr__(self, "block_dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def tensor(self):
        return self.amplitudes.reshape(self.block_dims)

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self):
        nrm = self.norm()
        if nrm == 0.0:
            raise ValidationError("cannot normalize the zero vector")
        return MesState(self.block_dims, self.amplitudes / nrm)


@dataclass(frozen=True)
class DecompositionResult:
    """Split of a state into its measurable part and the filtered remainder.

    ``observable`` is the unnormalized projection; ``coordinates`` are its
    (unnormalized) measurement-space coordinates, so ``weight`` equals
    ``|coordinates|**2``.
    """

    observable: ProvisionalState
    weight: float
    complement_norm: float
    coordinates: MesState

    @property
    def filtered_out(self):
        return self.weight < ZERO_WEIGHT

    def mes_state(self):
        """Renormalized measurement-space state."""
        if self.filtered_out:
            raise FilteredOutError(self.weight)
        return self.coordinates.normalized()


class LiftedObservable:
    """An observable in both pictures: ``mes`` acts on the measurement
    space, ``provisional`` on the full ``n**N`` provisional space."""

    def __init__(self, mes, provisional):
        self.mes = mes
        self.provisional = provisional

    def __iter__(self):
        return iter((self.mes, self.provisional))


def product_mes_state(vectors):
    """Measurement-space product state from per-block coordinate vectors."""
    vecs = [as_vector(v) for v in vectors]
    amps = vecs[0]
    for v in vecs[1:]:
        amps = np.kron(amps, v)
    return MesState(tuple(v.size for v in vecs), amps)


def _particle_order(setup):
    return [k for block in setup.partition.blocks for k in block]


def _compute_block_basis(setup, i):
    V = setup.structure.subspaces[i]
    m = setup.partition.sizes[i]
    n = setup.n
    d = V.shape[0]
    if setup.statistics is Statistics.FERMION:
        if m > d:
            raise ValidationError(f"block {i}: fermionic block space is {{0}} (m={m} > d={d})")
        combos = itertools.combinations(range(d), m)
    else:
        combos = itertools.combinations_with_replacement(range(d), m)
    check_dim(n ** m)
    rows = []
    for combo in combos:
        prod = V[combo[0]]
        for j in combo[1:]:
            prod = np.kron(prod, V[j])
        v = project_sector(prod, n, m, setup.statistics)
        rows.append(v / np.linalg.norm(v))
    vectors = np.array(rows)
    gram_err = np.max(np.abs(vectors.conj() @ vectors.T - np.eye(len(rows))))
    if gram_err > DEFAULT_TOL:
        raise ArithmeticError(f"block {i} basis lost orthonormality ({gram_err:.3e})")
    return BlockBasis(block_index=i, m=m, n=n, vectors=vectors)


class _SetupCache:
    __slots__ = ("bases", "isometry", "projector")

    def __init__(self):
        self.bases = None
        self.isometry = None
        self.projector = None


_cache = weakref.WeakKeyDictionary()
_cache_lock = threading.Lock()


def _entry(setup):
    with _cache_lock:
        entry = _cache.get(setup)
        if entry is None:
            entry = _cache[setup] = _SetupCache()
        return entry


def _bases(setup):
    entry = _entry(setup)
    if entry.bases is None:
        entry.bases = tuple(_compute_block_basis(setup, i) for i in range(setup.s))
    return entry.bases


def block_basis(setup, i):
    """Orthonormal basis of the block space of block ``i``.

    Built from (anti)symmetrized products of the ``V_i`` basis over sorted
    index tuples (strictly increasing for fermions, non-decreasing for
    bosons); for a one-particle block this is the ``V_i`` basis itself.
    """
    if not 0 <= i < setup.s:
        raise DimensionError(f"block index {i} out of range for {setup.s} blocks")
    return _bases(setup)[i]


def mes_block_dims(setup):
    return tuple(b.dim for b in _bases(setup))


def mes_dimension(setup):
    return math.prod(mes_block_dims(setup))


def _embed_products(setup, mats):
    """Place per-block arrays on their particle labels.

    ``mats[i]`` has a leading axis of length ``n**m_i`` (the block's
    particles, in sorted label order) and one trailing axis. The result
    has a leading ``n**N`` axis in natural particle order and the trailing
    axes combined row-major.
    """
    n, N = setup.n, setup.N
    out = mats[0]
    for mat in mats[1:]:
        out = np.kron(out, mat)
    order = _particle_order(setup)
    trailing = out.shape[1]
    t = out.reshape((n,) * N + (trailing,))
    axes = list(np.argsort(order)) + [N]
    return np.transpose(t, axes).reshape(n ** N, trailing)


def measurable_isometry(setup):
    """Matrix of the map from measurement-space coordinates into the
    provisional space; its columns are an orthonormal basis of the
    measurable subspace."""
    entry = _entry(setup)
    if entry.isometry is None:
        check_dim(setup.n ** setup.N)
        embedded = _embed_products(setup, [b.vectors.T for b in _bases(setup)])
        F = math.sqrt(setup.M) * project_sector(embedded, setup.n, setup.N, setup.statistics)
        gram_err = np.max(np.abs(F.conj().T @ F - np.eye(F.shape[1])))
        if gram_err > DEFAULT_TOL:
            raise ArithmeticError(f"measurable-subspace basis not orthonormal ({gram_err:.3e})")
        F.setflags(write=False)
        entry.isometry = F
    return entry.isometry


def measurable_projector(setup):
    entry = _entry(setup)
    if entry.projector is None:
        F = measurable_isometry(setup)
        P = F @ F.conj().T
        P.setflags(write=False)
        entry.projector = P
    return entry.projector


def _check_state(psi, setup):
    if psi.n != setup.n or psi.N != setup.N:
        raise DimensionError(
            f"state has n={psi.n}, N={psi.N} but the setup expects n={setup.n}, N={setup.N}"
        )


def f_forward(mes, setup):
    dims = mes_block_dims(setup)
    if tuple(mes.block_dims) != dims:
        raise DimensionError(f"state has block dims {mes.block_dims}, setup needs {dims}")
    amps = measurable_isometry(setup) @ mes.amplitudes
    return ProvisionalState(setup.n, setup.N, amps, setup.statistics)


def f_inverse(psi_obs, setup, tol=DEFAULT_TOL):
    """Coordinates of a measurable-subspace state on the measurement space.

    Raises if ``psi_obs`` has a component outside the measurable subspace
    larger than ``tol`` (relative to ``max(1, |psi_obs|)``).
    """
    _check_state(psi_obs, setup)
    F = measurable_isometry(setup)
    coords = F.conj().T @ psi_obs.amplitudes
    residual = np.linalg.norm(psi_obs.amplitudes - F @ coords)
    if residual > tol * max(1.0, psi_obs.norm()):
        raise ValidationError(
            f"state has a component of norm {residual:.3e} outside the measurable subspace"
        )
    return MesState(mes_block_dims(setup), coords)


def decompose(psi, setup, auto_symmetrize=False, tol=DEFAULT_TOL):
    """Split ``psi`` into measurable part and filtered remainder.

    ``psi`` must already lie in the sector fixed by the setup's statistics.
    With ``auto_symmetrize=True`` a state outside the sector is replaced by
    its (un-renormalized) projection instead of being rejected.
    """
    _check_state(psi, setup)
    amps = psi.amplitudes
    projected = project_sector(amps, setup.n, setup.N, setup.statistics)
    deviation = np.linalg.norm(projected - amps)
    if deviation > tol * max(1.0, psi.norm()):
        if not auto_symmetrize:
            raise StatisticsError(
                f"state is not {setup.statistics.value}ic: it changes by {deviation:.3e} "
                "under (anti)symmetrization"
            )
        amps = projected
    F = measurable_isometry(setup)
    coords = F.conj().T @ amps
    observable = F @ coords
    weight = float(np.vdot(coords, coords).real)
    complement_norm = float(np.linalg.norm(amps - observable))
    return DecompositionResult(
        observable=ProvisionalState(setup.n, setup.N, observable, setup.statistics),
        weight=weight,
        complement_norm=complement_norm,
        coordinates=MesState(mes_block_dims(setup), coords),
    )


def to_block_coordinates(op, setup, i):
    """Matrix elements ``<b_j| op |b_k>`` of an operator on block ``i``'s
    ambient ``n**m_i`` space against the block basis.

    For one-particle blocks this embeds an ``n x n`` operator.
    """
    basis = block_basis(setup, i)
    op = as_matrix(op, square=True)
    if op.shape[0] != basis.vectors.shape[1]:
        raise DimensionError(
            f"operator of size {op.shape[0]} does not act on the {basis.m}-particle space "
            f"of dimension {basis.vectors.shape[1]}"
        )
    return basis.vectors.conj() @ op @ basis.vectors.T


def lift_observable(ops, setup):
    """Lift per-block operators (in block-basis coordinates).

    Returns the product operator on the measurement space and, computed
    independently of :func:`measurable_isometry`, the provisional-space
    operator ``M X (O_1 (x) ... (x) O_s) X`` with each ``O_i`` acting on the
    labels of block ``i``.
    """
    bases = _bases(setup)
    if len(ops) != setup.s:
        raise DimensionError(f"expected {setup.s} block operators, got {len(ops)}")
    mats = []
    for i, (op, basis) in enumerate(zip(ops, bases)):
        op = as_matrix(op, square=True)
        if op.shape[0] != basis.dim:
            raise DimensionError(f"block {i}: operator size {op.shape[0]}, block dim {basis.dim}")
        mats.append(op)
    mes = mats[0]
    for op in mats[1:]:
        mes = np.kron(mes, op)

    n, N = setup.n, setup.N
    D = check_dim(n ** N)
    check_dim(D * D)
    ambient = [b.vectors.T @ op @ b.vectors.conj() for op, b in zip(mats, bases)]
    prod = _embed_products(setup, ambient)  # rows permuted to natural order
    # columns carry the same concatenated particle order: permute them too
    order = _particle_order(setup)
    t = prod.reshape((D,) + (n,) * N)
    prod = np.transpose(t, [0] + [1 + int(a) for a in np.argsort(order)]).reshape(D, D)
    left = project_sector(prod, n, N, setup.statistics)
    both = project_sector(left.conj().T, n, N, setup.statistics).conj().T
    return LiftedObservable(mes=mes, provisional=setup.M * both)


def local_lift(op, setup, i):
    """Lift of an operator on block ``i`` alone, identity on the others."""
    dims = mes_block_dims(setup)
    ops = [np.eye(d, dtype=complex) for d in dims]
    ops[i] = op
    return lift_observable(ops, setup)


def _amplitudes(state):
    if isinstance(state, (ProvisionalState, MesState)):
        return state.amplitudes
    return as_vector(state)


def expectation(state, O, tol=DEFAULT_TOL):
    """Real expectation value ``<psi|O|psi>`` of a self-adjoint operator."""
    a = _amplitudes(state)
    O = as_matrix(O, square=True)
    if O.shape[0] != a.size:
        raise DimensionError(f"operator of size {O.shape[0]} on a state of length {a.size}")
    scale = max(1.0, float(np.max(np.abs(O))))
    if np.max(np.abs(O - O.conj().T)) > tol * scale:
        raise ValidationError("operator is not self-adjoint")
    value = np.vdot(a, O @ a)
    if abs(value.imag) > tol * max(1.0, abs(value)):
        raise ValidationError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def rho_mes(rho, setup, tol=DEFAULT_TOL):
    """Renormalized measurement-space density matrix and captured weight.

    Raises :class:`FilteredOutError` when the weight is below the zero
    threshold.
    """
    n, N = setup.n, setup.N
    rho = as_matrix(rho, square=True)
    D = n ** N
    if rho.shape[0] != D:
        raise DimensionError(f"density matrix of size {rho.shape[0]}, expected {D}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValidationError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise ValidationError(f"density matrix has trace {tr!r}, expected 1")
    min_eig = float(np.linalg.eigvalsh(rho)[0])
    if min_eig < -tol:
        raise ValidationError(f"density matrix is not positive semidefinite (eigenvalue {min_eig:.3e})")
    if np.max(np.abs(project_sector(rho, n, N, setup.statistics) - rho)) > tol:
        raise StatisticsError(f"density matrix is not supported on the {setup.statistics.value}ic sector")
    F = measurable_isometry(setup)
    block = F.conj().T @ rho @ F
    weight = float(np.trace(block).real)
    if weight < ZERO_WEIGHT:
        raise FilteredOutError(weight)
    return block / weight, weight
