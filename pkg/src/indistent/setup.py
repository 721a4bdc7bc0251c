"""Measurement setups: a partition of the particle labels plus an
orthogonal structure on the one-particle space.

Particle labels are 0-based. Block ``i`` of the partition is measured
by the apparatus resolving subspace ``V_i``; whatever is orthogonal to
all ``V_i`` forms the unmeasured complement ``V_0``.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.linalg import null_space

from .config import DEFAULT_TOL
from .errors import SetupError
from .permutation import Statistics
from .tensor_core import as_vector, orthonormalize

__all__ = [
    "Partition",
    "OrthogonalStructure",
    "MeasurementSetup",
    "validate_partition",
    "validate_orthogonal_structure",
    "validate_setup",
    "multinomial",
    "make_setup",
]


@dataclass(frozen=True)
class Partition:
    """Disjoint, non-empty blocks covering ``{0, ..., N-1}``.

    Block order is significant: it pairs block ``i`` with subspace ``V_i``.
    Labels within a block are stored sorted.
    """

    blocks: tuple

    @property
    def N(self):
        return sum(len(b) for b in self.blocks)

    @property
    def s(self):
        return len(self.blocks)

    @property
    def sizes(self):
        return tuple(len(b) for b in self.blocks)


@dataclass(frozen=True, eq=False)
class OrthogonalStructure:
    """Mutually orthogonal subspaces of ``C^n``.

    ``subspaces[i]`` holds an orthonormal basis of ``V_{i+1}`` (one vector
    per row) and ``complement`` an orthonormal basis of ``V_0``.
    """

    n: int
    subspaces: tuple
    complement: np.ndarray = field(repr=False)

    @property
    def dims(self):
        return tuple(b.shape[0] for b in self.subspaces)

    @property
    def complement_dim(self):
        return self.complement.shape[0]

    def projectors(self):
        """Projectors onto ``V_0, V_1, ..., V_s`` in that order."""
        bases = (self.complement,) + tuple(self.subspaces)
        return [b.T @ b.conj() for b in bases]


@dataclass(frozen=True, eq=False)
class MeasurementSetup:
    partition: Partition
    structure: OrthogonalStructure
    statistics: Statistics
    M: int

    @property
    def n(self):
        return self.structure.n

    @property
    def N(self):
        return self.partition.N

    @property
    def s(self):
        return self.partition.s

    def summary(self):
        return {
            "s": self.s,
            "block_sizes": list(self.partition.sizes),
            "subspace_dims": list(self.structure.dims),
            "complement_dim": self.structure.complement_dim,
            "M": self.M,
        }


def multinomial(sizes):
    """``N! / prod(m_i!)`` for block sizes ``m_i``."""
    out = math.factorial(sum(sizes))
    for m in sizes:
        out //= math.factorial(m)
    return out


def validate_partition(blocks, N):
    if isinstance(blocks, Partition):
        blocks = blocks.blocks
    checked = []
    seen = {}
    for i, block in enumerate(blocks):
        labels = [int(k) for k in block]
        if not labels:
            raise SetupError(f"block {i} is empty")
        for k in labels:
            if not 0 <= k < N:
                raise SetupError(f"block {i}: label {k} outside 0..{N - 1}")
            if k in seen:
                raise SetupError(f"label {k} appears in blocks {seen[k]} and {i} (overlap)")
            seen[k] = i
        checked.append(tuple(sorted(labels)))
    if not checked:
        raise SetupError("partition needs at least one block")
    missing = sorted(set(range(N)) - set(seen))
    if missing:
        raise SetupError(f"partition does not cover labels {missing}")
    return Partition(tuple(checked))


def validate_orthogonal_structure(raw_subspaces, n, tol=DEFAULT_TOL):
    """Orthonormalize each subspace and check they are mutually orthogonal.

    Within-subspace bases are repaired (Gram-Schmidt, dependent vectors
    dropped); overlap between different subspaces is an error.
    """
    if isinstance(raw_subspaces, OrthogonalStructure):
        raw_subspaces = raw_subspaces.subspaces
    if len(raw_subspaces) == 0:
        raise SetupError("orthogonal structure needs at least one subspace")
    bases = []
    for i, raw in enumerate(raw_subspaces):
        vectors = [as_vector(v) for v in raw]
        if not vectors:
            raise SetupError(f"subspace {i} has no vectors")
        for j, v in enumerate(vectors):
            if v.size != n:
                raise SetupError(f"subspace {i}, vector {j}: length {v.size}, expected n={n}")
        basis = orthonormalize(vectors, tol)
        if basis.shape[0] == 0:
            raise SetupError(f"subspace {i} is spanned by zero vectors only")
        bases.append(basis)
    for i in range(len(bases)):
        for j in range(i + 1, len(bases)):
            overlap = float(np.max(np.abs(bases[i].conj() @ bases[j].T)))
            if overlap > tol:
                raise SetupError(
                    f"subspaces {i} and {j} are not orthogonal "
                    f"(max |inner product| = {overlap:.6g})"
                )
    total = sum(b.shape[0] for b in bases)
    if total > n:
        raise SetupError(f"subspace dimensions sum to {total} > n={n}")
    if total == n:
        complement = np.zeros((0, n), dtype=complex)
    else:
        stacked = np.vstack(bases)
        complement = null_space(stacked.conj()).T
        complement = orthonormalize(list(complement), tol)
    return OrthogonalStructure(n=n, subspaces=tuple(bases), complement=complement)


def validate_setup(partition, structure, statistics):
    """Combine a partition and an orthogonal structure into a setup.

    Checks that the numbers of blocks and subspaces agree and, for
    fermions, that each ``V_i`` can host ``|Gamma_i|`` particles.
    """
    statistics = Statistics.parse(statistics)
    if not isinstance(partition, Partition):
        raise SetupError("partition must be validated first")
    if not isinstance(structure, OrthogonalStructure):
        raise SetupError("orthogonal structure must be validated first")
    if partition.s != len(structure.subspaces):
        raise SetupError(
            f"partition has {partition.s} blocks but the structure has "
            f"{len(structure.subspaces)} subspaces"
        )
    if statistics is Statistics.FERMION:
        for i, (m, d) in enumerate(zip(partition.sizes, structure.dims)):
            if d < m:
                raise SetupError(
                    f"block {i}: {m} fermions cannot occupy a {d}-dimensional subspace "
                    "(block space would be {0})"
                )
    return MeasurementSetup(partition, structure, statistics, multinomial(partition.sizes))


def make_setup(blocks, subspaces, statistics, n=None, tol=DEFAULT_TOL):
    """Validate raw partition blocks and subspace spans in one call.

    ``n`` defaults to the length of the first supplied vector and ``N`` to
    the number of labels in ``blocks``.
    """
    if n is None:
        try:
            n = len(subspaces[0][0])
        except (IndexError, TypeError):
            raise SetupError("cannot infer n from an empty subspace list") from None
    N = sum(len(b) for b in blocks)
    partition = validate_partition(blocks, N)
    structure = validate_orthogonal_structure(subspaces, n, tol)
    return validate_setup(partition, structure, statistics)
