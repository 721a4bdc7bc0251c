"""Symmetric-group action on the N-particle provisional space.

A state of N particles with local dimension n is a vector of length
``n**N`` whose flat index is the row-major multi-index ``(i_1, ..., i_N)``;
particle 0 is the slowest-varying index.

Permutations compose as ``(sigma * tau)(k) == sigma(tau(k))`` and their
action on states is a homomorphism: ``pi(sigma * tau) == pi(sigma) pi(tau)``.
"""

from dataclasses import dataclass, field
import enum
from functools import lru_cache
import itertools
import math

import numpy as np

from .config import DEFAULT_TOL, MAX_PARTICLES
from .errors import DimensionError, ValidationError
from .tensor_core import as_vector, check_dim

__all__ = [
    "Permutation",
    "Statistics",
    "ProvisionalState",
    "enumerate_permutations",
    "signature",
    "apply_permutation",
    "symmetrize",
    "permute_particles",
    "project_sector",
    "basis_state",
]


@dataclass(frozen=True)
class Permutation:
    """Bijection of ``{0, ..., N-1}``; ``mapping[k]`` is the image of ``k``."""

    mapping: tuple

    def __post_init__(self):
        m = tuple(int(k) for k in self.mapping)
        if sorted(m) != list(range(len(m))):
            raise ValidationError(f"{m} is not a permutation of range({len(m)})")
        object.__setattr__(self, "mapping", m)

    @classmethod
    def identity(cls, N):
        return cls(tuple(range(N)))

    @classmethod
    def transposition(cls, N, a, b):
        m = list(range(N))
        m[a], m[b] = m[b], m[a]
        return cls(tuple(m))

    def __len__(self):
        return len(self.mapping)

    def __call__(self, k):
        return self.mapping[k]

    def __mul__(self, other):
        if len(other) != len(self):
            raise DimensionError("cannot compose permutations of different length")
        return Permutation(tuple(self.mapping[other.mapping[k]] for k in range(len(self))))

    def inverse(self):
        inv = [0] * len(self)
        for k, image in enumerate(self.mapping):
            inv[image] = k
        return Permutation(tuple(inv))


class Statistics(enum.Enum):
    BOSON = "boson"
    FERMION = "fermion"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValidationError(f"statistics must be 'boson' or 'fermion', got {value!r}") from None


@dataclass(frozen=True)
class ProvisionalState:
    """Amplitudes of an N-particle state in ``(C^n)^{(x)N}``.

    ``statistics`` is optional metadata recording the sector the state was
    prepared in; it is not enforced here.
    """

    n: int
    N: int
    amplitudes: np.ndarray = field(repr=False)
    statistics: Statistics = None

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError(f"local dimension n must be >= 2, got {self.n}")
        if self.N < 1:
            raise ValidationError(f"particle number N must be >= 1, got {self.N}")
        dim = check_dim(self.n ** self.N)
        amps = as_vector(self.amplitudes)
        if amps.size != dim:
            raise DimensionError(f"expected {dim} amplitudes for n={self.n}, N={self.N}, got {amps.size}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self):
        return self.amplitudes.size

    @property
    def tensor(self):
        return self.amplitudes.reshape((self.n,) * self.N)

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol=DEFAULT_TOL):
        return abs(self.norm() - 1.0) <= tol

    def normalized(self):
        nrm = self.norm()
        if nrm == 0.0:
            raise ValidationError("cannot normalize the zero vector")
        return self.with_amplitudes(self.amplitudes / nrm)

    def with_amplitudes(self, amplitudes):
        return ProvisionalState(self.n, self.N, amplitudes, self.statistics)


def basis_state(n, indices, statistics=None):
    """Product state ``|e_{i_1}> ... |e_{i_N}>`` (0-based indices)."""
    N = len(indices)
    amps = np.zeros(check_dim(n ** N), dtype=complex)
    amps[np.ravel_multi_index(tuple(indices), (n,) * N)] = 1.0
    return ProvisionalState(n, N, amps, statistics)


@lru_cache(maxsize=None)
def _permutations(N):
    return tuple(Permutation(p) for p in itertools.permutations(range(N)))


def enumerate_permutations(N):
    """All ``N!`` permutations in lexicographic order of their mappings."""
    if not 1 <= N <= MAX_PARTICLES:
        raise ValidationError(f"N must lie in [1, {MAX_PARTICLES}], got {N}")
    return list(_permutations(N))


def signature(sigma):
    """+1 for even permutations, -1 for odd ones (inversion-count parity)."""
    m = sigma.mapping
    inversions = sum(1 for a, b in itertools.combinations(range(len(m)), 2) if m[a] > m[b])
    return -1 if inversions % 2 else 1


def permute_particles(arr, sigma, n, N):
    """Apply ``pi_sigma`` to the leading ``n**N`` axis of ``arr``.

    The ket sitting in slot ``k`` is moved to slot ``sigma(k)``. Any
    trailing axes of ``arr`` are carried along untouched.
    """
    arr = np.asarray(arr)
    if len(sigma) != N:
        raise DimensionError(f"permutation of length {len(sigma)} applied to {N} particles")
    batch = arr.shape[1:]
    t = arr.reshape((n,) * N + batch)
    axes = list(sigma.inverse().mapping) + list(range(N, N + len(batch)))
    return np.transpose(t, axes).reshape(arr.shape)


def project_sector(arr, n, N, statistics):
    """Apply the (anti)symmetrizer to the leading axis of ``arr``.

    This is the plain average ``(1/N!) sum_sigma [sgn(sigma)] pi_sigma``
    over all permutations; no ``n**N x n**N`` matrix is formed.
    """
    statistics = Statistics.parse(statistics)
    arr = np.asarray(arr, dtype=complex)
    out = np.zeros_like(arr)
    for sigma in enumerate_permutations(N):
        term = permute_particles(arr, sigma, n, N)
        if statistics is Statistics.FERMION and signature(sigma) < 0:
            out -= term
        else:
            out += term
    return out / math.factorial(N)


def apply_permutation(sigma, psi):
    return psi.with_amplitudes(permute_particles(psi.amplitudes, sigma, psi.n, psi.N))


def symmetrize(psi, stat):
    """Return ``S|psi>`` (bosons) or ``A|psi>`` (fermions), not renormalized."""
    return psi.with_amplitudes(project_sector(psi.amplitudes, psi.n, psi.N, stat))
