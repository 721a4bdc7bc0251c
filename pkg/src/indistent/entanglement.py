"""Entanglement of measurement-space states relative to a setup."""

from dataclasses import dataclass, field
import math

import numpy as np

from .config import DEFAULT_TOL, SEPARABILITY_TOL, ZERO_WEIGHT
from .errors import DimensionError, FilteredOutError, ValidationError
from .subspace_map import (
    decompose,
    lift_observable,
    local_lift,
    mes_block_dims,
    rho_mes,
)
from .tensor_core import as_matrix, partial_trace, svd_schmidt

__all__ = [
    "FILTERED_OUT",
    "SEPARABLE",
    "ENTANGLED",
    "EntanglementReport",
    "FactorizationResult",
    "PPTResult",
    "MixedReport",
    "cut_label",
    "single_block_cuts",
    "schmidt_coefficients",
    "squared_concurrence",
    "block_purities",
    "is_product_pure",
    "separability_verdict",
    "factorization_check",
    "ppt_check",
    "mixed_report",
    "is_iid",
]

FILTERED_OUT = "filtered_out"
SEPARABLE = "separable"
ENTANGLED = "entangled"

PPT_NOTE = (
    "PPT is only a necessary condition for separability: a violation proves "
    "entanglement, passing is inconclusive"
)


@dataclass(frozen=True)
class EntanglementReport:
    verdict: str
    weight: float
    schmidt: dict = field(default_factory=dict)
    squared_concurrence: float = None
    block_purities: tuple = ()
    mes: object = field(default=None, repr=False)

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "weight": self.weight,
            "schmidt": {k: [float(x) for x in v.coefficients] for k, v in self.schmidt.items()},
            "squared_concurrence": self.squared_concurrence,
            "block_purities": [float(p) for p in self.block_purities],
        }


@dataclass(frozen=True)
class FactorizationResult:
    lhs: float
    rhs: float
    residual: float


@dataclass(frozen=True)
class PPTResult:
    cut: str
    verdict: str
    min_eigenvalue: float


@dataclass(frozen=True)
class MixedReport:
    weight: float
    ppt: dict
    note: str = PPT_NOTE

    @property
    def verdict(self):
        if self.weight < ZERO_WEIGHT:
            return FILTERED_OUT
        if any(r.verdict == "violates" for r in self.ppt.values()):
            return ENTANGLED
        return "ppt_inconclusive"

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "weight": self.weight,
            "ppt": {k: {"verdict": r.verdict, "min_eigenvalue": r.min_eigenvalue}
                    for k, r in self.ppt.items()},
            "note": self.note,
        }


def _normalize_cut(cut, s):
    side = sorted(set(int(i) for i in cut))
    if not side or len(side) == s or any(i < 0 or i >= s for i in side):
        raise DimensionError(f"cut {cut} is not a proper bipartition of {s} blocks")
    return side, [i for i in range(s) if i not in side]


def cut_label(cut, s):
    a, b = _normalize_cut(cut, s)
    return ",".join(map(str, a)) + "|" + ",".join(map(str, b))


def single_block_cuts(s):
    """Block-versus-rest cuts; for two blocks only the single cut ``(0,)``."""
    if s < 2:
        return []
    if s == 2:
        return [(0,)]
    return [(i,) for i in range(s)]


def _require_normalized(mes, tol):
    nrm = mes.norm()
    if abs(nrm - 1.0) > tol:
        raise ValidationError(f"measurement-space state is not normalized (norm={nrm!r})")


def schmidt_coefficients(mes, cut, tol=DEFAULT_TOL):
    """Schmidt decomposition of ``mes`` across the bipartition of blocks ``cut | rest``."""
    _require_normalized(mes, tol)
    dims = mes.block_dims
    a, b = _normalize_cut(cut, len(dims))
    t = np.transpose(mes.tensor, a + b)
    da = math.prod(dims[i] for i in a)
    db = math.prod(dims[i] for i in b)
    return svd_schmidt(t.reshape(-1), da, db, tol)


def squared_concurrence(mes, tol=DEFAULT_TOL):
    """``2 (1 - sum_i lambda_i**4)`` for a normalized two-block state."""
    if len(mes.block_dims) != 2:
        raise DimensionError(f"squared concurrence needs 2 blocks, got {len(mes.block_dims)}")
    lam = schmidt_coefficients(mes, (0,), tol).coefficients
    return max(0.0, float(2.0 * (1.0 - np.sum(lam ** 4))))


def block_purities(mes):
    """``Tr(rho_i**2)`` of each single-block reduced state."""
    dims = list(mes.block_dims)
    psi = mes.amplitudes
    rho = np.outer(psi, psi.conj())
    out = []
    for i in range(len(dims)):
        r = partial_trace(rho, dims, [i])
        out.append(float(np.real(np.trace(r @ r))))
    return tuple(out)


def is_product_pure(mes, tol=SEPARABILITY_TOL):
    """Whether ``mes`` is a full product over blocks, with the block purities."""
    _require_normalized(mes, DEFAULT_TOL)
    purities = block_purities(mes)
    return all(p >= 1.0 - tol for p in purities), purities


def separability_verdict(psi, setup, tol=SEPARABILITY_TOL, auto_symmetrize=False,
                         validation_tol=DEFAULT_TOL):
    """Decide separability of a pure state relative to ``setup``.

    The measurable part is mapped to the measurement space, renormalized
    and tested for full product form. A state whose measurable part has
    weight below the zero threshold is reported as filtered out.
    """
    if abs(psi.norm() - 1.0) > validation_tol:
        raise ValidationError(f"state is not normalized (norm={psi.norm()!r})")
    dec = decompose(psi, setup, auto_symmetrize=auto_symmetrize, tol=validation_tol)
    if dec.filtered_out:
        return EntanglementReport(verdict=FILTERED_OUT, weight=dec.weight)
    mes = dec.mes_state()
    product, purities = is_product_pure(mes, tol)
    s = len(mes.block_dims)
    schmidt = {cut_label(c, s): schmidt_coefficients(mes, c) for c in single_block_cuts(s)}
    conc = squared_concurrence(mes) if s == 2 else None
    return EntanglementReport(
        verdict=SEPARABLE if product else ENTANGLED,
        weight=dec.weight,
        schmidt=schmidt,
        squared_concurrence=conc,
        block_purities=purities,
        mes=mes,
    )


def factorization_check(psi, setup, ops, renormalize=True, tol=DEFAULT_TOL):
    """Compare ``<Psi|O~|Psi>`` with ``prod_i <Psi|O~_i|Psi>``.

    ``ops`` are per-block Hermitian operators in block coordinates. The
    identity holds literally only when the measurable part has unit norm,
    so by default the renormalized measurable part is used; with
    ``renormalize=False`` ``psi`` enters as given.
    """
    state = psi.amplitudes
    if renormalize:
        dec = decompose(psi, setup, tol=tol)
        if dec.filtered_out:
            raise ValidationError("factorization check on a filtered-out state")
        state = dec.observable.amplitudes / math.sqrt(dec.weight)
    for i, op in enumerate(ops):
        op = as_matrix(op, square=True)
        if np.max(np.abs(op - op.conj().T)) > tol * max(1.0, float(np.max(np.abs(op)))):
            raise ValidationError(f"block {i} operator is not self-adjoint")
    full = lift_observable(ops, setup).provisional
    lhs = np.vdot(state, full @ state).real
    rhs = 1.0
    for i, op in enumerate(ops):
        local = local_lift(op, setup, i).provisional
        rhs *= np.vdot(state, local @ state).real
    return FactorizationResult(lhs=float(lhs), rhs=float(rhs), residual=float(abs(lhs - rhs)))


def ppt_check(rho, block_dims, cut, tol=DEFAULT_TOL):
    """Positivity of the partial transpose over the blocks in ``cut``."""
    rho = as_matrix(rho, square=True)
    dims = [int(d) for d in block_dims]
    D = math.prod(dims)
    if rho.shape[0] != D:
        raise DimensionError(f"density matrix of size {rho.shape[0]} for block dims {dims}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValidationError("density matrix is not Hermitian")
    if np.linalg.eigvalsh(rho)[0] < -tol:
        raise ValidationError("density matrix is not positive semidefinite")
    a, _ = _normalize_cut(cut, len(dims))
    k = len(dims)
    t = rho.reshape(dims + dims)
    axes = list(range(2 * k))
    for i in a:
        axes[i], axes[k + i] = k + i, i
    pt = np.transpose(t, axes).reshape(D, D)
    min_eig = float(np.linalg.eigvalsh(pt)[0])
    return PPTResult(
        cut=cut_label(cut, k),
        verdict="violates" if min_eig < -tol else "passes",
        min_eigenvalue=min_eig,
    )


def mixed_report(rho, setup, tol=DEFAULT_TOL):
    """PPT analysis of a density matrix on the (anti)symmetric sector."""
    try:
        rm, weight = rho_mes(rho, setup, tol)
    except FilteredOutError as exc:
        return MixedReport(weight=exc.weight, ppt={})
    dims = mes_block_dims(setup)
    results = {}
    for cut in single_block_cuts(len(dims)):
        r = ppt_check(rm, dims, cut, tol)
        results[r.cut] = r
    return MixedReport(weight=weight, ppt=results)


def is_iid(psi, tol=DEFAULT_TOL):
    """Return ``phi`` if ``psi`` equals ``phi`` tensored ``N`` times, else ``None``.

    ``phi`` is the dominant left singular vector of the ``n x n**(N-1)``
    reshaping, phased so its first non-negligible entry is real positive.
    The comparison ignores a global phase of ``psi``.
    """
    n, N = psi.n, psi.N
    if abs(psi.norm() - 1.0) > tol:
        raise ValidationError("is_iid needs a normalized state")
    u, _, _ = np.linalg.svd(psi.amplitudes.reshape(n, -1), full_matrices=False)
    phi = u[:, 0]
    lead = phi[np.argmax(np.abs(phi) > 1e-8)]
    phi = phi * (abs(lead) / lead)
    power = phi
    for _ in range(N - 1):
        power = np.kron(power, phi)
    overlap = np.vdot(power, psi.amplitudes)
    distance = np.linalg.norm(psi.amplitudes - overlap / abs(overlap) * power) if overlap != 0 else 2.0
    return phi if distance <= tol else None
