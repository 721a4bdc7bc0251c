"""Scenario runners: the rotated fermion setup, the random-setup boson
cloud, and Monte Carlo scans over random measurement setups.

Every random draw uses its own generator seeded from ``(seed, index...)``
so results do not depend on evaluation order.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .config import DIM_CAP
from .entanglement import ENTANGLED, FILTERED_OUT, SEPARABLE, separability_verdict
from .errors import SetupError, ValidationError
from .permutation import ProvisionalState, Statistics, basis_state, symmetrize
from .setup import make_setup
from .tensor_core import haar_unitary, random_vector

__all__ = [
    "SweepRow",
    "CloudRow",
    "CloudResult",
    "ScanReport",
    "ConverseReport",
    "DEFAULT_GRID_POINTS",
    "DEFAULT_CLOUD_SAMPLES",
    "FULL_CLOUD_SAMPLES",
    "default_theta_grid",
    "fermion_state",
    "rotated_fermion_setup",
    "closed_form_concurrence",
    "fermion_sweep",
    "boson_state",
    "boson_setup",
    "boson_cloud_point",
    "boson_cloud",
    "random_setup",
    "iid_state",
    "iid_scan",
    "converse_scan",
]

DEFAULT_GRID_POINTS = 721
DEFAULT_CLOUD_SAMPLES = 10_000
FULL_CLOUD_SAMPLES = 1_000_000


@dataclass(frozen=True)
class SweepRow:
    theta: float
    weight: float
    concurrence: float
    closed_form: float
    residual: float


@dataclass(frozen=True)
class CloudRow:
    sample_id: int
    lambda1: float
    lambda2: float
    lambda3: float
    weight: float
    tag: str


@dataclass
class CloudResult:
    rows: list
    skipped: list = field(default_factory=list)

    @property
    def samples(self):
        return len(self.rows) + len(self.skipped)


@dataclass
class ScanReport:
    N: int
    n: int
    trials: int
    setups_per_trial: int
    seed: int
    separable: int = 0
    filtered_out: int = 0
    entangled: int = 0
    max_lambda2: float = 0.0
    violations: list = field(default_factory=list)

    def to_dict(self):
        return {
            "N": self.N,
            "n": self.n,
            "trials": self.trials,
            "setups_per_trial": self.setups_per_trial,
            "seed": self.seed,
            "separable": self.separable,
            "filtered_out": self.filtered_out,
            "entangled": self.entangled,
            "max_lambda2": self.max_lambda2,
            "violations": self.violations,
        }


@dataclass
class ConverseReport:
    witness_found: bool
    trials_used: int
    seed: int
    witness_trial: int = None
    witness_setup: object = None
    witness_report: object = None

    def to_dict(self):
        out = {
            "witness_found": self.witness_found,
            "trials_used": self.trials_used,
            "seed": self.seed,
        }
        if self.witness_found:
            out["witness_trial"] = self.witness_trial
            out["witness_report"] = self.witness_report.to_dict()
            out["witness_report"]["setup_summary"] = self.witness_setup.summary()
        else:
            out["message"] = "no witness found in budget"
        return out


# -- rotated fermion setup ---------------------------------------------------

def default_theta_grid(points=DEFAULT_GRID_POINTS):
    """``points`` angles spaced uniformly on ``[0, pi]``, endpoints included."""
    if points < 2:
        raise ValidationError("the angle grid needs at least 2 points")
    return np.linspace(0.0, math.pi, points)


def fermion_state():
    """``(|e_0 e_2> - |e_2 e_0>) / sqrt(2)`` for two fermions in ``C^4``."""
    a = symmetrize(basis_state(4, (0, 2), Statistics.FERMION), Statistics.FERMION)
    return a.with_amplitudes(math.sqrt(2.0) * a.amplitudes)


def rotated_fermion_setup(theta):
    """Partition ``{{0}, {1}}`` with the basis of ``C^4`` rotated by ``theta``.

    ``V_1`` is spanned by ``c e_0 + s e_3`` and ``c e_1 - s e_2``;
    ``V_2`` by ``c e_2 + s e_1`` and ``c e_3 - s e_0``.
    """
    c, s = math.cos(theta), math.sin(theta)
    e = np.eye(4)
    v1 = [c * e[0] + s * e[3], c * e[1] - s * e[2]]
    v2 = [c * e[2] + s * e[1], c * e[3] - s * e[0]]
    return make_setup([[0], [1]], [v1, v2], Statistics.FERMION)


def closed_form_concurrence(theta):
    """``4 / (tan^2 + cot^2)^2``, with the limit 0 where a term diverges."""
    t = math.tan(theta)
    if t == 0.0:
        return 0.0
    try:
        denom = (t * t + 1.0 / (t * t)) ** 2
    except (OverflowError, ZeroDivisionError):
        return 0.0
    if not math.isfinite(denom) or denom == 0.0:
        return 0.0
    return 4.0 / denom


def fermion_sweep(theta_grid=None):
    grid = default_theta_grid() if theta_grid is None else theta_grid
    psi = fermion_state()
    rows = []
    for theta in grid:
        theta = float(theta)
        report = separability_verdict(psi, rotated_fermion_setup(theta))
        conc = report.squared_concurrence if report.verdict != FILTERED_OUT else 0.0
        closed = closed_form_concurrence(theta)
        rows.append(SweepRow(theta, report.weight, conc, closed, abs(conc - closed)))
    return rows


# -- boson cloud ---------------------------------------------------------------

def boson_state(n=6):
    """``(1/sqrt(n)) sum_i |e_i e_i>``."""
    amps = np.eye(n, dtype=complex).reshape(-1) / math.sqrt(n)
    return ProvisionalState(n, 2, amps, Statistics.BOSON)


def boson_setup(U):
    """Partition ``{{0}, {1}}`` with ``V_1`` spanned by the first half of
    the columns of ``U`` and ``V_2`` by the second half."""
    U = np.asarray(U, dtype=complex)
    n = U.shape[0]
    half = n // 2
    return make_setup([[0], [1]], [list(U[:, :half].T), list(U[:, half:].T)], Statistics.BOSON)


def boson_cloud_point(U, psi=None):
    """Ascending Schmidt coefficients and weight for one unitary, or ``None``
    when the state is filtered out."""
    psi = boson_state(np.asarray(U).shape[0]) if psi is None else psi
    report = separability_verdict(psi, boson_setup(U))
    if report.verdict == FILTERED_OUT:
        return None
    lam = np.sort(report.schmidt["0|1"].coefficients)
    return lam, report.weight


def boson_cloud(samples=DEFAULT_CLOUD_SAMPLES, seed=0, n=6):
    """Schmidt coefficients of the boson state under Haar-random setups.

    Zero-weight draws are collected in ``skipped`` instead of ``rows``.
    """
    if samples < 1:
        raise ValidationError(f"samples must be >= 1, got {samples}")
    psi = boson_state(n)
    result = CloudResult(rows=[])
    for sample_id in range(samples):
        rng = np.random.default_rng([seed, sample_id])
        point = boson_cloud_point(haar_unitary(n, rng), psi)
        if point is None:
            result.skipped.append(sample_id)
            continue
        lam, weight = point
        result.rows.append(CloudRow(sample_id, float(lam[0]), float(lam[1]), float(lam[2]),
                                    weight, f"{seed}:{sample_id}"))
    return result


# -- random setups and scans ---------------------------------------------------

def random_setup(N, n, rng, statistics=Statistics.BOSON, s=None, allow_complement=True,
                 max_attempts=1000):
    """Draw a random partition and a Haar-rotated orthogonal structure.

    The block count is uniform on ``[1, min(N, n)]`` unless ``s`` is given;
    particles are assigned to blocks uniformly, rejecting assignments that
    leave a block empty. Subspaces are consecutive runs of columns of a
    Haar unitary; with ``allow_complement`` the total measured dimension is
    uniform on ``[s, n]`` so ``V_0`` may be non-trivial.
    """
    statistics = Statistics.parse(statistics)
    s_max = min(N, n)
    for _ in range(max_attempts):
        k = int(rng.integers(1, s_max + 1)) if s is None else s
        labels = rng.integers(0, k, size=N)
        blocks = [sorted(int(j) for j in np.flatnonzero(labels == b)) for b in range(k)]
        if any(not b for b in blocks):
            continue
        total = int(rng.integers(k, n + 1)) if allow_complement else n
        cuts = np.sort(rng.choice(np.arange(1, total), size=k - 1, replace=False)) \
            if k > 1 else np.array([], dtype=int)
        edges = [0] + [int(c) for c in cuts] + [total]
        dims = [edges[b + 1] - edges[b] for b in range(k)]
        if statistics is Statistics.FERMION and any(d < len(b) for d, b in zip(dims, blocks)):
            continue
        U = haar_unitary(n, rng)
        subspaces = [list(U[:, edges[b]:edges[b + 1]].T) for b in range(k)]
        return make_setup(blocks, subspaces, statistics, n=n)
    raise SetupError(f"no feasible random setup found in {max_attempts} attempts")


def iid_state(phi, N):
    """``phi`` tensored with itself ``N`` times, as a bosonic state."""
    phi = np.asarray(phi, dtype=complex)
    amps = phi
    for _ in range(N - 1):
        amps = np.kron(amps, phi)
    return ProvisionalState(phi.size, N, amps, Statistics.BOSON)


def iid_scan(N, n, trials, setups_per_trial, seed=0):
    """Check that i.i.d. bosonic states are never entangled.

    Any entangled verdict is recorded as a violation together with the
    seed triple ``(seed, trial, setup + 1)`` that regenerates its setup.
    """
    if n ** N > DIM_CAP:
        raise ValidationError(f"n**N = {n ** N} exceeds the dimension cap")
    report = ScanReport(N=N, n=n, trials=trials, setups_per_trial=setups_per_trial, seed=seed)
    for trial in range(trials):
        phi = random_vector(n, np.random.default_rng([seed, trial, 0]))
        psi = iid_state(phi, N)
        for j in range(setups_per_trial):
            setup = random_setup(N, n, np.random.default_rng([seed, trial, j + 1]))
            verdict = separability_verdict(psi, setup)
            if verdict.verdict == FILTERED_OUT:
                report.filtered_out += 1
                continue
            if verdict.verdict == SEPARABLE:
                report.separable += 1
            else:
                report.entangled += 1
                report.violations.append({
                    "trial": trial,
                    "setup": j,
                    "seed": [seed, trial, j + 1],
                    "block_purities": list(verdict.block_purities),
                })
            for res in verdict.schmidt.values():
                if res.coefficients.size > 1:
                    report.max_lambda2 = max(report.max_lambda2, float(res.coefficients[1]))
    return report


def converse_scan(psi, trials, seed=0):
    """Search random two-block setups for one under which ``psi`` is entangled."""
    if psi.N != 2:
        raise ValidationError(f"converse scan needs N=2, got N={psi.N}")
    if psi.statistics is not None and psi.statistics is not Statistics.BOSON:
        raise ValidationError("converse scan applies to bosonic states")
    if psi.n < 4:
        raise ValidationError(f"converse scan needs n >= 4, got n={psi.n}")
    for trial in range(trials):
        setup = random_setup(2, psi.n, np.random.default_rng([seed, trial]), s=2)
        report = separability_verdict(psi, setup)
        if report.verdict == ENTANGLED:
            return ConverseReport(True, trial + 1, seed, trial, setup, report)
    return ConverseReport(False, trials, seed)
