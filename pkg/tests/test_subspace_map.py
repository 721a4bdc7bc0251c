import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_feasible_setup
from indistent.errors import (
    DimensionError,
    FilteredOutError,
    SetupError,
    StatisticsError,
    ValidationError,
)
from indistent.experiments import boson_setup, boson_state, fermion_state, rotated_fermion_setup
from indistent.permutation import ProvisionalState, Statistics, basis_state, symmetrize
from indistent.setup import make_setup
from indistent.subspace_map import (
    MesState,
    block_basis,
    decompose,
    expectation,
    f_forward,
    f_inverse,
    lift_observable,
    local_lift,
    measurable_isometry,
    measurable_projector,
    mes_block_dims,
    mes_dimension,
    product_mes_state,
    rho_mes,
    to_block_coordinates,
)
from indistent.tensor_core import random_hermitian, random_vector

B, F = Statistics.BOSON, Statistics.FERMION
seeds = st.integers(0, 2**32 - 1)


# -- independent oracles -----------------------------------------------------

def sector_matrix(n, N, stat):
    """(Anti)symmetrizer as an explicit matrix, from index-tuple loops."""
    D = n ** N
    X = np.zeros((D, D))
    for perm in itertools.permutations(range(N)):
        inversions = sum(perm[a] > perm[b] for a in range(N) for b in range(a + 1, N))
        sign = -1 if (stat is F and inversions % 2) else 1
        for idx in itertools.product(range(n), repeat=N):
            out = [0] * N
            for k in range(N):
                out[perm[k]] = idx[k]
            X[np.ravel_multi_index(out, (n,) * N), np.ravel_multi_index(idx, (n,) * N)] += sign
    return X / math.factorial(N)


def projector_oracle(setup):
    """M X (P_{V(k)} per particle k) X, with V(k) the subspace of k's block."""
    block_of = {k: i for i, b in enumerate(setup.partition.blocks) for k in b}
    projs = [setup.structure.subspaces[block_of[k]] for k in range(setup.N)]
    Q = np.ones((1, 1))
    for basis in projs:
        Q = np.kron(Q, basis.T @ basis.conj())
    X = sector_matrix(setup.n, setup.N, setup.statistics)
    return setup.M * X @ Q @ X


def symmetrized_span_rank(V, m, stat):
    n = V.shape[1]
    X = sector_matrix(n, m, stat)
    cols = []
    for combo in itertools.product(range(V.shape[0]), repeat=m):
        v = np.ones(1)
        for j in combo:
            v = np.kron(v, V[j])
        cols.append(X @ v)
    return np.linalg.matrix_rank(np.array(cols), tol=1e-9)


def single_block_setup(d, m, stat, n=None):
    n = max(d, 2) if n is None else n
    return make_setup([list(range(m))], [list(np.eye(n)[:d])], stat, n=n)


def random_mes(setup, rng):
    return MesState(mes_block_dims(setup), random_vector(mes_dimension(setup), rng))


# -- block bases -------------------------------------------------------------

def test_one_particle_block_is_subspace_basis():
    setup = rotated_fermion_setup(0.4)
    for i in range(2):
        np.testing.assert_allclose(block_basis(setup, i).vectors, setup.structure.subspaces[i])


def test_fermion_pair_block_is_slater_determinant():
    setup = single_block_setup(2, 2, F, n=3)
    basis = block_basis(setup, 0)
    assert basis.dim == 1
    expected = (basis_state(3, (0, 1)).amplitudes - basis_state(3, (1, 0)).amplitudes) / math.sqrt(2)
    np.testing.assert_allclose(basis.vectors[0], expected, atol=1e-15)


def test_boson_pair_block_dimension():
    setup = single_block_setup(3, 2, B)
    assert block_basis(setup, 0).dim == 6
    assert symmetrized_span_rank(setup.structure.subspaces[0], 2, B) == 6


@pytest.mark.parametrize("stat", [B, F])
@pytest.mark.parametrize("d,m", [(d, m) for d in range(1, 5) for m in range(1, 4)])
def test_block_dimension_formula(stat, d, m):
    expected = math.comb(d, m) if stat is F else math.comb(d + m - 1, m)
    if expected == 0:
        with pytest.raises(SetupError):
            single_block_setup(d, m, stat, n=max(d, 2) + 1)
        return
    setup = single_block_setup(d, m, stat, n=max(d, 2) + 1)
    basis = block_basis(setup, 0)
    assert basis.dim == expected
    assert symmetrized_span_rank(setup.structure.subspaces[0], m, stat) == expected
    sym = np.array([symmetrize(ProvisionalState(setup.n, m, v), stat).amplitudes
                    for v in basis.vectors])
    np.testing.assert_allclose(sym, basis.vectors, atol=1e-12)


def test_mes_dimension_examples():
    assert mes_dimension(rotated_fermion_setup(0.2)) == 4
    assert mes_dimension(boson_setup(np.eye(6))) == 9
    setup = single_block_setup(3, 2, F, n=4)
    assert mes_dimension(setup) == 3


# -- the isometry ----------------------------------------------------------------

def test_forward_fermion_and_boson_examples():
    e = np.eye(4)
    mes = product_mes_state([[1, 0], [1, 0]])
    fs = make_setup([[0], [1]], [[e[0], e[1]], [e[2], e[3]]], F)
    expected = (basis_state(4, (0, 2)).amplitudes - basis_state(4, (2, 0)).amplitudes) / math.sqrt(2)
    np.testing.assert_allclose(f_forward(mes, fs).amplitudes, expected, atol=1e-15)
    bs = make_setup([[0], [1]], [[e[0], e[1]], [e[2], e[3]]], B)
    expected = (basis_state(4, (0, 2)).amplitudes + basis_state(4, (2, 0)).amplitudes) / math.sqrt(2)
    np.testing.assert_allclose(f_forward(mes, bs).amplitudes, expected, atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_isometry_and_inverse(seed):
    rng = np.random.default_rng(seed)
    setup = random_feasible_setup(rng)
    m1, m2 = random_mes(setup, rng), random_mes(setup, rng)
    f1, f2 = f_forward(m1, setup), f_forward(m2, setup)
    assert abs(np.vdot(f1.amplitudes, f2.amplitudes) - np.vdot(m1.amplitudes, m2.amplitudes)) <= 1e-10
    assert abs(f1.norm() - m1.norm()) <= 1e-10
    back = f_inverse(f1, setup)
    assert np.max(np.abs(back.amplitudes - m1.amplitudes)) <= 1e-10
    P = measurable_projector(setup)
    np.testing.assert_allclose(P @ f1.amplitudes, f1.amplitudes, atol=1e-10)
    sym = symmetrize(f1, setup.statistics)
    np.testing.assert_allclose(sym.amplitudes, f1.amplitudes, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_projector_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    setup = random_feasible_setup(rng, max_N=3, max_n=4)
    P = measurable_projector(setup)
    assert np.max(np.abs(P @ P - P)) <= 1e-10
    assert np.max(np.abs(P - P.conj().T)) <= 1e-10
    assert np.max(np.abs(P - projector_oracle(setup))) <= 1e-10
    F_ = measurable_isometry(setup)
    assert np.trace(P).real == pytest.approx(F_.shape[1], abs=1e-9)


def test_forward_dimension_mismatch():
    setup = rotated_fermion_setup(0.1)
    with pytest.raises(DimensionError):
        f_forward(MesState((3, 2), np.ones(6)), setup)


def test_inverse_rejects_outside_component_and_maps_zero():
    setup = rotated_fermion_setup(0.0)
    with pytest.raises(ValidationError):
        f_inverse(fermion_state().with_amplitudes(
            (basis_state(4, (0, 1)).amplitudes - basis_state(4, (1, 0)).amplitudes) / math.sqrt(2)),
            setup)
    zero = f_inverse(ProvisionalState(4, 2, np.zeros(16)), setup)
    assert zero.norm() == 0.0


def test_inverse_recovers_rotated_fermion_mes_state():
    for theta in (0.1, np.pi / 8, 0.7, 1.3):
        c, s = math.cos(theta), math.sin(theta)
        setup = rotated_fermion_setup(theta)
        dec = decompose(fermion_state(), setup)
        mes = f_inverse(dec.observable, setup).normalized()
        expected = np.array([c * c, 0, 0, -s * s]) / math.sqrt(c ** 4 + s ** 4)
        np.testing.assert_allclose(mes.amplitudes, expected, atol=1e-12)


# -- decomposition ---------------------------------------------------------------

def test_decompose_fermion_example():
    theta = 0.45
    c, s = math.cos(theta), math.sin(theta)
    setup = rotated_fermion_setup(theta)
    dec = decompose(fermion_state(), setup)
    assert dec.weight == pytest.approx(c ** 4 + s ** 4, abs=1e-12)
    e = np.eye(4)
    e1, e2 = c * e[0] + s * e[3], c * e[1] - s * e[2]
    e3, e4 = c * e[2] + s * e[1], c * e[3] - s * e[0]
    raw = c * c * np.kron(e1, e3) - s * s * np.kron(e2, e4)
    expected = math.sqrt(2) * symmetrize(ProvisionalState(4, 2, raw), F).amplitudes
    np.testing.assert_allclose(dec.observable.amplitudes, expected, atol=1e-12)


def test_decompose_axis_aligned_boson_is_filtered():
    dec = decompose(boson_state(), boson_setup(np.eye(6)))
    assert dec.weight < 1e-24
    assert dec.filtered_out
    assert dec.complement_norm == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(FilteredOutError):
        dec.mes_state()


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_decompose_pythagoras_and_product_form(seed):
    rng = np.random.default_rng(seed)
    setup = random_feasible_setup(rng)
    raw = ProvisionalState(setup.n, setup.N, random_vector(setup.n ** setup.N, rng))
    psi = symmetrize(raw, setup.statistics)
    if psi.norm() < 1e-6:
        return
    psi = psi.normalized()
    dec = decompose(psi, setup)
    assert abs(dec.weight + dec.complement_norm ** 2 - psi.norm() ** 2) <= 1e-12
    P = measurable_projector(setup)
    np.testing.assert_allclose(P @ dec.observable.amplitudes, dec.observable.amplitudes, atol=1e-10)
    # a state that is already f(product) has nothing filtered
    vecs = [random_vector(d, rng) for d in mes_block_dims(setup)]
    image = f_forward(product_mes_state(vecs), setup)
    dec2 = decompose(image, setup)
    assert dec2.complement_norm <= 1e-10
    np.testing.assert_allclose(dec2.observable.amplitudes, image.amplitudes, atol=1e-10)


def test_decompose_requires_sector_unless_opted_in():
    setup = rotated_fermion_setup(0.2)
    psi = basis_state(4, (0, 2))
    with pytest.raises(StatisticsError):
        decompose(psi, setup)
    dec = decompose(psi, setup, auto_symmetrize=True)
    ref = decompose(symmetrize(psi, F), setup)
    assert dec.weight == pytest.approx(ref.weight, abs=1e-15)


def test_decompose_dimension_mismatch():
    with pytest.raises(DimensionError):
        decompose(boson_state(4), boson_setup(np.eye(6)))


# -- observables ----------------------------------------------------------------

def test_identity_lift_is_projector():
    setup = rotated_fermion_setup(0.3)
    ops = [np.eye(d) for d in mes_block_dims(setup)]
    mes_op, prov_op = lift_observable(ops, setup)
    np.testing.assert_allclose(mes_op, np.eye(4))
    np.testing.assert_allclose(prov_op, measurable_projector(setup), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_lift_routes_agree_and_expectations_correspond(seed):
    rng = np.random.default_rng(seed)
    setup = random_feasible_setup(rng, max_N=3, max_n=4)
    ops = [random_hermitian(d, rng) for d in mes_block_dims(setup)]
    lifted = lift_observable(ops, setup)
    F_ = measurable_isometry(setup)
    np.testing.assert_allclose(lifted.provisional, F_ @ lifted.mes @ F_.conj().T, atol=1e-10)
    m = random_mes(setup, rng)
    lhs = expectation(m, lifted.mes)
    rhs = expectation(f_forward(m, setup), lifted.provisional)
    assert abs(lhs - rhs) <= 1e-10


def test_local_lifts_commute(rng):
    e = np.eye(5)
    setup = make_setup([[0], [1, 2]], [[e[0], e[1]], [e[2], e[3], e[4]]], B)
    dims = mes_block_dims(setup)
    a = local_lift(random_hermitian(dims[0], rng), setup, 0)
    b = local_lift(random_hermitian(dims[1], rng), setup, 1)
    assert np.max(np.abs(a.mes @ b.mes - b.mes @ a.mes)) <= 1e-12
    assert np.max(np.abs(a.provisional @ b.provisional - b.provisional @ a.provisional)) <= 1e-10


def test_factorized_expectation_on_product_states(rng):
    setup = rotated_fermion_setup(0.6)
    dims = mes_block_dims(setup)
    vecs = [random_vector(d, rng) for d in dims]
    ops = [random_hermitian(d, rng) for d in dims]
    m = product_mes_state(vecs)
    whole = expectation(m, lift_observable(ops, setup).mes)
    parts = [expectation(m, local_lift(op, setup, i).mes) for i, op in enumerate(ops)]
    assert whole == pytest.approx(np.prod(parts), abs=1e-12)


def test_block_coordinates_of_single_particle_operator():
    setup = rotated_fermion_setup(0.0)
    op = np.diag([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_allclose(to_block_coordinates(op, setup, 0), np.diag([1, 2]))
    np.testing.assert_allclose(to_block_coordinates(op, setup, 1), np.diag([3, 4]))
    with pytest.raises(DimensionError):
        to_block_coordinates(np.eye(3), setup, 0)


def test_expectation_examples(rng):
    psi = random_vector(6, rng)
    assert expectation(psi, np.eye(6)) == pytest.approx(1.0, abs=1e-14)
    assert expectation(psi, np.outer(psi, psi.conj())) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValidationError):
        expectation(psi, np.triu(np.ones((6, 6))))


def test_lift_dimension_mismatch():
    setup = rotated_fermion_setup(0.1)
    with pytest.raises(DimensionError):
        lift_observable([np.eye(2)], setup)
    with pytest.raises(DimensionError):
        lift_observable([np.eye(2), np.eye(3)], setup)


# -- density matrices ----------------------------------------------------------------

def test_rho_mes_pure_consistency():
    setup = rotated_fermion_setup(0.8)
    psi = fermion_state()
    rm, w = rho_mes(np.outer(psi.amplitudes, psi.amplitudes.conj()), setup)
    dec = decompose(psi, setup)
    m = dec.mes_state().amplitudes
    assert w == pytest.approx(dec.weight, abs=1e-12)
    np.testing.assert_allclose(rm, np.outer(m, m.conj()), atol=1e-12)


def test_rho_mes_maximally_mixed(rng):
    e = np.eye(5)
    setup = make_setup([[0], [1]], [[e[0], e[1]], [e[2], e[3]]], B)
    P = measurable_projector(setup)
    rm, w = rho_mes(P / np.trace(P).real, setup)
    assert w == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(rm, np.eye(4) / 4, atol=1e-12)


def test_rho_mes_fully_filtered_and_invalid():
    psi = boson_state()
    setup = boson_setup(np.eye(6))
    with pytest.raises(FilteredOutError):
        rho_mes(np.outer(psi.amplitudes, psi.amplitudes), setup)
    with pytest.raises(ValidationError):
        rho_mes(np.eye(36), setup)
    a = basis_state(6, (0, 3)).amplitudes
    with pytest.raises(StatisticsError):
        rho_mes(np.outer(a, a), setup)
