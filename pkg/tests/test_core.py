import math

import numpy as np
import pytest
from hypothesis import given, strategies as hs

from conftest import random_hermitian, random_mixed, random_pure
from macroscopicity.config import CapacityError
from macroscopicity.core import (SX, SZ, DensityOperator, HermitianOperator, StateVector, eigh,
                                 fidelity, overlap, partial_trace, pauli_string,
                                 reduced_trace_distance, state_from_json, state_to_json, tensor,
                                 trace_distance, trace_norm)
from macroscopicity.states import epsilon_qubit, ghz

KET0 = StateVector(np.array([1, 0]), 1)
KET1 = StateVector(np.array([0, 1]), 1)


def test_tensor_basis_and_ordering():
    assert np.allclose(tensor(KET0, KET0).amplitudes, [1, 0, 0, 0])
    # qubit 1 is the most significant bit
    assert np.allclose(tensor(KET0, KET1).amplitudes, [0, 1, 0, 0])
    op = tensor(SZ, np.eye(2))
    v = tensor(KET0, KET1).amplitudes
    assert np.allclose(op @ v, v)


def test_tensor_builds_ghz():
    zero3 = tensor(tensor(KET0, KET0), KET0).amplitudes
    one3 = tensor(tensor(KET1, KET1), KET1).amplitudes
    assert np.allclose((zero3 + one3) / math.sqrt(2), ghz(3).amplitudes)


def test_tensor_capacity(monkeypatch):
    monkeypatch.setenv("MACRO_MAX_QUBITS", "3")
    a = StateVector(np.eye(4)[0], 2)
    with pytest.raises(CapacityError):
        tensor(a, a)


def test_state_invariants():
    with pytest.raises(ValueError):
        StateVector(np.array([1.0, 1.0]), 1)
    with pytest.raises(ValueError):
        StateVector(np.array([1.0, 0, 0]), 1)
    with pytest.raises(ValueError):
        DensityOperator(np.array([[1.0, 0], [0, 1.0]]), 1)
    with pytest.raises(ValueError):
        HermitianOperator(np.array([[0, 1], [0, 0]]))


def test_partial_trace_examples():
    rho = partial_trace(tensor(KET0, KET0), {1})
    assert np.allclose(rho.matrix, [[1, 0], [0, 0]])
    red = partial_trace(ghz(4), {1, 2}).matrix
    expect = np.zeros((4, 4))
    expect[0, 0] = expect[3, 3] = 0.5
    assert np.allclose(red, expect)
    with pytest.raises(ValueError):
        partial_trace(ghz(2), set())


def test_partial_trace_composes(rng):
    rho = random_mixed(4, 3, rng)
    step = partial_trace(partial_trace(rho, {1, 2, 4}), {1, 3})
    assert np.allclose(step.matrix, partial_trace(rho, {1, 4}).matrix, atol=1e-10)
    assert abs(np.trace(step.matrix) - 1) < 1e-10


def test_eigh_examples():
    d = eigh(SZ)
    assert np.allclose(d.eigenvalues, [1, -1])
    d = eigh(SX)
    plus = np.array([1, 1]) / math.sqrt(2)
    assert abs(abs(np.vdot(d.eigenvectors[:, 0], plus)) - 1) < 1e-12
    d = eigh(ghz(3).density().matrix)
    assert np.allclose(d.eigenvalues, [1] + [0] * 7, atol=1e-12)
    with pytest.raises(ValueError):
        eigh(np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize("n", [1, 3, 6, 10, 12])
def test_eigh_reconstruction(n, rng):
    d = 2 ** n
    # complex LAPACK at 2^12 is minutes on one core; the largest case is real symmetric
    m = random_hermitian(d, rng) if n < 12 else random_hermitian(d, rng).real
    dec = eigh(m)
    assert np.max(np.abs(dec.reconstruct() - m)) <= 1e-8 * max(1.0, np.max(np.abs(m)))
    g = dec.eigenvectors.conj().T @ dec.eigenvectors
    assert np.max(np.abs(g - np.eye(d))) <= 1e-8
    assert np.all(np.diff(dec.eigenvalues) <= 1e-12)


def test_trace_norm_and_distance():
    assert trace_norm(SZ) == pytest.approx(2)
    assert trace_norm(np.array([[0, 1], [0, 0]])) == pytest.approx(1)
    p0, p1 = KET0.density().matrix, KET1.density().matrix
    assert trace_norm(p0 - p1) == pytest.approx(2)
    assert trace_distance(KET0, KET0) == pytest.approx(0)
    assert trace_distance(KET0, KET1) == pytest.approx(1)
    half = DensityOperator(np.eye(2) / 2, 1)
    assert trace_distance(KET0, half) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        trace_distance(KET0, ghz(2))


def test_overlap_examples():
    assert overlap(KET0, KET0) == pytest.approx(1)
    assert overlap(KET0, KET1) == pytest.approx(0)
    eps = 0.37
    e = StateVector(epsilon_qubit(eps), 1)
    assert overlap(KET0, e) == pytest.approx(math.cos(eps))


@given(hs.integers(0, 2 ** 31 - 1))
def test_trace_distance_triangle(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_mixed(2, 1 + i, rng) for i in range(3))
    assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-9


@given(hs.integers(0, 2 ** 31 - 1))
def test_fidelity_pure_matches_overlap(seed):
    rng = np.random.default_rng(seed)
    a, b = random_pure(3, rng), random_pure(3, rng)
    assert fidelity(a, b) == pytest.approx(abs(overlap(a, b)) ** 2, abs=1e-10)
    assert fidelity(a.density(), b.density()) == pytest.approx(abs(overlap(a, b)) ** 2, abs=1e-9)


def test_reduced_trace_distance_lowrank_matches_dense(rng):
    a, b = random_pure(8, rng), random_pure(8, rng)
    group = [2, 5, 6, 7]
    dense = trace_distance(partial_trace(a, group), partial_trace(b, group))
    assert reduced_trace_distance(a, b, group) == pytest.approx(dense, abs=1e-10)


def test_json_roundtrip(rng):
    psi = random_pure(3, rng)
    back = state_from_json(state_to_json(psi))
    assert np.allclose(back.amplitudes, psi.amplitudes)
    rho = random_mixed(2, 2, rng)
    back = state_from_json(state_to_json(rho))
    assert np.allclose(back.matrix, rho.matrix)


def test_pauli_string():
    assert np.allclose(pauli_string("zi"), tensor(SZ, np.eye(2)))
