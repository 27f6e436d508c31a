import numpy as np
import pytest
from hypothesis import given, strategies as hs

from conftest import random_pure
from macroscopicity.core import SX, SZ
from macroscopicity.observables import (BlochParameterization, Grouping, LocalOperator, assemble,
                                        collective_pauli, default_groupings, local_mean_variance,
                                        variance)
from macroscopicity.states import basis_state, dicke, ghz


def test_grouping_parse_and_validate():
    assert Grouping.parse("1|2|3").groups == ((1,), (2,), (3,))
    assert Grouping.parse("1-3|4-6").groups == ((1, 2, 3), (4, 5, 6))
    assert Grouping.parse("2-4|5-7|8,9,1").groups[-1] == (8, 9, 1)
    with pytest.raises(ValueError):
        Grouping(((1, 2), (2, 3)))
    with pytest.raises(ValueError):
        Grouping(((1, 2, 3),), max_group_size=2)


def test_default_groupings():
    g6 = default_groupings(6, 1)
    assert len(g6) == 1 and g6[0].n == 6
    g9 = [str(g) for g in default_groupings(9, 3)]
    assert "1-3|4-6|7-9" in g9
    assert any(s.startswith("2-4|5-7|8") for s in g9)


def test_assemble_examples():
    op = LocalOperator(Grouping(((1,),)), (SZ,), 2)
    assert np.allclose(assemble(op).matrix, np.kron(SZ, np.eye(2)))
    n = 5
    z = collective_pauli(n, "z")
    mean, var = local_mean_variance(ghz(n), z)
    assert mean == pytest.approx(0) and var == pytest.approx(n ** 2)
    assert np.max(np.abs(np.linalg.eigvalsh(z.to_matrix()))) == pytest.approx(n)


def test_collective_pauli_examples():
    assert variance(ghz(4), collective_pauli(4, "z")) == pytest.approx(16)
    assert variance(basis_state("00000"), collective_pauli(5, "x")) == pytest.approx(5)
    assert variance(dicke(6, 2), collective_pauli(6, "z")) == pytest.approx(0, abs=1e-12)
    with pytest.raises(ValueError):
        collective_pauli(3, (0, 0, 0))


def test_unit_norm_enforced():
    with pytest.raises(ValueError):
        LocalOperator(Grouping(((1,),)), (0.5 * SZ,), 1)


def test_bloch_parameterization():
    b = BlochParameterization(Grouping.singletons(2), ((1.0, 0.0, 0.0), (0.0, 0.0, 1.0)))
    op = b.to_local_operator(2)
    assert np.allclose(op.to_matrix(), np.kron(SX, np.eye(2)) + np.kron(np.eye(2), SZ))
    with pytest.raises(ValueError):
        BlochParameterization(Grouping.singletons(1), ((1.0, 1.0, 0.0),))


@given(hs.integers(0, 2 ** 31 - 1), hs.floats(-3, 3))
def test_identity_shift_leaves_variance(seed, c):
    rng = np.random.default_rng(seed)
    psi = random_pure(3, rng)
    a = collective_pauli(3, rng.standard_normal(3)).to_matrix()
    v = lambda m: np.vdot(psi.amplitudes, m @ m @ psi.amplitudes).real - np.vdot(
        psi.amplitudes, m @ psi.amplitudes).real ** 2
    assert v(a) == pytest.approx(v(a - c * np.eye(8)), abs=1e-9)


@given(hs.integers(0, 2 ** 31 - 1))
def test_expectation_bounded_by_n(seed):
    rng = np.random.default_rng(seed)
    psi = random_pure(4, rng)
    g = Grouping(((1, 2), (3,), (4,)))
    terms = []
    for k in (2, 1, 1):
        h = rng.standard_normal((2 ** k, 2 ** k)) + 1j * rng.standard_normal((2 ** k, 2 ** k))
        h = h + h.conj().T
        terms.append(h / np.max(np.abs(np.linalg.eigvalsh(h))))
    op = LocalOperator(g, tuple(terms), 4)
    assert abs(local_mean_variance(psi, op)[0]) <= g.n + 1e-10


def test_assemble_linear_single_group():
    g = Grouping(((2,),))
    a = LocalOperator(g, (SX,), 2)
    b = LocalOperator(g, (-SX,), 2)
    assert np.allclose(assemble(b).matrix, -assemble(a).matrix)
