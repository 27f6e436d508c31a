import math

import numpy as np
import pytest
from hypothesis import given, strategies as hs

from macroscopicity.core import pauli_string
from macroscopicity.fisher import neff_f, qfi
from macroscopicity.observables import collective_pauli, variance
from macroscopicity.states import (BELL_LOGICAL, StateSpec, basis_state, cloned_superposition,
                                   cluster_1d, cluster_ghz, dicke, domain_wall, generalized_ghz,
                                   ghz, incoherent_ghz_mixture, logical_ghz, quantum_classical,
                                   singlet_pairs, w_state)


def stabilizer(n, i):
    """sigma_z^(i-1) sigma_x^(i) sigma_z^(i+1), cyclic, 1-based."""
    labels = ["i"] * n
    labels[(i - 2) % n] = "z"
    labels[i - 1] = "x"
    labels[i % n] = "z"
    return pauli_string("".join(labels))


def test_ghz_examples():
    assert np.allclose(ghz(1).amplitudes, [1 / math.sqrt(2)] * 2)
    a = ghz(3).amplitudes
    assert a[0] == pytest.approx(1 / math.sqrt(2)) and a[7] == pytest.approx(1 / math.sqrt(2))
    assert np.count_nonzero(np.abs(a) > 1e-12) == 2


def test_generalized_ghz():
    assert np.allclose(generalized_ghz(5, math.pi / 2).amplitudes, ghz(5).amplitudes, atol=1e-12)
    assert np.allclose(generalized_ghz(3, 0.0).amplitudes, basis_state("000").amplitudes)
    assert np.linalg.norm(generalized_ghz(4, math.pi / 6).amplitudes) == pytest.approx(1, abs=1e-12)
    with pytest.raises(ValueError):
        generalized_ghz(4, 2.0)


@pytest.mark.parametrize("n", [3, 5, 6])
def test_cluster_stabilizers(n):
    plus, minus = cluster_1d(n, +1), cluster_1d(n, -1)
    for i in range(1, n + 1):
        s = stabilizer(n, i)
        assert np.allclose(s @ plus.amplitudes, plus.amplitudes, atol=1e-10)
        assert np.allclose(s @ minus.amplitudes, -minus.amplitudes, atol=1e-10)
    assert abs(np.vdot(plus.amplitudes, minus.amplitudes)) < 1e-12
    with pytest.raises(ValueError):
        cluster_1d(2)


def test_cluster_ghz_covariance():
    n = 9
    psi = cluster_ghz(n).amplitudes
    s2, s5 = stabilizer(n, 2), stabilizer(n, 5)
    e = lambda m: np.vdot(psi, m @ psi).real
    # stabilizers centred on different triples are fully correlated
    assert e(s2 @ s5) - e(s2) * e(s5) == pytest.approx(1, abs=1e-10)
    with pytest.raises(ValueError):
        cluster_ghz(8)


def test_domain_wall():
    assert np.allclose(domain_wall(1).amplitudes, ghz(1).amplitudes)
    n = 5
    a = domain_wall(n).amplitudes
    walls = [int("1" * k + "0" * (n - k), 2) if k < n else 2 ** n - 1 for k in range(n + 1)]
    walls[0] = 0
    expect = np.zeros(2 ** n)
    expect[walls] = 1 / math.sqrt(n + 1)
    assert np.allclose(a, expect)


def test_dicke():
    assert np.allclose(dicke(4, 0).amplitudes, basis_state("0000").amplitudes)
    w = (basis_state("100").amplitudes + basis_state("010").amplitudes
         + basis_state("001").amplitudes) / math.sqrt(3)
    assert np.allclose(dicke(3, 1).amplitudes, w)
    assert np.allclose(w_state(3).amplitudes, w)
    n = 6
    z = collective_pauli(n, "z").to_matrix()
    for x in range(n + 1):
        d = dicke(n, x).amplitudes
        assert np.vdot(d, z @ d).real == pytest.approx(n - 2 * x)
        for y in range(x):
            assert abs(np.vdot(dicke(n, y).amplitudes, d)) < 1e-12
    with pytest.raises(ValueError):
        dicke(3, 4)


def test_cloned_superposition():
    psi, a, b = cloned_superposition(9)
    assert abs(np.vdot(a.amplitudes, b.amplitudes)) < 1e-12
    assert abs(abs(np.vdot(psi.amplitudes, dicke(9, 4).amplitudes)) - 1) < 1e-10
    assert variance(psi, collective_pauli(9, "x")) >= 81 / 8
    with pytest.raises(ValueError):
        cloned_superposition(8)


def test_logical_ghz():
    zero, one = basis_state("0"), basis_state("1")
    assert np.allclose(logical_ghz(4, zero, one).amplitudes, ghz(4).amplitudes)
    rep = logical_ghz(3, basis_state("00"), basis_state("11")).amplitudes
    assert np.allclose(rep, ghz(6).amplitudes)
    with pytest.raises(ValueError):
        logical_ghz(2, zero, ghz(1))
    bell = logical_ghz(3, *BELL_LOGICAL)
    res = neff_f(bell, max_group_size=2)
    assert res.neff == pytest.approx(3, abs=1e-6)


def test_quantum_classical():
    psi, a, b = quantum_classical(6)
    assert abs(np.vdot(a.amplitudes, b.amplitudes)) < 1e-12
    zz = pauli_string("zziiii")
    assert np.vdot(a.amplitudes, zz @ a.amplitudes).real == pytest.approx(1)
    assert np.vdot(b.amplitudes, zz @ b.amplitudes).real == pytest.approx(-1)
    with pytest.raises(ValueError):
        quantum_classical(6, c_coeffs=np.ones(8))


def test_singlets_and_mixture():
    assert neff_f(singlet_pairs(8)).neff <= 2 + 1e-8
    rho = incoherent_ghz_mixture(5)
    z = collective_pauli(5, "z")
    assert variance(rho, z) == pytest.approx(25)
    assert qfi(rho, z) == pytest.approx(0, abs=1e-12)
    assert np.trace(rho.matrix) == pytest.approx(1)
    assert np.linalg.matrix_rank(rho.matrix) == 2
    with pytest.raises(ValueError):
        singlet_pairs(5)


@given(hs.sampled_from(["ghz", "w", "domain_wall", "product_plus", "cluster"]),
       hs.integers(3, 8))
def test_unit_norm_and_phase(family, n):
    from macroscopicity.library import build_state
    a = build_state(StateSpec(family, n)).amplitudes
    assert np.linalg.norm(a) == pytest.approx(1, abs=1e-10)
    first = a[np.flatnonzero(np.abs(a) > 1e-12)[0]]
    assert abs(first.imag) < 1e-12 and first.real > 0


def test_spec_parsing():
    s = StateSpec.parse("gen_ghz:8:eps=0.5236")
    assert (s.family, s.num_qubits, s.params) == ("gen_ghz", 8, {"eps": 0.5236})
    assert str(StateSpec.parse("dicke:9:x=4")) == "dicke:9:x=4"
    assert StateSpec.parse("gen_ghz:eps=0.3").num_qubits is None
    with pytest.raises(ValueError):
        StateSpec.parse("nope:3")
