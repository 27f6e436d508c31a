import math

import numpy as np
import pytest
from hypothesis import given, strategies as hs

from conftest import random_hermitian, random_mixed, random_pure
from macroscopicity.core import DensityOperator, StateVector, pauli_string
from macroscopicity.dynamics import (Povm, QuantumChannel, bures_report, classical_fisher,
                                     coherence_decay, coherence_decay_dense, dephasing_channel,
                                     encoded_family, evolve, fit_decay_rate, fleming_report,
                                     phase_flip, projective_povm, survival_probability,
                                     write_rows, decay_sweep)
from macroscopicity.fisher import qfi_any
from macroscopicity.observables import collective_pauli
from macroscopicity.states import basis_state, dicke, ghz

SX = np.array([[0, 1], [1, 0]], complex)


def test_evolve_examples(rng):
    zero = basis_state("0")
    assert np.allclose(evolve(zero, SX, 0.0).amplitudes, zero.amplitudes)
    out = evolve(zero, SX, math.pi / 2).amplitudes
    assert np.allclose(out, [0, -1j])
    psi = random_pure(3, rng)
    h = collective_pauli(3, rng.standard_normal(3))
    for _ in range(1000):
        psi = evolve(psi, h, 0.01)
    assert np.linalg.norm(psi.amplitudes) == pytest.approx(1, abs=1e-10)


def test_evolve_local_matches_dense(rng):
    rho = random_mixed(3, 2, rng)
    h = collective_pauli(3, "y")
    a = evolve(rho, h, 0.7).matrix
    b = evolve(rho, h.to_matrix(), 0.7).matrix
    assert np.allclose(a, b, atol=1e-12)


def test_fleming_saturates_on_ghz():
    n = 4
    rep = fleming_report(ghz(n), collective_pauli(n, "z"), np.linspace(0, 1.0, 40))
    assert rep.passed and rep.skipped > 0
    for t, s, b in rep.rows:
        assert s == pytest.approx(math.cos(n * t) ** 2, abs=1e-10)
        assert b == pytest.approx(math.cos(n * t) ** 2, abs=1e-10)


def test_fleming_eigenstate():
    rep = fleming_report(dicke(4, 1), collective_pauli(4, "z"), np.linspace(0, 3, 7))
    assert rep.passed
    assert all(s == pytest.approx(1) for _, s, _ in rep.rows)


@given(hs.integers(0, 2 ** 31 - 1))
def test_fleming_random(seed):
    rng = np.random.default_rng(seed)
    state = random_pure(4, rng) if seed % 2 else random_mixed(3, 2, rng)
    n = state.num_qubits
    h = collective_pauli(n, rng.standard_normal(3))
    assert fleming_report(state, h, np.linspace(0, 2, 30)).passed


def test_channel_validation_and_properties(rng):
    with pytest.raises(ValueError):
        QuantumChannel((np.eye(2), np.eye(2)))
    ch = dephasing_channel(3, 0.5, 1.0)
    rho = random_mixed(3, 3, rng)
    out = ch.apply(rho)
    assert np.trace(out.matrix).real == pytest.approx(1)
    assert np.linalg.eigvalsh(out.matrix)[0] >= -1e-9
    # qubit-wise factors commute
    pf = phase_flip(0.2)
    a = pf.apply(pf.apply(rho, [1]), [2]).matrix
    b = pf.apply(pf.apply(rho, [2]), [1]).matrix
    assert np.allclose(a, b, atol=1e-14)
    full = QuantumChannel(ch.kraus_operators)
    assert np.allclose(full.apply(rho).matrix, out.matrix, atol=1e-12)


def test_coherence_decay():
    assert coherence_decay(0.3, 1.0, 0.0, 6) == pytest.approx(1)
    assert coherence_decay(0.3, 1.0, 0.07, 4) == pytest.approx(coherence_decay_dense(0.3, 1.0, 0.07, 4))
    ts = np.linspace(0, 0.1, 11)
    rate = fit_decay_rate(ts, [coherence_decay(0.2, 1.0, t, 8) for t in ts])
    assert rate == pytest.approx(0.2 ** 2 * 8, rel=0.15)
    rate = fit_decay_rate(ts, [coherence_decay(math.pi / 2, 1.0, t, 8) for t in ts])
    assert rate == pytest.approx(8, rel=0.1)


def test_classical_fisher_ghz_parity():
    n = 4
    fam = encoded_family(ghz(n), collective_pauli(n, "z").to_matrix() / 2)
    parity = projective_povm(pauli_string("x" * n))
    assert classical_fisher(fam, parity, 0.2) == pytest.approx(n ** 2, rel=1e-6)
    trivial = Povm((np.eye(2 ** n) / 2, np.eye(2 ** n) / 2))
    assert classical_fisher(fam, trivial, 0.2) == pytest.approx(0, abs=1e-8)


@given(hs.integers(0, 2 ** 31 - 1))
def test_classical_below_quantum(seed):
    rng = np.random.default_rng(seed)
    rho = random_mixed(2, 1 + seed % 3, rng)
    h = collective_pauli(2, rng.standard_normal(3))
    fam = encoded_family(rho, h)
    povm = projective_povm(random_hermitian(4, rng))
    assert classical_fisher(fam, povm, 0.4) <= qfi_any(fam(0.4), h) + 1e-4


def test_povm_validation():
    with pytest.raises(ValueError):
        Povm((np.eye(2),  np.eye(2)))
    with pytest.raises(ValueError):
        Povm((np.diag([2.0, 0]), np.diag([-1.0, 1])))


def test_bures_examples(rng):
    mixed = DensityOperator(np.eye(4) / 4, 2)
    rep = bures_report(mixed, collective_pauli(2, "x"))
    assert rep.passed and rep.predicted == 0
    rep = bures_report(ghz(4), collective_pauli(4, "z"))
    assert rep.predicted == pytest.approx(4)
    assert rep.passed
    for _ in range(3):
        rep = bures_report(random_mixed(3, 3, rng), collective_pauli(3, rng.standard_normal(3)))
        assert rep.passed, rep


def test_survival_mixed_uses_range_projector(rng):
    rho = random_mixed(2, 4, rng)  # full rank: projector is the identity
    assert survival_probability(rho, collective_pauli(2, "x"), 0.8) == pytest.approx(1)


def test_sweep_csv(tmp_path):
    rows = decay_sweep(0.2, 1.0, [0.0, 0.05], 4)
    path = tmp_path / "decay.csv"
    write_rows(path, rows)
    text = path.read_text().splitlines()
    assert text[0] == "t,value,bound"
    assert text[1] == "0,1,1"
