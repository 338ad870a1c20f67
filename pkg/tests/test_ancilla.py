from __future__ import annotations

import itertools
from math import sqrt

import numpy as np
import pytest

from entangled_histories.ancilla import (
    Register,
    ancilla_ket,
    coupling_unitary,
    expectation_via_ancilla,
    ghz_basis,
    implied_history,
    postselect_ancillas,
    run_protocol,
)
from entangled_histories.histories import chain_operator, ghz_history, projector, HistoryState
from entangled_histories.measurement import expectation

S = 1 / sqrt(2)


def basis_state(system_bit, ancillas):
    v = np.zeros(16, dtype=complex)
    v[8 * system_bit + int(ancillas, 2)] = 1
    return v


@pytest.fixture(scope="module")
def transcript():
    return run_protocol()


def test_snapshots_match_coupling_sequence(transcript):
    expected = [
        S * (basis_state(0, "000") + basis_state(1, "000")),
        S * (basis_state(0, "000") + basis_state(1, "100")),
        S * (basis_state(0, "000") + basis_state(1, "110")),
        S * (basis_state(0, "000") + basis_state(1, "111")),
    ]
    assert len(transcript.states) == 4
    for reg, want in zip(transcript.states, expected):
        np.testing.assert_allclose(reg.amplitudes, want, atol=1e-12)
        assert reg.norm == pytest.approx(1, abs=1e-12)
    assert transcript.coupling_bases == ("Z", "Z", "Z")


def test_control_off_never_fires():
    t = run_protocol([1, 0])
    for reg in t.states:
        np.testing.assert_allclose(reg.amplitudes, basis_state(0, "000"), atol=1e-12)


@pytest.mark.parametrize("basis", ["X", "Y", "Z"])
@pytest.mark.parametrize("ancilla", [0, 1, 2])
def test_coupling_unitary(basis, ancilla):
    u = coupling_unitary(basis, ancilla)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(16), atol=1e-12)
    np.testing.assert_allclose(u @ u, np.eye(16), atol=1e-12)


def test_rotated_couplings_stay_normalized():
    rng = np.random.default_rng(0)
    for bases in itertools.product("XYZ", repeat=3):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        t = run_protocol(v / np.linalg.norm(v), bases)
        for reg in t.states:
            assert reg.norm == pytest.approx(1, abs=1e-12)


def test_register_table_labels(transcript):
    rows = dict(transcript.final.table())
    assert set(rows) == {"|0 000>", "|1 111>"}
    assert rows["|1 111>"] == pytest.approx(S)


def test_register_validation():
    with pytest.raises(ValueError):
        Register(np.ones(16))
    with pytest.raises(ValueError):
        Register(np.ones(8) / sqrt(8))
    with pytest.raises(ValueError):
        run_protocol(coupling_bases=("Z", "Z"))


# -- post-selection -----------------------------------------------------------

def test_postselect_all_up(transcript):
    prob, system = postselect_ancillas(transcript.final, ancilla_ket("000"))
    assert prob == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(system, [1, 0], atol=1e-12)


def test_postselect_zero_probability(transcript):
    prob, system = postselect_ancillas(transcript.final, ancilla_ket("010"))
    assert prob == pytest.approx(0, abs=1e-12)
    assert system is None


def test_postselect_ghz_minus(transcript):
    # (|000> - |111>)/sqrt2 overlaps both terms of the final register with
    # amplitude 1/2 each, so the projected register has squared norm 1/2
    prob, system = postselect_ancillas(transcript.final, ancilla_ket("ghz-"))
    assert prob == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(system, [S, -S], atol=1e-12)


def test_ghz_basis_sector(transcript):
    probs = {k: postselect_ancillas(transcript.final, v)[0] for k, v in ghz_basis().items()}
    assert probs["000+"] == pytest.approx(0.5, abs=1e-12)
    assert probs["000-"] == pytest.approx(0.5, abs=1e-12)
    for k in set(probs) - {"000+", "000-"}:
        assert probs[k] == pytest.approx(0, abs=1e-12)
    assert sum(probs.values()) == pytest.approx(1, abs=1e-10)


def test_completeness_random_bases(transcript):
    rng = np.random.default_rng(1)
    b = np.stack(list(ghz_basis().values()))
    np.testing.assert_allclose(b @ b.conj().T, np.eye(8), atol=1e-12)
    for _ in range(20):
        m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        q, _ = np.linalg.qr(m)
        total = sum(postselect_ancillas(transcript.final, q[:, i])[0] for i in range(8))
        assert total == pytest.approx(1, abs=1e-10)


def test_postselect_validation(transcript):
    with pytest.raises(ValueError):
        postselect_ancillas(transcript.final, np.ones(8))
    with pytest.raises(ValueError):
        postselect_ancillas(transcript.final, np.ones(4) / 2)
    with pytest.raises(ValueError):
        ancilla_ket("0101")


# -- implied histories and the oracle -----------------------------------------

def test_implied_histories():
    zp, zm = projector("z+"), projector("z-")
    np.testing.assert_allclose(chain_operator(implied_history("ghz-")), chain_operator(ghz_history()))
    up = HistoryState.product(zp, zp, zp)
    np.testing.assert_allclose(chain_operator(implied_history("000")), chain_operator(up))
    np.testing.assert_allclose(chain_operator(implied_history("111")), zm.matrix)
    np.testing.assert_allclose(chain_operator(implied_history("ghz+")), S * np.eye(2), atol=1e-15)
    assert [b.amplitude for b in implied_history("ghz-").branches] == [S, -S]
    with pytest.raises(ValueError):
        implied_history("010")


@pytest.mark.parametrize("word", ["".join(w) for w in itertools.product("XY", repeat=3)])
def test_oracle_matches_measurement(word):
    assert expectation_via_ancilla(word) == pytest.approx(expectation(ghz_history(), word), abs=1e-10)


@pytest.mark.parametrize("word, value", [("XXX", -1), ("XYY", 1), ("YXY", 1)])
def test_oracle_examples(word, value):
    assert expectation_via_ancilla(word) == pytest.approx(value, abs=1e-12)


def test_oracle_rejects_bad_words():
    with pytest.raises(ValueError):
        expectation_via_ancilla("XY")


def test_joint_probability_with_system_outcome(transcript):
    # ancillas in GHZ-minus and the system found in z+ (or z-): 1/4 each
    final = transcript.final.amplitudes.reshape(2, 8)
    for s in (0, 1):
        amp = np.vdot(ancilla_ket("ghz-"), final[s])
        assert abs(amp) ** 2 == pytest.approx(0.25, abs=1e-12)
