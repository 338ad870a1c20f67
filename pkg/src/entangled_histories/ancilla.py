"""
State-vector model of the ancilla construction of the temporal GHZ history.

The register is system (x) ancilla1 (x) ancilla2 (x) ancilla3, stored as a
16-vector with index ``8*s + 4*a1 + 2*a2 + a3``; ket labels read
``|s a1 a2 a3>``. At time t the system controls a NOT on ancilla t. In
coupling basis b the gate fires when the system is in the -1 eigenstate
of b, so the Z-basis gate is the ordinary CNOT with |z-> = |1> as control.
Evolution between couplings is trivial.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import sqrt

import numpy as np

from .histories import KETS, HistoryState, ghz_history, projector
from .measurement import AxisWord, axis_eigenbasis

_S = 1 / sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


def ancilla_ket(label: str) -> np.ndarray:
    """8-vector for ``"000"``..``"111"``, ``"ghz+"`` or ``"ghz-"``."""
    if label in ("ghz+", "ghz-"):
        v = np.zeros(8, dtype=complex)
        v[0] = _S
        v[7] = _S if label == "ghz+" else -_S
        return v
    if len(label) == 3 and set(label) <= {"0", "1"}:
        v = np.zeros(8, dtype=complex)
        v[int(label, 2)] = 1
        return v
    raise ValueError(f"unsupported ancilla outcome {label!r}")


def ghz_basis() -> dict[str, np.ndarray]:
    """Orthonormal GHZ basis (|b> +- |~b>)/sqrt2 of the three ancillas."""
    out = {}
    for head in ("00", "01", "10", "11"):
        b = int("0" + head, 2)
        nb = 7 - b
        for sign, name in ((1, "+"), (-1, "-")):
            v = np.zeros(8, dtype=complex)
            v[b], v[nb] = _S, sign * _S
            out[f"0{head}{name}"] = v
    return out


@dataclass(frozen=True, eq=False)
class Register:
    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if v.shape != (16,):
            raise ValueError(f"register needs 16 amplitudes, got {v.shape}")
        if abs(np.vdot(v, v).real - 1) > 1e-12:
            raise ValueError("register is not normalized")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @classmethod
    def from_system(cls, system) -> "Register":
        anc = np.zeros(8, dtype=complex)
        anc[0] = 1
        return cls(np.kron(np.asarray(system, dtype=complex), anc))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def table(self, tol: float = 1e-12) -> list[tuple[str, complex]]:
        rows = []
        for i, z in enumerate(self.amplitudes):
            if abs(z) > tol:
                bits = format(i, "04b")
                rows.append((f"|{bits[0]} {bits[1:]}>", complex(z)))
        return rows


@dataclass(frozen=True)
class ProtocolTranscript:
    states: tuple[Register, ...]  # initial, after t1, after t2, after t3
    coupling_bases: tuple[str, ...]

    @property
    def final(self) -> Register:
        return self.states[-1]


def coupling_unitary(basis: str, ancilla: int) -> np.ndarray:
    """16x16 controlled-NOT from the system onto ancilla ``ancilla`` (0..2)."""
    plus, minus = axis_eigenbasis(basis)
    p_plus, p_minus = np.outer(plus, plus.conj()), np.outer(minus, minus.conj())
    ops_idle = [np.eye(2)] * 3
    ops_flip = list(ops_idle)
    ops_flip[ancilla] = _X

    def kron(*ms):
        out = np.eye(1)
        for m in ms:
            out = np.kron(out, m)
        return out

    return kron(p_plus, *ops_idle) + kron(p_minus, *ops_flip)


def run_protocol(system_init=None, coupling_bases=("Z", "Z", "Z")) -> ProtocolTranscript:
    system = KETS["x+"] if system_init is None else np.asarray(system_init, dtype=complex)
    bases = tuple(str(b).upper() for b in coupling_bases)
    if len(bases) != 3:
        raise ValueError("need one coupling basis per ancilla")
    reg = Register.from_system(system)
    states = [reg]
    for t, basis in enumerate(bases):
        reg = Register(coupling_unitary(basis, t) @ reg.amplitudes)
        states.append(reg)
    return ProtocolTranscript(tuple(states), bases)


def postselect_ancillas(reg: Register, ancilla_state) -> tuple[float, np.ndarray | None]:
    """Probability of finding the ancillas in ``ancilla_state`` and the
    normalized conditional system state (None when the probability is ~0)."""
    anc = np.asarray(ancilla_state, dtype=complex).reshape(-1)
    if anc.shape != (8,):
        raise ValueError("ancilla state needs 8 amplitudes")
    if abs(np.vdot(anc, anc).real - 1) > 1e-12:
        raise ValueError("ancilla state is not normalized")
    system = reg.amplitudes.reshape(2, 8) @ anc.conj()
    prob = float(np.vdot(system, system).real)
    if prob <= 1e-12:
        return prob, None
    return prob, system / sqrt(prob)


def implied_history(outcome: str) -> HistoryState:
    """History the system is identified with after an ancilla outcome."""
    zp, zm = projector("z+"), projector("z-")
    up = HistoryState.product(zp, zp, zp)
    down = HistoryState.product(zm, zm, zm)
    if outcome == "000":
        return up
    if outcome == "111":
        return down
    if outcome == "ghz-":
        return ghz_history()
    if outcome == "ghz+":
        return (up + down) * _S
    raise ValueError(f"unsupported ancilla outcome {outcome!r}")


def expectation_via_ancilla(word) -> float:
    """Correlator of the GHZ history computed from the ancilla register.

    The ancillas are Z-coupled (which-history record), then read out in the
    word's eigenbasis, one ancilla per time. The system is post-selected on
    |x->, which attaches the relative minus sign between the all-z+ and
    all-z- records that the GHZ-minus identification carries. The signed
    parity of the readouts is averaged over the post-selected ensemble.
    """
    word = AxisWord.parse(word)
    if len(word) != 3:
        raise ValueError("need a 3-letter word")
    final = run_protocol(KETS["x+"], ("Z", "Z", "Z")).final.amplitudes.reshape(2, 2, 2, 2)
    marker = KETS["x-"]
    bases = [axis_eigenbasis(a) for a in word.axes]
    num = den = 0.0
    for signs in itertools.product((1, -1), repeat=3):
        kets = [bases[t][0 if s > 0 else 1] for t, s in enumerate(signs)]
        amp = np.einsum("s,a,b,c,sabc->", marker.conj(), *(k.conj() for k in kets), final)
        p = abs(amp) ** 2
        num += np.prod(signs) * p
        den += p
    return float(num / den)
