"""
Multi-time Pauli correlators and the GHZ functional.

Correlators on a history state are computed from multi-time outcome
amplitudes. For a word of axes (one per time) and a sign tuple s, pick the
eigenstate |a_t> of axis t with eigenvalue s_t and set

    amp(s) = sum_h alpha_h prod_t <a_t | psi_t^h>

where |psi_t^h> is the unit vector of the rank-1 projector at time t in
branch h. Outcome probabilities are |amp(s)|^2 / Z with
Z = sum_s |amp(s)|^2, and a correlator is the signed average of prod_t s_t.

Z does not depend on the word, because amp(s) are the components of one
fixed vector (sum_h alpha_h psi_1^h (x) ... (x) psi_n^h) in a product basis.
It differs from the chain-operator norm: the W state has Z = 1 but chain
norm 0.

Each |psi_t^h> is read off its projector with the phase fixed so that the
first nonzero component is real and positive.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import sqrt

import numpy as np

from .histories import (
    KETS,
    Branch,
    HistoryError,
    HistoryState,
    temporal_bell,
)

AXES = ("X", "Y", "Z")
GHZ_WORDS = ("XXX", "YYX", "YXY", "XYY")

PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class UnsupportedStateError(HistoryError):
    pass


class UnsupportedEvolutionError(HistoryError):
    pass


class DegenerateStateError(HistoryError):
    pass


class DecompositionError(HistoryError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3g})")
        self.residual = residual


@dataclass(frozen=True)
class AxisWord:
    """Per-time measurement axes, earliest time first (``"XYY"``: X at t1)."""

    axes: tuple[str, ...]

    def __post_init__(self):
        axes = tuple(a.upper() for a in self.axes)
        bad = [a for a in axes if a not in AXES]
        if bad or not axes:
            raise ValueError(f"axis word must be a nonempty string over X, Y, Z: {self.axes!r}")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def parse(cls, text: str | "AxisWord") -> "AxisWord":
        if isinstance(text, AxisWord):
            return text
        return cls(tuple(text.strip()))

    def __str__(self) -> str:
        return "".join(self.axes)

    def __len__(self) -> int:
        return len(self.axes)


@dataclass(frozen=True)
class OutcomeTable:
    word: AxisWord
    amplitudes: dict[tuple[int, ...], complex]
    probabilities: dict[tuple[int, ...], float]
    norm: float  # Z

    def expectation(self) -> float:
        return float(sum(np.prod(s) * p for s, p in self.probabilities.items()))


@dataclass(frozen=True)
class BellCoefficients:
    """Components along |phi+), |phi-), |psi+), |psi-)."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        n = abs(self.a) ** 2 + abs(self.b) ** 2 + abs(self.c) ** 2 + abs(self.d) ** 2
        if abs(n - 1) > 1e-10:
            raise ValueError(f"Bell coefficients are not normalized (norm^2 = {n:.12g})")

    @property
    def phase_ab(self) -> float:
        return float(np.angle(np.conj(self.a) * self.b))

    @property
    def phase_cd(self) -> float:
        return float(np.angle(np.conj(self.c) * self.d))

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d], dtype=complex)

    def history(self):
        """The two-time history a|phi+) + b|phi-) + c|psi+) + d|psi-)."""
        coeffs = (self.a, self.b, self.c, self.d)
        total = None
        for coeff, kind in zip(coeffs, ("phi+", "phi-", "psi+", "psi-")):
            term = temporal_bell(kind) * coeff
            total = term if total is None else total + term
        return total


def axis_eigenbasis(axis: str) -> tuple[np.ndarray, np.ndarray]:
    """(+1, -1) eigenvectors, with |y+> = (|z+> + i|z->)/sqrt2."""
    axis = axis.upper()
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}")
    k = axis.lower()
    return KETS[k + "+"].copy(), KETS[k + "-"].copy()


def _bra_matrix(axis: str) -> np.ndarray:
    # row 0 = <a+|, row 1 = <a-|
    plus, minus = axis_eigenbasis(axis)
    return np.array([plus.conj(), minus.conj()])


def branch_ket(p) -> np.ndarray:
    """Unit vector of a rank-1 projector, first nonzero component real positive."""
    m = p.matrix
    j = int(np.argmax(np.abs(np.diag(m))))
    v = m[:, j] / sqrt(m[j, j].real)
    nz = np.flatnonzero(np.abs(v) > 1e-12)[0]
    return v * np.exp(-1j * np.angle(v[nz]))


def history_vector(state: HistoryState) -> np.ndarray:
    """sum_h alpha_h psi_1^h (x) ... (x) psi_n^h, shape (2,)*n_times, axis 0 = t1."""
    if not state.trivial_evolution:
        raise UnsupportedEvolutionError("multi-time amplitudes need identity bridging")
    n = state.n_times
    psi = np.zeros((2,) * n, dtype=complex)
    for b in state.branches:
        if any(e.rank != 1 for e in b.events):
            raise UnsupportedStateError("multi-time amplitudes need rank-1 projectors in every branch")
        term = np.array(b.amplitude, dtype=complex)
        for e in b.events:
            term = np.multiply.outer(term, branch_ket(e))
        psi += term
    return psi


def multi_time_amplitude(state: HistoryState, outcomes) -> complex:
    outcomes = [np.asarray(o, dtype=complex) for o in outcomes]
    if len(outcomes) != state.n_times:
        raise ValueError(f"need {state.n_times} outcome states, got {len(outcomes)}")
    amp = history_vector(state)
    for o in outcomes:
        amp = np.tensordot(o.conj(), amp, axes=([0], [0]))
    return complex(amp)


def _word_amplitudes(psi: np.ndarray, word: AxisWord) -> np.ndarray:
    """Amplitudes indexed [..., i_1, ..., i_n] with i_t = 0 for s_t = +1.

    ``psi`` may carry leading batch axes."""
    n = len(word)
    if psi.shape[-n:] != (2,) * n:
        raise ValueError(f"word {word} does not match a {psi.ndim}-axis history vector")
    amp = psi
    for t, axis in enumerate(word.axes):
        ax = amp.ndim - n + t
        amp = np.moveaxis(np.tensordot(amp, _bra_matrix(axis), axes=([ax], [1])), -1, ax)
    return amp


def _parity(n: int) -> np.ndarray:
    signs = np.array([1.0, -1.0])
    out = np.ones((2,) * n)
    for t in range(n):
        shape = [1] * n
        shape[t] = 2
        out = out * signs.reshape(shape)
    return out


def expectation_from_vector(psi: np.ndarray, word) -> np.ndarray:
    """Signed-parity correlator of a history vector; batch axes allowed."""
    word = AxisWord.parse(word)
    n = len(word)
    probs = np.abs(_word_amplitudes(np.asarray(psi, dtype=complex), word)) ** 2
    axes = tuple(range(probs.ndim - n, probs.ndim))
    z = probs.sum(axis=axes)
    if np.any(z <= 1e-24):
        raise DegenerateStateError("history has zero measurement norm")
    return (probs * _parity(n)).sum(axis=axes) / z


def outcome_table(state: HistoryState, word) -> OutcomeTable:
    word = AxisWord.parse(word)
    if len(word) != state.n_times:
        raise ValueError(f"word {word} has {len(word)} axes, state has {state.n_times} times")
    amps = _word_amplitudes(history_vector(state), word)
    z = float(np.sum(np.abs(amps) ** 2))
    if z <= 1e-24:
        raise DegenerateStateError("history has zero measurement norm")
    amplitudes, probabilities = {}, {}
    for idx in itertools.product((0, 1), repeat=len(word)):
        signs = tuple(1 - 2 * i for i in idx)
        amplitudes[signs] = complex(amps[idx])
        probabilities[signs] = float(abs(amps[idx]) ** 2 / z)
    return OutcomeTable(word, amplitudes, probabilities, z)


def measurement_norm(state: HistoryState) -> float:
    psi = history_vector(state)
    return float(np.vdot(psi, psi).real)


def expectation(state: HistoryState, word) -> float:
    word = AxisWord.parse(word)
    if len(word) != state.n_times:
        raise ValueError(f"word {word} has {len(word)} axes, state has {state.n_times} times")
    return float(expectation_from_vector(history_vector(state), word))


def ghz_correlators(state: HistoryState) -> dict[str, float]:
    if state.n_times != 3:
        raise ValueError("the GHZ functional is defined on 3-time histories")
    psi = history_vector(state)
    return {w: float(expectation_from_vector(psi, w)) for w in GHZ_WORDS}


def ghz_functional_from_vector(psi: np.ndarray) -> np.ndarray:
    """G = -<XXX><YYX><YXY><XYY> for history vectors of shape (..., 2, 2, 2)."""
    out = -np.ones(np.shape(psi)[:-3])
    for w in GHZ_WORDS:
        out = out * expectation_from_vector(psi, w)
    return out


def ghz_functional(state: HistoryState) -> float:
    c = ghz_correlators(state)
    return -c["XXX"] * c["YYX"] * c["YXY"] * c["XYY"]


# -- temporal Bell decomposition and closed forms ---------------------------

def _bell_vectors() -> np.ndarray:
    return np.array([history_vector(temporal_bell(k)).reshape(4) for k in ("phi+", "phi-", "psi+", "psi-")])


def bell_decompose(two_time: HistoryState) -> BellCoefficients:
    """Temporal-Bell coefficients of a two-time history, normalized to unit Z."""
    if two_time.n_times != 2:
        raise HistoryError(f"expected a 2-time state, got {two_time.n_times} times")
    psi = history_vector(two_time).reshape(4)
    norm = np.linalg.norm(psi)
    if norm < 1e-12:
        raise DecompositionError("history vector vanishes", float(norm))
    psi = psi / norm
    basis = _bell_vectors()
    coeffs = basis.conj() @ psi
    residual = float(np.linalg.norm(coeffs @ basis - psi))
    if residual > 1e-10:
        raise DecompositionError("state is outside the temporal Bell span", residual)
    return BellCoefficients(*(complex(c) for c in coeffs))


def g_two_time_closed_form(coeffs: BellCoefficients, theta: float, phi: float) -> float:
    mags = [abs(x) for x in (coeffs.a, coeffs.b, coeffs.c, coeffs.d)]
    return g_two_time_params(mags, coeffs.phase_ab, coeffs.phase_cd, theta, phi)


def g_two_time_params(mags, phase_ab, phase_cd, theta, phi) -> float:
    """Closed form in terms of |a|, |b|, |c|, |d| and the two relative phases."""
    a, b, c, d = mags
    pop = (c * c - d * d) ** 2 - (a * a - b * b) ** 2
    coh = (a * b * np.sin(phase_ab)) ** 2 - (c * d * np.sin(phase_cd)) ** 2
    return float(-np.sin(2 * theta) ** 4 * np.sin(2 * phi) ** 2 * pop * coh)


def g_separable_closed_form(theta1, phi1, theta2, phi2, theta3, phi3) -> float:
    s = np.sin
    return float(
        -s(2 * theta1) ** 4 * s(2 * theta2) ** 4 * s(2 * theta3) ** 4
        * s(2 * phi1) ** 2 * s(2 * phi2) ** 2 * s(2 * phi3) ** 2 / 64
    )


def move_tail(state: HistoryState, slot: int) -> HistoryState:
    """Move the latest event of every branch to position ``slot``."""
    branches = []
    for b in state.branches:
        events = list(b.events)
        tail = events.pop()
        events.insert(slot, tail)
        branches.append(Branch(b.amplitude, events))
    return HistoryState(tuple(branches), state.n_times, state.bridging)

