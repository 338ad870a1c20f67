"""
History states of a single qubit and their algebra.

A history state is a weighted sum of branches. Each branch is a time-ordered
list of projectors; index 0 is the earliest time t1. Successive events are
joined by bridging unitaries T(t_{j+1}, t_j), identity unless given.

The chain operator of a state is

    K = sum_h alpha_h P_n T(t_n, t_{n-1}) ... P_2 T(t_2, t_1) P_1

and the history inner product is (a|b) = Tr[K(a)^dagger K(b)].

States are immutable and never normalized implicitly; the W state, for
instance, has chain norm zero and is still a legal input elsewhere.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import sqrt

import numpy as np

TOL = 1e-12

_S = 1 / sqrt(2)

KETS = {
    "z+": np.array([1, 0], dtype=complex),
    "z-": np.array([0, 1], dtype=complex),
    "x+": np.array([_S, _S], dtype=complex),
    "x-": np.array([_S, -_S], dtype=complex),
    "y+": np.array([_S, 1j * _S], dtype=complex),
    "y-": np.array([_S, -1j * _S], dtype=complex),
}

BELL_KINDS = ("phi+", "phi-", "psi+", "psi-")


class HistoryError(ValueError):
    """Base class for malformed or incompatible history inputs."""


class DimensionMismatchError(HistoryError):
    pass


def pure_qubit(amplitudes) -> np.ndarray:
    """Validate and return a normalized 2-component state vector."""
    v = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if v.shape != (2,):
        raise HistoryError(f"a qubit state needs 2 amplitudes, got {v.shape}")
    if abs(np.vdot(v, v).real - 1) > TOL:
        raise HistoryError("qubit state is not normalized")
    return v


def is_unitary(m: np.ndarray, tol: float = TOL) -> bool:
    m = np.asarray(m, dtype=complex)
    return m.shape == (2, 2) and np.allclose(m.conj().T @ m, np.eye(2), atol=tol, rtol=0)


@dataclass(frozen=True, eq=False)
class Projector2:
    """An orthogonal projector on C^2 (rank 1 or 2)."""

    matrix: np.ndarray
    rank: int

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise HistoryError(f"projector must be 2x2, got {m.shape}")
        if not np.allclose(m, m.conj().T, atol=TOL, rtol=0):
            raise HistoryError("projector is not Hermitian")
        if not np.allclose(m @ m, m, atol=TOL, rtol=0):
            raise HistoryError("projector is not idempotent")
        if self.rank not in (1, 2) or abs(np.trace(m).real - self.rank) > TOL:
            raise HistoryError(f"trace {np.trace(m).real:.3g} does not match rank {self.rank}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_ket(cls, ket) -> "Projector2":
        v = np.asarray(ket, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()), 1)

    @classmethod
    def from_matrix(cls, matrix) -> "Projector2":
        m = np.asarray(matrix, dtype=complex)
        return cls(m, int(round(np.trace(m).real)))

    def label(self) -> str:
        for name, ket in KETS.items():
            if np.allclose(self.matrix, np.outer(ket, ket.conj()), atol=1e-9, rtol=0):
                return f"[{name}]"
        if self.rank == 2:
            return "1"
        # angles as in projector_from_angles
        m = self.matrix
        theta = np.arccos(np.sqrt(min(1.0, max(0.0, m[0, 0].real))))
        phi = float(np.angle(m[1, 0])) % (2 * np.pi) if abs(m[1, 0]) > 1e-12 else 0.0
        return f"[θ={theta:.4f},φ={phi:.4f}]"


IDENTITY = Projector2(np.eye(2), 2)


def projector(name: str) -> Projector2:
    """Rank-1 projector onto one of the six axis eigenstates, e.g. ``"z+"``."""
    try:
        return Projector2.from_ket(KETS[name])
    except KeyError:
        raise HistoryError(f"unknown axis state {name!r}") from None


def projector_from_angles(theta: float, phi: float) -> Projector2:
    """Projector onto cos(theta)|z+> + sin(theta) e^{i phi}|z->."""
    c, s = np.cos(theta), np.sin(theta)
    m = np.array(
        [[c * c, c * s * np.exp(-1j * phi)], [c * s * np.exp(1j * phi), s * s]],
        dtype=complex,
    )
    return Projector2(m, 1)


@dataclass(frozen=True, eq=False)
class Branch:
    amplitude: complex
    events: tuple[Projector2, ...]

    def __post_init__(self):
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        object.__setattr__(self, "events", tuple(self.events))
        if not self.events:
            raise HistoryError("a branch needs at least one event")


@dataclass(frozen=True, eq=False)
class HistoryState:
    branches: tuple[Branch, ...]
    n_times: int
    bridging: tuple[np.ndarray, ...] = field(default=())

    def __post_init__(self):
        branches = tuple(self.branches)
        if not branches:
            raise HistoryError("a history state needs at least one branch")
        if self.n_times < 1:
            raise HistoryError("n_times must be positive")
        for b in branches:
            if len(b.events) != self.n_times:
                raise HistoryError(
                    f"branch has {len(b.events)} events, expected {self.n_times}"
                )
        bridging = tuple(np.array(t, dtype=complex) for t in self.bridging)
        if not bridging:
            bridging = tuple(np.eye(2, dtype=complex) for _ in range(self.n_times - 1))
        if len(bridging) != self.n_times - 1:
            raise HistoryError(f"need {self.n_times - 1} bridging unitaries, got {len(bridging)}")
        for t in bridging:
            if not is_unitary(t):
                raise HistoryError("bridging matrix is not unitary")
            t.setflags(write=False)
        object.__setattr__(self, "branches", branches)
        object.__setattr__(self, "bridging", bridging)

    @classmethod
    def product(cls, *events: Projector2, amplitude: complex = 1.0, bridging=()) -> "HistoryState":
        """Single-branch state; events are given earliest first."""
        return cls((Branch(amplitude, events),), len(events), bridging)

    @property
    def trivial_evolution(self) -> bool:
        return all(np.allclose(t, np.eye(2), atol=TOL, rtol=0) for t in self.bridging)

    def compatible_with(self, other: "HistoryState") -> bool:
        return self.n_times == other.n_times and all(
            np.allclose(a, b, atol=TOL, rtol=0) for a, b in zip(self.bridging, other.bridging)
        )

    def _check_compatible(self, other: "HistoryState") -> None:
        if self.n_times != other.n_times:
            raise DimensionMismatchError(
                f"history states span {self.n_times} and {other.n_times} times"
            )
        if not self.compatible_with(other):
            raise DimensionMismatchError("history states use different bridging evolutions")

    def __add__(self, other: "HistoryState") -> "HistoryState":
        self._check_compatible(other)
        return HistoryState(self.branches + other.branches, self.n_times, self.bridging)

    def __mul__(self, scalar: complex) -> "HistoryState":
        branches = tuple(Branch(b.amplitude * scalar, b.events) for b in self.branches)
        return HistoryState(branches, self.n_times, self.bridging)

    __rmul__ = __mul__

    def __sub__(self, other: "HistoryState") -> "HistoryState":
        return self + other * -1

    def __len__(self) -> int:
        return len(self.branches)

    def __str__(self) -> str:
        return render(self)


def chain_operator(state: HistoryState) -> np.ndarray:
    k = np.zeros((2, 2), dtype=complex)
    for branch in state.branches:
        m = branch.events[0].matrix
        for bridge, event in zip(state.bridging, branch.events[1:]):
            m = event.matrix @ bridge @ m
        k += branch.amplitude * m
    return k


def inner_product(a: HistoryState, b: HistoryState) -> complex:
    a._check_compatible(b)
    return complex(np.trace(chain_operator(a).conj().T @ chain_operator(b)))


def history_norm(state: HistoryState) -> float:
    return sqrt(max(inner_product(state, state).real, 0.0))


def gram_matrix(states) -> np.ndarray:
    states = list(states)
    for s in states[1:]:
        states[0]._check_compatible(s)
    ks = [chain_operator(s) for s in states]
    n = len(ks)
    g = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            g[i, j] = np.trace(ks[i].conj().T @ ks[j])
    return g


# -- named states -----------------------------------------------------------

def ghz_history() -> HistoryState:
    zp, zm = projector("z+"), projector("z-")
    return HistoryState((Branch(_S, (zp, zp, zp)), Branch(-_S, (zm, zm, zm))), 3)


def w_history() -> HistoryState:
    zp, zm = projector("z+"), projector("z-")
    a = 1 / sqrt(3)
    return HistoryState(
        (
            Branch(a, (zp, zp, zm)),
            Branch(a, (zp, zm, zp)),
            Branch(a, (zm, zp, zp)),
        ),
        3,
    )


def separable_history(theta1, phi1, theta2, phi2, theta3, phi3) -> HistoryState:
    return HistoryState.product(
        projector_from_angles(theta1, phi1),
        projector_from_angles(theta2, phi2),
        projector_from_angles(theta3, phi3),
    )


def temporal_bell(kind: str) -> HistoryState:
    """Two-time Bell history.

    phi+- = ([z+](.)[z+] +- [z-](.)[z-]) / sqrt2
    psi+- = ([z+](.)[z-] +- [z-](.)[z+]) / sqrt2
    """
    zp, zm = projector("z+"), projector("z-")
    if kind not in BELL_KINDS:
        raise HistoryError(f"unknown temporal Bell state {kind!r}; use one of {BELL_KINDS}")
    sign = 1 if kind.endswith("+") else -1
    if kind.startswith("phi"):
        pairs = ((zp, zp), (zm, zm))
    else:
        pairs = ((zp, zm), (zm, zp))
    return HistoryState((Branch(_S, pairs[0]), Branch(sign * _S, pairs[1])), 2)


def two_time_with_tail(two_time: HistoryState, theta: float, phi: float) -> HistoryState:
    """Append P(theta, phi) as a third, latest event to every branch."""
    if two_time.n_times != 2:
        raise HistoryError(f"expected a 2-time state, got {two_time.n_times} times")
    tail = projector_from_angles(theta, phi)
    branches = tuple(Branch(b.amplitude, b.events + (tail,)) for b in two_time.branches)
    bridging = two_time.bridging + (np.eye(2, dtype=complex),)
    return HistoryState(branches, 3, bridging)


# -- text forms -------------------------------------------------------------

def render(state: HistoryState, digits: int = 4) -> str:
    """Human-readable form, latest time leftmost (the usual written order)."""
    terms = []
    for b in state.branches:
        amp = b.amplitude
        if abs(amp.imag) < 10 ** -digits:
            coeff = f"{amp.real:+.{digits}f}"
        else:
            coeff = f"+({amp.real:.{digits}f}{amp.imag:+.{digits}f}j)"
        events = " ⊙ ".join(e.label() for e in reversed(b.events))
        terms.append(f"{coeff} {events}")
    return " ".join(terms)


def _cpair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _cmatrix(m: np.ndarray) -> list:
    return [[_cpair(z) for z in row] for row in m]


def _from_cmatrix(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def to_dict(state: HistoryState) -> dict:
    """Serializable form. Complex numbers are ``[re, im]`` pairs; ``events``
    run earliest first; every matrix is a 2x2 nested list of pairs."""
    return {
        "n_times": state.n_times,
        "bridging": [_cmatrix(t) for t in state.bridging],
        "branches": [
            {
                "amplitude": _cpair(b.amplitude),
                "events": [_cmatrix(e.matrix) for e in b.events],
            }
            for b in state.branches
        ],
    }


def from_dict(data: dict) -> HistoryState:
    unknown = set(data) - {"n_times", "bridging", "branches"}
    if unknown:
        raise HistoryError(f"unknown history fields: {sorted(unknown)}")
    try:
        branches = tuple(
            Branch(
                complex(*b["amplitude"]),
                tuple(Projector2.from_matrix(_from_cmatrix(e)) for e in b["events"]),
            )
            for b in data["branches"]
        )
        bridging = tuple(_from_cmatrix(t) for t in data.get("bridging", ()))
        return HistoryState(branches, int(data["n_times"]), bridging)
    except (KeyError, TypeError) as exc:
        raise HistoryError(f"malformed history document: {exc}") from None


def dumps(state: HistoryState) -> str:
    return json.dumps(to_dict(state), indent=2)


def loads(text: str) -> HistoryState:
    return from_dict(json.loads(text))
