"""
Jones calculus in the (H, V) basis.

The spin/polarization correspondence is z+ <-> H, z- <-> V, x+- <-> D/A,
y+- <-> R/L, with |R> = (|H> + i|V>)/sqrt2.

Wave-plate conventions
----------------------
Table angles are mount readings; the fast-axis reference, retardance sign
and the order in which light meets the two plates of a set are not fixed
by the data. A convention pins all three:

``qwp-first``            QWP then HWP, retarder R(a) diag(e^{-iG/2}, e^{+iG/2}) R(-a)
``qwp-first-flipped``    same order, retardance sign reversed
``hwp-first``            HWP then QWP, positive retardance
``hwp-first-flipped``    HWP then QWP, retardance sign reversed

The symmetric global phase e^{-iG/2} keeps every plate in SU(2).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

_S = 1 / sqrt(2)

POLARIZATIONS = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([_S, _S], dtype=complex),
    "A": np.array([_S, -_S], dtype=complex),
    "R": np.array([_S, 1j * _S], dtype=complex),
    "L": np.array([_S, -1j * _S], dtype=complex),
}

ORTHOGONAL = {"H": "V", "V": "H", "D": "A", "A": "D", "R": "L", "L": "R"}


class ConventionError(ValueError):
    pass


class BasisError(ValueError):
    pass


@dataclass(frozen=True)
class WaveplateConvention:
    name: str
    qwp_first: bool
    retardance_sign: int


CONVENTIONS = {
    c.name: c
    for c in (
        WaveplateConvention("qwp-first", True, 1),
        WaveplateConvention("qwp-first-flipped", True, -1),
        WaveplateConvention("hwp-first", False, 1),
        WaveplateConvention("hwp-first-flipped", False, -1),
    )
}
DEFAULT_CONVENTION = "qwp-first"


def get_convention(convention) -> WaveplateConvention:
    if isinstance(convention, WaveplateConvention):
        return convention
    try:
        return CONVENTIONS[convention]
    except KeyError:
        raise ConventionError(
            f"unknown wave-plate convention {convention!r}; known: {sorted(CONVENTIONS)}"
        ) from None


def rotation(angle_rad: float) -> np.ndarray:
    c, s = np.cos(angle_rad), np.sin(angle_rad)
    return np.array([[c, -s], [s, c]], dtype=complex)


def retarder(retardance: float, angle_deg: float) -> np.ndarray:
    """Linear retarder with fast axis at ``angle_deg`` from H."""
    a = np.deg2rad(angle_deg)
    core = np.diag([np.exp(-0.5j * retardance), np.exp(0.5j * retardance)])
    return rotation(a) @ core @ rotation(-a)


def waveplate_matrix(kind: str, angle: float, convention=DEFAULT_CONVENTION) -> np.ndarray:
    """Jones matrix of a half- or quarter-wave plate; ``angle`` in degrees."""
    conv = get_convention(convention)
    kind = kind.upper()
    if kind == "HWP":
        gamma = np.pi
    elif kind == "QWP":
        gamma = np.pi / 2
    else:
        raise ValueError(f"unknown wave plate {kind!r}; use HWP or QWP")
    return retarder(conv.retardance_sign * gamma, angle)


def plate_set_matrix(qwp_angle: float, hwp_angle: float, convention=DEFAULT_CONVENTION) -> np.ndarray:
    """Combined matrix of one QWP + HWP set in the convention's plate order."""
    conv = get_convention(convention)
    q = waveplate_matrix("QWP", qwp_angle, conv)
    h = waveplate_matrix("HWP", hwp_angle, conv)
    return h @ q if conv.qwp_first else q @ h


def same_ray(u: np.ndarray, v: np.ndarray, tol: float = 1e-9) -> bool:
    """True when two unit vectors agree up to a global phase."""
    return abs(abs(np.vdot(u, v)) - 1) < tol


def name_polarization(v: np.ndarray, tol: float = 1e-9) -> str | None:
    for name, ket in POLARIZATIONS.items():
        if same_ray(ket, v, tol):
            return name
    return None


def pbs_apply(basis, field) -> tuple[np.ndarray, np.ndarray]:
    """Split ``field`` on a PBS transmitting ``basis[0]`` and reflecting ``basis[1]``."""
    alpha, alpha_bar = (
        POLARIZATIONS[b] if isinstance(b, str) else np.asarray(b, dtype=complex) for b in basis
    )
    if abs(np.vdot(alpha, alpha_bar)) > 1e-12:
        raise BasisError("PBS basis states are not orthogonal")
    field = np.asarray(field, dtype=complex)
    transmitted = np.vdot(alpha, field) * alpha
    reflected = np.vdot(alpha_bar, field) * alpha_bar
    return transmitted, reflected
