"""
Mach-Zehnder model of the temporal GHZ experiment and its photon counting.

A D-polarized photon is split into an upper (H) and a lower (V) arm. At
each time t both arms project onto the trial's basis state a_t and rotate
the survivor back to H (upper) or V (lower). The arms recombine so that
detector D2 sees the difference of the two chains:

    amp = ( prod_t <a_t|H>  -  e^{i delta} prod_t <a_t|V> ) / sqrt2

which is the multi-time amplitude of the GHZ history. Imperfect overlap of
the arms is modelled by a visibility v multiplying the interference term
of the detection probability, so v = 0 leaves two incoherent arms and every
correlator scales by v.

Counts for a trial are Binomial(N, transmission * P) plus Poisson dark
counts. With ``photons=None`` the experiment runs in analytic mode and the
cell ratios are the exact probabilities.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from .jones import POLARIZATIONS
from .trials import StageSpec, TrialConfig, TrialMap

WORDS = ("XXX", "YYX", "YXY", "XYY")

# Numerators of the four correlator ratios as printed; each denominator is
# the plain sum of the same eight cells.
PRINTED_NUMERATORS = {
    "XXX": "C111 - C112 - C121 + C122 - C211 + C212 + C221 - C222",
    "YYX": "C331 - C332 - C341 + C342 - C431 + C432 + C441 - C442",
    "YXY": "C313 - C314 - C323 + C324 - C413 + C414 + C423 - C424",
    "XYY": "C133 - C134 - C143 + C144 - C233 + C234 + C243 - C244",
}


def parse_pattern(expr: str) -> list[tuple[int, tuple[int, int, int]]]:
    terms = []
    for sign, digits in re.findall(r"([+-]?)\s*C(\d{3})", expr):
        terms.append((-1 if sign == "-" else 1, tuple(int(d) for d in digits)))
    return terms


SIGN_PATTERNS = {w: parse_pattern(e) for w, e in PRINTED_NUMERATORS.items()}
REQUIRED_CELLS = frozenset(cell for p in SIGN_PATTERNS.values() for _, cell in p)


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseModel:
    visibility: float = 1.0
    phase_drift: float = 0.0  # rad
    dark_rate: float = 0.0  # mean dark counts per trial

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility must lie in [0, 1], got {self.visibility}")
        if not np.isfinite(self.phase_drift):
            raise ValueError("phase drift must be finite")
        if not (self.dark_rate >= 0 and np.isfinite(self.dark_rate)):
            raise ValueError(f"dark rate must be >= 0, got {self.dark_rate}")


def _kets(setting) -> list[np.ndarray]:
    if isinstance(setting, StageSpec):
        return setting.kets()
    if isinstance(setting, str):
        return StageSpec.from_labels(setting).kets()
    return [np.asarray(k, dtype=complex) for k in setting]


def _arm_products(setting) -> tuple[complex, complex]:
    h, v = POLARIZATIONS["H"], POLARIZATIONS["V"]
    kets = _kets(setting)
    upper = complex(np.prod([np.vdot(a, h) for a in kets]))
    lower = complex(np.prod([np.vdot(a, v) for a in kets]))
    return upper, lower


def mzi_amplitude(setting, phase_drift: float = 0.0, relative_sign: int = -1) -> complex:
    """Coherent D2 amplitude for basis states (a1, a2, a3).

    ``relative_sign=+1`` selects the other output port."""
    upper, lower = _arm_products(setting)
    return (upper + relative_sign * np.exp(1j * phase_drift) * lower) / sqrt(2)


def outcome_probability(setting, noise: NoiseModel | None = None, relative_sign: int = -1) -> float:
    """D2 probability with the interference term scaled by the visibility.

    At v = 1 this is |mzi_amplitude|^2, and over the 8 sign patterns of one
    word the probabilities sum to 1."""
    noise = noise or NoiseModel()
    upper, lower = _arm_products(setting)
    cross = (upper * np.conj(lower) * np.exp(-1j * noise.phase_drift)).real
    p = abs(upper) ** 2 + abs(lower) ** 2 + 2 * relative_sign * noise.visibility * cross
    return float(p / 2)


def _stage_of(trial, trial_map: TrialMap | None) -> StageSpec:
    if isinstance(trial, StageSpec):
        return trial
    if isinstance(trial, TrialConfig):
        return (trial_map or TrialMap.load()).stage_spec(trial.trial_id)
    raise TypeError(f"expected TrialConfig or StageSpec, got {type(trial).__name__}")


def simulate_trial(config, photons: int, noise: NoiseModel | None = None, seed=0,
                   transmission: float = 1.0, trial_map: TrialMap | None = None) -> int:
    """D2 counts for one trial with ``photons`` injected photons."""
    if not isinstance(photons, (int, np.integer)) or photons <= 0:
        raise ValueError(f"photon number must be a positive integer, got {photons!r}")
    if not 0.0 <= transmission <= 1.0:
        raise ValueError("transmission must lie in [0, 1]")
    noise = noise or NoiseModel()
    spec = _stage_of(config, trial_map)
    p = min(1.0, max(0.0, transmission * outcome_probability(spec, noise)))
    rng = np.random.default_rng(seed)
    counts = int(rng.binomial(photons, p))
    if noise.dark_rate > 0:
        counts += int(rng.poisson(noise.dark_rate))
    return counts


@dataclass
class SimResult:
    mode: str  # "analytic" or "monte-carlo"
    photons: int | None
    seed: int | None
    noise: NoiseModel
    counts: dict[tuple[int, int, int], float]  # D2 counts (expected fractions in analytic mode)
    ratios: dict[tuple[int, int, int], float]  # C_{i,j,k}
    correlators: dict[str, float]
    correlator_errors: dict[str, float]
    g: float
    g_error: float
    trial_ids: dict[tuple[int, int, int], str] = field(default_factory=dict)

    @property
    def magnitudes(self) -> dict[str, float]:
        return {w: abs(v) for w, v in self.correlators.items()}

    def to_dict(self) -> dict:
        cells = sorted(self.counts)
        return {
            "mode": self.mode,
            "photons_per_trial": self.photons,
            "seed": self.seed,
            "noise": {
                "visibility": self.noise.visibility,
                "phase_drift": self.noise.phase_drift,
                "dark_rate": self.noise.dark_rate,
            },
            "cells": [
                {
                    "ijk": "".join(map(str, c)),
                    "trial": self.trial_ids.get(c),
                    "counts": self.counts[c],
                    "C": self.ratios[c],
                }
                for c in cells
            ],
            "correlators": {
                w: {"value": self.correlators[w], "error": self.correlator_errors[w]}
                for w in WORDS
            },
            "G": {"value": self.g, "error": self.g_error},
        }


def correlators_from_ratios(ratios: dict, counts: dict | None = None) -> tuple[dict, dict]:
    """Evaluate the four printed count ratios; Poisson errors from ``counts``."""
    values, errors = {}, {}
    for word, pattern in SIGN_PATTERNS.items():
        num = sum(s * ratios[c] for s, c in pattern)
        den = sum(ratios[c] for _, c in pattern)
        if den <= 0:
            raise ScheduleError(f"no D2 counts in the {word} trials")
        e = num / den
        values[word] = float(e)
        if counts is None:
            errors[word] = 0.0
        else:
            total = sum(counts[c] for _, c in pattern)
            var = sum((s - e) ** 2 * counts[c] for s, c in pattern) / total ** 2
            errors[word] = float(sqrt(var))
    return values, errors


def g_with_error(values: dict, errors: dict) -> tuple[float, float]:
    g = -float(np.prod([values[w] for w in WORDS]))
    var = 0.0
    for w in WORDS:
        others = np.prod([values[u] for u in WORDS if u != w])
        var += (others * errors[w]) ** 2
    return g, float(sqrt(var))


def run_ghz_experiment(trials, photons: int | None = None, noise: NoiseModel | None = None,
                       seed: int = 0, transmission: float = 1.0,
                       trial_map: TrialMap | None = None) -> SimResult:
    """Run the 32-trial schedule.

    Trial n of the schedule is seeded with ``(seed, n)``; reference rows
    are skipped."""
    noise = noise or NoiseModel()
    tm = trial_map
    if tm is None and any(isinstance(t, TrialConfig) for t in trials):
        tm = TrialMap.load()
    schedule: dict[tuple[int, int, int], tuple[int, object]] = {}
    position = 0
    for trial in trials:
        if isinstance(trial, TrialConfig) and trial.is_reference:
            continue
        spec = _stage_of(trial, tm)
        if spec.indices in schedule:
            raise ScheduleError(f"cell {spec.indices} appears twice in the schedule")
        schedule[spec.indices] = (position, trial)
        position += 1
    missing = REQUIRED_CELLS - set(schedule)
    if missing:
        raise ScheduleError(f"incomplete schedule: missing cells {sorted(missing)}")

    counts: dict[tuple[int, int, int], float] = {}
    ratios: dict[tuple[int, int, int], float] = {}
    ids = {}
    for cell in sorted(REQUIRED_CELLS):
        index, trial = schedule[cell]
        ids[cell] = trial.trial_id if isinstance(trial, TrialConfig) else StageSpec(cell).labels
        if photons is None:
            p = transmission * outcome_probability(StageSpec(cell), noise)
            counts[cell] = p
            ratios[cell] = p
        else:
            n = simulate_trial(StageSpec(cell), photons, noise, seed=[seed, index],
                               transmission=transmission)
            counts[cell] = n
            ratios[cell] = n / photons
    if photons is None:
        values, errors = correlators_from_ratios(ratios)
    else:
        values, errors = correlators_from_ratios(ratios, counts)
    g, g_err = g_with_error(values, errors)
    return SimResult(
        mode="analytic" if photons is None else "monte-carlo",
        photons=photons,
        seed=None if photons is None else seed,
        noise=noise,
        counts=counts,
        ratios=ratios,
        correlators=values,
        correlator_errors=errors,
        g=g,
        g_error=g_err,
        trial_ids=ids,
    )


def ideal_schedule() -> list[StageSpec]:
    """The 32 abstract stage specs, word by word, k varying fastest."""
    out = []
    for word in WORDS:
        for signs in itertools.product((1, -1), repeat=3):
            out.append(StageSpec.from_word(word, signs))
    return out
