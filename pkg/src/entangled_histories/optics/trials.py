"""
Trial settings for the interferometer: abstract stage specs and the
wave-plate angle table.

Basis labels x_1..x_4 are D, A, R, L; x_1 and x_3 carry outcome sign +1,
x_2 and x_4 carry -1. A trial fixes one label per time, written (i, j, k)
for t1, t2, t3.

How trial ids map onto (i, j, k) is configuration, shipped as
``data/trial_map.json``: each group prefix names its axis word, and the
trial number n enumerates the eight sign patterns with k varying fastest
(n = 1 -> signs +++, n = 2 -> ++-, ...). The same file names which plate
sets sit in the upper arm (map x_t -> H), the lower arm (map x_t -> V)
and which are fixed recovery plates.
"""
from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .jones import (
    DEFAULT_CONVENTION,
    POLARIZATIONS,
    get_convention,
    name_polarization,
    plate_set_matrix,
    same_ray,
)

LABELS = {1: "D", 2: "A", 3: "R", 4: "L"}
INDEX = {v: k for k, v in LABELS.items()}
AXIS_OF = {"D": "X", "A": "X", "R": "Y", "L": "Y"}
N_PLATES = 8
COLUMNS = tuple(f"{kind}{n}" for n in range(1, N_PLATES + 1) for kind in ("QWP", "HWP"))


class TableError(ValueError):
    pass


@dataclass(frozen=True)
class StageSpec:
    """Abstract per-time PBS bases (i, j, k), each in 1..4."""

    indices: tuple[int, int, int]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(idx) != 3 or any(i not in LABELS for i in idx):
            raise ValueError(f"stage indices must be three values in 1..4, got {self.indices!r}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_labels(cls, labels: str) -> "StageSpec":
        return cls(tuple(INDEX[c] for c in labels.upper()))

    @classmethod
    def from_word(cls, word: str, signs) -> "StageSpec":
        idx = []
        for axis, s in zip(word.upper(), signs):
            base = 1 if axis == "X" else 3
            idx.append(base if s > 0 else base + 1)
        return cls(tuple(idx))

    @property
    def labels(self) -> str:
        return "".join(LABELS[i] for i in self.indices)

    @property
    def word(self) -> str:
        return "".join(AXIS_OF[c] for c in self.labels)

    @property
    def signs(self) -> tuple[int, int, int]:
        return tuple(1 if i % 2 else -1 for i in self.indices)

    def kets(self) -> list[np.ndarray]:
        return [POLARIZATIONS[c] for c in self.labels]


@dataclass(frozen=True)
class TrialConfig:
    trial_id: str
    angles: tuple[float, ...]  # QWP1, HWP1, ..., QWP8, HWP8 in degrees

    def __post_init__(self):
        angles = tuple(float(a) for a in self.angles)
        if len(angles) != 2 * N_PLATES:
            raise TableError(f"{self.trial_id}: expected {2 * N_PLATES} angles, got {len(angles)}")
        if not all(np.isfinite(angles)):
            raise TableError(f"{self.trial_id}: non-finite angle")
        object.__setattr__(self, "angles", angles)

    def plate(self, n: int) -> tuple[float, float]:
        """(QWP, HWP) angles of plate set ``n`` (1-based)."""
        return self.angles[2 * (n - 1)], self.angles[2 * (n - 1) + 1]

    @property
    def is_reference(self) -> bool:
        return self.trial_id == "Ref"


@dataclass(frozen=True)
class TrialMap:
    groups: dict[str, str]
    upper_plates: tuple[int, ...] = (1, 2, 3)
    lower_plates: tuple[int, ...] = (5, 6, 7)
    recovery_plates: tuple[int, ...] = (4, 8)
    sign_order: str = "ijk"

    @classmethod
    def load(cls, path=None) -> "TrialMap":
        if path is None:
            text = resources.files("entangled_histories.data").joinpath("trial_map.json").read_text()
        else:
            text = Path(path).read_text()
        data = json.loads(text)
        unknown = set(data) - {"groups", "upper_plates", "lower_plates", "recovery_plates", "sign_order"}
        if unknown:
            raise ValueError(f"unknown trial-map keys: {sorted(unknown)}")
        return cls(
            groups=dict(data["groups"]),
            upper_plates=tuple(data.get("upper_plates", (1, 2, 3))),
            lower_plates=tuple(data.get("lower_plates", (5, 6, 7))),
            recovery_plates=tuple(data.get("recovery_plates", (4, 8))),
            sign_order=data.get("sign_order", "ijk"),
        )

    def stage_spec(self, trial_id: str) -> StageSpec:
        group, _, number = trial_id.partition(".")
        if group not in self.groups or not number.isdigit() or not 1 <= int(number) <= 8:
            raise KeyError(f"no stage mapping for trial {trial_id!r}")
        bits = [(int(number) - 1) >> shift & 1 for shift in (2, 1, 0)]
        if self.sign_order == "kji":
            bits = bits[::-1]
        elif self.sign_order != "ijk":
            raise ValueError(f"unknown sign order {self.sign_order!r}")
        return StageSpec.from_word(self.groups[group], [1 - 2 * b for b in bits])


def load_trial_table(path=None) -> list[TrialConfig]:
    """Parse the tab-separated angle table (header + Ref + 32 trials)."""
    if path is None:
        text = resources.files("entangled_histories.data").joinpath("trial_angles.tsv").read_text()
        source = "trial_angles.tsv"
    else:
        path = Path(path)
        if not path.exists():
            raise TableError(f"trial table not found: {path}")
        text = path.read_text()
        source = str(path)
    rows = [r for r in csv.reader(text.splitlines(), delimiter="\t") if any(c.strip() for c in r)]
    if not rows:
        raise TableError(f"{source}: empty table")
    header = [c.strip() for c in rows[0]]
    if tuple(header[1:]) != COLUMNS:
        raise TableError(f"{source}: header must be id + {' '.join(COLUMNS)}")
    trials = []
    for n, row in enumerate(rows[1:], start=2):
        name = row[0].strip() if row else f"line {n}"
        if len(row) != len(COLUMNS) + 1:
            raise TableError(f"{source}: row {name} has {len(row) - 1} angle columns, expected {len(COLUMNS)}")
        try:
            angles = [float(c) for c in row[1:]]
        except ValueError:
            raise TableError(f"{source}: row {name} has a non-numeric angle") from None
        trials.append(TrialConfig(name, tuple(angles)))
    if len(trials) != 33:
        last = trials[-1].trial_id if trials else "header"
        raise TableError(f"{source}: expected 33 rows (Ref + 32 trials), got {len(trials)}; last row read: {last}")
    return trials


# -- convention validation --------------------------------------------------

def maps_to(matrix: np.ndarray, source: str, target: str) -> bool:
    return same_ray(matrix @ POLARIZATIONS[source], POLARIZATIONS[target])


def plate_sends_to(matrix: np.ndarray, target: str) -> str | None:
    """Which of D, A, R, L the plate set carries onto ``target``."""
    for label in "DARL":
        if maps_to(matrix, label, target):
            return label
    return None


@dataclass(frozen=True)
class TrialCheck:
    trial_id: str
    expected: StageSpec
    inferred: tuple[str | None, ...]  # labels sent to H by the upper-arm plates
    plate_ok: dict[int, bool]
    passed: bool

    @property
    def inferred_indices(self) -> tuple[int | None, ...]:
        return tuple(INDEX.get(c) if c else None for c in self.inferred)


@dataclass(frozen=True)
class ValidationReport:
    convention: str
    checks: tuple[TrialCheck, ...]
    inferred_words: dict[str, set[str]] = field(default_factory=dict)

    @property
    def passed(self) -> int:
        return sum(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "convention": self.convention,
            "passed": self.passed,
            "total": len(self.checks),
            "inferred_words": {g: sorted(w) for g, w in self.inferred_words.items()},
            "trials": [
                {
                    "id": c.trial_id,
                    "expected": list(c.expected.indices),
                    "expected_labels": c.expected.labels,
                    "inferred": [i for i in c.inferred_indices],
                    "plates": {str(k): c.plate_ok[k] for k in sorted(c.plate_ok)},
                    "passed": c.passed,
                }
                for c in self.checks
            ],
        }


def check_trial(trial, convention=DEFAULT_CONVENTION, trial_map: TrialMap | None = None) -> TrialCheck:
    """Check that the plates of ``trial`` implement its abstract stages.

    A ``StageSpec`` has no plates to get wrong and always passes."""
    if isinstance(trial, StageSpec):
        return TrialCheck(trial.labels, trial, tuple(trial.labels), {}, True)
    tm = trial_map or TrialMap.load()
    conv = get_convention(convention)
    spec = tm.stage_spec(trial.trial_id)
    plate_ok: dict[int, bool] = {}
    inferred = []
    for t, (up, low) in enumerate(zip(tm.upper_plates, tm.lower_plates)):
        label = spec.labels[t]
        m_up = plate_set_matrix(*trial.plate(up), conv)
        m_low = plate_set_matrix(*trial.plate(low), conv)
        plate_ok[up] = bool(maps_to(m_up, label, "H"))
        plate_ok[low] = bool(maps_to(m_low, label, "V"))
        inferred.append(plate_sends_to(m_up, "H"))
    for n in tm.recovery_plates:
        m = plate_set_matrix(*trial.plate(n), conv)
        plate_ok[n] = {name_polarization(m @ POLARIZATIONS[s]) for s in "HV"} == {"H", "V"}
    return TrialCheck(trial.trial_id, spec, tuple(inferred), plate_ok, all(plate_ok.values()))


def validate_convention(convention, table, trial_map: TrialMap | None = None) -> ValidationReport:
    tm = trial_map or TrialMap.load()
    conv = get_convention(convention)
    checks = []
    words: dict[str, set[str]] = {}
    for trial in table:
        if isinstance(trial, TrialConfig) and trial.is_reference:
            continue
        check = check_trial(trial, conv, tm)
        checks.append(check)
        group = check.trial_id.partition(".")[0]
        word = "".join(AXIS_OF.get(c, "?") if c else "?" for c in check.inferred)
        words.setdefault(group, set()).add(word)
    return ValidationReport(conv.name, tuple(checks), words)


_QWP_CANDIDATES = (45.0, 135.0, 0.0, 90.0)
_HWP_CANDIDATES = tuple(22.5 * n for n in range(8))


def solve_plate(source: str, target: str, convention=DEFAULT_CONVENTION) -> tuple[float, float]:
    """Smallest (QWP, HWP) angles on the 22.5 degree lattice that carry
    ``source`` onto ``target``. QWP angles on the D/A axes are tried first,
    so linear bases get settings that do not depend on the retardance sign."""
    conv = get_convention(convention)
    for q, h in itertools.product(_QWP_CANDIDATES, _HWP_CANDIDATES):
        if maps_to(plate_set_matrix(q, h, conv), source, target):
            return q, h
    raise ValueError(f"no lattice plate setting maps {source} to {target}")


def synthesize_trial(trial_id: str, spec: StageSpec, convention=DEFAULT_CONVENTION,
                     trial_map: TrialMap | None = None) -> TrialConfig:
    """Angle row whose plates implement ``spec`` under ``convention``."""
    tm = trial_map or TrialMap.load()
    plates: dict[int, tuple[float, float]] = {}
    for t, label in enumerate(spec.labels):
        plates[tm.upper_plates[t]] = solve_plate(label, "H", convention)
        plates[tm.lower_plates[t]] = solve_plate(label, "V", convention)
    for n in tm.recovery_plates:
        plates[n] = (0.0, 0.0)
    angles = []
    for n in range(1, N_PLATES + 1):
        angles.extend(plates.get(n, (0.0, 0.0)))
    return TrialConfig(trial_id, tuple(angles))
