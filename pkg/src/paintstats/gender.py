"""Per-decade gender statistics over annotated faces.

Two indices per decade: the gender preference (female minus male share of
faces) and the happiness gap (mean female happiness minus mean male
happiness). Decades below a minimum face count carry too little data and
are filtered out of the series.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .emotion import FaceAnnotation
from .temporal import BIN_WIDTH, SERIES_START, decade_index

DEFAULT_MIN_FACES = 60


@dataclass(frozen=True)
class GenderDecadeStats:
    start_year: int
    n_female: int
    n_male: int
    nof: float  # female share of faces
    nom: float  # male share of faces
    ahf: float | None  # mean female happiness
    ahm: float | None  # mean male happiness
    gpt: float
    hdg: float | None


def _split_by_gender(faces: Iterable[FaceAnnotation]):
    female = []
    male = []
    for face in faces:
        (female if face.gender == "female" else male).append(face.happiness)
    return female, male


def gpt(faces: Iterable[FaceAnnotation]) -> float:
    """Female share minus male share of the decade's faces, in [-1, 1].

    Positive means female faces appear more frequently.
    """
    female, male = _split_by_gender(faces)
    total = len(female) + len(male)
    if total == 0:
        raise ValueError("no gendered faces")
    return len(female) / total - len(male) / total


def hdg(faces: Iterable[FaceAnnotation]) -> float:
    """Mean female happiness minus mean male happiness, in [-1, 1]."""
    female, male = _split_by_gender(faces)
    if not female or not male:
        raise ValueError("gender absent in decade")
    return sum(female) / len(female) - sum(male) / len(male)


def gender_series(
    entries: Iterable[tuple[int, Sequence[FaceAnnotation]]],
    min_faces: int = DEFAULT_MIN_FACES,
) -> list[GenderDecadeStats]:
    """Full per-decade stats for decades with at least min_faces faces.

    The happiness gap is None for decades where one gender is absent.
    """
    per_bin: dict[int, list[FaceAnnotation]] = {}
    for year, faces in entries:
        index = decade_index(year)
        if index is None:
            continue
        per_bin.setdefault(index, []).extend(faces)

    series = []
    for index in sorted(per_bin):
        faces = per_bin[index]
        if len(faces) < min_faces:
            continue
        female, male = _split_by_gender(faces)
        total = len(female) + len(male)
        nof = len(female) / total
        nom = len(male) / total
        ahf = sum(female) / len(female) if female else None
        ahm = sum(male) / len(male) if male else None
        series.append(
            GenderDecadeStats(
                start_year=SERIES_START + index * BIN_WIDTH,
                n_female=len(female),
                n_male=len(male),
                nof=nof,
                nom=nom,
                ahf=ahf,
                ahm=ahm,
                gpt=nof - nom,
                hdg=(ahf - ahm) if female and male else None,
            )
        )
    if not series:
        raise ValueError(f"no decade reaches the minimum of {min_faces} faces")
    return series
