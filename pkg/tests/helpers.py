"""Builders for synthetic corpora, images, and pipeline workspaces."""

from __future__ import annotations

import csv
import json
import random
from pathlib import Path

import numpy as np
from PIL import Image

from paintstats.color import COLOR_ORDER, ColorProfile
from paintstats.corpus import CorpusStore, PaintingRecord, save_store
from paintstats.emotion import EMOTION_KEYS, FaceAnnotation, stub_annotate

# A handful of countries the bundled tables know about.
FIXTURE_COUNTRIES = ("US", "CN", "DE", "FR", "IT", "ES", "GB", "AT", "NL", "SE")

# RGB fills that classify cleanly into single colors.
COLOR_FILLS = {
    "red": (200, 30, 30),
    "orange": (230, 140, 40),
    "yellow": (220, 210, 40),
    "green": (60, 180, 60),
    "cyan": (40, 200, 200),
    "blue": (40, 80, 220),
    "purple": (150, 60, 200),
    "black": (20, 20, 20),
    "white": (250, 250, 250),
}


def make_face(gender: str = "female", happiness: float = 0.5) -> FaceAnnotation:
    """A face with a planted happiness value; the rest spread evenly."""
    rest = (1.0 - happiness) / (len(EMOTION_KEYS) - 1)
    emotions = {key: rest for key in EMOTION_KEYS}
    emotions["happiness"] = happiness
    return FaceAnnotation(gender=gender, emotions=emotions)


def make_record(
    name: str = "Untitled",
    artist: str = "Anonymous",
    url: str | None = None,
    date: str | None = None,
    country: str | None = None,
    continent: str | None = None,
    faces=(),
    profile: ColorProfile | None = None,
) -> PaintingRecord:
    return PaintingRecord(
        painting_name=name,
        artist=artist,
        painting_url=url or f"https://paintings.example/{name.replace(' ', '_')}.png",
        raw_date=date,
        painting_country=country,
        painting_continent=continent,
        source="fixture",
        annotated=bool(faces),
        faces=list(faces),
        color_profile=profile,
    )


def planted_profile(overrides: dict[str, float] | None = None) -> ColorProfile:
    values = {color: 0.0 for color in COLOR_ORDER}
    if overrides:
        values.update(overrides)
    return ColorProfile(values)


def residualize(series: list[float], against: list[float]) -> list[float]:
    """Remove the sample correlation of series with against exactly."""
    n = len(series)
    mean_s = sum(series) / n
    mean_a = sum(against) / n
    var_a = sum((a - mean_a) ** 2 for a in against)
    cov = sum((s - mean_s) * (a - mean_a) for s, a in zip(series, against))
    beta = cov / var_a
    return [s - beta * (a - mean_a) for s, a in zip(series, against)]


def planted_color_corpus(n: int = 200, seed: int = 0) -> CorpusStore:
    """Stub-annotated corpus where red tracks happiness linearly and every
    other color is residualized to zero sample correlation with it."""
    rng = random.Random(seed)
    records = []
    for i in range(n):
        record = make_record(
            name=f"Painting {i:04d}",
            artist=f"Artist {i % 7}",
            country=FIXTURE_COUNTRIES[i % len(FIXTURE_COUNTRIES)],
            continent="Europe",
        )
        record.faces = stub_annotate(seed, f"plant-{i}")
        record.annotated = True
        records.append(record)

    with_faces = [r for r in records if r.faces]
    happiness = [r.mean_happiness() for r in with_faces]
    base = {
        "orange": 0.30,
        "yellow": 0.20,
        "green": 0.25,
        "cyan": 0.22,
        "blue": 0.28,
        "purple": 0.24,
        "black": 0.35,
        "white": 0.18,
    }
    columns = {"red": [0.1 + 0.5 * h for h in happiness]}
    for color, level in base.items():
        noisy = [level + rng.uniform(-0.05, 0.05) for _ in with_faces]
        columns[color] = residualize(noisy, happiness)
    for row, record in enumerate(with_faces):
        record.color_profile = ColorProfile(
            {color: columns[color][row] for color in COLOR_ORDER}
        )
    return CorpusStore(records=records)


def write_store(store: CorpusStore, path: Path) -> Path:
    return save_store(store, path)


def _fixture_image(index: int, rng: random.Random) -> np.ndarray:
    """A small image made of 2-4 solid color blocks."""
    size = 48
    image = np.zeros((size, size, 3), dtype=np.uint8)
    names = rng.sample(list(COLOR_FILLS), k=rng.randint(2, 4))
    stripe = size // len(names)
    for band, name in enumerate(names):
        top = band * stripe
        bottom = size if band == len(names) - 1 else (band + 1) * stripe
        image[top:bottom, :] = COLOR_FILLS[name]
    return image


def build_workspace(root: Path, n: int = 200, seed: int = 11, **config_overrides) -> Path:
    """Create metadata, images, and a config file; return the config path."""
    root.mkdir(parents=True, exist_ok=True)
    image_dir = root / "images"
    image_dir.mkdir(exist_ok=True)
    rng = random.Random(seed)

    metadata = root / "metadata.csv"
    with metadata.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["name", "artist", "url", "date", "country"])
        for i in range(n):
            filename = f"img_{i:04d}.png"
            year = 1230 + (i * 787) % 780  # scattered over the full span
            country = FIXTURE_COUNTRIES[i % len(FIXTURE_COUNTRIES)]
            if i % 11 == 0:
                country = ""  # some records have no country
            writer.writerow(
                [
                    f"Painting {i:04d}",
                    f"Artist {i % 7}",
                    f"https://paintings.example/{filename}",
                    str(year),
                    country,
                ]
            )
            Image.fromarray(_fixture_image(i, rng)).save(image_dir / filename)

    config = {
        "store": "corpus.ndjson",
        "image_dir": "images",
        "output_dir": "out",
        "min_faces": 5,
        "backend": {"kind": "stub", "seed": seed},
    }
    config.update(config_overrides)
    config_path = root / "config.json"
    config_path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return config_path
