"""Country lookup tables: names, ISO codes, continents, borders, centroids.

The bundled CSVs cover the countries that show up in painting metadata;
callers can point at their own files with the same layout.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

CONTINENTS = (
    "Europe",
    "Oceania",
    "North America",
    "South America",
    "Asia",
    "Africa",
    "Unknown",
)

UNKNOWN_CONTINENT = "Unknown"


@dataclass(frozen=True)
class Country:
    code: str
    name: str
    continent: str
    aliases: tuple[str, ...] = ()


class CountryTable:
    """Resolves free-form country strings to ISO 3166-1 alpha-2 codes."""

    def __init__(self, countries: Iterable[Country]):
        self._by_code: dict[str, Country] = {}
        self._by_name: dict[str, str] = {}
        for country in countries:
            self._by_code[country.code] = country
            self._by_name[country.name.casefold()] = country.code
            for alias in country.aliases:
                self._by_name[alias.casefold()] = country.code

    def resolve(self, text: str | None) -> str | None:
        """Return the alpha-2 code for a code, name, or alias; None if unknown."""
        if text is None:
            return None
        cleaned = text.strip()
        if not cleaned:
            return None
        upper = cleaned.upper()
        if upper in self._by_code:
            return upper
        return self._by_name.get(cleaned.casefold())

    def continent_of(self, code: str | None) -> str:
        if code is None:
            return UNKNOWN_CONTINENT
        country = self._by_code.get(code.upper())
        return country.continent if country else UNKNOWN_CONTINENT

    def name_of(self, code: str) -> str:
        country = self._by_code.get(code.upper())
        return country.name if country else code

    def codes(self) -> list[str]:
        return sorted(self._by_code)

    def __contains__(self, code: str) -> bool:
        return code.upper() in self._by_code


def _bundled(filename: str):
    return resources.files("paintstats").joinpath("data").joinpath(filename)


def load_country_table(path: str | Path | None = None) -> CountryTable:
    source = Path(path) if path is not None else _bundled("countries.csv")
    countries = []
    with source.open("r", encoding="utf-8", newline="") as handle:
        for row in csv.DictReader(handle):
            aliases = tuple(a for a in (row.get("aliases") or "").split(";") if a)
            continent = row["continent"]
            if continent not in CONTINENTS:
                raise ValueError(f"unknown continent {continent!r} for {row['code']}")
            countries.append(
                Country(row["code"].upper(), row["name"], continent, aliases)
            )
    return CountryTable(countries)


def load_adjacency(path: str | Path | None = None) -> list[tuple[str, str]]:
    """Undirected shared-border pairs, one per line."""
    source = Path(path) if path is not None else _bundled("country_adjacency.csv")
    pairs = []
    with source.open("r", encoding="utf-8", newline="") as handle:
        for row in csv.DictReader(handle):
            pairs.append((row["country_a"].upper(), row["country_b"].upper()))
    return pairs


def load_centroids(path: str | Path | None = None) -> dict[str, tuple[float, float]]:
    """Country centroid (lat, lon) pairs used for nearest-neighbour fallback."""
    source = Path(path) if path is not None else _bundled("country_centroids.csv")
    centroids = {}
    with source.open("r", encoding="utf-8", newline="") as handle:
        for row in csv.DictReader(handle):
            centroids[row["country"].upper()] = (float(row["lat"]), float(row["lon"]))
    return centroids
