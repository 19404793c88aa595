"""Pipeline configuration: one TOML or JSON file plus flag overrides.

Relative paths are resolved against the config file's directory so a run
directory can be moved wholesale.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from .colorstats import DEFAULT_CV_COUNTRIES
from .gender import DEFAULT_MIN_FACES
from .temporal import DEFAULT_ERA_BOUNDS

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "stub"
    seed: int = 0
    endpoint: str | None = None
    api_key_env: str = "PAINTSTATS_API_KEY"
    api_key_header: str = "X-Api-Key"
    retry_budget: int = 3
    backoff_base: float = 1.0
    fanout: int = 4


@dataclass(frozen=True)
class PipelineConfig:
    store_path: Path = Path("corpus.ndjson")
    image_dir: Path = Path("images")
    output_dir: Path = Path("out")
    countries_table: Path | None = None  # None = bundled defaults
    adjacency_table: Path | None = None
    centroids_table: Path | None = None
    backend: BackendConfig = field(default_factory=BackendConfig)
    dilation_iterations: int = 2
    max_image_side: int | None = 1024
    dump_masks: bool = False
    min_faces: int = DEFAULT_MIN_FACES
    rapid_window_decades: int = 10
    cv_countries: tuple[str, ...] = DEFAULT_CV_COUNTRIES
    era_bounds: tuple[dict, ...] = tuple(DEFAULT_ERA_BOUNDS)

    def validate(self) -> None:
        if self.dilation_iterations < 0:
            raise ConfigError("dilation_iterations must be >= 0")
        if self.min_faces <= 0:
            raise ConfigError("min_faces must be positive")
        if self.rapid_window_decades < 2:
            raise ConfigError("rapid_window_decades must be at least 2")
        if self.backend.retry_budget <= 0:
            raise ConfigError("retry_budget must be positive")
        if self.backend.fanout <= 0:
            raise ConfigError("fanout must be positive")
        if self.backend.kind not in ("stub", "remote"):
            raise ConfigError(f"unknown backend kind: {self.backend.kind}")
        if self.backend.kind == "remote" and not self.backend.endpoint:
            raise ConfigError("remote backend needs an endpoint")
        for table in (self.countries_table, self.adjacency_table, self.centroids_table):
            if table is not None and not table.exists():
                raise ConfigError(f"lookup table not found: {table}")


def _resolve(base: Path, value: str | None) -> Path | None:
    if value is None:
        return None
    path = Path(value)
    return path if path.is_absolute() else base / path


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".toml":
        with path.open("rb") as handle:
            data = tomllib.load(handle)
    elif path.suffix == ".json":
        data = json.loads(path.read_text(encoding="utf-8"))
    else:
        raise ConfigError(f"config must be .toml or .json, got {path.suffix!r}")

    base = path.parent
    backend_data = data.get("backend", {})
    backend = BackendConfig(
        kind=backend_data.get("kind", "stub"),
        seed=int(backend_data.get("seed", 0)),
        endpoint=backend_data.get("endpoint"),
        api_key_env=backend_data.get("api_key_env", "PAINTSTATS_API_KEY"),
        api_key_header=backend_data.get("api_key_header", "X-Api-Key"),
        retry_budget=int(backend_data.get("retry_budget", 3)),
        backoff_base=float(backend_data.get("backoff_base", 1.0)),
        fanout=int(backend_data.get("fanout", 4)),
    )
    era_bounds = tuple(data.get("era_bounds", DEFAULT_ERA_BOUNDS))
    max_side = data.get("max_image_side", 1024)
    config = PipelineConfig(
        store_path=_resolve(base, data.get("store", "corpus.ndjson")),
        image_dir=_resolve(base, data.get("image_dir", "images")),
        output_dir=_resolve(base, data.get("output_dir", "out")),
        countries_table=_resolve(base, data.get("countries_table")),
        adjacency_table=_resolve(base, data.get("adjacency_table")),
        centroids_table=_resolve(base, data.get("centroids_table")),
        backend=backend,
        dilation_iterations=int(data.get("dilation_iterations", 2)),
        max_image_side=int(max_side) if max_side is not None else None,
        dump_masks=bool(data.get("dump_masks", False)),
        min_faces=int(data.get("min_faces", DEFAULT_MIN_FACES)),
        rapid_window_decades=int(data.get("rapid_window_decades", 10)),
        cv_countries=tuple(data.get("cv_countries", DEFAULT_CV_COUNTRIES)),
        era_bounds=era_bounds,
    )
    config.validate()
    return config


def apply_overrides(
    config: PipelineConfig,
    out: str | None = None,
    backend: str | None = None,
    seed: int | None = None,
    dilation: int | None = None,
) -> PipelineConfig:
    if out is not None:
        config = replace(config, output_dir=Path(out))
    if backend is not None:
        config = replace(config, backend=replace(config.backend, kind=backend))
    if seed is not None:
        config = replace(config, backend=replace(config.backend, seed=seed))
    if dilation is not None:
        config = replace(config, dilation_iterations=dilation)
    config.validate()
    return config
