"""Per-face gender and emotion annotation.

Faces are annotated either by a remote detection service (HTTP POST of the
painting URL, JSON back) or by a deterministic offline stub, so the whole
pipeline can run without network access. Each face carries a gender label
and eight emotion confidence coefficients; the happiness coefficient is the
emotion index used by every downstream statistic.
"""

from __future__ import annotations

import hashlib
import json
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

EMOTION_KEYS = (
    "anger",
    "contempt",
    "disgust",
    "fear",
    "happiness",
    "neutral",
    "sadness",
    "surprise",
)

GENDERS = ("male", "female")

# Weighted face-count distribution for the stub, over 0..4 faces.
_STUB_FACE_WEIGHTS = (22, 34, 22, 14, 8)


class FaceResponseError(ValueError):
    """The detection service returned a payload that violates the contract."""


class EmotionBackendError(RuntimeError):
    """Transport-level failure talking to the detection service."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


@dataclass(frozen=True)
class FaceAnnotation:
    """Gender plus the eight emotion coefficients for one detected face."""

    gender: str
    emotions: Mapping[str, float]

    def __post_init__(self):
        if self.gender not in GENDERS:
            raise ValueError(f"unknown gender label: {self.gender!r}")
        keys = tuple(self.emotions.keys())
        if sorted(keys) != sorted(EMOTION_KEYS):
            missing = [k for k in EMOTION_KEYS if k not in self.emotions]
            extra = [k for k in keys if k not in EMOTION_KEYS]
            raise ValueError(
                f"emotion keys must be exactly {EMOTION_KEYS}; "
                f"missing={missing} extra={extra}"
            )
        for key in EMOTION_KEYS:
            value = self.emotions[key]
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"emotion {key} out of range: {value}")
        # Freeze into canonical key order so serialization is reproducible.
        object.__setattr__(
            self, "emotions", {k: float(self.emotions[k]) for k in EMOTION_KEYS}
        )

    @property
    def happiness(self) -> float:
        """Canonical emotion index."""
        return self.emotions["happiness"]

    def to_dict(self) -> dict:
        return {"gender": self.gender, "emotions": dict(self.emotions)}

    @classmethod
    def from_dict(cls, data: Mapping) -> "FaceAnnotation":
        return cls(gender=data["gender"], emotions=data["emotions"])


def parse_face_response(body: str) -> list[FaceAnnotation]:
    """Parse the detection service's JSON array into annotations.

    Each element must contain ``faceAttributes`` with a ``gender`` label and
    an ``emotion`` object holding all eight coefficients in [0, 1]. Unknown
    keys anywhere in the document are ignored.
    """
    try:
        document = json.loads(body)
    except json.JSONDecodeError as exc:
        raise FaceResponseError(f"response is not valid JSON: {exc}") from exc
    if not isinstance(document, list):
        raise FaceResponseError("response is not a JSON array")
    annotations = []
    for index, element in enumerate(document):
        if not isinstance(element, dict) or "faceAttributes" not in element:
            raise FaceResponseError(f"face {index}: missing faceAttributes")
        attributes = element["faceAttributes"]
        if not isinstance(attributes, dict):
            raise FaceResponseError(f"face {index}: faceAttributes is not an object")
        gender = attributes.get("gender")
        if gender not in GENDERS:
            raise FaceResponseError(f"face {index}: unknown gender label: {gender!r}")
        emotion = attributes.get("emotion")
        if not isinstance(emotion, dict):
            raise FaceResponseError(f"face {index}: missing emotion object")
        coefficients = {}
        for key in EMOTION_KEYS:
            if key not in emotion:
                raise FaceResponseError(f"missing emotion key: {key}")
            value = emotion[key]
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise FaceResponseError(f"emotion {key} is not a number: {value!r}")
            if not 0.0 <= value <= 1.0:
                raise FaceResponseError(f"emotion {key} out of range: {value}")
            coefficients[key] = float(value)
        annotations.append(FaceAnnotation(gender=gender, emotions=coefficients))
    return annotations


def serialize_face_response(annotations: Sequence[FaceAnnotation]) -> str:
    """Inverse of parse_face_response for valid annotation lists."""
    document = [
        {"faceAttributes": {"gender": a.gender, "emotion": dict(a.emotions)}}
        for a in annotations
    ]
    return json.dumps(document)


def stub_annotate(seed: int, painting_id: str) -> list[FaceAnnotation]:
    """Deterministic pseudo-random annotations for offline runs.

    The same (seed, painting_id) always yields the same faces: 0..4 of them,
    each with eight non-negative coefficients summing to 1 and a
    pseudo-random gender.
    """
    digest = hashlib.sha256(f"{seed}|{painting_id}".encode("utf-8")).digest()
    rng = random.Random(int.from_bytes(digest[:8], "big"))
    n_faces = rng.choices(range(5), weights=_STUB_FACE_WEIGHTS)[0]
    faces = []
    for _ in range(n_faces):
        weights = [rng.uniform(0.02, 1.0) for _ in EMOTION_KEYS]
        dominant = rng.randrange(len(EMOTION_KEYS))
        weights[dominant] += rng.uniform(1.0, 6.0)
        total = sum(weights)
        emotions = {k: w / total for k, w in zip(EMOTION_KEYS, weights)}
        gender = "female" if rng.random() < 0.5 else "male"
        faces.append(FaceAnnotation(gender=gender, emotions=emotions))
    return faces


@dataclass
class StubBackend:
    """Offline backend; annotations depend only on (seed, painting id)."""

    seed: int = 0
    kind: str = field(default="stub", init=False)

    def annotate(self, url: str | None, painting_id: str) -> list[FaceAnnotation]:
        return stub_annotate(self.seed, painting_id)


# Statuses worth retrying: rate limiting and transient server errors.
_RETRYABLE_STATUSES = frozenset({429, 500, 502, 503, 504})


@dataclass
class RemoteBackend:
    """HTTP client for a face-detection service.

    POSTs ``{"url": <painting_url>}`` and expects the JSON array handled by
    parse_face_response. Transport failures and rate limiting are retried
    with exponential backoff up to ``retry_budget`` total attempts; schema
    violations are not retried.
    """

    endpoint: str
    api_key: str | None = None
    api_key_header: str = "X-Api-Key"
    retry_budget: int = 3
    backoff_base: float = 1.0
    timeout: float = 30.0
    post: Callable | None = None
    sleep: Callable[[float], None] = time.sleep
    kind: str = field(default="remote", init=False)

    def _do_post(self, url: str):
        if self.post is not None:
            return self.post(url)
        import requests

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers[self.api_key_header] = self.api_key
        return requests.post(
            self.endpoint, json={"url": url}, headers=headers, timeout=self.timeout
        )

    def annotate(self, url: str | None, painting_id: str) -> list[FaceAnnotation]:
        if not url:
            raise EmotionBackendError("record has no painting URL to annotate")
        last_error: EmotionBackendError | None = None
        for attempt in range(1, self.retry_budget + 1):
            try:
                response = self._do_post(url)
            except (OSError, IOError) as exc:
                last_error = EmotionBackendError(f"transport failure: {exc}")
            else:
                status = getattr(response, "status_code", 200)
                if status == 200:
                    return parse_face_response(response.text)
                if status in _RETRYABLE_STATUSES:
                    reason = "rate limited" if status == 429 else "server error"
                    last_error = EmotionBackendError(
                        f"{reason} (HTTP {status})", status=status
                    )
                else:
                    raise EmotionBackendError(
                        f"request rejected (HTTP {status})", status=status
                    )
            if attempt < self.retry_budget:
                self.sleep(self.backoff_base * 2 ** (attempt - 1))
        assert last_error is not None
        raise last_error


def painting_identity(record) -> str:
    """Stable stub id for a record: name and artist, independent of URL."""
    return f"{record.painting_name}|{record.artist}"


def annotate_painting(backend, record) -> list[FaceAnnotation]:
    """Run one record through a backend and return its face annotations.

    Zero faces is a normal outcome. Callers cache the result on the record
    so later statistics never re-hit the service.
    """
    return backend.annotate(
        url=getattr(record, "painting_url", None),
        painting_id=painting_identity(record),
    )
