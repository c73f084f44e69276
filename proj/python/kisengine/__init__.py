# Copyright 2026 The KIS Engine Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Known-item search over shot-segmented video.

Thin wrapper over the C++ core. Queries, ranked lists, tasks and logs are
plain dicts and lists in the same shape as the HTTP wire format.
"""

from __future__ import annotations

import json
from typing import Any, Iterable, Mapping, Optional, Sequence

from . import _kisengine as _core
from ._kisengine import (
    InvalidQuery,
    KisError,
    LoadError,
    ModalityError,
    ParseError,
    SessionError,
    canonical_concept_query,
    eval_concept_query,
    rgb_to_lab,
    tokenize,
)

__all__ = [
    "Engine",
    "Service",
    "KisError",
    "LoadError",
    "InvalidQuery",
    "ParseError",
    "ModalityError",
    "SessionError",
    "canonical_concept_query",
    "eval_concept_query",
    "rgb_to_lab",
    "tokenize",
    "fuse",
    "replay",
    "run_harness",
    "task_around_shot",
    "write_synthetic",
]


def _dump(value: Any) -> str:
    return "" if value is None else json.dumps(value)


class Engine:
    """Corpus plus every index built from it. Immutable once loaded."""

    def __init__(self, core: _core.Engine):
        self._core = core

    @classmethod
    def from_manifest(cls, path: str, config: Optional[Mapping[str, Any]] = None) -> "Engine":
        return cls(_core.Engine.from_manifest(str(path), _dump(config)))

    @classmethod
    def synthetic(cls, config: Optional[Mapping[str, Any]] = None, **options: Any) -> "Engine":
        """Generated corpus; options as for write_synthetic."""
        return cls(_core.Engine.synthetic(_dump(options), _dump(config)))

    @property
    def shot_count(self) -> int:
        return self._core.shot_count

    def shot_ids(self) -> list[str]:
        return self._core.shot_ids()

    def fingerprint(self) -> int:
        return self._core.fingerprint()

    def config(self) -> dict:
        return json.loads(self._core.config_json())

    def query(self, query: Mapping[str, Any]) -> dict:
        return json.loads(self._core.query(json.dumps(query)))

    def group_by_video(self, ranked: Mapping[str, Any]) -> list[dict]:
        return json.loads(self._core.group_by_video(json.dumps(ranked)))

    def signature(self, shot_id: str) -> dict:
        return json.loads(self._core.signature(shot_id))

    def sketch_for_shot(self, shot_id: str, level: str = "frame") -> dict:
        return json.loads(self._core.sketch_for_shot(shot_id, level))

    def concepts(self, prefix: str = "", bank: str = "concept", limit: int = 20) -> list[str]:
        return self._core.concepts(prefix, bank, limit)

    def recommend(self, x: float, y: float, n: int = 8) -> list[dict]:
        return json.loads(self._core.recommend(x, y, n))

    def verdict(self, shot_id: str) -> dict:
        return json.loads(self._core.verdict(shot_id))

    def keyframe(self, shot_id: str) -> bytes:
        return self._core.keyframe(shot_id)


class Service:
    """Search sessions over one engine. Uses a simulated clock unless
    simulated_clock is False."""

    def __init__(self, engine: Engine, tasks: Sequence[Mapping[str, Any]] = (), simulated_clock: bool = True,
                 start: float = 0.0):
        self.engine = engine
        self._core = _core.Service(engine._core, json.dumps(list(tasks)), simulated_clock, start)

    def set_time(self, t: float) -> None:
        self._core.set_time(t)

    def advance(self, dt: float) -> None:
        self._core.advance(dt)

    def create_session(self, task_id: Optional[str] = None) -> str:
        return self._core.create_session(task_id)

    def query(self, session_id: str, query: Mapping[str, Any]) -> dict:
        return json.loads(self._core.query(session_id, json.dumps(query)))

    def results(self, session_id: str, view: str = "grouped") -> dict:
        return json.loads(self._core.results(session_id, view))

    def mark_positive(self, session_id: str, shot_id: str) -> None:
        self._core.mark_positive(session_id, shot_id)

    def feedback(self, session_id: str, lambda_: Optional[float] = None) -> dict:
        return json.loads(self._core.feedback(session_id, lambda_))

    def submit(self, session_id: str, shot_id: str) -> tuple[bool, float]:
        return self._core.submit(session_id, shot_id)

    def log(self, session_id: str) -> list[dict]:
        return json.loads(self._core.log(session_id))

    def score(self, session_id: str) -> float:
        return self._core.score(session_id)


def fuse(lists: Iterable[Mapping[str, Any]], weights: Sequence[float], k: float = 60.0) -> dict:
    """Weighted reciprocal-rank fusion of ranked lists."""
    return json.loads(_core.fuse(json.dumps(list(lists)), list(weights), k))


def replay(engine: Engine, log: Sequence[Mapping[str, Any]], task: Optional[Mapping[str, Any]] = None) -> dict:
    return json.loads(_core.replay(engine._core, json.dumps(list(log)), _dump(task)))


def run_harness(engine: Engine, tasks: Sequence[Mapping[str, Any]], agent: Any) -> dict:
    return json.loads(_core.run_harness(engine._core, json.dumps(list(tasks)), json.dumps(agent)))


def task_around_shot(engine: Engine, shot_id: str, task_id: str, budget_s: float = 300.0) -> dict:
    return json.loads(_core.task_around_shot(engine._core, shot_id, task_id, budget_s))


def write_synthetic(directory: str, **options: Any) -> str:
    """Writes a generated corpus and returns the manifest path.

    Options: videos, shots_per_video, width, height, seed, concept_labels,
    object_labels, black_and_white_share, letterbox_share, text.
    """
    return _core.write_synthetic(str(directory), _dump(options))
