"""Policies that produce raw planning-round text for the runner.

Every backend, scripted or remote, receives the same request object and
returns untrusted text; the runner owns parsing and validation.
"""
from __future__ import annotations

import base64
import json
import os
import random
import time
from dataclasses import dataclass, field

import requests

from .errors import RecordingExhausted, RemoteBackendError
from .oracles import oracle_output
from .tasks import TaskSpec
from .world import SceneState


@dataclass(frozen=True)
class PolicyRequest:
    task: TaskSpec
    state: SceneState
    prompt: str
    observations: tuple[bytes, ...] = ()  # PNG payloads, ego then third person
    round_index: int = 0


class Policy:
    """Interface: turn a request into raw wire-format text."""

    name = "policy"

    def propose(self, request: PolicyRequest) -> str:
        raise NotImplementedError

    def reset(self, seed: int) -> None:
        """Called once per episode before the first round."""


class OraclePolicy(Policy):
    """Scripted solver that reads the true state and ignores the prompt."""

    name = "oracle"

    def propose(self, request: PolicyRequest) -> str:
        return oracle_output(request.task, request.state)


class RandomPolicy(Policy):
    """Uniform coin-flip arm assignment for the spatial tier.

    For planning tiers it emits an empty plan, which scores as a failure;
    the random baseline is only meaningful for spatial scoring.
    """

    name = "random"

    def __init__(self, seed: int = 0):
        self._seed = seed
        self._rng = random.Random(seed)

    def reset(self, seed: int) -> None:
        self._rng = random.Random((self._seed << 32) ^ seed)

    def propose(self, request: PolicyRequest) -> str:
        if request.task.tier == "spatial":
            results = [{"object": oid, "use_arm": self._rng.choice(("left", "right"))}
                       for oid in request.state.targets]
            return json.dumps({"visual_state_description": "random guess",
                               "results": results})
        return json.dumps({
            "visual_state_description": "random baseline",
            "reasoning_and_reflection": "",
            "language_plan": "",
            "executable_plan": [],
        })


class ReplayPolicy(Policy):
    """Plays back a recorded sequence of raw round outputs verbatim."""

    name = "replay"

    def __init__(self, outputs):
        self._outputs = list(outputs)
        self._cursor = 0

    def reset(self, seed: int) -> None:
        self._cursor = 0

    def propose(self, request: PolicyRequest) -> str:
        if self._cursor >= len(self._outputs):
            raise RecordingExhausted(
                f"recording has {len(self._outputs)} rounds, "
                f"round {self._cursor} requested")
        out = self._outputs[self._cursor]
        self._cursor += 1
        return out


@dataclass(frozen=True)
class RemoteModelConfig:
    endpoint: str
    model: str
    credential_env: str = "MODEL_API_KEY"
    temperature: float = 0.0
    max_tokens: int = 2048
    timeout_s: float = 120.0
    max_retries: int = 3
    backoff_s: float = 2.0
    extra_headers: dict = field(default_factory=dict)


class RemoteModelPolicy(Policy):
    """Chat-completions client for a vision-language model endpoint.

    The API credential is read from the environment at call time and is
    used only in the request header; it never appears in logs, errors,
    or serialized episode records.
    """

    name = "remote"

    def __init__(self, config: RemoteModelConfig):
        self.config = config

    def _credential(self) -> str:
        key = os.environ.get(self.config.credential_env, "")
        if not key:
            raise RemoteBackendError(
                f"environment variable {self.config.credential_env} is not set")
        return key

    def _payload(self, request: PolicyRequest) -> dict:
        content = [{"type": "text", "text": request.prompt}]
        for png in request.observations:
            b64 = base64.b64encode(png).decode("ascii")
            content.append({"type": "image_url",
                            "image_url": {"url": f"data:image/png;base64,{b64}"}})
        return {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
            "messages": [{"role": "user", "content": content}],
        }

    def propose(self, request: PolicyRequest) -> str:
        headers = {"Authorization": f"Bearer {self._credential()}",
                   "Content-Type": "application/json"}
        headers.update(self.config.extra_headers)
        payload = self._payload(request)
        last_error = "no attempts made"
        for attempt in range(self.config.max_retries):
            try:
                resp = requests.post(self.config.endpoint, json=payload,
                                     headers=headers, timeout=self.config.timeout_s)
            except requests.RequestException as exc:
                last_error = type(exc).__name__
            else:
                if resp.status_code == 200:
                    body = resp.json()
                    return body["choices"][0]["message"]["content"]
                last_error = f"HTTP {resp.status_code}"
                if resp.status_code not in (429, 500, 502, 503, 504):
                    break
            time.sleep(self.config.backoff_s * (2 ** attempt))
        raise RemoteBackendError(f"remote backend failed: {last_error}")


def make_policy(backend: str, seed: int = 0, **kwargs) -> Policy:
    """Build a policy from a CLI backend name."""
    if backend == "oracle":
        return OraclePolicy()
    if backend == "random":
        return RandomPolicy(seed)
    if backend == "remote":
        return RemoteModelPolicy(RemoteModelConfig(**kwargs))
    raise ValueError(f"unknown backend {backend!r}")
