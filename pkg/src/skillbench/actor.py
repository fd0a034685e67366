"""Prompt assembly and pluggable text-generation providers.

A provider turns a :class:`PromptBundle` into raw text; this module supplies
a remote chat-completion client plus two deterministic test doubles
(scripted fixtures and a counter-driven kth-try provider). Program extraction
failures are retried with the parse error appended before an iteration is
consumed.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from importlib import resources

import requests

from .entities import EntitySpec, dof_description
from .evaluator import FeedbackMessage
from .programs import ActionProgram, ParseError, parse_program, serialize_program
from .search import SearchOutcome

PARSE_RETRY_BUDGET = 2  # extra generations after the first malformed output


def system_prompt() -> str:
    return resources.files("skillbench").joinpath("data", "actor_prompt.txt").read_text()


@dataclass(frozen=True)
class PromptBundle:
    system: str
    entity: str
    dof_section: str
    related_actions: tuple[tuple[str, str], ...]  # (task_text, serialized program)
    task: str
    feedback: str | None = None

    def render(self) -> str:
        parts = [self.system, "", f"Entity: {self.entity}", "DOF description:", self.dof_section]
        if self.related_actions:
            parts.append("")
            parts.append("Related actions, most similar first:")
            for task_text, program_text in self.related_actions:
                parts.append(f"# {task_text}")
                parts.append(program_text.rstrip())
        parts.append("")
        parts.append(f"Target task: {self.task}")
        if self.feedback:
            parts.append("")
            parts.append(self.feedback)
        return "\n".join(parts)


@dataclass(frozen=True)
class ActorFailure:
    reason: str


def build_prompt(
    task: str,
    outcome: SearchOutcome,
    entity: EntitySpec,
    feedback: FeedbackMessage | None = None,
) -> PromptBundle:
    """Assemble the actor prompt from search results and the DOF description."""
    if outcome.kind == "ExactMatch":
        raise ValueError("ExactMatch outcomes bypass the actor; no prompt is built")
    related = []
    for record in outcome.records:
        if record.entity != entity.name:
            raise ValueError(
                f"record entity {record.entity!r} does not match task entity {entity.name!r}"
            )
        related.append((record.task_text, serialize_program(record.program)))
    return PromptBundle(
        system=system_prompt(),
        entity=entity.name,
        dof_section=dof_description(entity),
        related_actions=tuple(related),
        task=task,
        feedback=feedback.rendered if feedback else None,
    )


def generate(prompt: PromptBundle, provider) -> str:
    """One provider call; increments the provider's call counter."""
    return provider.generate(prompt)


class ScriptedProvider:
    """Deterministic provider keyed by (entity, task text)."""

    def __init__(self, fixtures: dict[tuple[str, str], str]) -> None:
        self.fixtures = dict(fixtures)
        self.call_count = 0
        self._lock = threading.Lock()

    def generate(self, prompt: PromptBundle) -> str:
        with self._lock:
            self.call_count += 1
        key = (prompt.entity, prompt.task)
        if key not in self.fixtures:
            return f"no scripted fixture for task {prompt.task!r}"
        return self.fixtures[key]

    @classmethod
    def from_dir(cls, path: str) -> "ScriptedProvider":
        """Load fixtures from a directory of ``<entity>__<slug>.txt`` files.

        Each file starts with a ``# task: <entity>|<text>`` header line; the
        remainder is the raw provider output.
        """
        fixtures: dict[tuple[str, str], str] = {}
        for name in sorted(os.listdir(path)):
            if not name.endswith(".txt"):
                continue
            with open(os.path.join(path, name), encoding="utf-8") as fh:
                content = fh.read()
            first, _, rest = content.partition("\n")
            if not first.startswith("# task:"):
                raise ValueError(f"{name}: missing '# task: <entity>|<text>' header")
            entity, _, task = first[len("# task:") :].strip().partition("|")
            fixtures[(entity.strip(), task.strip())] = rest
        return cls(fixtures)


NOOP_PROGRAM_TEXT = serialize_program(ActionProgram())


class KthTryProvider:
    """Succeeds on the k-th call for each task; earlier calls return filler.

    ``filler="noop"`` returns a parseable no-op program (fails evaluation, so
    each early call consumes a full loop iteration); ``filler="garbage"``
    returns unparseable text (exercises the parse-retry path instead).
    """

    def __init__(
        self,
        fixtures: dict[tuple[str, str], str],
        k: int,
        filler: str = "noop",
    ) -> None:
        if k < 1:
            raise ValueError("k must be >= 1")
        if filler not in ("noop", "garbage"):
            raise ValueError("filler must be 'noop' or 'garbage'")
        self.fixtures = dict(fixtures)
        self.k = k
        self.filler = filler
        self.call_count = 0
        self._per_task: dict[tuple[str, str], int] = {}
        self._lock = threading.Lock()

    def generate(self, prompt: PromptBundle) -> str:
        key = (prompt.entity, prompt.task)
        with self._lock:
            self.call_count += 1
            self._per_task[key] = self._per_task.get(key, 0) + 1
            nth = self._per_task[key]
        if nth < self.k:
            if self.filler == "garbage":
                return f"sorry, attempt {nth} produced no usable action block"
            return NOOP_PROGRAM_TEXT
        return self.fixtures.get(key, NOOP_PROGRAM_TEXT)


class RemoteProvider:
    """Chat-style HTTP completion client with bounded retries.

    Request: {model, messages: [{role, content}...], temperature}.
    Response: {text} or OpenAI-style {choices: [{message: {content}}]}.
    Requests and responses are appended to ``log_path`` (auth redacted) when
    configured, for replay.
    """

    def __init__(
        self,
        endpoint: str,
        model_id: str,
        auth_token_env: str | None = None,
        temperature: float = 0.0,
        timeout: float = 120.0,
        attempts: int = 3,
        backoff: float = 0.5,
        log_path: str | None = None,
        session: requests.Session | None = None,
    ) -> None:
        self.endpoint = endpoint
        self.model_id = model_id
        self.auth_token_env = auth_token_env
        self.temperature = temperature
        self.timeout = timeout
        self.attempts = attempts
        self.backoff = backoff
        self.log_path = log_path
        self.session = session or requests.Session()
        self.call_count = 0
        self._lock = threading.Lock()

    def generate(self, prompt: PromptBundle) -> str:
        with self._lock:
            self.call_count += 1
        payload = {
            "model": self.model_id,
            "messages": [
                {"role": "system", "content": prompt.system},
                {"role": "user", "content": prompt.render()},
            ],
            "temperature": self.temperature,
        }
        headers = {"Content-Type": "application/json"}
        if self.auth_token_env:
            token = os.environ.get(self.auth_token_env)
            if token:
                headers["Authorization"] = f"Bearer {token}"
        last_error: Exception | None = None
        for attempt in range(self.attempts):
            try:
                response = self.session.post(
                    self.endpoint, json=payload, headers=headers, timeout=self.timeout
                )
                response.raise_for_status()
                body = response.json()
                text = self._extract_text(body)
                self._log(payload, body)
                return text
            except (requests.RequestException, ValueError, KeyError) as exc:
                last_error = exc
                if attempt + 1 < self.attempts:
                    time.sleep(self.backoff * (2**attempt))
        raise RuntimeError(
            f"provider request failed after {self.attempts} attempts: {last_error}"
        )

    @staticmethod
    def _extract_text(body: dict) -> str:
        if "text" in body:
            return str(body["text"])
        return str(body["choices"][0]["message"]["content"])

    def _log(self, payload: dict, body: dict) -> None:
        if not self.log_path:
            return
        entry = {"request": payload, "response": body}
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry) + "\n")


def obtain_program(
    task: str,
    outcome: SearchOutcome,
    entity: EntitySpec,
    feedback: FeedbackMessage | None,
    provider,
) -> ActionProgram | ActorFailure:
    """Generate and parse a program, retrying malformed output.

    Up to PARSE_RETRY_BUDGET extra generations are made with the parse error
    appended; exhaustion yields an :class:`ActorFailure` carrying the last
    error, which the caller routes through the evaluator's error path.
    """
    bundle = build_prompt(task, outcome, entity, feedback)
    last_error = "no attempts made"
    for attempt in range(1 + PARSE_RETRY_BUDGET):
        raw = generate(bundle, provider)
        try:
            return parse_program(raw, entity)
        except ParseError as exc:
            last_error = str(exc)
            retry_note = (
                f"{feedback.rendered}\nYour previous output could not be parsed: {exc}"
                if feedback
                else f"Your previous output could not be parsed: {exc}"
            )
            bundle = PromptBundle(
                system=bundle.system,
                entity=bundle.entity,
                dof_section=bundle.dof_section,
                related_actions=bundle.related_actions,
                task=bundle.task,
                feedback=retry_note,
            )
    return ActorFailure(reason=last_error)
