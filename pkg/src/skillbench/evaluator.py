"""Turning simulation outcomes into verdicts and repair feedback.

The built-in judge is trace-based: a task's predicate is evaluated against
the executed trajectory. Error returns from the simulator (code 1) map to
failing verdicts with rule-templated remedies. A remote adapter is provided
for an external judge; it sends keyframe pose summaries and parses the same
{completed, reasons, solution} verdict object.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass

import requests

from .simulator import SimResult, Trajectory, keyframe_poses

FEEDBACK_TEMPLATE = (
    "Your current action code does not fulfill the task: {task}. "
    "Here is the reason: {reason}. "
    "Here is the suggested solution: {solution}. "
    "Please rewrite the action functions."
)

FEEDBACK_TEMPLATE_NO_REASON = (
    "Your current action code does not fulfill the task: {task}. "
    "Please rewrite the action functions."
)

_ERROR_REMEDIES = {
    "InvalidDof": "use only dof indices 0..n-1 of this entity",
    "BadSpeed": "give every moving dof a speed greater than zero",
    "Timeout": "reduce travel distance or raise speeds",
    "NonFinite": "use finite numbers for every position and speed",
}


@dataclass(frozen=True)
class Verdict:
    completed: bool
    reasons: str = ""
    solution: str = ""

    def __post_init__(self) -> None:
        if not self.completed and not (self.reasons and self.solution):
            raise ValueError("failing verdicts need non-empty reasons and solution")

    def to_obj(self) -> dict:
        return {
            "completed": self.completed,
            "reasons": self.reasons,
            "solution": self.solution,
        }


@dataclass(frozen=True)
class FeedbackMessage:
    task: str
    reason: str
    solution: str
    rendered: str


def evaluate_trace(result: SimResult, task) -> Verdict:
    """Judge a simulation result against the task's predicate. Total."""
    if result.return_code == 1:
        error = result.error
        remedy = _ERROR_REMEDIES.get(error.kind, "fix the reported error")
        return Verdict(completed=False, reasons=error.message, solution=remedy)
    outcome = task.predicate.evaluate(result.trajectory)
    if outcome.ok:
        return Verdict(completed=True)
    return Verdict(completed=False, reasons=outcome.reason, solution=outcome.remedy)


def compose_feedback(verdict: Verdict, task_text: str, include_reason: bool = True) -> FeedbackMessage:
    """Instantiate the repair prompt for a failing verdict."""
    if verdict.completed:
        raise ValueError("feedback is only composed for failing verdicts")
    if include_reason:
        rendered = FEEDBACK_TEMPLATE.format(
            task=task_text, reason=verdict.reasons, solution=verdict.solution
        )
    else:
        rendered = FEEDBACK_TEMPLATE_NO_REASON.format(task=task_text)
    return FeedbackMessage(
        task=task_text,
        reason=verdict.reasons,
        solution=verdict.solution,
        rendered=rendered,
    )


class RemoteEvaluator:
    """HTTP adapter for an external verdict service.

    Sends the task text plus keyframe pose summaries; expects a JSON object
    with keys completed/reasons/solution somewhere in the response body.
    Malformed remote output degrades to a failing verdict rather than an
    exception.
    """

    def __init__(
        self,
        endpoint: str,
        model_id: str = "",
        auth_token_env: str | None = None,
        timeout: float = 60.0,
        attempts: int = 3,
        backoff: float = 0.5,
        session: requests.Session | None = None,
    ) -> None:
        self.endpoint = endpoint
        self.model_id = model_id
        self.auth_token_env = auth_token_env
        self.timeout = timeout
        self.attempts = attempts
        self.backoff = backoff
        self.session = session or requests.Session()

    def evaluate(self, trajectory: Trajectory, task_text: str, image_paths: list[str] | None = None) -> Verdict:
        payload = {
            "model": self.model_id,
            "task": task_text,
            "entity": trajectory.entity_name,
            "keyframes": keyframe_poses(trajectory),
            "images": image_paths or [],
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
                return parse_remote_verdict(response.text)
            except requests.RequestException as exc:
                last_error = exc
                if attempt + 1 < self.attempts:
                    time.sleep(self.backoff * (2**attempt))
        raise RuntimeError(
            f"remote evaluation failed after {self.attempts} attempts: {last_error}"
        )


def parse_remote_verdict(body: str) -> Verdict:
    """Extract a verdict object from a remote response body, tolerantly."""
    obj = None
    try:
        obj = json.loads(body)
    except ValueError:
        decoder = json.JSONDecoder()
        pos = body.find("{")
        while pos != -1:
            try:
                candidate, _ = decoder.raw_decode(body, pos)
            except ValueError:
                candidate = None
            if isinstance(candidate, dict) and "completed" in candidate:
                obj = candidate
                break
            pos = body.find("{", pos + 1)
    if not isinstance(obj, dict) or "completed" not in obj:
        return Verdict(
            completed=False,
            reasons="evaluator output unparseable",
            solution="retry the action or inspect the evaluator endpoint",
        )
    completed = bool(obj.get("completed"))
    if completed:
        return Verdict(completed=True)
    reasons = str(obj.get("reasons") or "remote evaluator reported failure")
    solution = str(obj.get("solution") or "revise the action per the remote evaluator")
    return Verdict(completed=False, reasons=reasons, solution=solution)
