"""Shared fixtures and deterministic test doubles."""

import math


def pytest_runtest_logreport(report):
    # The whole-system checks double as a human-readable checklist.
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        status = "PASS" if report.passed else "FAIL"
        print(f"{status}: {report.nodeid.split('::')[-1]}")

import pytest

from skillbench.embedding import Embedding
from skillbench.entities import load_all_entities, load_builtin_entity
from skillbench.programs import ActionProgram, serialize_program
from skillbench.store import ActionRecord


class StubEmbedder:
    """Returns preassigned unit vectors per text; unknown texts get a default.

    Lets tests construct exact cosine scores instead of relying on the
    hashing embedder's incidental geometry.
    """

    def __init__(self, vectors: dict[str, tuple[float, ...]], dimension: int = 4):
        self.vectors = dict(vectors)
        self.dimension = dimension

    def embed(self, text: str) -> Embedding:
        if text in self.vectors:
            return Embedding(values=self.vectors[text])
        fallback = [0.0] * self.dimension
        fallback[-1] = 1.0
        return Embedding(values=tuple(fallback))


def unit(*values: float) -> tuple[float, ...]:
    norm = math.sqrt(sum(v * v for v in values))
    return tuple(v / norm for v in values)


def record_for(entity: str, task_text: str, vector: tuple[float, ...],
               program: ActionProgram | None = None) -> ActionRecord:
    return ActionRecord(
        id=f"{entity}:{task_text}",
        entity=entity,
        task_text=task_text,
        program=program or ActionProgram(),
        embedding=Embedding(values=vector),
        provenance="Seed",
    )


class CountingProvider:
    """Wraps a provider, recording every prompt it sees."""

    def __init__(self, inner):
        self.inner = inner
        self.prompts = []
        self.call_count = 0

    def generate(self, prompt):
        self.call_count += 1
        self.prompts.append(prompt)
        return self.inner.generate(prompt)


def scripted_text(program: ActionProgram, prose: str = "Here is the action.") -> str:
    return f"{prose}\n{serialize_program(program)}"


@pytest.fixture(scope="session")
def entities():
    return load_all_entities()


@pytest.fixture(scope="session")
def cartpole():
    return load_builtin_entity("Cartpole")


@pytest.fixture(scope="session")
def human():
    return load_builtin_entity("Human")
