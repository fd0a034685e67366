"""Skill-learning harness for articulated entities.

A growing library of verified motion skills, a retrieval searcher over task
descriptions, a pluggable text-generation actor with repair feedback, a
deterministic joint-space simulator, and a benchmark harness with
pass-rate-per-iteration reporting.
"""

__version__ = "0.1.0"
