"""Fit-call instrumentation.

Every model-building routine (including trees built inside boosting rounds)
bumps this counter; tests use it to prove that recommendation never trains
a base learner.
"""

_fit_counter = 0


def count_fit() -> None:
    global _fit_counter
    _fit_counter += 1


def fit_count() -> int:
    return _fit_counter
