"""Cached fixtures shared by the test modules (built once per session)."""

from __future__ import annotations

from functools import lru_cache

from btparam.generators import fixture
from btparam.parametrization import build_parametrization
from btparam.verification import certify

# name -> depth used by the acceptance runs
ACCEPTANCE_DEPTHS = {"circle-256": 4, "square": 4, "koch-3": 4, "koch-4": 3, "random_bt-42": 4}
ACCEPTANCE_SEED = 7
ACCEPTANCE_SAMPLES = 10_000

# criterion number -> (passed, detail); printed by the terminal summary hook
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


@lru_cache(maxsize=None)
def curve(name: str):
    return fixture(name)


@lru_cache(maxsize=None)
def parametrization(name: str, depth: int):
    return build_parametrization(curve(name), depth)


@lru_cache(maxsize=None)
def report(name: str):
    return certify(curve(name), ACCEPTANCE_DEPTHS[name], ACCEPTANCE_SAMPLES, ACCEPTANCE_SEED, timestamp=False)
