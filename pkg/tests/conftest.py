import os
from functools import lru_cache
from pathlib import Path

import pytest

os.environ["TOPOS_VERIFY"] = "1"

from topos_workbench.config import get_settings  # noqa: E402
from topos_workbench.order_core import resolve_algebra  # noqa: E402

get_settings.cache_clear()

TEST_DATA = Path(__file__).parent / "test_data"

# Heyting algebras every law and soundness test runs over.
ALGEBRA_CORPUS = [
    "chain:1",
    "chain:2",
    "chain:3",
    "chain:4",
    "powerset:1",
    "powerset:2",
    "powerset:3",
    "diamond",
    "downsets:chain:3",
    "downsets:powerset:1",
    "downsets:powerset:2",
    "downsets:powerset:3",
    "downsets:diamond",
    "downsets:V",
]

SMALL_CORPUS = ["chain:2", "chain:3", "diamond", "downsets:powerset:2", "downsets:V"]


@lru_cache(maxsize=None)
def corpus_algebra(spec: str):
    return resolve_algebra(spec)


@pytest.fixture(params=ALGEBRA_CORPUS)
def algebra(request):
    return corpus_algebra(request.param)


@pytest.fixture(params=SMALL_CORPUS)
def small_algebra(request):
    return corpus_algebra(request.param)


@pytest.fixture
def test_data():
    return TEST_DATA
