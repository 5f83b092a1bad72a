from __future__ import annotations

from pathlib import Path

import pytest

from kcir import BINARY, Alphabet, CausalSignal

CIRCUITS_DIR = Path(__file__).resolve().parents[1] / "circuits"


def bits(text: str) -> CausalSignal:
    """Binary causal signal from a compact bit string, e.g. bits('0101')."""
    return CausalSignal.from_samples(BINARY, tuple(text))


def sig(alphabet: Alphabet, *samples: str) -> CausalSignal:
    return CausalSignal.from_samples(alphabet, samples)


@pytest.fixture
def circuits_dir() -> Path:
    return CIRCUITS_DIR
