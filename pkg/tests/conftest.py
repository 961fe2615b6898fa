"""Shared strategies for randomized checks."""

from __future__ import annotations

from hypothesis import strategies as st

from dyadlab.dyadic import DyadicSet, all_words
from dyadlab.transform import PrefixExchange


def exchange_strategy(max_level: int = 3):
    """Random exchanges drawn from permutations of level cylinders."""

    def at_level(level: int):
        ws = all_words(level)
        return st.permutations(ws).map(
            lambda images: PrefixExchange(tuple(zip(ws, images)))
        )

    return st.integers(min_value=0, max_value=max_level).flatmap(at_level)


def set_strategy(max_word_length: int = 5, max_words: int = 8):
    """Random canonical dyadic sets."""
    return st.lists(
        st.text(alphabet="01", min_size=0, max_size=max_word_length),
        min_size=0,
        max_size=max_words,
    ).map(DyadicSet.from_words)
