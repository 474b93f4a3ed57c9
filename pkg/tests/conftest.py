"""Shared synthetic fixtures: four well-separated registers plus mixtures.

Sizes are chosen so pair sampling at sample_size=300 has plenty of slack
while the whole suite stays fast.
"""

import pytest

from regvar import select_features, C3
from regvar.synthetic import SyntheticLanguage

WORDS = 24_000
SEED = 1234


@pytest.fixture(scope="session")
def lang():
    return SyntheticLanguage(("tw", "wk", "cc", "r4"), block_size=400, core_size=400)


@pytest.fixture(scope="session")
def tw_stream(lang):
    return lang.register_stream("tw_syn", "tw", WORDS, seed=11)


@pytest.fixture(scope="session")
def wk_stream(lang):
    return lang.register_stream("wk_syn", "wk", WORDS, seed=22)


@pytest.fixture(scope="session")
def cc_stream(lang):
    return lang.register_stream("cc_syn", "cc", WORDS, seed=33)


@pytest.fixture(scope="session")
def bg_stream(lang):
    return lang.background_stream("bg_syn", 30_000, seed=44)


@pytest.fixture(scope="session")
def mix2_stream(lang):
    return lang.mixture_stream("mix2_syn", ["tw", "wk"], WORDS, seed=55, block_words=300)


@pytest.fixture(scope="session")
def mix4_stream(lang):
    return lang.mixture_stream(
        "mix4_syn", ["tw", "wk", "cc", "r4"], WORDS, seed=66, block_words=300
    )


@pytest.fixture(scope="session")
def space_c3(bg_stream):
    return select_features(bg_stream, C3, k=800)
