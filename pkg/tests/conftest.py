import os
import sys

import hypothesis
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from mapcheck.model import load_graph  # noqa: E402

hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=20, deadline=None)
hypothesis.settings.register_profile("default", deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
MODELS = os.path.join(ROOT, "models")

FIG2_TEXT = """\
states 5
init 4
accept 2 4
edge 4 3
edge 3 1
edge 1 2
edge 2 3
"""


@pytest.fixture
def fig2():
    return load_graph(FIG2_TEXT, name="fig2")


@pytest.fixture
def models_dir():
    return MODELS
