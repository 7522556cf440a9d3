import sys

import numpy as np
import pytest

from phasemark.embed import EmbedConfig, embed_clip
from phasemark.synthetic import synthetic_clip, synthetic_logo


@pytest.fixture(scope="session")
def logo():
    return synthetic_logo(0)


@pytest.fixture(scope="session")
def studio36():
    return synthetic_clip("studio", 36, seed=0)


@pytest.fixture(scope="session")
def short_clip():
    return synthetic_clip("harbor", 6, seed=3)


@pytest.fixture(scope="session")
def marked_studio(studio36, logo):
    """Watermarked 36-frame clip at T=22 for each transform."""
    return {kind: embed_clip(studio36, logo, EmbedConfig(kind, 22.0)) for kind in ("dft", "scht")}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, detail = results[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
