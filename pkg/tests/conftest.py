import numpy as np
import pytest

from imagineer.priors import fit_noun_map, fit_priors
from imagineer.scene import CATALOG
from imagineer.priors import NounMap
from imagineer.synth import generate_synthetic

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def record(number: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def corpus():
    return generate_synthetic(240, seed=11)


@pytest.fixture(scope="session")
def fitted(corpus):
    pairs = [(d, e.scene) for e in corpus for d in (e.desc_a, e.desc_b)]
    nm = fit_noun_map(pairs)
    pt = fit_priors(pairs, nm, seed=0)
    return pt, nm


@pytest.fixture(scope="session")
def catalog_nouns():
    """Every catalog name maps to its own object."""
    return NounMap({name: k for k, name in enumerate(CATALOG)})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
