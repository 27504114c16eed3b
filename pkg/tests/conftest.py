import sys
from pathlib import Path

import numpy as np
import pytest

from cliffspec.clifford import Multivector, Paravector
from cliffspec.zoo import gradient_1d, gradient_2d, known_answer_suite, linear

FIXTURES = Path(__file__).parent / "fixtures"


def mv(n, **blades):
    """mv(2, _=1, e1=2, e12=3) -> 1 + 2 e1 + 3 e1e2."""
    out = Multivector.zero(n)
    for key, c in blades.items():
        units = [int(ch) for ch in key[1:]] if key != "_" else []
        out = out + Multivector.blade(n, *units, coeff=c)
    return out


def para(*coords):
    return Paravector(len(coords) - 1, list(coords))


def dirichlet_1d(n=2, bc="dirichlet"):
    return gradient_1d(12, a=linear(1.0, 0.5), bc=bc, n=n)


def model_2d_builder():
    return gradient_2d(5, 5, a1=lambda x, y: 1.0 + 0.5 * x, a2=lambda x, y: 1.0 + 0.25 * y)


def shipped_models():
    """Every model exposed through the CLI presets, as (name, T, spec)."""
    out = []
    for bc in ("dirichlet", "robin"):
        g = dirichlet_1d(bc=bc)
        out.append((f"gradient_1d_{bc}", g.T, g.spec))
    g2 = model_2d_builder()
    out.append(("gradient_2d_dirichlet", g2.T, g2.spec))
    for ka in known_answer_suite(2):
        out.append((ka.name, ka.T, ka.spec))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def model_1d():
    return dirichlet_1d()


@pytest.fixture(scope="session")
def model_2d():
    return model_2d_builder()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)
