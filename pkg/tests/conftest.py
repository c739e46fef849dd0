from __future__ import annotations

import pytest

from hawkes_impact.params import MacroParams
from hawkes_impact.reaction import ReactionFn


@pytest.fixture
def square() -> ReactionFn:
    return ReactionFn.power(1.0, 2.0)


@pytest.fixture
def base() -> MacroParams:
    return MacroParams(alpha=0.5, lam=1.0, mu_star=1.0, kappa=1.0, gamma=0.3)
