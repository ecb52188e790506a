"""Shared fixtures: the canonical well-posed instance used across suites."""

import pytest

from gradlap import ProblemParams, StructureBounds


@pytest.fixture(scope="session")
def canonical_params():
    return ProblemParams(N=3, m=2.0, p=1.2, q=0.3)


@pytest.fixture(scope="session")
def canonical_bounds():
    return StructureBounds(c0=1.0, M1=1.0, M2=0.1, alpha1=2.25, alpha2=1.2)
