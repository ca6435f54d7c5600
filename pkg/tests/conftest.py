"""Shared fixtures and random-instance builders."""

from __future__ import annotations

import numpy as np
import pytest

from coded_incentives import (
    PlatformConfig,
    Population,
    WorkerType,
    build_population,
    default_population,
)


@pytest.fixture(scope="session")
def benchmark_population() -> Population:
    return default_population(1400)


@pytest.fixture(scope="session")
def benchmark_config() -> PlatformConfig:
    return PlatformConfig(gamma_time=2000.0, gamma_pay=1.0, total_rows=1000.0)


def random_hetero_instance(
    rng: np.random.Generator, max_types: int = 12
) -> tuple[Population, PlatformConfig]:
    """A mixed population and platform valuation drawn uniformly.

    Half the instances reuse a couple of shared runtime-parameter
    pairs across types, so misreporting between same-behavior types is
    actually possible and the incentive checks bite.
    """
    m = int(rng.integers(2, max_types + 1))
    if rng.random() < 0.5:
        classes = [
            (float(rng.uniform(5.0, 500.0)), float(rng.uniform(0.005, 0.2)))
            for _ in range(2)
        ]
        params = [classes[int(rng.integers(0, 2))] for _ in range(m)]
    else:
        params = [
            (float(rng.uniform(5.0, 500.0)), float(rng.uniform(0.005, 0.2)))
            for _ in range(m)
        ]
    types = [
        WorkerType(
            id=i + 1,
            cost_rate=float(rng.uniform(0.5, 25.0)),
            speed=mu,
            startup=a,
            count=int(rng.integers(1, 200)),
        )
        for i, (mu, a) in enumerate(params)
    ]
    cfg = PlatformConfig(
        gamma_time=float(rng.uniform(1.0, 1e4)),
        gamma_pay=float(rng.uniform(0.1, 10.0)),
        total_rows=float(rng.uniform(100.0, 5000.0)),
    )
    return build_population(types), cfg


def random_cost_only_instance(
    rng: np.random.Generator, max_workers: int = 500
) -> tuple[list[WorkerType], PlatformConfig]:
    """Worker types sharing one runtime behavior, differing in cost."""
    m = int(rng.integers(2, 9))
    mu = float(rng.uniform(1.0, 100.0))
    a = float(rng.uniform(0.01, 2.0))
    budget = int(rng.integers(m, max_workers + 1))
    splits = np.sort(rng.choice(np.arange(1, budget), size=m - 1, replace=False))
    counts = np.diff(np.concatenate([[0], splits, [budget]])).astype(int)
    types = [
        WorkerType(
            id=i + 1,
            cost_rate=float(rng.uniform(0.5, 25.0)),
            speed=mu,
            startup=a,
            count=int(counts[i]),
        )
        for i in range(m)
    ]
    cfg = PlatformConfig(
        gamma_time=float(rng.uniform(1.0, 1e4)),
        gamma_pay=float(rng.uniform(0.1, 10.0)),
        total_rows=float(rng.uniform(100.0, 5000.0)),
    )
    return types, cfg
