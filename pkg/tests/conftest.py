import numpy as np
import pytest

from chaosrng import (builtin_pair, generate_bits, refine, steady_state_for,
                      uniform_certificate)

BUILTINS = ("bernoulli", "tent", "example", "dec-bernoulli", "tailed-tent", "zigzag")

#: maps whose invariant density is certified uniform
CERTIFIED = ("bernoulli", "tent", "tailed-tent", "zigzag")


@pytest.fixture(scope="session")
def pairs():
    return {name: builtin_pair(name) for name in BUILTINS}


@pytest.fixture(scope="session")
def densities(pairs):
    return {name: steady_state_for(m) for name, (m, _) in pairs.items()}


@pytest.fixture(scope="session")
def tables10(pairs, densities):
    out = {}
    for name, (m, gen) in pairs.items():
        dens = None if uniform_certificate(m) else densities[name]
        out[name] = refine(m, gen, 10, density=dens)
    return out


@pytest.fixture(scope="session")
def streams1m(pairs, densities):
    """One million seeded bits per builtin map."""
    return {name: generate_bits(m, gen, densities[name], 1_000_000, seed=2024)
            for name, (m, gen) in pairs.items()}


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
