import dataclasses

import pytest

from hqnet.scenario import load_named_scenario
from hqnet.simulate import generate


def shortened(cfg, duration_s, seed=None):
    run = dataclasses.replace(
        cfg.run,
        duration_s=duration_s,
        seed=cfg.run.seed if seed is None else seed,
    )
    return dataclasses.replace(cfg, run=run)


@pytest.fixture(scope="session")
def storage_cfg():
    return load_named_scenario("storage_retrieval")


@pytest.fixture(scope="session")
def storage_stream(storage_cfg):
    """Short storage run shared across analysis tests."""
    return generate(shortened(storage_cfg, 2.0))


@pytest.fixture(scope="session")
def passthrough_cfg():
    return load_named_scenario("source_characterization")


@pytest.fixture(scope="session")
def passthrough_stream(passthrough_cfg):
    return generate(shortened(passthrough_cfg, 2.0))
