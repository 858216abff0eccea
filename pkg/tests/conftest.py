import numpy as np
import pytest

from misac.edge import QueueState, SystemState
from misac.scenario import make_fleet
from misac.sensing import AoIVector


def build_state(cfg, *, a_tans=None, backlogs=None, ages=None, z=0.0, seed=0):
    """System snapshot with chosen AoI, backlogs and virtual queue."""
    rng = np.random.default_rng(seed)
    vehicles = tuple(make_fleet(cfg, rng))
    a_tans = a_tans if a_tans is not None else [1] * cfg.K
    backlogs = backlogs if backlogs is not None else [0.0] * cfg.K
    ages = ages if ages is not None else [0] * cfg.K
    aoi = tuple(AoIVector(1, int(a)) for a in a_tans)
    queues = tuple(
        QueueState(backlog=float(b), pending_task_age=(int(g) if b > 0 else None))
        for b, g in zip(backlogs, ages))
    return SystemState(vehicles=vehicles, aoi=aoi, queues=queues, z=float(z))


def random_state(cfg, rng):
    """Generic random snapshot; z strictly positive and continuous backlogs
    keep the greedy/brute-force comparison free of exact ties."""
    from misac.scenario import vehicle_from_position
    import dataclasses

    vehicles = []
    for _ in range(cfg.K):
        x = rng.uniform(-cfg.road_length / 2, cfg.road_length / 2)
        vx = rng.uniform(5.0, 25.0) * (1 if rng.random() < 0.5 else -1)
        v = vehicle_from_position(x, cfg.road_offset, vx, d_min=cfg.d_min)
        v = dataclasses.replace(
            v,
            d_hat=v.d + rng.normal(0.0, 0.5),
            theta_hat=v.theta + rng.normal(0.0, 0.02),
        )
        vehicles.append(v)
    aoi = tuple(AoIVector(1, int(rng.integers(1, 200))) for _ in range(cfg.K))
    queues = []
    for _ in range(cfg.K):
        if rng.random() < 0.5:
            queues.append(QueueState())
        else:
            queues.append(QueueState(backlog=float(rng.uniform(0.05, 3.0) * cfg.C_k),
                                     pending_task_age=int(rng.integers(0, 10))))
    return SystemState(vehicles=tuple(vehicles), aoi=aoi, queues=tuple(queues),
                       z=float(rng.uniform(0.5, 60.0)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
