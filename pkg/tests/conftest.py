import numpy as np
import pytest

from utils.environment import Barrier, WorldConfig
from utils.experiment import BarrierMode, ExperimentConfig
from utils.geometry import Vec2
from utils.metrics import ExperimentSummary
from utils.world_generator import get_fixture


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def empty_world():
    return WorldConfig(target=Vec2(0.9, 0.9), vehicle_start=Vec2(0.1, 0.1))


@pytest.fixture
def wall_world():
    """A vertical wall at x = 0.5 from y = 0.1 to 0.9, target beyond it."""
    return WorldConfig(
        target=Vec2(0.8, 0.8),
        vehicle_start=Vec2(0.49, 0.3),
        barriers=(Barrier(Vec2(0.5, 0.5), np.pi / 2, 0.8),),
    )


@pytest.fixture
def fixed_experiment():
    def build(name, nruns=10, randomize=False, **kwargs):
        return ExperimentConfig(
            nruns=nruns,
            barrier_mode=BarrierMode.FIXED,
            world=get_fixture(name),
            randomize_start_target=randomize,
            workers=1,
            **kwargs,
        )
    return build


def make_summary(coop_x="0000", coop_y="0000", gm=3.5, dnf=0, nruns=10, mean_st_ms=3000.0):
    return ExperimentSummary(
        coop_x=coop_x,
        coop_y=coop_y,
        nruns=nruns,
        dnf_count=dnf,
        mean_st_ms=mean_st_ms,
        median_st_ms=mean_st_ms,
        st_std_ms=100.0,
        gm=gm,
        gm_se=0.01,
        gm_ci_low=None if gm is None else gm - 0.02,
        gm_ci_high=None if gm is None else gm + 0.02,
        comm_x_mean=1.5,
        comm_x_std=0.5,
        comm_x_iqr=0.25,
        comm_y_mean=2.5,
        comm_y_std=0.5,
        comm_y_iqr=0.25,
        pearson_r=None,
    )
