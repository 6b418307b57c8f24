import pytest

from wpcn_mdp.params import DeviceParams, SystemParams, validate


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run default-instance solves and million-slot simulations")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: default-instance solves and long simulations")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def default_params():
    return validate({})


@pytest.fixture
def small_params():
    ''' 256 states, solved in well under a second '''
    return validate({"b1_max": 3, "b2_max": 3, "channel_bins": 2, "tau_grid_steps": 4})


@pytest.fixture
def tiny_params():
    ''' 4 battery pairs, one channel bin: small enough for the brute-force oracle '''
    return validate({"b1_max": 1, "b2_max": 1, "channel_bins": 1, "tau_grid_steps": 2, "rvi_tolerance": 1e-10})


@pytest.fixture
def empty_battery_params():
    ''' batteries that can never hold a quantum; built without validation on purpose '''
    devices = (DeviceParams(distance_m=5.0, harvest_efficiency=0.8, battery_scale_zeta_joules=0.1, b_max=0),
               DeviceParams(distance_m=10.0, harvest_efficiency=0.8, battery_scale_zeta_joules=1.0, b_max=0))
    return SystemParams(devices=devices, channel_bins=1, tau_grid_steps=2)


@pytest.fixture
def config_file(tmp_path):
    def write(text):
        path = tmp_path / "test.cfg"
        path.write_text(text)
        return str(path)
    return write
