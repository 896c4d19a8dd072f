import os

import pytest

from bnorder import parse_bif

NETWORKS = os.path.join(os.path.dirname(__file__), os.pardir, "networks")


def network_path(name):
    return os.path.normpath(os.path.join(NETWORKS, name + ".bif"))


@pytest.fixture(scope="session")
def asia():
    with open(network_path("asia")) as fh:
        return parse_bif(fh.read())


@pytest.fixture(scope="session")
def sachs():
    with open(network_path("sachs")) as fh:
        return parse_bif(fh.read())


@pytest.fixture(scope="session")
def collider():
    with open(network_path("collider")) as fh:
        return parse_bif(fh.read())
