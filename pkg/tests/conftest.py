from pathlib import Path

import pytest

from sysconstraints.etiquette import CapabilityTree, ModeDescriptor, Node

DATA = Path(__file__).resolve().parent.parent / "data"
GOLDEN = Path(__file__).resolve().parent / "golden"

FIG6_STATES = {"A/B": 4, "C/D": 16, "E/F": 16}


def fig6_tree(role, version=1, bug_list=(), revision=0):
    nodes = [
        Node(tag, mode=ModeDescriptor(mode_id, role, states, revision))
        for tag, (mode_id, states) in enumerate(FIG6_STATES.items(), 1)
    ]
    return CapabilityTree(version, tuple(nodes), tuple(bug_list))


@pytest.fixture
def fig6_tx():
    return fig6_tree("tx")


@pytest.fixture
def fig6_rx():
    return fig6_tree("rx")


@pytest.fixture
def data_dir():
    return DATA
