import numpy as np
import pytest

from hvkit.pbrcheck import canonical_scenario
from hvkit.qcore import KET_0, KET_PLUS, KET_PLUS_I, PAULI_X, PAULI_Y, PAULI_Z
from hvkit.toymodels import Geometry, build_mixed_toy, build_segregated_toy

TOY_STATES = [KET_0, KET_PLUS, KET_PLUS_I]
TOY_OBS = [PAULI_X, PAULI_Y, PAULI_Z]

R = 1 / np.sqrt(2)
# explicit vectors, written out independently of the package
V0, V1 = np.array([1, 0]), np.array([0, 1])
VP, VM = np.array([R, R]), np.array([R, -R])


def kron(a, b):
    return np.kron(a, b)


PBR_VECTORS = [
    (kron(V0, V1) + kron(V1, V0)) * R,
    (kron(V0, VM) + kron(V1, VP)) * R,
    (kron(VP, V1) + kron(VM, V0)) * R,
    (kron(VP, VM) + kron(VM, VP)) * R,
]
PRODUCT_VECTORS = [kron(V0, V0), kron(V0, VP), kron(VP, V0), kron(VP, VP)]


@pytest.fixture
def mixed_toy():
    return build_mixed_toy(TOY_STATES, TOY_OBS)


@pytest.fixture
def segregated_toy():
    return build_segregated_toy(TOY_STATES, TOY_OBS, Geometry.DISJOINT_INTERVALS)


@pytest.fixture
def scenario():
    return canonical_scenario()
