import pytest
from fractions import Fraction
from importlib import resources

from fibercert.cones import estimate_dual_cone, fibered_cone_from_dual
from fibercert.dataio import dataset_hash, load_dataset

DATA = resources.files("fibercert") / "data"


@pytest.fixture(scope="session")
def r1():
    return load_dataset(str(DATA / "rose_r1.json"))


@pytest.fixture(scope="session")
def r2():
    return load_dataset(str(DATA / "rose_r2.json"))


@pytest.fixture(scope="session")
def r1_hash(r1):
    return dataset_hash(r1)


@pytest.fixture(scope="session")
def r2_hash(r2):
    return dataset_hash(r2)


@pytest.fixture(scope="session")
def r1_models(r1):
    dual = estimate_dual_cone(r1, 16)
    cone = fibered_cone_from_dual(dual)
    P = cone.subcone_slope(Fraction(1, 2))
    return dual, cone, P


@pytest.fixture(scope="session")
def r2_models(r2):
    dual = estimate_dual_cone(r2, 12)
    cone = fibered_cone_from_dual(dual)
    P = cone.subcone_slope(Fraction(1, 2))
    return dual, cone, P
