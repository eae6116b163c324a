import os

import pytest

from natex.data import assign_roles, load_csv

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "data")
AUTO_MPG = os.path.join(DATA_DIR, "auto_mpg.csv")
AMES = os.path.join(DATA_DIR, "ames_housing.csv")


@pytest.fixture(scope="session")
def auto_mpg_raw():
    with open(AUTO_MPG, newline="") as f:
        return load_csv(f, name="auto_mpg")


@pytest.fixture(scope="session")
def auto_mpg(auto_mpg_raw):
    return assign_roles(auto_mpg_raw, outcomes=["mpg"])


@pytest.fixture(scope="session")
def ames():
    with open(AMES, newline="") as f:
        ds = load_csv(f, name="ames")
    return assign_roles(ds, outcomes=["SalePrice"])
