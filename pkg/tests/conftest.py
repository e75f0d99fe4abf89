import pytest

from qelicit import models

# Accuracy matrix for the catalog: (money list, price list ignore/separate,
# price list combine).  Frozen here independently of the library's own
# assumption table.
EXPECTED_ACCURACY = {
    "rn-linear": (True, True, True),
    "rn-kinked": (True, False, True),
    "rn-power": (True, True, False),
    "pn": (False, False, False),
    "gpn": (True, True, False),
    "gpn-power": (True, True, False),
    "cc": (True, True, True),
    "ncc": (True, True, True),
}


def catalog_instances() -> dict[str, models.ModelSpec]:
    """One representative parameterization per catalog family."""
    return {
        "rn-linear": models.rn_linear(0.5),
        "rn-kinked": models.rn_kinked(0.5, 2.0),
        "rn-power": models.rn_power(-0.5, 0.5),
        "pn": models.pn(),
        "gpn": models.gpn(1.0),
        "gpn-power": models.gpn_power(1.0, 0.5),
        "cc": models.cc(0.5),
        "ncc": models.ncc(0.5),
    }


@pytest.fixture(scope="session")
def catalog() -> dict[str, models.ModelSpec]:
    return catalog_instances()
