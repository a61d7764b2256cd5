import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from slowlight import ControlDrive, average_qubit  # noqa: E402
from slowlight.model import mhz  # noqa: E402


@pytest.fixture(scope="session")
def qubit():
    """Chain-averaged qubit: 7.812 GHz, Gamma10 12 MHz, gamma10 = gamma20 = 6.9 MHz."""
    return average_qubit()


@pytest.fixture(scope="session")
def drive40(qubit):
    return ControlDrive.resonant(qubit, mhz(40.0))
