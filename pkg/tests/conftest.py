import os
import sys
from pathlib import Path

# Keep tests from appending run records or drawing progress bars.
os.environ.setdefault("RUN_LOGGER", "none")
os.environ.setdefault("RUN_LOG_PATH", "")
os.environ.setdefault("SHOW_PROGRESS", "false")

# Add project root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

import pytest

from modules.relation_inventory import load_inventory


@pytest.fixture(scope="session")
def inventory():
    return load_inventory()


@pytest.fixture(scope="session")
def toy_dir():
    return Path(__file__).parent / "fixtures" / "toy"
