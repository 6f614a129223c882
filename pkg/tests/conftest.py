import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from springhand.handfile import load_hand_description, models_from_document  # noqa: E402
from springhand.presets import five_finger_document  # noqa: E402
from springhand.scenarios.spec import resolve_hand  # noqa: E402


@pytest.fixture(scope="session")
def hand_models():
    return models_from_document(five_finger_document())


@pytest.fixture(scope="session")
def calibrated_models():
    return load_hand_description(resolve_hand("builtin:kengoro-calibrated", None))
