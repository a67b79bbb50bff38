from __future__ import annotations

from pathlib import Path

import pytest

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def sensors_csv() -> str:
    return (FIXTURES / "ravenclaw_sensors.csv").read_text()


@pytest.fixture(scope="session")
def sensors_catalogue(sensors_csv):
    from ctrlgame import parse_catalogue

    return parse_catalogue(sensors_csv, "csv")
