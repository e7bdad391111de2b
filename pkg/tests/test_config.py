"""Test configuration handling."""

import os
from fractions import Fraction
from unittest.mock import patch

import pytest
from pydantic import ValidationError

from northcott_towers import config
from northcott_towers.config import Settings, overridden, settings


def test_default_settings():
    """Test default settings creation with no environment variables."""
    with patch.dict(os.environ, {}, clear=True):
        defaults = Settings()

    assert defaults.NORTHCOTT_TOL == 1e-9
    assert defaults.NORTHCOTT_PRECISION_BITS == 96
    assert defaults.NORTHCOTT_PRECISION_CEILING == 2048
    assert defaults.NORTHCOTT_ORDERING == "weak"
    assert defaults.NORTHCOTT_SKIP_EXHAUSTED is False
    assert defaults.NORTHCOTT_ENUMERATION_CAP == 10_000_000
    assert defaults.LOG_LEVEL == "DEBUG"  # development default


def test_custom_settings_from_env():
    """Test settings with custom environment variables."""
    env = {
        "NORTHCOTT_TOL": "1e-12",
        "NORTHCOTT_PRECISION_CEILING": "4096",
        "NORTHCOTT_ORDERING": "STRICT",
        "NORTHCOTT_SKIP_EXHAUSTED": "true",
        "LOG_LEVEL": "warning",
    }
    with patch.dict(os.environ, env, clear=True):
        custom = Settings()

    assert custom.NORTHCOTT_TOL == 1e-12
    assert custom.NORTHCOTT_PRECISION_CEILING == 4096
    assert custom.NORTHCOTT_ORDERING == "strict"
    assert custom.NORTHCOTT_SKIP_EXHAUSTED is True
    assert custom.LOG_LEVEL == "WARNING"


def test_production_defaults_to_info():
    """Test that production without an explicit LOG_LEVEL logs at INFO."""
    with patch.dict(os.environ, {"ENVIRONMENT": "production"}, clear=True):
        assert Settings().LOG_LEVEL == "INFO"


def test_invalid_log_level():
    """Test that an invalid log level defaults to INFO after logging a warning."""
    with patch.dict(os.environ, {"LOG_LEVEL": "INVALID"}, clear=True):
        assert Settings().LOG_LEVEL == "INFO"


@pytest.mark.parametrize(
    "name,value",
    [
        ("NORTHCOTT_TOL", "0"),
        ("NORTHCOTT_TOL", "2"),
        ("NORTHCOTT_PRECISION_BITS", "16"),
        ("NORTHCOTT_ORDERING", "sideways"),
        ("NORTHCOTT_THREADS", "0"),
        ("NORTHCOTT_PRECISION_CEILING", "64"),
        ("NORTHCOTT_ENUMERATION_CAP", "lots"),
    ],
)
def test_invalid_values(name, value):
    """Test that out-of-range values raise a ValidationError."""
    with patch.dict(os.environ, {name: value}, clear=True), pytest.raises(ValidationError):
        Settings()


def test_tolerance_is_exact_decimal():
    """Test that the tolerance property reads the decimal, not the binary float."""
    with patch.dict(os.environ, {"NORTHCOTT_TOL": "1e-9"}, clear=True):
        assert Settings().tolerance == Fraction(1, 10**9)


class TestOverridden:
    """Tests for the scoped settings override."""

    def test_override_and_restore(self):
        """Test that values are replaced inside the block and restored after."""
        before = settings.NORTHCOTT_PRECISION_CEILING
        with overridden(NORTHCOTT_PRECISION_CEILING=before * 2) as active:
            assert active is settings
            assert config.settings.NORTHCOTT_PRECISION_CEILING == before * 2
        assert settings.NORTHCOTT_PRECISION_CEILING == before

    def test_override_is_validated(self):
        """Test that an override goes through the field validators."""
        with overridden(NORTHCOTT_ORDERING="STRICT"):
            assert settings.NORTHCOTT_ORDERING == "strict"
        with pytest.raises(ValidationError), overridden(NORTHCOTT_THREADS=0):
            pass

    def test_restored_after_exception(self):
        """Test that an exception inside the block still restores the old value."""
        before = settings.NORTHCOTT_SEED
        with pytest.raises(RuntimeError), overridden(NORTHCOTT_SEED=before + 7):
            raise RuntimeError("boom")
        assert settings.NORTHCOTT_SEED == before
