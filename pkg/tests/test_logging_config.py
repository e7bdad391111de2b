"""Tests for the logging setup."""

import json
import logging
from fractions import Fraction

from northcott_towers.logging_config import _render_default, get_logger, setup_logging


class TestLogging:
    """Tests for setup_logging and the JSON fallback."""

    def test_levels(self):
        """Test the root level and the quieted libraries."""
        setup_logging("INFO")
        assert logging.getLogger().level == logging.INFO
        assert logging.getLogger("sympy").level == logging.WARNING
        setup_logging("DEBUG")
        assert logging.getLogger().level == logging.DEBUG

    def test_unknown_level_defaults_to_info(self):
        """Test that an unknown level name falls back to INFO."""
        setup_logging("chatty")
        assert logging.getLogger().level == logging.INFO
        setup_logging("DEBUG")

    def test_render_default(self):
        """Test that rationals and sets render as JSON-friendly values."""
        assert _render_default(Fraction(1, 3)) == "1/3"
        assert _render_default(frozenset({3, 1})) == [1, 3]
        assert _render_default((2, 5)) == [2, 5]
        assert json.dumps({"tol": Fraction(1, 10)}, default=_render_default) == '{"tol": "1/10"}'

    def test_named_logger(self):
        """Test that get_logger returns a usable bound logger."""
        logger = get_logger("northcott_towers.tests")
        logger.debug("Logger ready", value=Fraction(1, 2))
