"""Test package for the northcott toolkit."""
