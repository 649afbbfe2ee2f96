"""Test suite for mimo-power."""
