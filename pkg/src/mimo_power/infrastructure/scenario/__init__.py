"""Scenario generation and serialization."""
