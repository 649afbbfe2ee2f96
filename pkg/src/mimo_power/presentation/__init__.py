"""Presentation layer - console rendering."""
