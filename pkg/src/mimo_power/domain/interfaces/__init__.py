"""Domain interfaces (abstract base classes)."""
