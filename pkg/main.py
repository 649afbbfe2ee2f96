"""Main entry point for mimo-power."""

from mimo_power.cli import main


if __name__ == "__main__":
    main()
