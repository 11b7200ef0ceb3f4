"""Module entry point so `python -m bernstrings` runs the experiment CLI."""

from .experiments import main

if __name__ == "__main__":
    raise SystemExit(main())
