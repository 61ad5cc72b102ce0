"""Command-line entry points."""

