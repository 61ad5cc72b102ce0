"""Entry point: `python main.py <subcommand> ...` runs the command-line tool."""
from app.tools.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
