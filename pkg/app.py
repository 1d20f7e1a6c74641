"""
Resonant - command-line entry point.

Resonant is a reservoir computing toolkit with a classical echo state
network backend and a simulated quantum reservoir backend, benchmark tasks,
ridge readouts and reservoir diagnostics.

To run an experiment:
    python app.py run --config content/sine_smoke.yaml --out results
"""

import sys

from src.ui.cli import main

if __name__ == "__main__":
    sys.exit(main())
