"""
Resonant - Core package.

This package contains the reservoir backends, benchmark tasks, readout
training, diagnostics and the command-line front end.
"""

__version__ = "0.1.0"
