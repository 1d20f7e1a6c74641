"""
Front-end package for Resonant.

This package holds the command-line interface and the table and summary
components it writes and prints.
"""
