"""
Utilities package for Resonant.

Numerical helpers shared across services.
"""
