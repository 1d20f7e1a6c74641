"""
Unit tests package for Resonant.

This package contains unit tests for the core services and utilities.
Run tests with: pytest tests/
"""
