"""
Services package for Resonant.

Each service module owns one concern: generating or driving a backend,
producing task data, training readouts, running diagnostics or
experiments, and reading or writing configs, CSVs and model bundles.
"""
