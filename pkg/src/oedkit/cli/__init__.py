"""Config-driven command line interface for twin experiments and design studies."""
