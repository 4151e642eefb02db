"""Shared helpers: configuration, JSON schemas and path checks."""
