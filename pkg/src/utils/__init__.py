"""Shared helpers: errors, config validation, logging, slopes, summation, threads."""
