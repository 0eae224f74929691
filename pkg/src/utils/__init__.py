"""Configuration, logging, I/O and seeding helpers."""
