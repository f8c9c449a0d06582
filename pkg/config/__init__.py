"""Configuration for the sector eigenvalue solver."""
