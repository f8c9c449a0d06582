"""Shared building blocks used across packages."""
