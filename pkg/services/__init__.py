"""Experiment orchestration and report emission."""
