"""Condition numbers of real homogeneous polynomial systems."""
