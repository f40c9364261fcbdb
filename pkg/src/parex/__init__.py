"""Parabolic operators with time lag on space-time grids."""
