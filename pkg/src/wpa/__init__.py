"""Weighted polynomial approximation with weight z^alpha on compact sets outside the unit disc."""
