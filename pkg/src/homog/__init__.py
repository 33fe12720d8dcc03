"""Homogeneous shear-field bases."""
