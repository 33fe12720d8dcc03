"""Shear, overshear, translation and linear primitives; composition words."""
