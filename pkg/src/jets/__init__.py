"""Jet arithmetic: scalars, polynomials, matrices and truncated Taylor maps."""
