"""One-variable interpolating functions."""
