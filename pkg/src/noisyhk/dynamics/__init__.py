"""Opinion dynamics, noise models and random-walk diagnostics."""
