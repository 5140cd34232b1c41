"""Monte Carlo simulation of operator dynamics in dual-unitary circuits."""
