"""Monte Carlo simulation of post-selected, verified logical cluster states
on the Steane [[7,1,3]] code."""

__version__ = "0.1.0"
