"""Landscape features, performance regression and Shapley explanations for
black-box optimisation benchmarks."""

__version__ = "0.1.0"
