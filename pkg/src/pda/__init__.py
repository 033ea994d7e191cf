"""Multi-criteria anomaly detection by Pareto depth analysis."""

__version__ = "0.1.0"
