"""Space-based MDI-QKD feasibility simulator."""

__version__ = "0.1.0"
