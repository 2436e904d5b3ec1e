"""Switch-level simulation and standard cells for ternary CNFET logic."""

__version__ = "0.1.0"
