"""Schedule-driven traffic signal control under turn uncertainty."""

__version__ = "0.1.0"
