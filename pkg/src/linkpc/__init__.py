"""Link-aware passive clustering simulator for wireless sensor networks."""

__version__ = "0.1.0"
