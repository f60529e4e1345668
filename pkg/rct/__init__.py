"""Regional clock tree modelling and delay-line tap optimisation for SiLago region instances."""

__all__ = ["__version__", "SCHEMA_ID"]

__version__ = "0.1.0"

SCHEMA_ID = "silago-rct/1"
