"""qroute: sorting-network based routing, parallel lookup and emulation circuits."""

__version__ = "0.1.0"

VERSION_STRING = f"qroute-{__version__}"
