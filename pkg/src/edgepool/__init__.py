"""edgepool: discrete-event simulator for MEC hosts pooling vehicular resources."""

__version__ = "0.1.0"
