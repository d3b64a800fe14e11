"""Link-level simulation of NB-IoT served from a low-earth-orbit satellite."""

__version__ = "0.1.0"
