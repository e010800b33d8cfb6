"""Dense qudit simulator for scrambling, decoherence and teleportation-based decoding."""
__version__ = "0.1.0"
