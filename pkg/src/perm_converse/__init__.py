"""perm-converse: finite-blocklength converse bounds for noisy permutation channels."""

__version__ = "1.0.0"
