"""Physically plausible human motion from noisy monocular pose estimates."""

__version__ = "0.1.0"
