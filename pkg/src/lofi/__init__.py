"""Toolkit that turns synchronized camera detections and Wi-Fi CSI packet
logs into a labeled localization/tracking dataset."""

__version__ = "0.1.0"
