"""2D immersed-boundary flow with keyframe-interpolated structure motion."""

__version__ = "0.1.0"
