"""Angle helpers for unwrapped phases and wrapped differences."""

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap_angle(a):
    """Wrap an angle (scalar or array) into the half-open interval (-pi, pi]."""
    return a - TWO_PI * np.ceil((np.asarray(a, dtype=float) - np.pi) / TWO_PI)


def unwrap_step(angle, anchor):
    """Return the representative of ``angle`` (mod 2*pi) closest to ``anchor``.

    Used to keep geometric phase measurements continuous between samples:
    the result never jumps by more than pi from the anchor.
    """
    return anchor + wrap_angle(angle - anchor)
