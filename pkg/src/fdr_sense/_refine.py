"""Three-point parabolic refinement shared by the resonance solver and the
sweep dip detector."""
from __future__ import annotations


def parabolic_vertex(
    x_left: float, x_center: float, x_right: float,
    y_left: float, y_center: float, y_right: float,
) -> tuple[float, float]:
    """Vertex (x*, y*) of the parabola through three bracketing points.

    Assumes y_center < y_left and y_center < y_right, which pins the vertex
    strictly inside (x_left, x_right).
    """
    d1 = (y_center - y_left) / (x_center - x_left)
    d2 = (y_right - y_center) / (x_right - x_center)
    a2 = (d2 - d1) / (x_right - x_left)
    if a2 <= 0.0:
        # Degenerate (flat) bracket: fall back to the grid minimum.
        return x_center, y_center
    x_star = 0.5 * (x_left + x_center) - d1 / (2.0 * a2)
    y_star = (y_left
              + d1 * (x_star - x_left)
              + a2 * (x_star - x_left) * (x_star - x_center))
    return x_star, y_star
