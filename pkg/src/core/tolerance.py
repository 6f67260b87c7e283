"""
Tolerance Model

A single relative tolerance scaled by the scene diameter governs every
incidence predicate in the package.
"""

import math
from dataclasses import dataclass, replace

from src.core.exceptions import DegenerateGeometryError

DEFAULT_REL = 1e-9


@dataclass(frozen=True)
class Tolerance:
    """
    Relative tolerance together with the length unit it is measured against.

    Args:
        rel (float): Dimensionless relative tolerance
        scene_scale (float): Diameter of the bounding box of the scene
    """

    rel: float = DEFAULT_REL
    scene_scale: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.rel) and self.rel > 0):
            raise DegenerateGeometryError(f"tolerance must be positive, got {self.rel}")
        if not (math.isfinite(self.scene_scale) and self.scene_scale > 0):
            raise DegenerateGeometryError(f"scene scale must be positive, got {self.scene_scale}")

    @property
    def abs(self):
        """Absolute length tolerance in scene units."""
        return self.rel * self.scene_scale

    def scaled(self, factor):
        """Same scene, relative tolerance multiplied by ``factor``."""
        return replace(self, rel=self.rel * factor)

    @classmethod
    def for_circles(cls, circles, rel=DEFAULT_REL, points=()):
        """
        Build a tolerance whose scale is the bounding-box diameter of the circles.

        Args:
            circles (iterable): Circles of the scene
            rel (float, optional): Relative tolerance
            points (iterable, optional): Extra points that belong to the scene

        Returns:
            Tolerance: The scene tolerance (scale 1 for an empty scene)
        """
        xs = []
        ys = []
        for circle in circles:
            xs.extend((circle.center.x - circle.radius, circle.center.x + circle.radius))
            ys.extend((circle.center.y - circle.radius, circle.center.y + circle.radius))
        for point in points:
            xs.append(point.x)
            ys.append(point.y)
        if not xs:
            return cls(rel=rel, scene_scale=1.0)
        scale = math.hypot(max(xs) - min(xs), max(ys) - min(ys))
        return cls(rel=rel, scene_scale=scale if scale > 0 else 1.0)
