"""Pinhole camera mounted on the ego vehicle.

Vehicle frame: X forward, Y right, Z up, origin on the ground below the camera.
Image plane: columns grow to the right, rows grow downward, pixel (r, c) has
its center at (c + 0.5, r + 0.5)."""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import numpy.typing as npt

from dualdrive.control.types import FRAME_HEIGHT, FRAME_WIDTH


@dataclass(frozen=True)
class Camera:
    mount_height: float = 1.2
    pitch: float = math.radians(5.0)
    hfov: float = math.radians(90.0)
    width: int = FRAME_WIDTH
    height: int = FRAME_HEIGHT

    @property
    def focal(self) -> float:
        return (self.width / 2) / math.tan(self.hfov / 2)

    @property
    def horizon_row(self) -> float:
        return self.height / 2 - self.focal * math.tan(self.pitch)

    def to_camera(
        self, x: npt.ArrayLike, y: npt.ArrayLike, z: npt.ArrayLike
    ) -> tuple[np.ndarray, ...]:
        """Vehicle-frame points to (depth, right, up) camera coordinates."""
        x, y, z = (np.asarray(a, dtype=np.float64) for a in (x, y, z))
        dz = z - self.mount_height
        cp, sp = math.cos(self.pitch), math.sin(self.pitch)
        depth = x * cp - dz * sp
        up = x * sp + dz * cp
        return depth, y, up

    def project(
        self, x: npt.ArrayLike, y: npt.ArrayLike, z: npt.ArrayLike
    ) -> tuple[np.ndarray, ...]:
        """Continuous (col, row, depth) image coordinates. Only meaningful where
        depth > 0."""
        depth, right, up = self.to_camera(x, y, z)
        safe = np.where(depth > 1e-9, depth, 1e-9)
        col = self.width / 2 + self.focal * right / safe
        row = self.height / 2 - self.focal * up / safe
        return col, row, depth

    @cached_property
    def ground_grid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-pixel ground intersection (X, Y) of the viewing ray and a mask of
        pixels whose ray hits the ground at all."""
        cols = np.arange(self.width) + 0.5 - self.width / 2
        rows = self.height / 2 - (np.arange(self.height) + 0.5)
        u, v = np.meshgrid(cols, rows)

        cp, sp = math.cos(self.pitch), math.sin(self.pitch)
        dx = self.focal * cp + v * sp
        dz = -self.focal * sp + v * cp
        hits = dz < 0
        t = np.where(hits, self.mount_height / np.where(hits, -dz, 1.0), 0.0)
        return t * dx, t * u, hits
