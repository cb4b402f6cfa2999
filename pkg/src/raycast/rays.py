from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RayBundle:
    """origins (R, 3) and unit directions (R, 3)"""

    origins: np.ndarray
    directions: np.ndarray

    def __len__(self):
        return len(self.directions)

    @classmethod
    def concat(cls, bundles):
        bundles = list(bundles)
        return cls(np.concatenate([b.origins for b in bundles]),
                   np.concatenate([b.directions for b in bundles]))


def roll_rotation(roll):
    """Rotation about the forward (x) axis"""
    c, s = np.cos(roll), np.sin(roll)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def beam_directions(spec):
    """Unrolled unit directions, channel-major: elevations inclusive, azimuths over [0, fov)"""
    elevations = np.deg2rad(np.linspace(spec.fov_lower, spec.fov_upper, int(spec.channels)))
    steps = spec.azimuth_steps
    azimuths = np.deg2rad(np.arange(steps) * (spec.fov_horizontal / steps))
    el, az = np.meshgrid(elevations, azimuths, indexing='ij')
    cos_el = np.cos(el)
    directions = np.stack([cos_el * np.cos(az), cos_el * np.sin(az), np.sin(el)], axis=-1)
    return directions.reshape(-1, 3)


def gen_rays(ext, spec, directions=None):
    """Ray bundle of one LiDAR: roll applied to each beam, then offset to (x, y, z)"""
    if directions is None:
        directions = beam_directions(spec)
    rolled = directions @ roll_rotation(ext.roll).T
    rolled /= np.linalg.norm(rolled, axis=1, keepdims=True)
    origins = np.broadcast_to(ext.position, rolled.shape).copy()
    return RayBundle(origins, rolled)


def placement_rays(placement):
    """Concatenated rays of every LiDAR of a placement"""
    directions = beam_directions(placement.spec)
    return RayBundle.concat(gen_rays(ext, placement.spec, directions) for ext in placement.lidars)
