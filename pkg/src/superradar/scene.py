"""Reflection-point scenes and a procedural scene generator.

Geometry is bird's-eye 2-D in the radar frame: the radar sits at the origin
looking along +y, azimuth is measured from +y towards +x so that
``sin(azimuth) = x / r``.
"""

from dataclasses import dataclass, field

import numpy as np

DEFAULT_FOV_DEG = 60.0


@dataclass(frozen=True)
class ReflectionPoint:
    position: tuple
    radial_velocity_mps: float
    reflectivity: complex

    @property
    def range_m(self):
        return float(np.hypot(*self.position))

    @property
    def sin_azimuth(self):
        return self.position[0] / self.range_m


@dataclass(frozen=True)
class SurfaceElement:
    position: tuple
    normal: tuple
    material_reflectivity: float
    radial_velocity_mps: float = 0.0

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if abs(np.hypot(*n) - 1.0) > 1e-9:
            raise ValueError("surface normal must be a unit vector")
        if self.material_reflectivity < 0:
            raise ValueError("material_reflectivity must be >= 0")


@dataclass
class Scene:
    """Reflection points stored column-wise for vectorised synthesis."""

    x: np.ndarray
    y: np.ndarray
    radial_velocity: np.ndarray
    reflectivity: np.ndarray
    rng_seed: int = 0
    noise: object = None
    skipped: int = field(default=0, compare=False)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64).ravel()
        self.y = np.asarray(self.y, dtype=np.float64).ravel()
        self.radial_velocity = np.asarray(self.radial_velocity, dtype=np.float64).ravel()
        self.reflectivity = np.asarray(self.reflectivity, dtype=np.complex128).ravel()
        n = self.x.size
        if not (self.y.size == self.radial_velocity.size == self.reflectivity.size == n):
            raise ValueError("scene columns differ in length")

    def __len__(self):
        return self.x.size

    @property
    def ranges(self):
        return np.hypot(self.x, self.y)

    @property
    def sin_azimuth(self):
        r = self.ranges
        return np.divide(self.x, r, out=np.zeros_like(r), where=r > 0)

    @property
    def points(self):
        return [ReflectionPoint((float(a), float(b)), float(v), complex(c))
                for a, b, v, c in zip(self.x, self.y, self.radial_velocity, self.reflectivity)]

    @classmethod
    def from_points(cls, points, rng_seed=0, noise=None):
        points = list(points)
        if not points:
            return cls.empty(rng_seed, noise)
        return cls(
            x=[p.position[0] for p in points],
            y=[p.position[1] for p in points],
            radial_velocity=[p.radial_velocity_mps for p in points],
            reflectivity=[p.reflectivity for p in points],
            rng_seed=rng_seed,
            noise=noise,
        )

    @classmethod
    def empty(cls, rng_seed=0, noise=None):
        z = np.zeros(0)
        return cls(z, z, z, z.astype(complex), rng_seed=rng_seed, noise=noise)

    def subset(self, mask):
        return Scene(self.x[mask], self.y[mask], self.radial_velocity[mask],
                     self.reflectivity[mask], self.rng_seed, self.noise)

    def __add__(self, other):
        return Scene(
            np.concatenate([self.x, other.x]), np.concatenate([self.y, other.y]),
            np.concatenate([self.radial_velocity, other.radial_velocity]),
            np.concatenate([self.reflectivity, other.reflectivity]),
            self.rng_seed, self.noise)

    def equals(self, other):
        """Bit-level equality of the point columns."""
        return all(np.array_equal(getattr(self, k), getattr(other, k))
                   for k in ("x", "y", "radial_velocity", "reflectivity"))


def assign_reflectivity(surface, radar_origin=(0.0, 0.0), rng=None, gamma=1.0,
                        fov_deg=DEFAULT_FOV_DEG, max_range_m=None):
    """Turn a surface sample into a reflection point, or ``None`` if unseen.

    Magnitude is ``sqrt(rho) * max(0, cos psi)**gamma / r**2`` where psi is the
    angle between the surface normal and the direction to the radar. The
    phase is uniform on [0, 2 pi) from ``rng`` (0 when ``rng`` is None); it is
    drawn before the visibility checks so the stream does not depend on them.
    """
    phase = rng.uniform(0.0, 2 * np.pi) if rng is not None else 0.0
    rel = np.asarray(surface.position, dtype=float) - np.asarray(radar_origin, dtype=float)
    r = float(np.hypot(*rel))
    if r <= 0 or rel[1] <= 0:
        return None
    if abs(rel[0] / r) > np.sin(np.deg2rad(fov_deg)) + 1e-12:
        return None
    if max_range_m is not None and r > max_range_m:
        return None
    to_radar = -rel / r
    cos_psi = max(0.0, float(np.dot(surface.normal, to_radar)))
    mag = np.sqrt(surface.material_reflectivity) * cos_psi**gamma / r**2
    return ReflectionPoint(
        position=(float(surface.position[0]), float(surface.position[1])),
        radial_velocity_mps=float(surface.radial_velocity_mps),
        reflectivity=complex(mag * np.exp(1j * phase)),
    )


# ---------------------------------------------------------------------------
# procedural scenes


def _radial(velocity, pos):
    v = np.asarray(velocity, dtype=float)
    if v.ndim == 0:
        return float(v)
    r = np.hypot(*pos)
    return float(np.dot(v, pos) / r) if r > 0 else 0.0


def _facing_normal(start, end):
    d = np.asarray(end, float) - np.asarray(start, float)
    n = np.array([-d[1], d[0]]) / np.hypot(*d)
    mid = (np.asarray(start, float) + np.asarray(end, float)) / 2
    return n if np.dot(n, -mid) >= 0 else -n


def _segment_samples(start, end, density, jitter, rng):
    start = np.asarray(start, float)
    end = np.asarray(end, float)
    length = float(np.hypot(*(end - start)))
    n = max(1, int(round(length * density)))
    t = (np.arange(n) + 0.5) / n
    if jitter:
        t = t + jitter * rng.uniform(-0.5, 0.5, n) / n
    return start + t[:, None] * (end - start)


def _box_edges(center, size, heading_deg):
    length, width = size
    h = np.deg2rad(heading_deg)
    fwd = np.array([np.sin(h), np.cos(h)])
    side = np.array([fwd[1], -fwd[0]])
    c = np.asarray(center, float)
    corners = [c + a * fwd * length / 2 + b * side * width / 2
               for a, b in ((1, 1), (1, -1), (-1, -1), (-1, 1))]
    edges = []
    for j in range(4):
        p0, p1 = corners[j], corners[(j + 1) % 4]
        mid = (p0 + p1) / 2
        out = mid - c
        edges.append((p0, p1, out / np.hypot(*out)))
    return edges


def primitive_surfaces(spec, rng=None):
    """Expand the primitives of a scene spec into surface elements (in order)."""
    if rng is None:
        rng = np.random.default_rng(spec.get("seed", 0))
    density = float(spec.get("density", 5.0))
    jitter = float(spec.get("jitter", 0.0))
    surfaces = []
    for prim in spec.get("primitives", []):
        kind = prim["type"]
        rho = float(prim.get("material", 1.0))
        vel = prim.get("velocity", 0.0)
        if kind == "point":
            pos = np.asarray(prim["position"], float)
            if "normal" in prim:
                normal = np.asarray(prim["normal"], float)
            else:
                normal = -pos / np.hypot(*pos)
            surfaces.append(SurfaceElement(tuple(pos), tuple(normal), rho, _radial(vel, pos)))
        elif kind == "segment":
            start, end = prim["start"], prim["end"]
            normal = (np.asarray(prim["normal"], float) if "normal" in prim
                      else _facing_normal(start, end))
            for pos in _segment_samples(start, end, density, jitter, rng):
                surfaces.append(SurfaceElement(tuple(pos), tuple(normal), rho, _radial(vel, pos)))
        elif kind == "box":
            for p0, p1, normal in _box_edges(prim["center"], prim["size"], prim.get("heading_deg", 0.0)):
                for pos in _segment_samples(p0, p1, density, jitter, rng):
                    surfaces.append(SurfaceElement(tuple(pos), tuple(normal), rho, _radial(vel, pos)))
        else:
            raise ValueError(f"unknown primitive type {kind!r}")
    return surfaces


def generate_procedural_scene(spec, seed=None):
    """Sample a scene spec into reflection points.

    Points that are invisible (behind the radar, outside the field of view or
    range) or have zero reflectivity (back faces) are dropped.
    """
    seed = int(spec.get("seed", 0) if seed is None else seed)
    rng = np.random.default_rng(seed)
    gamma = float(spec.get("gamma", 1.0))
    fov = float(spec.get("fov_deg", DEFAULT_FOV_DEG))
    max_range = spec.get("max_range_m")
    points = []
    for surf in primitive_surfaces(spec, rng):
        p = assign_reflectivity(surf, rng=rng, gamma=gamma, fov_deg=fov, max_range_m=max_range)
        if p is not None and abs(p.reflectivity) > 0:
            points.append(p)
    return Scene.from_points(points, rng_seed=seed)


def random_scene_spec(rng, n_cars=(2, 4), n_poles=(1, 3), n_people=(0, 2),
                      range_span=(8.0, 45.0), fov_deg=50.0, max_speed=10.0, density=5.0):
    """Draw a random multi-object street scene spec (cars, poles, pedestrians)."""
    prims = []

    def place():
        r = rng.uniform(*range_span)
        az = np.deg2rad(rng.uniform(-fov_deg, fov_deg))
        return [r * np.sin(az), r * np.cos(az)]

    for _ in range(rng.integers(n_cars[0], n_cars[1] + 1)):
        heading = rng.uniform(0.0, 360.0)
        speed = rng.uniform(0.0, max_speed)
        h = np.deg2rad(heading)
        prims.append(dict(type="box", center=place(), size=[4.5, 1.8], heading_deg=heading,
                          material=float(rng.uniform(20.0, 60.0)),
                          velocity=[speed * np.sin(h), speed * np.cos(h)]))
    for _ in range(rng.integers(n_poles[0], n_poles[1] + 1)):
        prims.append(dict(type="point", position=place(), material=float(rng.uniform(30.0, 80.0)),
                          velocity=0.0))
    for _ in range(rng.integers(n_people[0], n_people[1] + 1)):
        prims.append(dict(type="point", position=place(), material=float(rng.uniform(2.0, 6.0)),
                          velocity=float(rng.uniform(-2.0, 2.0))))
    return dict(density=density, gamma=1.0, fov_deg=60.0, primitives=prims)
