"""Little-endian binary formats for scenes, raw cubes, images and ground truth.

Every file starts with an 8-byte magic and a uint32 format version.

=========  ================================================================
scene      u64 count; count x (x, y, radial_velocity, |c|, arg c) float32
raw cube   u64 rx, chirps, samples; u32 Tx per chirp; complex64 [rx, chirp, sample]
image      u32 channels (3); u64 range, angle; f64 range spacing, sin start,
           sin step, velocity resolution; float32 [channel, range, angle]
prob       u64 range, angle; float32 [range, angle]
partition  u64 range, angle; f64 amplitude threshold; uint8 labels
cartesian  u64 ny, nx; f64 x0, dx, y0, dy; float32 [ny, nx]; uint8 valid
=========  ================================================================
"""

import os
import struct
import tempfile

import numpy as np

from superradar.config import sin_azimuth_grid
from superradar.dsp import CartesianImage, RadarImage
from superradar.groundtruth import PixelPartition
from superradar.scene import Scene
from superradar.synthesis import RawDataCube

VERSION = 1
MAGIC_SCENE = b"SRSCENE\x00"
MAGIC_RAW = b"SRRAWCB\x00"
MAGIC_IMAGE = b"SRIMAGE\x00"
MAGIC_PROB = b"SRPROBM\x00"
MAGIC_PART = b"SRPARTN\x00"
MAGIC_CART = b"SRCARTI\x00"


class FormatError(ValueError):
    pass


def atomic_write(path, data):
    """Write ``data`` to a temp file next to ``path`` and rename it into place."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class _Reader:
    def __init__(self, data, magic, path):
        self.data = data
        self.pos = 0
        self.path = path
        if data[:8] != magic:
            raise FormatError(f"{path}: bad magic {data[:8]!r}, expected {magic!r}")
        self.pos = 8
        (version,) = self.unpack("<I")
        if version != VERSION:
            raise FormatError(f"{path}: unsupported version {version}")

    def unpack(self, fmt):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise FormatError(f"{self.path}: truncated header")
        out = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return out

    def array(self, dtype, count, shape=None):
        dtype = np.dtype(dtype)
        nbytes = dtype.itemsize * count
        if self.pos + nbytes > len(self.data):
            raise FormatError(f"{self.path}: truncated payload")
        arr = np.frombuffer(self.data, dtype=dtype, count=count, offset=self.pos)
        self.pos += nbytes
        return arr.reshape(shape) if shape is not None else arr

    def done(self):
        if self.pos != len(self.data):
            raise FormatError(f"{self.path}: {len(self.data) - self.pos} trailing bytes")


def _read(path, magic):
    with open(path, "rb") as fh:
        return _Reader(fh.read(), magic, path)


def _head(magic):
    return magic + struct.pack("<I", VERSION)


# --- scene point cloud -----------------------------------------------------

def scene_to_bytes(scene):
    rec = np.stack([scene.x, scene.y, scene.radial_velocity,
                    np.abs(scene.reflectivity), np.angle(scene.reflectivity)], axis=1)
    return _head(MAGIC_SCENE) + struct.pack("<Q", len(scene)) + rec.astype("<f4").tobytes()


def write_scene(path, scene):
    atomic_write(path, scene_to_bytes(scene))


def read_scene(path, rng_seed=0):
    r = _read(path, MAGIC_SCENE)
    (n,) = r.unpack("<Q")
    rec = r.array("<f4", 5 * n, (n, 5)).astype(np.float64)
    r.done()
    refl = rec[:, 3] * np.exp(1j * rec[:, 4])
    return Scene(rec[:, 0], rec[:, 1], rec[:, 2], refl, rng_seed=rng_seed)


# --- raw data cube ---------------------------------------------------------

def write_raw_cube(path, cube):
    n_rx, m, n = cube.samples.shape
    data = (_head(MAGIC_RAW) + struct.pack("<QQQ", n_rx, m, n)
            + cube.tx_schedule.astype("<u4").tobytes()
            + cube.samples.astype("<c8").tobytes())
    atomic_write(path, data)


def read_raw_cube(path):
    r = _read(path, MAGIC_RAW)
    n_rx, m, n = r.unpack("<QQQ")
    sched = r.array("<u4", m).astype(np.int64)
    samples = r.array("<c8", n_rx * m * n, (n_rx, m, n)).astype(np.complex128)
    r.done()
    return RawDataCube(samples, sched)


# --- radar image -----------------------------------------------------------

def image_to_bytes(image):
    n_r, n_a = image.shape
    u = np.asarray(image.sin_azimuth_values)
    step = float(u[1] - u[0]) if u.size > 1 else 2.0
    header = struct.pack("<IQQdddd", 3, n_r, n_a, image.range_bin_spacing_m, float(u[0]), step,
                         image.velocity_resolution_mps)
    return _head(MAGIC_IMAGE) + header + image.channels().astype("<f4").tobytes()


def write_image(path, image):
    atomic_write(path, image_to_bytes(image))


def read_image(path):
    r = _read(path, MAGIC_IMAGE)
    n_ch, n_r, n_a, spacing, u0, step, vres = r.unpack("<IQQdddd")
    if n_ch != 3:
        raise FormatError(f"{path}: expected 3 channels, found {n_ch}")
    ch = r.array("<f4", 3 * n_r * n_a, (3, n_r, n_a)).astype(np.float64)
    r.done()
    u = sin_azimuth_grid(n_a)
    if abs(u0 - u[0]) > 1e-12 or abs(step - 2.0 / n_a) > 1e-12:
        raise FormatError(f"{path}: sin-azimuth axis is not the uniform [-1, 1) grid")
    return RadarImage(real_part=ch[0], imag_part=ch[1], doppler_map=ch[2],
                      range_bin_spacing_m=spacing, sin_azimuth_values=u,
                      velocity_resolution_mps=vres)


# --- ground truth ----------------------------------------------------------

def write_probability(path, p):
    p = np.asarray(p)
    atomic_write(path, _head(MAGIC_PROB) + struct.pack("<QQ", *p.shape) + p.astype("<f4").tobytes())


def read_probability(path):
    r = _read(path, MAGIC_PROB)
    n_r, n_a = r.unpack("<QQ")
    p = r.array("<f4", n_r * n_a, (n_r, n_a)).astype(np.float64)
    r.done()
    return p


def write_partition(path, part):
    lab = np.asarray(part.labels, dtype=np.uint8)
    atomic_write(path, _head(MAGIC_PART) + struct.pack("<QQd", *lab.shape, part.threshold)
                 + lab.tobytes())


def read_partition(path):
    r = _read(path, MAGIC_PART)
    n_r, n_a, thr = r.unpack("<QQd")
    lab = r.array(np.uint8, n_r * n_a, (n_r, n_a)).copy()
    r.done()
    return PixelPartition(labels=lab, threshold=thr)


# --- Cartesian image -------------------------------------------------------

def write_cartesian(path, img):
    ny, nx = img.data.shape
    x0 = float(img.x_values[0])
    y0 = float(img.y_values[0])
    dx = img.dx if nx > 1 else 1.0
    dy = img.dy if ny > 1 else 1.0
    data = (_head(MAGIC_CART) + struct.pack("<QQdddd", ny, nx, x0, dx, y0, dy)
            + img.data.astype("<f4").tobytes() + img.valid.astype(np.uint8).tobytes())
    atomic_write(path, data)


def read_cartesian(path):
    r = _read(path, MAGIC_CART)
    ny, nx, x0, dx, y0, dy = r.unpack("<QQdddd")
    data = r.array("<f4", ny * nx, (ny, nx)).astype(np.float64)
    valid = r.array(np.uint8, ny * nx, (ny, nx)).astype(bool)
    r.done()
    return CartesianImage(data=data, x_values=x0 + dx * np.arange(nx),
                          y_values=y0 + dy * np.arange(ny), valid=valid)
