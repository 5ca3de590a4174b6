"""Synthetic data sets with known critical structure."""
from __future__ import annotations

import math

import numpy as np

from .complex import CellComplex, circle_complex, freudenthal_grid, path_complex


def cubic_family(x, t):
    """x**4/4 + x**3/3 + t*x**2: two minima and a maximum for t < 1/8, one minimum after."""
    x = np.asarray(x, dtype=float)
    return x ** 4 / 4 + x ** 3 / 3 + t * x ** 2


def cubic_critical_counts(t: float) -> tuple[int, int]:
    """(minima, maxima) of the cubic family at time t, from the sign pattern of its derivative.

    The derivative is x * (x**2 + x + 2t); the quadratic factor has real
    roots iff 1 - 8t > 0, and both are non-zero iff t != 0.
    """
    disc = 1 - 8 * t
    if disc > 0 and t != 0:
        return 2, 1
    if disc < 0:
        return 1, 0
    raise ValueError(f"t = {t} is a degenerate time")


def cubic_slices(n_vertices: int = 201, lo: float = -3.0, hi: float = 2.0,
                 times=None) -> tuple[CellComplex, list[float], list[np.ndarray]]:
    if times is None:
        times = [round(-1 + 0.05 * k, 10) for k in range(41)]
    xs = np.linspace(lo, hi, n_vertices)
    cx = path_complex(n_vertices, xs=xs)
    return cx, list(times), [cubic_family(xs, t) for t in times]


def lattice_saddle(eps: float, half_width: float = 1.0) -> tuple[CellComplex, np.ndarray, int]:
    """(y - 10x)(y - 11x) on the eps-lattice covering [-hw, hw]^2; returns the origin vertex too."""
    m = int(round(half_width / eps))
    w = 2 * m + 1
    cx = freudenthal_grid(w, w, spacing=eps, origin=(-m * eps, -m * eps))
    idx = np.arange(w)
    gx, gy = np.meshgrid((idx - m) * eps, (idx - m) * eps)
    vals = ((gy - 10 * gx) * (gy - 11 * gx)).ravel()
    return cx, vals, m * w + m


def pit_frames(n_frames: int = 12, size: int = 64, n_pits: int = 5, *,
               depth: float = 100.0, noise: float = 10.0, background: float = 200.0,
               sigma: float = 4.0, speed: float = 1.0, seed: int = 0
               ) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Frames of Gaussian pits orbiting the image centre over a noisy plateau.

    The pits sit on a ring of radius ~size/3.5 and all advance ``speed``
    pixels of arc per frame, so they never approach each other. Noise is
    uniform on [0, noise). Returns (frames, centers): uint8 (size, size)
    arrays and, per frame, the (n_pits, 2) array of (x, y) pit centres.
    """
    rng = np.random.default_rng(seed)
    radius = size / 3.5
    phase0 = 2 * math.pi * (np.arange(n_pits) + rng.uniform(-0.1, 0.1, n_pits)) / n_pits
    omega = speed / radius
    yy, xx = np.mgrid[0:size, 0:size]
    frames, centers = [], []
    for k in range(n_frames):
        ang = phase0 + k * omega
        c = np.stack([size / 2 + radius * np.cos(ang), size / 2 + radius * np.sin(ang)], axis=1)
        img = np.full((size, size), background)
        for px, py in c:
            img -= depth * np.exp(-((xx - px) ** 2 + (yy - py) ** 2) / (2 * sigma ** 2))
        img += rng.uniform(0, noise, size=img.shape)
        frames.append(np.clip(np.rint(img), 0, 255).astype(np.uint8))
        centers.append(c)
    return frames, centers


def circle_with_extrema(n: int, min_angle: float, max_angle: float, *,
                        phase: float = 0.0) -> tuple[CellComplex, np.ndarray]:
    """n-gon whose vertex values have one minimum and one maximum.

    Values are the angular distance to ``min_angle`` (in radians), plus a tiny
    index ramp so they are injective; the largest sits nearest ``max_angle``.
    """
    cx = circle_complex(n, phase=phase)
    th = phase + 2 * np.pi * np.arange(n) / n
    d_min = np.abs((th - min_angle + np.pi) % (2 * np.pi) - np.pi)
    d_max = np.abs((th - max_angle + np.pi) % (2 * np.pi) - np.pi)
    vals = d_min - d_max + 1e-3 * np.arange(n)
    return cx, vals
