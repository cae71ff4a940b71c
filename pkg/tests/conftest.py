"""Shared generators for random constrained systems and fields."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.linalg import expm

import todakit as tk
from todakit.liealg import symplectic_form, t_transpose
from todakit.solver import CharacteristicData

# One representative per constraint class, plus size variety.
SYSTEM_CASES = {
    "A-none": [("A", 1, (1, 1)), ("A", 2, (1, 2)), ("A", 3, (2, 1, 1))],
    "BD-oddp": [("B", 2, (1, 3, 1)), ("B", 3, (2, 3, 2)), ("D", 3, (1, 4, 1))],
    "BD-evenp": [("D", 3, (3, 3)), ("D", 4, (1, 3, 3, 1))],
    "C-oddp": [("C", 2, (1, 2, 1)), ("C", 3, (1, 1, 2, 1, 1))],
    "C-evenp": [("C", 1, (1, 1)), ("C", 2, (2, 2))],
}

ALL_CASES = [case for cases in SYSTEM_CASES.values() for case in cases]


def build_case(series: str, rank: int, sizes) -> tk.TodaSystem:
    return tk.build_system(tk.SeriesTag(series, rank), sizes)


def random_complex(rng, shape, scale=1.0):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def central_generator(system: tk.TodaSystem, rng, scale=0.4) -> np.ndarray:
    """Random element of the central block's constraint algebra."""
    p = system.blocks.count
    k = system.blocks.sizes[p // 2]
    raw = random_complex(rng, (k, k), scale)
    if system.tag.series == "C":
        form = symplectic_form(k // 2).astype(complex)
        return 0.5 * (raw + form @ raw.T @ form)
    return 0.5 * (raw - t_transpose(raw))


def smooth_closure(system: tk.TodaSystem, rng, *, affine=False, scale=0.35):
    """Closure producing smooth constraint-respecting independent blocks.

    Each block is the exponential of one fixed generator times a scalar
    field, so central blocks stay on their group manifold.  With ``affine``
    the scalar fields are affine-linear, which keeps the sampled field
    compatible with centered differencing to machine precision.
    """
    count = system.independent_beta_count
    sizes = system.blocks.sizes
    p = system.blocks.count
    gens, coeffs = [], []
    for a in range(count):
        central = system.tag.series != "A" and p % 2 == 1 and a == count - 1
        gen = central_generator(system, rng, scale) if central \
            else random_complex(rng, (sizes[a], sizes[a]), scale)
        gens.append(gen)
        coeffs.append(rng.uniform(-0.6, 0.6, size=4))

    def closure(zm, zp):
        out = []
        for gen, (c0, c1, c2, c3) in zip(gens, coeffs):
            if affine:
                f = c0 + c1 * zm + c2 * zp
            else:
                f = c0 + c1 * np.sin(zm) + c2 * np.cos(zp) + c3 * zm * zp
            out.append(expm(gen * f))
        return out

    return closure


def random_couplings(system: tk.TodaSystem, rng, scale=0.5) -> tk.CBlocks:
    """Random independent coupling blocks, centrally projected where required."""
    sizes = system.blocks.sizes
    p = system.blocks.count
    s = p // 2
    cs = system.constraint_set
    minus, plus = [], []
    for a in range(1, system.independent_c_count + 1):
        cm = random_complex(rng, (sizes[a], sizes[a - 1]), scale)
        cp = random_complex(rng, (sizes[a - 1], sizes[a]), scale)
        if a == s and cs == "BD-evenp":
            cm, cp = 0.5 * (cm - t_transpose(cm)), 0.5 * (cp - t_transpose(cp))
        elif a == s and cs == "C-evenp":
            cm, cp = 0.5 * (cm + t_transpose(cm)), 0.5 * (cp + t_transpose(cp))
        minus.append(cm)
        plus.append(cp)
    return tk.make_c_blocks(system, minus, plus)


def boundary_from_closure(system: tk.TodaSystem, spec: tk.GridSpec, closure) -> CharacteristicData:
    sizes = system.blocks.sizes
    count = system.independent_beta_count
    left = [np.empty((spec.n_minus, sizes[a], sizes[a]), dtype=complex) for a in range(count)]
    bottom = [np.empty((spec.n_plus, sizes[a], sizes[a]), dtype=complex) for a in range(count)]
    for i, zm in enumerate(spec.z_minus):
        values = closure(zm, spec.z_plus[0])
        for a in range(count):
            left[a][i] = values[a]
    for j, zp in enumerate(spec.z_plus):
        values = closure(spec.z_minus[0], zp)
        for a in range(count):
            bottom[a][j] = values[a]
    return CharacteristicData(spec, tuple(left), tuple(bottom))


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)
