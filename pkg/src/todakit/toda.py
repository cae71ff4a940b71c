"""Nonabelian Toda systems on a rectangular characteristic grid.

A system is fixed by a series tag and a block partition with unit steps.
Fields are block-diagonal (independent blocks stored, dependent blocks
reconstructed from the series constraints), the couplings sit on the block
sub/superdiagonals, and residuals of the governing matrix equation are
evaluated with centered second-order differences on the grid interior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .equations import (
    emit_equations,
    evaluate_rhs,
    independent_equations,
    _twisted_transpose,
)
from .exact import ShapeError, SingularMatrixError
from .grading import BlockStructure, canonical_block_operator
from .liealg import SeriesTag, antidiag_unit, symplectic_form

__all__ = [
    "ConstraintError",
    "DomainError",
    "TodaSystem",
    "CBlocks",
    "GridSpec",
    "GridField",
    "ResidualReport",
    "build_system",
    "make_c_blocks",
    "assemble_c",
    "complete_betas",
    "assemble_gamma",
    "gamma_grid",
    "field_from_closure",
    "residual_full",
    "block_residuals",
    "connection",
    "curvature_residual",
    "gauge_transform",
    "conformal_transform",
    "emit_equations",
]


class ConstraintError(ValueError):
    """Supplied blocks violate the system's constraint relations."""


class DomainError(ValueError):
    """Evaluation left the sampled domain or hit an excluded locus."""


_tt = _twisted_transpose


def _plain_t(values: np.ndarray) -> np.ndarray:
    return np.swapaxes(values, -1, -2)


def _max_abs(arr) -> float:
    return float(np.max(np.abs(arr))) if np.size(arr) else 0.0


@dataclass(frozen=True)
class TodaSystem:
    """A Toda system: block partition with unit steps plus its constraint class."""

    blocks: BlockStructure

    def __post_init__(self):
        if any(m != 1 for m in self.blocks.steps):
            raise ConstraintError("Toda systems require all gradation steps equal to 1")

    @property
    def tag(self) -> SeriesTag:
        return self.blocks.tag

    @property
    def level(self) -> int:
        """Lowest nontrivial degree of the gradation (always 1 here)."""
        return min(self.blocks.steps)

    @property
    def constraint_set(self) -> str:
        series = self.tag.series
        if series == "A":
            return "A-none"
        parity = "oddp" if self.blocks.count % 2 == 1 else "evenp"
        return ("C-" if series == "C" else "BD-") + parity

    @property
    def independent_beta_count(self) -> int:
        p = self.blocks.count
        if self.tag.series == "A":
            return p
        return p // 2 + (p % 2)

    @property
    def independent_c_count(self) -> int:
        p = self.blocks.count
        return p - 1 if self.tag.series == "A" else p // 2

    def central_form(self) -> np.ndarray | None:
        """Twisting matrix of the central block, when the block count is odd."""
        p = self.blocks.count
        if self.tag.series == "A" or p % 2 == 0:
            return None
        k = self.blocks.sizes[p // 2]
        if self.tag.series == "C":
            return symplectic_form(k // 2)
        return antidiag_unit(k)


def build_system(tag: SeriesTag, sizes) -> TodaSystem:
    """Validate block sizes for the series and wrap them in a TodaSystem."""
    blocks = BlockStructure(tag, tuple(sizes), (1,) * (len(tuple(sizes)) - 1))
    return TodaSystem(blocks)


# ---------------------------------------------------------------------------
# coupling blocks


@dataclass(frozen=True)
class CBlocks:
    """Sub/superdiagonal coupling blocks C_{-a}, C_{+a}, a = 1..p-1.

    Entries are complex matrices; an entry may carry a leading sample axis
    when the coupling varies along its own chirality line (C_{-a} along the
    first coordinate, C_{+a} along the second).
    """

    system: TodaSystem
    minus: tuple[np.ndarray, ...]
    plus: tuple[np.ndarray, ...]


def _shape_of_c(system: TodaSystem, sign: str, a: int) -> tuple[int, int]:
    sizes = system.blocks.sizes
    if sign == "-":
        return (sizes[a], sizes[a - 1])
    return (sizes[a - 1], sizes[a])


def _coerce_entry(system, sign, a, value) -> np.ndarray:
    arr = np.asarray(value, dtype=complex)
    want = _shape_of_c(system, sign, a)
    if arr.ndim == 2 and arr.shape == want:
        return arr
    if arr.ndim == 3 and arr.shape[1:] == want:
        return arr
    raise ShapeError(
        f"C_{{{sign}{a}}} must have block shape {want} (optionally stacked), got {arr.shape}"
    )


def _complete_c_family(system: TodaSystem, sign: str, independent) -> list[np.ndarray]:
    p = system.blocks.count
    s = p // 2
    cs = system.constraint_set
    ind = [_coerce_entry(system, sign, a, independent[a - 1]) for a in range(1, len(independent) + 1)]
    if cs == "A-none":
        if len(ind) != p - 1:
            raise ShapeError(f"expected {p - 1} coupling blocks, got {len(ind)}")
        return ind
    if len(ind) != s:
        raise ShapeError(f"expected {s} independent coupling blocks, got {len(ind)}")
    full: list = [None] * (p - 1)
    for a in range(1, s + 1):
        full[a - 1] = ind[a - 1]
    if p % 2 == 1:
        for a in range(1, s):
            full[p - a - 1] = -_tt(ind[a - 1])
        if cs == "BD-oddp":
            full[p - s - 1] = -_tt(ind[s - 1])
        else:  # C-oddp: central pair twisted by the small symplectic form
            itld = antidiag_unit(system.blocks.sizes[s - 1]).astype(complex)
            jf = symplectic_form(system.blocks.sizes[s] // 2).astype(complex)
            if sign == "-":
                full[s] = -(itld @ _plain_t(ind[s - 1]) @ jf)
            else:
                full[s] = jf @ _plain_t(ind[s - 1]) @ itld
    else:
        for a in range(1, s):
            full[p - a - 1] = -_tt(ind[a - 1])
        central = ind[s - 1]
        expected = -_tt(central) if cs == "BD-evenp" else _tt(central)
        if _max_abs(central - expected) > 1e-12 * (1.0 + _max_abs(central)):
            raise ConstraintError(
                f"central coupling C_{{{sign}{s}}} must be "
                + ("T-antisymmetric" if cs == "BD-evenp" else "T-symmetric")
            )
    return full


def _validate_c_family(system: TodaSystem, sign: str, entries, tol: float):
    p = system.blocks.count
    s = p // 2
    cs = system.constraint_set
    if cs == "A-none":
        return
    scale = 1.0 + max((_max_abs(e) for e in entries), default=0.0)

    def check(lhs, rhs, what):
        if _max_abs(lhs - rhs) > tol * scale:
            raise ConstraintError(f"coupling constraint violated: {what}")

    for a in range(1, p):
        mate = p - a
        if cs == "C-oddp" and a in (s, s + 1):
            continue
        if a >= mate:  # self-paired central entries are checked below
            continue
        check(_tt(entries[a - 1]), -entries[mate - 1], f"C_{{{sign}{a}}}^T = -C_{{{sign}{mate}}}")
    if cs == "C-oddp":
        itld = antidiag_unit(system.blocks.sizes[s - 1]).astype(complex)
        jf = symplectic_form(system.blocks.sizes[s] // 2).astype(complex)
        if sign == "-":
            check(itld @ _plain_t(entries[s - 1]) @ jf, -entries[s], "twisted central pair")
        else:
            check(jf @ _plain_t(entries[s - 1]) @ itld, entries[s], "twisted central pair")
    elif cs == "BD-evenp":
        check(_tt(entries[s - 1]), -entries[s - 1], f"C_{{{sign}{s}}}^T = -C_{{{sign}{s}}}")
    elif cs == "C-evenp":
        check(_tt(entries[s - 1]), entries[s - 1], f"C_{{{sign}{s}}}^T = C_{{{sign}{s}}}")


def make_c_blocks(system: TodaSystem, minus, plus, tol: float = 1e-12) -> CBlocks:
    """Build coupling blocks from either the independent or the full ones.

    Given only the independent blocks (all of them for series A, the first
    half otherwise), the dependent blocks are completed from the constraint
    relations; given all p-1 blocks, the relations are validated to ``tol``.
    """
    p = system.blocks.count
    out = {}
    for sign, entries in (("-", minus), ("+", plus)):
        entries = list(entries)
        if len(entries) == p - 1 and system.tag.series != "A":
            coerced = [_coerce_entry(system, sign, a, entries[a - 1]) for a in range(1, p)]
            _validate_c_family(system, sign, coerced, tol)
            out[sign] = coerced
        else:
            out[sign] = _complete_c_family(system, sign, entries)
    return CBlocks(system, tuple(out["-"]), tuple(out["+"]))


def assemble_c(system: TodaSystem, c: CBlocks, sign: str, line_index: int | None = None) -> np.ndarray:
    """Full n x n coupling matrix with blocks on the sub- or superdiagonal."""
    if sign not in ("-", "+"):
        raise ValueError("sign must be '-' or '+'")
    n = system.tag.ambient_dim
    slices = system.blocks.slices()
    out = np.zeros((n, n), dtype=complex)
    entries = c.minus if sign == "-" else c.plus
    for a, entry in enumerate(entries, start=1):
        if entry.ndim == 3:
            if line_index is None:
                raise ValueError("coupling varies along the grid; a line index is required")
            entry = entry[line_index]
        if sign == "-":
            out[slices[a], slices[a - 1]] = entry
        else:
            out[slices[a - 1], slices[a]] = entry
    return out


def _c_lines(system: TodaSystem, c: CBlocks, sign: str, count: int) -> np.ndarray:
    """Coupling matrices materialized on each line of the relevant chirality."""
    n = system.tag.ambient_dim
    slices = system.blocks.slices()
    out = np.zeros((count, n, n), dtype=complex)
    entries = c.minus if sign == "-" else c.plus
    for a, entry in enumerate(entries, start=1):
        if entry.ndim == 3 and entry.shape[0] != count:
            raise ShapeError(
                f"coupling C_{{{sign}{a}}} has {entry.shape[0]} samples, grid needs {count}"
            )
        block = entry if entry.ndim == 3 else entry[None]
        if sign == "-":
            out[:, slices[a], slices[a - 1]] = block
        else:
            out[:, slices[a - 1], slices[a]] = block
    return out


# ---------------------------------------------------------------------------
# block-diagonal fields


def _batched_inv(values: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.inv(values)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"singular block sample: {exc}") from exc


def central_defect(system: TodaSystem, central: np.ndarray) -> float:
    """Constraint defect of the self-paired central block (odd block count)."""
    form = system.central_form()
    if form is None:
        raise ValueError("system has no central block")
    k = form.shape[0]
    eye = np.eye(k)
    if system.tag.series == "C":
        return _max_abs(form @ _plain_t(central) @ form @ central + eye)
    return _max_abs(_tt(central) @ central - eye)


def complete_betas(system: TodaSystem, betas, check_tol: float | None = 1e-10) -> list[np.ndarray]:
    """All p diagonal blocks from the independent ones (batched arrays allowed)."""
    p = system.blocks.count
    sizes = system.blocks.sizes
    want = system.independent_beta_count
    values = [np.asarray(b, dtype=complex) for b in betas]
    if len(values) != want:
        raise ShapeError(f"expected {want} independent blocks, got {len(values)}")
    for a, val in enumerate(values, start=1):
        k = sizes[a - 1]
        if val.shape[-2:] != (k, k):
            raise ShapeError(f"block {a} must be {k} x {k}, got {val.shape[-2:]}")
    if system.tag.series == "A":
        return values
    if p % 2 == 1 and check_tol is not None:
        defect = central_defect(system, values[-1])
        if defect > check_tol:
            raise ConstraintError(
                f"central block violates its self-constraint (defect {defect:.3e})"
            )
    full: list = [None] * p
    for a, val in enumerate(values, start=1):
        full[a - 1] = val
    for a in range(1, p // 2 + 1):
        full[p - a] = _batched_inv(_tt(values[a - 1]))
    return full


def assemble_gamma(system: TodaSystem, betas, tol: float = 1e-10) -> np.ndarray:
    """Block-diagonal group element from independent block values at one point."""
    full = complete_betas(system, betas, check_tol=tol)
    lead = np.broadcast_shapes(*(b.shape[:-2] for b in full))
    n = system.tag.ambient_dim
    out = np.zeros(lead + (n, n), dtype=complex)
    for sl, block in zip(system.blocks.slices(), full):
        out[..., sl, sl] = block
    return out


@dataclass(frozen=True)
class GridSpec:
    """Uniform rectangular grid in the two characteristic coordinates."""

    z_minus_start: float
    z_plus_start: float
    h_minus: float
    h_plus: float
    n_minus: int
    n_plus: int

    def __post_init__(self):
        if self.n_minus < 3 or self.n_plus < 3:
            raise ValueError("need at least 3 samples per direction for the interior stencil")
        if self.h_minus <= 0 or self.h_plus <= 0:
            raise ValueError("grid spacings must be positive")

    @property
    def z_minus(self) -> np.ndarray:
        return self.z_minus_start + self.h_minus * np.arange(self.n_minus)

    @property
    def z_plus(self) -> np.ndarray:
        return self.z_plus_start + self.h_plus * np.arange(self.n_plus)


@dataclass(frozen=True)
class GridField:
    """Samples of the independent diagonal blocks over the grid."""

    spec: GridSpec
    betas: tuple[np.ndarray, ...]

    def max_condition(self) -> float:
        return max(float(np.max(np.linalg.cond(b))) for b in self.betas)


def field_from_closure(system: TodaSystem, spec: GridSpec, closure) -> GridField:
    """Sample ``closure(z_minus, z_plus) -> [independent blocks]`` on the grid."""
    sizes = system.blocks.sizes
    count = system.independent_beta_count
    arrays = [
        np.empty((spec.n_minus, spec.n_plus, sizes[a], sizes[a]), dtype=complex)
        for a in range(count)
    ]
    for i, zm in enumerate(spec.z_minus):
        for j, zp in enumerate(spec.z_plus):
            values = closure(zm, zp)
            for a in range(count):
                arrays[a][i, j] = np.asarray(values[a], dtype=complex)
    return GridField(spec, tuple(arrays))


def gamma_grid(system: TodaSystem, field: GridField) -> np.ndarray:
    """Full block-diagonal group element sampled over the grid."""
    full = complete_betas(system, field.betas, check_tol=None)
    lead = np.broadcast_shapes(*(b.shape[:-2] for b in full))
    n = system.tag.ambient_dim
    out = np.zeros(lead + (n, n), dtype=complex)
    for sl, block in zip(system.blocks.slices(), full):
        out[..., sl, sl] = block
    return out


def _gamma_and_inverse(system, field):
    """Assemble gamma and its blockwise inverse over the grid."""
    full = complete_betas(system, field.betas, check_tol=None)
    n = system.tag.ambient_dim
    shape = (field.spec.n_minus, field.spec.n_plus, n, n)
    gamma = np.zeros(shape, dtype=complex)
    gamma_inv = np.zeros(shape, dtype=complex)
    for sl, block in zip(system.blocks.slices(), full):
        gamma[..., sl, sl] = block
        gamma_inv[..., sl, sl] = _batched_inv(block)
    return gamma, gamma_inv


# ---------------------------------------------------------------------------
# residual reports


@dataclass(frozen=True)
class ResidualReport:
    """Interior residual grids per block with max and L2 norms."""

    spec: GridSpec
    labels: tuple[str, ...]
    grids: tuple[np.ndarray, ...]
    full_grid: np.ndarray | None = dataclass_field(default=None, repr=False)
    stencil_order: int = 2

    @property
    def max_norms(self) -> tuple[float, ...]:
        return tuple(_max_abs(g) for g in self.grids)

    @property
    def l2_norms(self) -> tuple[float, ...]:
        weight = self.spec.h_minus * self.spec.h_plus
        return tuple(float(math.sqrt(weight * np.sum(np.abs(g) ** 2))) for g in self.grids)

    @property
    def max_norm(self) -> float:
        return max(self.max_norms)

    @property
    def l2_norm(self) -> float:
        return float(math.sqrt(sum(v**2 for v in self.l2_norms)))


def _interior_u(values: np.ndarray, inverses: np.ndarray, h_minus: float) -> np.ndarray:
    """beta^{-1} d_- beta on the interior of the first axis, centered stencil."""
    dminus = (values[2:] - values[:-2]) / (2.0 * h_minus)
    return inverses[1:-1] @ dminus


def residual_full(system: TodaSystem, field: GridField, c: CBlocks) -> ResidualReport:
    """Residual of the full matrix equation on the grid interior.

    R = d_+(gamma^{-1} d_- gamma) - [c_-, gamma^{-1} c_+ gamma], with the
    nested derivative formed by differencing the logarithmic-derivative grid,
    so each block of R matches the blockwise evaluation stencil for stencil.
    """
    spec = field.spec
    gamma, gamma_inv = _gamma_and_inverse(system, field)
    u = _interior_u(gamma, gamma_inv, spec.h_minus)
    dpu = (u[:, 2:] - u[:, :-2]) / (2.0 * spec.h_plus)
    cp = _c_lines(system, c, "+", spec.n_plus)
    cm = _c_lines(system, c, "-", spec.n_minus)
    w = gamma_inv @ cp[None, :] @ gamma
    w_int = w[1:-1, 1:-1]
    cm_int = cm[1:-1][:, None]
    commutator = cm_int @ w_int - w_int @ cm_int
    residual = dpu - commutator
    slices = system.blocks.slices()
    grids = tuple(residual[..., sl, sl] for sl in slices)
    labels = tuple(f"block_{a}" for a in range(1, system.blocks.count + 1))
    return ResidualReport(spec, labels, grids, full_grid=residual)


def block_residuals(system: TodaSystem, field: GridField, c: CBlocks) -> ResidualReport:
    """Residuals of the independent block equations (folded boundary forms)."""
    spec = field.spec
    betas = field.betas
    inverses = [_batched_inv(b) for b in betas]

    def get_beta(a):
        return betas[a - 1][1:-1, 1:-1]

    def get_c(sign, a):
        entry = (c.minus if sign == "-" else c.plus)[a - 1]
        if entry.ndim == 2:
            return entry
        if sign == "-":
            if entry.shape[0] != spec.n_minus:
                raise ShapeError("coupling sample count does not match the grid")
            return entry[1:-1][:, None]
        if entry.shape[0] != spec.n_plus:
            raise ShapeError("coupling sample count does not match the grid")
        return entry[1:-1][None, :]

    grids = []
    labels = []
    for eq in independent_equations(system):
        a = eq.block
        u = _interior_u(betas[a - 1], inverses[a - 1], spec.h_minus)
        dpu = (u[:, 2:] - u[:, :-2]) / (2.0 * spec.h_plus)
        rhs = evaluate_rhs(eq, get_beta, get_c)
        rhs = np.broadcast_to(rhs, dpu.shape)
        grids.append(dpu - rhs)
        labels.append(f"beta_{a}")
    return ResidualReport(spec, tuple(labels), tuple(grids))


def _d_with_edges(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Second-order derivative along an axis: centered inside, one-sided at edges."""
    moved = np.moveaxis(values, axis, 0)
    out = np.empty_like(moved)
    out[1:-1] = (moved[2:] - moved[:-2]) / (2.0 * h)
    out[0] = (-3.0 * moved[0] + 4.0 * moved[1] - moved[2]) / (2.0 * h)
    out[-1] = (3.0 * moved[-1] - 4.0 * moved[-2] + moved[-3]) / (2.0 * h)
    return np.moveaxis(out, 0, axis)


def connection(system: TodaSystem, field: GridField, c: CBlocks):
    """Connection components (omega_minus, omega_plus) sampled on the full grid."""
    spec = field.spec
    gamma, gamma_inv = _gamma_and_inverse(system, field)
    dgamma = _d_with_edges(gamma, spec.h_minus, axis=0)
    cm = _c_lines(system, c, "-", spec.n_minus)
    cp = _c_lines(system, c, "+", spec.n_plus)
    omega_minus = gamma_inv @ dgamma + cm[:, None]
    omega_plus = gamma_inv @ cp[None, :] @ gamma
    return omega_minus, omega_plus


def curvature_residual(omega_minus: np.ndarray, omega_plus: np.ndarray, spec: GridSpec) -> ResidualReport:
    """Flatness defect d_- omega_+ - d_+ omega_- + [omega_-, omega_+] on the interior."""
    if omega_minus.shape != omega_plus.shape:
        raise ShapeError("connection components must share one grid shape")
    dm_plus = (omega_plus[2:] - omega_plus[:-2]) / (2.0 * spec.h_minus)
    dp_minus = (omega_minus[:, 2:] - omega_minus[:, :-2]) / (2.0 * spec.h_plus)
    om_int = omega_minus[1:-1, 1:-1]
    op_int = omega_plus[1:-1, 1:-1]
    curv = dm_plus[:, 1:-1] - dp_minus[1:-1] + om_int @ op_int - op_int @ om_int
    return ResidualReport(spec, ("curvature",), (curv,), full_grid=curv)


# ---------------------------------------------------------------------------
# symmetry transforms


def _as_line(value, length: int, k: int, what: str) -> np.ndarray:
    arr = np.asarray(value, dtype=complex)
    if arr.ndim == 2 and arr.shape == (k, k):
        return np.broadcast_to(arr, (length, k, k))
    if arr.ndim == 3 and arr.shape == (length, k, k):
        return arr
    raise ShapeError(f"{what} must be a {k} x {k} matrix or a line of {length} of them")


def gauge_transform(system: TodaSystem, field: GridField, c: CBlocks, xi_minus, xi_plus,
                    tol: float = 1e-10):
    """Apply gamma -> xi_+^{-1} gamma xi_- with chiral block-diagonal factors.

    ``xi_minus`` (``xi_plus``) supplies one value or sample line per
    independent block, constant along the opposite coordinate.  Returns the
    transformed field together with the conjugated coupling blocks.
    """
    spec = field.spec
    sizes = system.blocks.sizes
    count = system.independent_beta_count
    xi_m = [
        _as_line(x, spec.n_minus, sizes[a], f"xi_minus block {a + 1}")
        for a, x in enumerate(xi_minus)
    ]
    xi_p = [
        _as_line(x, spec.n_plus, sizes[a], f"xi_plus block {a + 1}")
        for a, x in enumerate(xi_plus)
    ]
    if len(xi_m) != count or len(xi_p) != count:
        raise ShapeError(f"expected {count} gauge blocks per chirality")
    xi_m_full = complete_betas(system, xi_m, check_tol=tol)
    xi_p_full = complete_betas(system, xi_p, check_tol=tol)
    new_betas = []
    for a in range(count):
        left = _batched_inv(xi_p_full[a])[None, :]
        right = xi_m_full[a][:, None]
        new_betas.append(left @ field.betas[a] @ right)
    new_minus, new_plus = [], []
    p = system.blocks.count
    for a in range(1, p):
        minus_entry = c.minus[a - 1]
        plus_entry = c.plus[a - 1]
        xm_next, xm_here = xi_m_full[a], xi_m_full[a - 1]
        xp_here, xp_next = xi_p_full[a - 1], xi_p_full[a]
        new_m = _batched_inv(xm_next) @ minus_entry @ xm_here
        new_p = _batched_inv(xp_here) @ plus_entry @ xp_next
        new_minus.append(_squeeze_constant(new_m))
        new_plus.append(_squeeze_constant(new_p))
    if system.tag.series == "A":
        new_c = CBlocks(system, tuple(new_minus), tuple(new_plus))
    else:
        new_c = make_c_blocks(system, new_minus, new_plus, tol=max(tol, 1e-10))
    return GridField(spec, tuple(new_betas)), new_c


def _squeeze_constant(entry: np.ndarray) -> np.ndarray:
    """Collapse a sample line whose values are all equal back to one matrix."""
    if entry.ndim == 2:
        return entry
    if entry.shape[0] > 0 and np.allclose(entry, entry[0], rtol=0.0, atol=1e-14 * (1 + _max_abs(entry))):
        return entry[0].copy()
    return entry


def conformal_transform(system: TodaSystem, field, f_minus, f_plus, spec: GridSpec | None = None) -> GridField:
    """Reparametrize by (F^-, F^+) and compensate with the grading weights.

    ``f_minus`` and ``f_plus`` are (F, dF) pairs of callables with dF > 0 on
    the grid.  ``field`` is either a closure (z_minus, z_plus) -> list of
    independent block values, or a GridField, in which case the composed
    samples are obtained by bilinear interpolation and must stay inside the
    sampled rectangle.  The new field lives on the original grid.
    """
    if isinstance(field, GridField):
        if spec is None:
            spec = field.spec
        closure = _interpolating_closure(system, field)
    else:
        if spec is None:
            raise ValueError("a GridSpec is required when the field is given as a closure")
        closure = field
    fm, dfm = f_minus
    fp, dfp = f_plus
    levels = canonical_block_operator(system.blocks).levels
    level = system.level
    count = system.independent_beta_count
    sizes = system.blocks.sizes
    arrays = [
        np.empty((spec.n_minus, spec.n_plus, sizes[a], sizes[a]), dtype=complex)
        for a in range(count)
    ]
    for i, zm in enumerate(spec.z_minus):
        dm = dfm(zm)
        if dm <= 0:
            raise DomainError(f"dF^- must be positive; got {dm} at {zm}")
        for j, zp in enumerate(spec.z_plus):
            dp = dfp(zp)
            if dp <= 0:
                raise DomainError(f"dF^+ must be positive; got {dp} at {zp}")
            values = closure(fm(zm), fp(zp))
            for a in range(count):
                weight = (dp * dm) ** (-float(levels[a]) / level)
                arrays[a][i, j] = weight * np.asarray(values[a], dtype=complex)
    return GridField(spec, tuple(arrays))


def _interpolating_closure(system: TodaSystem, field: GridField):
    spec = field.spec
    zm, zp = spec.z_minus, spec.z_plus

    def closure(x, y):
        if not (zm[0] - 1e-12 <= x <= zm[-1] + 1e-12 and zp[0] - 1e-12 <= y <= zp[-1] + 1e-12):
            raise DomainError(f"composed sample point ({x}, {y}) leaves the sampled domain")
        i = min(max(int((x - zm[0]) / spec.h_minus), 0), spec.n_minus - 2)
        j = min(max(int((y - zp[0]) / spec.h_plus), 0), spec.n_plus - 2)
        tx = (x - zm[i]) / spec.h_minus
        ty = (y - zp[j]) / spec.h_plus
        out = []
        for block in field.betas:
            corner = (
                (1 - tx) * (1 - ty) * block[i, j]
                + tx * (1 - ty) * block[i + 1, j]
                + (1 - tx) * ty * block[i, j + 1]
                + tx * ty * block[i + 1, j + 1]
            )
            out.append(corner)
        return out

    return closure
