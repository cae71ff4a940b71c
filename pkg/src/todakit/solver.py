"""Characteristic marching for Toda systems and closed-form test fields.

The governing equation is hyperbolic in the two grid coordinates, so data on
the two boundary characteristics determines the solution.  The scheme keeps
the logarithmic derivative u_a = beta_a^{-1} d_- beta_a as a companion
variable: each column step advances u_a with a midpoint rule (right-hand
side at the averaged field, iterated to a fixed point) and then recovers
beta_a along the first coordinate with an implicit midpoint rule that is
solvable in closed form.  Self-paired central blocks are re-projected onto
their constraint manifold after every accepted column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equations import evaluate_rhs, independent_equations
from .exact import ShapeError
from .liealg import SeriesTag
from .toda import (
    CBlocks,
    DomainError,
    GridField,
    GridSpec,
    ResidualReport,
    TodaSystem,
    block_residuals,
    build_system,
    make_c_blocks,
)

__all__ = [
    "BlowUpError",
    "ConvergenceError",
    "CharacteristicData",
    "SolveResult",
    "ConvergenceStudy",
    "march",
    "liouville_system",
    "liouville_closure",
    "liouville_field",
    "liouville_boundary",
    "convergence_study",
]


class BlowUpError(RuntimeError):
    """A block sample lost invertibility during marching."""

    def __init__(self, message: str, location: tuple[int, int]):
        super().__init__(message)
        self.location = location


class ConvergenceError(RuntimeError):
    """The corrector fixed point failed to contract."""


@dataclass(frozen=True)
class CharacteristicData:
    """Boundary samples on the two characteristic lines.

    ``left`` holds, per independent block, the samples along the first
    coordinate at the initial second coordinate (n_minus entries);
    ``bottom`` the samples along the second coordinate at the initial first
    coordinate (n_plus entries).  The corner sample must agree.
    """

    spec: GridSpec
    left: tuple[np.ndarray, ...]
    bottom: tuple[np.ndarray, ...]

    def __post_init__(self):
        for name, lines, count in (("left", self.left, self.spec.n_minus),
                                   ("bottom", self.bottom, self.spec.n_plus)):
            for a, arr in enumerate(lines, start=1):
                if arr.ndim != 3 or arr.shape[0] != count or arr.shape[1] != arr.shape[2]:
                    raise ShapeError(
                        f"{name} line of block {a} must be ({count}, k, k), got {arr.shape}"
                    )
        for a, (lft, bot) in enumerate(zip(self.left, self.bottom), start=1):
            scale = 1.0 + float(np.max(np.abs(lft[0])))
            if float(np.max(np.abs(lft[0] - bot[0]))) > 1e-12 * scale:
                raise ValueError(f"corner samples of block {a} disagree")


@dataclass(frozen=True)
class SolveResult:
    field: GridField
    residual: ResidualReport
    corrector_iterations: tuple[int, ...]

    @property
    def step_sizes(self) -> tuple[float, float]:
        return (self.field.spec.h_minus, self.field.spec.h_plus)


def _staggered_log_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """beta^{-1} d beta at the half-points of a sample line.

    Uses the Cayley form (2/h)(I + T)^{-1}(T - I) with T_i the one-step
    transfer beta_i^{-1} beta_{i+1}; this is the exact inverse of the
    implicit midpoint recovery step, and a second-order midpoint value.
    """
    eye = np.eye(values.shape[-1])
    transfer = np.linalg.inv(values[:-1]) @ values[1:]
    return (2.0 / h) * (np.linalg.inv(eye + transfer) @ (transfer - eye))


def _project_central(system: TodaSystem, g: np.ndarray) -> np.ndarray:
    """Newton steps toward the central block's constraint manifold."""
    form = system.central_form().astype(complex)
    form_inv = np.linalg.inv(form)
    for _ in range(3):
        defect = np.swapaxes(g, -1, -2) @ form @ g - form
        if float(np.max(np.abs(defect))) < 1e-14 * (1.0 + float(np.max(np.abs(g)))):
            break
        g = g @ (np.eye(g.shape[-1]) - 0.5 * form_inv @ defect)
    return g


def march(system: TodaSystem, c: CBlocks, data: CharacteristicData, *,
          max_correctors: int = 25, fp_tol: float = 1e-12,
          cond_limit: float = 1e12) -> SolveResult:
    """Fill the grid column by column from characteristic boundary data.

    Raises :class:`BlowUpError` at the first sample whose condition number
    or magnitude degenerates, and :class:`ConvergenceError` if the corrector
    does not reach its fixed point within ``max_correctors`` sweeps.
    """
    spec = data.spec
    ni, nj = spec.n_minus, spec.n_plus
    hm, hp = spec.h_minus, spec.h_plus
    count = system.independent_beta_count
    sizes = system.blocks.sizes
    equations = independent_equations(system)
    odd_central = system.tag.series != "A" and system.blocks.count % 2 == 1

    betas = [np.empty((ni, nj, sizes[a], sizes[a]), dtype=complex) for a in range(count)]
    data_mag, data_inv = [], []
    for a in range(count):
        betas[a][:, 0] = data.left[a]
        betas[a][0, :] = data.bottom[a]
        try:
            inv_scale = max(
                float(np.max(np.abs(np.linalg.inv(data.left[a])))),
                float(np.max(np.abs(np.linalg.inv(data.bottom[a])))),
            )
        except np.linalg.LinAlgError as exc:
            raise ValueError(f"boundary data of block {a + 1} is not invertible: {exc}") from exc
        data_mag.append(max(float(np.max(np.abs(data.left[a]))),
                            float(np.max(np.abs(data.bottom[a])))))
        data_inv.append(inv_scale)

    def c_minus_half(a: int) -> np.ndarray:
        entry = c.minus[a - 1]
        if entry.ndim == 2:
            return entry
        return 0.5 * (entry[:-1] + entry[1:])  # values at the row half-points

    def c_plus_mid(a: int, j: int) -> np.ndarray:
        entry = c.plus[a - 1]
        if entry.ndim == 2:
            return entry
        return 0.5 * (entry[j] + entry[j + 1])

    def rhs_half(beta_cols: list[np.ndarray], j: int) -> list[np.ndarray]:
        """Right-hand sides at the (row half-point, column midpoint) stations."""
        beta_half = [0.5 * (col[:-1] + col[1:]) for col in beta_cols]

        def get_beta(a):
            return beta_half[a - 1]

        def get_c(sign, a):
            return c_minus_half(a) if sign == "-" else c_plus_mid(a, j)

        return [evaluate_rhs(eq, get_beta, get_c) for eq in equations]

    def integrate_line(start: np.ndarray, u_half: np.ndarray, j: int) -> np.ndarray:
        """Solve d_- beta = beta u along a column with the implicit midpoint rule."""
        k = start.shape[-1]
        eye = np.eye(k)
        out = np.empty((ni, k, k), dtype=complex)
        out[0] = start
        try:
            transfer = (eye + 0.5 * hm * u_half) @ np.linalg.inv(eye - 0.5 * hm * u_half)
        except np.linalg.LinAlgError as exc:
            raise BlowUpError(f"implicit step degenerated: {exc}", (0, j)) from exc
        for i in range(ni - 1):
            out[i + 1] = out[i] @ transfer[i]
        return out

    u_cur = [_staggered_log_derivative(betas[a][:, 0], hm) for a in range(count)]
    iterations = []
    for j in range(nj - 1):
        beta_cur = [betas[a][:, j] for a in range(count)]
        rhs0 = rhs_half(beta_cur, j)
        u_next = [u_cur[a] + hp * rhs0[a] for a in range(count)]
        beta_next = [
            integrate_line(data.bottom[a][j + 1], u_next[a], j) for a in range(count)
        ]
        used = max_correctors
        prev_delta = None
        for sweep in range(max_correctors):
            beta_mid = [0.5 * (beta_cur[a] + beta_next[a]) for a in range(count)]
            rhs_mid = rhs_half(beta_mid, j)
            u_next = [u_cur[a] + hp * rhs_mid[a] for a in range(count)]
            candidate = [
                integrate_line(data.bottom[a][j + 1], u_next[a], j) for a in range(count)
            ]
            delta = max(
                float(np.max(np.abs(candidate[a] - beta_next[a]))) for a in range(count)
            )
            beta_next = candidate
            scale = 1.0 + max(float(np.max(np.abs(b))) for b in beta_next)
            if not np.isfinite(delta) or (prev_delta is not None and delta > 4.0 * prev_delta
                                          and delta > fp_tol * scale):
                _classify_divergence(beta_next, data_mag, data_inv, j + 1)
                raise ConvergenceError(
                    f"corrector diverged at column {j + 1} (delta {delta:.3e})"
                )
            prev_delta = delta
            if delta <= fp_tol * scale:
                used = sweep + 1
                break
        else:
            raise ConvergenceError(
                f"corrector did not contract within {max_correctors} sweeps at column {j + 1}"
            )
        iterations.append(used)
        if odd_central:
            central = beta_next[count - 1]
            central[1:] = _project_central(system, central[1:])
        for a in range(count):
            _check_health(beta_next[a], a, j + 1, cond_limit)
            betas[a][:, j + 1] = beta_next[a]
        u_cur = u_next
    field = GridField(spec, tuple(betas))
    residual = block_residuals(system, field, c)
    return SolveResult(field, residual, tuple(iterations))


def _classify_divergence(columns, data_mag, data_inv, j: int):
    """Tell a genuine blow-up from a mere non-contracting corrector.

    A diverging fixed point whose iterates leave the magnitude range of the
    boundary data by a wide factor signals loss of invertibility along a
    characteristic (a pole of the solution), not a step-size problem.
    """
    for a, column in enumerate(columns):
        magnitude = np.max(np.abs(column), axis=(-1, -2))
        if not np.all(np.isfinite(column)):
            i = int(np.argwhere(~np.isfinite(column).all(axis=(-1, -2)))[0][0])
            raise BlowUpError(f"block {a + 1} lost finiteness while diverging", (i, j))
        try:
            inv_mag = np.max(np.abs(np.linalg.inv(column)), axis=(-1, -2))
        except np.linalg.LinAlgError:
            i = int(np.argmax(magnitude))
            raise BlowUpError(f"block {a + 1} became singular while diverging", (i, j))
        if np.max(magnitude) > 10.0 * (1.0 + data_mag[a]) or \
                np.max(inv_mag) > 10.0 * (1.0 + data_inv[a]):
            i = int(np.argmax(np.maximum(magnitude / (1.0 + data_mag[a]),
                                         inv_mag / (1.0 + data_inv[a]))))
            raise BlowUpError(
                f"block {a + 1} left the invertible range at row {i} "
                f"(magnitude {magnitude[i]:.3e}, inverse {inv_mag[i]:.3e})",
                (i, j),
            )


def _check_health(column: np.ndarray, block: int, j: int, cond_limit: float):
    if not np.all(np.isfinite(column)):
        i = int(np.argwhere(~np.isfinite(column).all(axis=(-1, -2)))[0][0])
        raise BlowUpError(f"non-finite sample in block {block + 1}", (i, j))
    magnitude = np.max(np.abs(column), axis=(-1, -2))
    conds = np.linalg.cond(column)
    bad = (conds > cond_limit) | ~np.isfinite(conds) | (magnitude > cond_limit)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise BlowUpError(
            f"block {block + 1} degenerated at row {i}, column {j} "
            f"(cond {conds[i]:.3e}, magnitude {magnitude[i]:.3e})",
            (i, j),
        )


# ---------------------------------------------------------------------------
# closed-form oracle


def liouville_system() -> TodaSystem:
    """Scalar two-block system whose equation has a rational closed-form solution."""
    return build_system(SeriesTag("A", 1), (1, 1))


def liouville_closure():
    """beta_1 = z^+ - z^-, beta_2 its reciprocal; solves the system exactly."""

    def closure(zm, zp):
        delta = zp - zm
        return [np.array([[delta]], dtype=complex), np.array([[1.0 / delta]], dtype=complex)]

    return closure


def _check_liouville_domain(spec: GridSpec):
    delta = spec.z_plus[None, :] - spec.z_minus[:, None]
    if np.min(delta) <= 0:
        raise DomainError("domain touches the diagonal z+ = z-, where the field has a pole")


@dataclass(frozen=True)
class LiouvilleData:
    system: TodaSystem
    field: GridField
    c: CBlocks


def liouville_field(spec: GridSpec) -> LiouvilleData:
    """Exact solution samples plus couplings C_{+1} = 1, C_{-1} = -1."""
    _check_liouville_domain(spec)
    system = liouville_system()
    closure = liouville_closure()
    from .toda import field_from_closure

    field = field_from_closure(system, spec, closure)
    c = make_c_blocks(system, [np.array([[-1.0]])], [np.array([[1.0]])])
    return LiouvilleData(system, field, c)


def liouville_boundary(spec: GridSpec) -> CharacteristicData:
    """Characteristic data sampled from the closed form."""
    _check_liouville_domain(spec)
    closure = liouville_closure()
    zm, zp = spec.z_minus, spec.z_plus
    left = [np.empty((spec.n_minus, 1, 1), dtype=complex) for _ in range(2)]
    bottom = [np.empty((spec.n_plus, 1, 1), dtype=complex) for _ in range(2)]
    for i, z in enumerate(zm):
        vals = closure(z, zp[0])
        left[0][i], left[1][i] = vals
    for j, z in enumerate(zp):
        vals = closure(zm[0], z)
        bottom[0][j], bottom[1][j] = vals
    return CharacteristicData(spec, tuple(left), tuple(bottom))


# ---------------------------------------------------------------------------
# convergence studies


@dataclass(frozen=True)
class ConvergenceStudy:
    rows: tuple[tuple[float, float], ...]  # (h, error)
    order: float


def convergence_study(system: TodaSystem, make_case, specs, exact=None) -> ConvergenceStudy:
    """March on a refining sequence of grids and fit the error order.

    ``make_case(spec)`` returns (CharacteristicData, CBlocks) for each grid;
    ``exact(z_minus, z_plus)`` returns the independent block values of the
    reference solution.  Without a reference, errors are measured against
    the finest grid restricted to the coarser ones, which must nest.
    """
    specs = list(specs)
    if len(specs) < 3:
        raise ValueError("need at least three grids")
    for a, b in zip(specs, specs[1:]):
        if b.n_minus - 1 != 2 * (a.n_minus - 1) or b.n_plus - 1 != 2 * (a.n_plus - 1):
            raise ValueError("each grid must refine the previous one by a factor of 2")
    results = []
    for spec in specs:
        data, c = make_case(spec)
        results.append(march(system, c, data))
    rows = []
    if exact is not None:
        for spec, res in zip(specs, results):
            err = 0.0
            for i, zm in enumerate(spec.z_minus):
                for j, zp in enumerate(spec.z_plus):
                    vals = exact(zm, zp)
                    for a, val in enumerate(vals):
                        err = max(err, float(np.max(np.abs(res.field.betas[a][i, j] - val))))
            rows.append((max(spec.h_minus, spec.h_plus), err))
    else:
        finest = results[-1]
        for level, (spec, res) in enumerate(zip(specs[:-1], results[:-1])):
            stride = 2 ** (len(specs) - 1 - level)
            err = 0.0
            for a in range(len(res.field.betas)):
                ref = finest.field.betas[a][::stride, ::stride]
                err = max(err, float(np.max(np.abs(res.field.betas[a] - ref))))
            rows.append((max(spec.h_minus, spec.h_plus), err))
    log_h = np.log([r[0] for r in rows])
    log_e = np.log([max(r[1], 1e-300) for r in rows])
    order = float(np.polyfit(log_h, log_e, 1)[0])
    return ConvergenceStudy(tuple(rows), order)
