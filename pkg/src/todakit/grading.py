"""Integer gradations of the classical algebras in explicit block form.

A gradation is selected by nonnegative integer labels on the simple roots.
The resulting grading operator is an exact diagonal rational matrix whose
diagonal is constant on blocks; the block sizes and the integer steps
between adjacent blocks determine everything else (graded subspaces,
block-diagonal subgroup type, Toda systems downstream).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cartan import cartan_matrix
from .liealg import SeriesTag, algebra_basis_with_positions, cartan_generators

__all__ = [
    "GradationError",
    "DynkinLabels",
    "BlockStructure",
    "GradingOperator",
    "GradedDecomposition",
    "LeviType",
    "operator_matrix_from_labels",
    "operator_from_labels",
    "labels_to_block_structure",
    "block_structure_to_labels",
    "canonical_block_operator",
    "block_degree",
    "graded_decomposition",
    "levi_type",
    "exact_span_contains",
]


class GradationError(ValueError):
    """Invalid labels or block data for a gradation."""


@dataclass(frozen=True)
class DynkinLabels:
    """Nonnegative integer labels selecting a gradation; not all zero."""

    tag: SeriesTag
    labels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(int(q) for q in self.labels))
        if len(self.labels) != self.tag.rank:
            raise GradationError(
                f"expected {self.tag.rank} labels, got {len(self.labels)}"
            )
        if any(q < 0 for q in self.labels):
            raise GradationError("labels must be nonnegative")
        if not any(self.labels):
            raise GradationError("all-zero labels give the trivial, degenerate gradation")

    def normalized(self) -> "DynkinLabels":
        """Canonical representative: for series D, sort the last label pair.

        The gradations for swapped last labels are related by the outer
        automorphism, so the representative with labels[r-2] <= labels[r-1]
        is used for block extraction.
        """
        if self.tag.series == "D" and self.labels[-2] > self.labels[-1]:
            swapped = self.labels[:-2] + (self.labels[-1], self.labels[-2])
            return DynkinLabels(self.tag, swapped)
        return self


@dataclass(frozen=True)
class BlockStructure:
    """Block partition (sizes k_1..k_p) with integer steps m_1..m_{p-1}."""

    tag: SeriesTag
    sizes: tuple[int, ...]
    steps: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(k) for k in self.sizes))
        object.__setattr__(self, "steps", tuple(int(m) for m in self.steps))
        p = len(self.sizes)
        if p < 2:
            raise GradationError("a gradation needs at least two blocks")
        if len(self.steps) != p - 1:
            raise GradationError(f"expected {p - 1} steps for {p} blocks")
        if any(k <= 0 for k in self.sizes) or any(m <= 0 for m in self.steps):
            raise GradationError("block sizes and steps must be positive")
        if sum(self.sizes) != self.tag.ambient_dim:
            raise GradationError(
                f"block sizes sum to {sum(self.sizes)}, expected {self.tag.ambient_dim}"
            )
        if self.tag.series in ("B", "C", "D"):
            if self.sizes != self.sizes[::-1]:
                raise GradationError(f"series {self.tag.series} requires palindromic block sizes")
            if self.steps != self.steps[::-1]:
                raise GradationError(f"series {self.tag.series} requires symmetric steps")
            if self.tag.series == "C" and p % 2 == 1 and self.sizes[p // 2] % 2 != 0:
                raise GradationError("series C with an odd block count needs an even central block")

    @property
    def count(self) -> int:
        return len(self.sizes)

    @property
    def boundaries(self) -> tuple[int, ...]:
        """Cumulative sizes K_1..K_p (1-based positions of block ends)."""
        return tuple(itertools.accumulate(self.sizes))

    def block_of_index(self, i: int) -> int:
        """1-based block containing matrix index i (1-based)."""
        if not (1 <= i <= self.tag.ambient_dim):
            raise IndexError(f"index {i} out of range")
        return int(np.searchsorted(np.asarray(self.boundaries), i)) + 1

    def slices(self) -> list[slice]:
        """0-based row/column slices of the p diagonal blocks."""
        ends = self.boundaries
        starts = (0,) + ends[:-1]
        return [slice(a, b) for a, b in zip(starts, ends)]


@dataclass(frozen=True)
class GradingOperator:
    """Exact diagonal grading operator together with its block data."""

    blocks: BlockStructure
    levels: tuple[Fraction, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.levels) != self.blocks.count:
            raise GradationError("one diagonal level per block required")
        for a in range(self.blocks.count - 1):
            if self.levels[a] - self.levels[a + 1] != self.blocks.steps[a]:
                raise GradationError(
                    "internal inconsistency: level differences do not match steps"
                )

    @property
    def tag(self) -> SeriesTag:
        return self.blocks.tag


def _level_matrix(tag: SeriesTag, sizes, levels) -> np.ndarray:
    n = tag.ambient_dim
    mat = np.empty((n, n), dtype=object)
    mat[:, :] = Fraction(0)
    pos = 0
    for size, level in zip(sizes, levels):
        for i in range(pos, pos + size):
            mat[i, i] = Fraction(level)
        pos += size
    return mat


def operator_matrix_from_labels(labels: DynkinLabels) -> np.ndarray:
    """Exact diagonal matrix sum_{i,j} h_i (k^{-1})_{ij} q_j, unnormalized.

    For series D with unequal last labels the diagonal is not sorted; use
    :func:`operator_from_labels` for the canonical block form.
    """
    tag = labels.tag
    kinv = cartan_matrix(tag).inverse
    gens = cartan_generators(tag)
    n = tag.ambient_dim
    diag = [Fraction(0)] * n
    for i in range(tag.rank):
        coeff = sum(
            (kinv[i, j] * labels.labels[j] for j in range(tag.rank)), Fraction(0)
        )
        if coeff == 0:
            continue
        hdiag = gens[i].diagonal()
        for m in range(n):
            if hdiag[m]:
                diag[m] += coeff * hdiag[m]
    mat = np.empty((n, n), dtype=object)
    mat[:, :] = Fraction(0)
    for m in range(n):
        mat[m, m] = diag[m]
    return mat


def operator_from_labels(labels: DynkinLabels) -> GradingOperator:
    """Grading operator in canonical block form (D labels normalized first)."""
    labels = labels.normalized()
    mat = operator_matrix_from_labels(labels)
    diag = list(mat.diagonal())
    sizes, levels = [], []
    for value, run in itertools.groupby(diag):
        sizes.append(len(list(run)))
        levels.append(value)
    steps = []
    for a in range(len(levels) - 1):
        step = levels[a] - levels[a + 1]
        if step.denominator != 1 or step <= 0:
            raise GradationError(
                "internal inconsistency: block levels must decrease by positive integers"
            )
        steps.append(int(step))
    blocks = BlockStructure(labels.tag, tuple(sizes), tuple(steps))
    return GradingOperator(blocks, tuple(levels), mat)


def _first_half_boundaries(labels: DynkinLabels) -> list[tuple[int, int]]:
    """(position, step) pairs describing block boundaries at positions <= r-ish."""
    tag = labels.tag
    q = labels.labels
    r = tag.rank
    if tag.series == "A":
        return [(d + 1, q[d]) for d in range(r) if q[d]]
    if tag.series in ("B", "C"):
        return [(d + 1, q[d]) for d in range(r) if q[d]]
    # Series D: the last two labels jointly encode boundaries at r-1 and r.
    pairs = [(d + 1, q[d]) for d in range(r - 2) if q[d]]
    step_rm1 = q[r - 2]
    step_r = q[r - 1] - q[r - 2]
    if step_rm1:
        pairs.append((r - 1, step_rm1))
    if step_r:
        pairs.append((r, step_r))
    return pairs


def labels_to_block_structure(labels: DynkinLabels) -> BlockStructure:
    """Read the block partition directly off the label pattern."""
    labels = labels.normalized()
    tag = labels.tag
    n, r = tag.ambient_dim, tag.rank
    pairs = _first_half_boundaries(labels)
    positions = [pos for pos, _ in pairs]
    steps_half = [step for _, step in pairs]
    if tag.series == "A":
        sizes = [positions[0]] + [
            b - a for a, b in zip(positions, positions[1:])
        ] + [n - positions[-1]]
        return BlockStructure(tag, tuple(sizes), tuple(steps_half))
    first = [positions[0]] + [b - a for a, b in zip(positions, positions[1:])]
    last = positions[-1]
    if tag.series != "B" and last == r:
        sizes = first + first[::-1]
        steps = steps_half + steps_half[:-1][::-1]
    else:
        central = 2 * (r - last) + (1 if tag.series == "B" else 0)
        sizes = first + [central] + first[::-1]
        steps = steps_half + steps_half[::-1]
    return BlockStructure(tag, tuple(sizes), tuple(steps))


def block_structure_to_labels(blocks: BlockStructure) -> DynkinLabels:
    """Labels whose gradation has the given block structure (D normalized)."""
    tag = blocks.tag
    r = tag.rank
    bounds = blocks.boundaries
    step_at = {bounds[a]: blocks.steps[a] for a in range(blocks.count - 1)}
    q = [0] * r
    if tag.series == "A":
        for pos, step in step_at.items():
            q[pos - 1] = step
    elif tag.series in ("B", "C"):
        for pos, step in step_at.items():
            if pos <= r:
                q[pos - 1] = step
    else:
        for pos, step in step_at.items():
            if pos <= r - 2:
                q[pos - 1] = step
        q[r - 2] = step_at.get(r - 1, 0)
        q[r - 1] = q[r - 2] + step_at.get(r, 0)
    return DynkinLabels(tag, tuple(q))


def canonical_block_operator(blocks: BlockStructure) -> GradingOperator:
    """Grading operator from the closed-form per-block diagonal levels."""
    tag = blocks.tag
    p = blocks.count
    sizes, steps = blocks.sizes, blocks.steps
    levels = []
    if tag.series == "A":
        n = tag.ambient_dim
        bounds = blocks.boundaries
        for a in range(1, p + 1):
            total = Fraction(0)
            for b in range(1, a):
                total -= steps[b - 1] * bounds[b - 1]
            for b in range(a, p):
                total += steps[b - 1] * (n - bounds[b - 1])
            levels.append(total / n)
    else:
        for a in range(1, p + 1):
            total = Fraction(0)
            total -= sum(steps[: a - 1])
            total += sum(steps[a - 1 :])
            levels.append(Fraction(total, 2))
    matrix = _level_matrix(tag, sizes, levels)
    return GradingOperator(blocks, tuple(levels), matrix)


def block_degree(a: int, b: int, blocks: BlockStructure) -> int:
    """Signed gradation degree of the (a, b) block: positive above the diagonal."""
    p = blocks.count
    if not (1 <= a <= p and 1 <= b <= p):
        raise IndexError(f"block indices ({a}, {b}) out of range for {p} blocks")
    if a == b:
        return 0
    if a < b:
        return sum(blocks.steps[a - 1 : b - 1])
    return -sum(blocks.steps[b - 1 : a - 1])


@dataclass(frozen=True)
class GradedDecomposition:
    """Bases of the graded subspaces, keyed by integer degree."""

    operator: GradingOperator
    subspaces: dict[int, list[np.ndarray]]

    def dimension(self, degree: int) -> int:
        return len(self.subspaces.get(degree, []))

    @property
    def degrees(self) -> list[int]:
        return sorted(self.subspaces)

    @property
    def total_dimension(self) -> int:
        return sum(len(v) for v in self.subspaces.values())


def graded_decomposition(op: GradingOperator) -> GradedDecomposition:
    """Bucket a deterministic algebra basis by adjoint eigenvalue.

    Every basis element is supported on a single block position (plus its
    mirror for B/C/D), so its degree is the integer level difference of the
    two blocks involved.
    """
    blocks = op.blocks
    subspaces: dict[int, list[np.ndarray]] = {}
    for elem, (i, j) in algebra_basis_with_positions(op.tag):
        a = blocks.block_of_index(i)
        b = blocks.block_of_index(j)
        degree = op.levels[a - 1] - op.levels[b - 1]
        if degree.denominator != 1:
            raise GradationError("internal inconsistency: non-integer degree")
        subspaces.setdefault(int(degree), []).append(elem)
    return GradedDecomposition(op, subspaces)


@dataclass(frozen=True)
class LeviType:
    """Isomorphism type of the block-diagonal subgroup."""

    factors: tuple[tuple[str, int], ...]

    def __str__(self) -> str:
        return " x ".join(f"{kind}({size})" for kind, size in self.factors)


def levi_type(blocks: BlockStructure) -> LeviType:
    """Block-diagonal subgroup type: GL factors plus one SO/Sp factor when p is odd."""
    tag = blocks.tag
    p = blocks.count
    if tag.series == "A":
        return LeviType(tuple(("GL", k) for k in blocks.sizes))
    s = p // 2
    factors = [("GL", k) for k in blocks.sizes[:s]]
    if p % 2 == 1:
        central = blocks.sizes[s]
        kind = "Sp" if tag.series == "C" else "SO"
        factors.append((kind, central))
    return LeviType(tuple(factors))


def _to_sparse(mat: np.ndarray) -> dict[tuple[int, int], Fraction]:
    out = {}
    for (i, j), value in np.ndenumerate(mat):
        frac = Fraction(value) if not isinstance(value, Fraction) else value
        if frac != 0:
            out[(i, j)] = frac
    return out


def _reduce_against(vec: dict, pivots: dict) -> dict:
    while True:
        hit = None
        for pos in sorted(vec):
            if pos in pivots:
                hit = pos
                break
        if hit is None:
            return vec
        coeff = vec[hit]
        for pos, val in pivots[hit].items():
            new = vec.get(pos, Fraction(0)) - coeff * val
            if new == 0:
                vec.pop(pos, None)
            else:
                vec[pos] = new


def exact_span_contains(basis: list[np.ndarray], mat: np.ndarray) -> bool:
    """Exact rational test of membership of mat in the span of basis.

    Gaussian elimination over Fractions on sparse coordinate vectors; no
    floating point is involved.
    """
    pivots: dict[tuple[int, int], dict] = {}
    for b in basis:
        row = _reduce_against(_to_sparse(b), pivots)
        if row:
            lead = min(row)
            lead_val = row[lead]
            pivots[lead] = {pos: val / lead_val for pos, val in row.items()}
    return not _reduce_against(_to_sparse(mat), pivots)
