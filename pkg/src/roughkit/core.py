"""Time grids, grid paths, two-parameter fields, partitions and controls.

Everything here is immutable after construction: arrays are copied and
flagged read-only, so values can be shared freely between threads.

Two-parameter fields ``A(i, j)`` are indexed by grid indices ``i <= j``.
Dense fields keep the full ``(n, n, *shape)`` array with the strict lower
triangle zeroed.  Fields that would not fit comfortably in memory (a level-2
lift on 4096 points in dimension 5 is ~3.4 GB dense) can instead be *row
backed*: they hold a callable producing row ``i`` on demand.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ParameterError

DEFAULT_TOL = 1e-9
# dense materialisation refuses to allocate more than this unless asked
DENSE_BYTES_LIMIT = 1 << 30


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    arr.flags.writeable = False
    return arr


class TimeGrid:
    """Strictly increasing finite time grid ``t_0 < ... < t_{n-1}``."""

    __slots__ = ("times",)

    def __init__(self, times: Sequence[float]):
        t = _frozen(np.ravel(times))
        if t.size < 2:
            raise ParameterError("a time grid needs at least two points")
        if not np.all(np.isfinite(t)):
            raise ParameterError("time grid entries must be finite")
        if np.any(np.diff(t) <= 0):
            raise ParameterError("time grid must be strictly increasing")
        object.__setattr__(self, "times", t)

    def __setattr__(self, key, value):
        raise AttributeError("TimeGrid is immutable")

    @classmethod
    def uniform(cls, cells: int, horizon: float = 1.0, start: float = 0.0) -> "TimeGrid":
        if cells < 1:
            raise ParameterError("need at least one cell")
        if horizon <= 0:
            raise ParameterError("horizon must be positive")
        return cls(start + horizon * np.arange(cells + 1) / cells)

    @property
    def n(self) -> int:
        return self.times.size

    @property
    def cells(self) -> int:
        return self.times.size - 1

    @property
    def start(self) -> float:
        return float(self.times[0])

    @property
    def horizon(self) -> float:
        return float(self.times[-1] - self.times[0])

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        return isinstance(other, TimeGrid) and other.n == self.n and bool(np.all(other.times == self.times))

    def __hash__(self) -> int:
        return hash((self.n, self.times.tobytes()))

    def __repr__(self) -> str:
        return f"TimeGrid(n={self.n}, start={self.start:g}, horizon={self.horizon:g})"

    def is_uniform(self, rtol: float = 1e-9) -> bool:
        d = np.diff(self.times)
        return bool(np.all(np.abs(d - d.mean()) <= rtol * d.mean()))

    def mesh(self) -> float:
        """Cell width of a uniform grid; raises for non-uniform grids."""
        if not self.is_uniform():
            raise ParameterError("grid is not uniform")
        return self.horizon / self.cells

    def dyadic_level(self) -> int:
        """``L`` such that the grid is uniform with ``2**L`` cells."""
        cells = self.cells
        if not self.is_uniform() or cells & (cells - 1):
            raise ParameterError(f"grid with {cells} cells is not a uniform dyadic grid")
        return cells.bit_length() - 1

    def sub(self, a: int, b: int) -> "TimeGrid":
        """The grid restricted to indices ``a..b`` inclusive."""
        _check_index_pair(self.n, a, b)
        return TimeGrid(self.times[a : b + 1])


def _check_index_pair(n: int, i: int, j: int) -> None:
    if not (0 <= i <= j < n):
        raise IndexError(f"index pair ({i}, {j}) invalid for a grid of {n} points")


class GridPath:
    """Path values on a grid; ``values`` has shape ``(n, *value_shape)``."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: TimeGrid, values):
        v = _frozen(values)
        if v.ndim == 1:
            v = _frozen(v.reshape(-1, 1))
        if v.shape[0] != grid.n:
            raise ParameterError(f"path has {v.shape[0]} values for a grid of {grid.n} points")
        if not np.all(np.isfinite(v)):
            raise ParameterError("path values must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", v)

    def __setattr__(self, key, value):
        raise AttributeError("GridPath is immutable")

    @classmethod
    def from_function(cls, grid: TimeGrid, fn: Callable[[np.ndarray], np.ndarray]) -> "GridPath":
        return cls(grid, fn(grid.times))

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def value_shape(self) -> tuple:
        return self.values.shape[1:]

    @property
    def dim(self) -> int:
        return int(np.prod(self.value_shape))

    def __repr__(self) -> str:
        return f"GridPath(n={self.n}, value_shape={self.value_shape})"

    def __add__(self, other: "GridPath") -> "GridPath":
        _same_grid(self.grid, other.grid)
        return GridPath(self.grid, self.values + other.values)

    def __sub__(self, other: "GridPath") -> "GridPath":
        _same_grid(self.grid, other.grid)
        return GridPath(self.grid, self.values - other.values)

    def scaled(self, c: float) -> "GridPath":
        return GridPath(self.grid, c * self.values)

    def shifted(self, v) -> "GridPath":
        return GridPath(self.grid, self.values + np.asarray(v, dtype=float))

    def sub(self, a: int, b: int) -> "GridPath":
        return GridPath(self.grid.sub(a, b), self.values[a : b + 1])

    def sup_norm(self) -> float:
        flat = self.values.reshape(self.n, -1)
        return float(np.sqrt((flat**2).sum(axis=1)).max())

    def increment(self, i: int, j: int) -> np.ndarray:
        _check_index_pair(self.n, i, j)
        return self.values[j] - self.values[i]

    def increments(self, dense: bool | None = None) -> "TwoParamField":
        """Additive field ``(i, j) -> f(t_j) - f(t_i)``."""
        vals = self.values

        def row(i):
            out = vals - vals[i]
            out[:i] = 0.0
            return out

        return TwoParamField.from_rows(self.grid, self.value_shape, row, dense=dense)

    def distance_field(self) -> "TwoParamField":
        """Scalar field ``|f(t_j) - f(t_i)|`` (Euclidean, Frobenius for matrices)."""
        flat = self.values.reshape(self.n, -1)
        out = np.empty((self.n, self.n))
        for i in range(self.n):
            d = flat - flat[i]
            out[i] = np.sqrt(np.einsum("ij,ij->i", d, d))
        return TwoParamField(self.grid, np.triu(out))


def _same_grid(g1: TimeGrid, g2: TimeGrid) -> None:
    if g1 is not g2 and g1 != g2:
        raise ParameterError("objects live on different grids")


class TwoParamField:
    """Values ``A(i, j)`` for grid index pairs ``i <= j``.

    Either dense (``entries`` of shape ``(n, n, *shape)``) or row backed
    (``row_fn(i)`` returning an ``(n, *shape)`` array that is zero for
    ``j < i``).  Diagonal entries are zero by construction.
    """

    __slots__ = ("grid", "value_shape", "_entries", "_row_fn")

    def __init__(self, grid: TimeGrid, entries=None, *, row_fn=None, value_shape=None, tol=DEFAULT_TOL):
        if (entries is None) == (row_fn is None):
            raise ParameterError("give exactly one of entries / row_fn")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "_row_fn", row_fn)
        if entries is not None:
            e = np.array(entries, dtype=float, copy=True)
            n = grid.n
            if e.shape[:2] != (n, n):
                raise ParameterError(f"entries of shape {e.shape} do not match a grid of {n} points")
            lower = np.tril_indices(n, -1)
            e[lower] = 0.0
            diag = e[np.arange(n), np.arange(n)]
            if diag.size and np.max(np.abs(diag)) > tol * max(1.0, float(np.max(np.abs(e)))):
                raise ParameterError("diagonal entries of a two-parameter field must vanish")
            e[np.arange(n), np.arange(n)] = 0.0
            if not np.all(np.isfinite(e)):
                raise ParameterError("field entries must be finite")
            e.flags.writeable = False
            object.__setattr__(self, "_entries", e)
            object.__setattr__(self, "value_shape", tuple(e.shape[2:]))
        else:
            object.__setattr__(self, "_entries", None)
            object.__setattr__(self, "value_shape", tuple(value_shape or ()))

    def __setattr__(self, key, value):
        raise AttributeError("TwoParamField is immutable")

    # construction -----------------------------------------------------
    @classmethod
    def from_rows(cls, grid: TimeGrid, value_shape, row_fn, dense: bool | None = None) -> "TwoParamField":
        """Build from a row callable; materialise densely when it is cheap (or forced)."""
        value_shape = tuple(value_shape)
        nbytes = grid.n * grid.n * int(np.prod(value_shape, dtype=int)) * 8
        if dense is None:
            dense = nbytes <= DENSE_BYTES_LIMIT // 4
        if dense:
            out = np.empty((grid.n, grid.n) + value_shape)
            for i in range(grid.n):
                out[i] = row_fn(i)
            return cls(grid, out)
        return cls(grid, row_fn=row_fn, value_shape=value_shape)

    @classmethod
    def from_function(cls, grid: TimeGrid, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "TwoParamField":
        """Tabulate a scalar ``fn(s, t)`` (vectorised) on all pairs ``s <= t``."""
        s, t = np.meshgrid(grid.times, grid.times, indexing="ij")
        vals = np.where(s <= t, fn(s, np.maximum(s, t)), 0.0)
        return cls(grid, vals)

    @classmethod
    def zeros(cls, grid: TimeGrid, value_shape=()) -> "TwoParamField":
        return cls(grid, np.zeros((grid.n, grid.n) + tuple(value_shape)))

    # access -----------------------------------------------------------
    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def is_dense(self) -> bool:
        return self._entries is not None

    @property
    def is_scalar(self) -> bool:
        return self.value_shape == ()

    def __repr__(self) -> str:
        kind = "dense" if self.is_dense else "row-backed"
        return f"TwoParamField(n={self.n}, value_shape={self.value_shape}, {kind})"

    def __getitem__(self, ij):
        i, j = ij
        _check_index_pair(self.n, i, j)
        if self._entries is not None:
            return self._entries[i, j]
        return self._row_fn(i)[j]

    def row(self, i: int) -> np.ndarray:
        if not 0 <= i < self.n:
            raise IndexError(f"row {i} out of range")
        if self._entries is not None:
            return self._entries[i]
        r = np.asarray(self._row_fn(i), dtype=float)
        return r

    def rows(self) -> Iterable[np.ndarray]:
        for i in range(self.n):
            yield self.row(i)

    def dense(self, max_bytes: int = DENSE_BYTES_LIMIT) -> np.ndarray:
        """The full ``(n, n, *shape)`` array (read-only for dense fields)."""
        if self._entries is not None:
            return self._entries
        nbytes = self.n * self.n * int(np.prod(self.value_shape, dtype=int)) * 8
        if nbytes > max_bytes:
            raise MemoryError(f"refusing to materialise {nbytes / 2**20:.0f} MiB; iterate rows instead")
        out = np.empty((self.n, self.n) + self.value_shape)
        for i in range(self.n):
            out[i] = self.row(i)
        return out

    def materialized(self) -> "TwoParamField":
        return self if self.is_dense else TwoParamField(self.grid, self.dense())

    def norms(self) -> "TwoParamField":
        """Scalar field of Euclidean / Frobenius norms of the entries."""
        if self.is_scalar:
            return TwoParamField(self.grid, np.abs(self.dense()))
        out = np.empty((self.n, self.n))
        for i in range(self.n):
            r = self.row(i).reshape(self.n, -1)
            out[i] = np.sqrt(np.einsum("ij,ij->i", r, r))
        return TwoParamField(self.grid, out)

    def sup(self) -> float:
        """Largest entry norm."""
        return float(self.norms().dense().max())

    def diagonal(self, k: int) -> np.ndarray:
        """Entries ``A(i, i + k)`` for ``i = 0..n-1-k``."""
        if self._entries is not None:
            return np.moveaxis(np.diagonal(self._entries, k, axis1=0, axis2=1), -1, 0)
        return np.stack([self.row(i)[i + k] for i in range(self.n - k)])

    def sub(self, a: int, b: int) -> "TwoParamField":
        """The field restricted to grid indices ``a..b``."""
        g = self.grid.sub(a, b)
        if self._entries is not None:
            return TwoParamField(g, self._entries[a : b + 1, a : b + 1])
        return TwoParamField.from_rows(g, self.value_shape, lambda i: self.row(a + i)[a : b + 1])

    # arithmetic -----------------------------------------------------
    def _combine(self, other: "TwoParamField", op) -> "TwoParamField":
        _same_grid(self.grid, other.grid)
        if self.value_shape != other.value_shape:
            raise ParameterError("fields have different value shapes")
        if self.is_dense and other.is_dense:
            return TwoParamField(self.grid, op(self._entries, other._entries))
        return TwoParamField.from_rows(self.grid, self.value_shape, lambda i: op(self.row(i), other.row(i)), dense=False)

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def scaled(self, c: float) -> "TwoParamField":
        if self.is_dense:
            return TwoParamField(self.grid, c * self._entries)
        return TwoParamField.from_rows(self.grid, self.value_shape, lambda i: c * self.row(i), dense=False)

    def power(self, e: float) -> "TwoParamField":
        """Entrywise power of a nonnegative scalar field."""
        if not self.is_scalar:
            raise ParameterError("power() needs a scalar field")
        d = self.dense()
        if np.any(d < 0):
            raise ParameterError("power() needs a nonnegative field")
        return TwoParamField(self.grid, np.triu(d**e, 1))


def delta(A: TwoParamField, i: int, j: int, k: int):
    """``A(i, k) - A(i, j) - A(j, k)``; zero exactly when ``A`` is additive on the triple."""
    if not (0 <= i <= j <= k < A.n):
        raise IndexError(f"triple ({i}, {j}, {k}) invalid for a grid of {A.n} points")
    return A[i, k] - A[i, j] - A[j, k]


def delta_max(A: TwoParamField, tol_triples: int = 64, samples: int = 20000, seed: int = 0) -> float:
    """Largest ``|delta A|`` over all grid triples (sampled beyond ``tol_triples`` points)."""
    n = A.n
    d = A.dense()
    flat = d.reshape(n, n, -1)
    best = 0.0
    if n <= tol_triples:
        for j in range(n):
            left = flat[: j + 1, j]  # A(i, j), i <= j
            right = flat[j, j:]  # A(j, k), k >= j
            whole = flat[: j + 1, j:]  # A(i, k)
            dd = whole - left[:, None, :] - right[None, :, :]
            best = max(best, float(np.sqrt((dd**2).sum(axis=-1)).max()))
        return best
    rng = np.random.default_rng(seed)
    tri = np.sort(rng.integers(0, n, size=(samples, 3)), axis=1)
    i, j, k = tri.T
    dd = flat[i, k] - flat[i, j] - flat[j, k]
    return float(np.sqrt((dd**2).sum(axis=-1)).max())


@dataclass(frozen=True)
class Partition:
    """Strictly increasing grid indices."""

    indices: tuple

    def __init__(self, indices: Iterable[int], n: int | None = None):
        idx = tuple(int(i) for i in indices)
        if len(idx) < 1:
            raise ParameterError("a partition needs at least one point")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ParameterError("partition indices must be strictly increasing")
        if idx[0] < 0 or (n is not None and idx[-1] >= n):
            raise ParameterError("partition index outside the grid")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    @property
    def first(self) -> int:
        return self.indices[0]

    @property
    def last(self) -> int:
        return self.indices[-1]

    def spans(self, a: int, b: int) -> bool:
        return self.indices[0] == a and self.indices[-1] == b

    def pairs(self):
        return list(zip(self.indices, self.indices[1:]))


def superadditivity_violation(field: TwoParamField, exhaustive_max: int = 64, samples: int = 50000, seed: int = 0) -> tuple:
    """Worst value of ``w(s,t) + w(t,u) - w(s,u)`` and the triple attaining it.

    Exhaustive over all triples for ``n <= exhaustive_max``, random above.
    """
    if not field.is_scalar:
        raise ParameterError("controls are scalar fields")
    w = field.dense()
    n = field.n
    if n <= exhaustive_max:
        i, j, k = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
        mask = (i <= j) & (j <= k)
        i, j, k = i[mask], j[mask], k[mask]
    else:
        rng = np.random.default_rng(seed)
        i, j, k = np.sort(rng.integers(0, n, size=(samples, 3)), axis=1).T
    viol = w[i, j] + w[j, k] - w[i, k]
    m = int(np.argmax(viol))
    return float(viol[m]), (int(i[m]), int(j[m]), int(k[m]))


class Control:
    """A nonnegative superadditive scalar field."""

    __slots__ = ("field",)

    def __init__(self, field: TwoParamField, tol: float = DEFAULT_TOL, check: bool = True):
        if not field.is_scalar:
            raise ParameterError("a control is a scalar field")
        if check:
            if np.any(field.dense() < -tol):
                raise ParameterError("a control must be nonnegative")
            v, tri = superadditivity_violation(field)
            scale = max(1.0, float(field.dense().max()))
            if v > tol * scale:
                raise ParameterError(f"field is not superadditive: violation {v:.3e} at triple {tri}")
        object.__setattr__(self, "field", field)

    def __setattr__(self, key, value):
        raise AttributeError("Control is immutable")

    def __call__(self, i: int, j: int) -> float:
        return float(self.field[i, j])
