"""Construction, application and serialization of sparse sign projections.

A projection is an m x n matrix whose n columns each carry exactly ``s``
nonzero entries at distinct rows, with values +-1/sqrt(s).  Columns are
sampled independently: column ``c`` of a matrix with seed ``seed`` draws
from the counter-based substream (seed, c), taking ``s`` partial
Fisher-Yates steps over the row range (unbiased, without replacement)
followed by ``s`` sign draws.  Construction is therefore bit-reproducible
across platforms and independent of evaluation order, and only the +-1
signs are stored; the 1/sqrt(s) scale is applied once per output entry.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from . import streams
from .errors import (
    ConstraintViolation,
    DimensionMismatch,
    DomainError,
    FormatVersionError,
    MatrixInvariantError,
    TruncatedStreamError,
)

FORMAT_VERSION = 1
_HEADER = struct.Struct("<IQQQQ")  # version, n, m, s, seed
_ENTRY_DTYPE = np.dtype([("row", "<u4"), ("sign", "u1")])

# Column sampling materializes a (lanes, m) index table; lanes are chunked
# so the table stays within this many uint32 entries (~64 MB).
_CHUNK_ENTRIES = 1 << 24


@dataclass(eq=False)
class SparseJLMatrix:
    """Sparse sign projection: per-column nonzero rows and signs.

    ``rows`` has shape (n, s) with distinct entries per column, ``signs``
    holds -1/+1; the implied entries are signs/sqrt(s), so every column
    has unit norm by construction.
    """

    n: int
    m: int
    s: int
    seed: int
    rows: np.ndarray = field(repr=False)
    signs: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.rows.setflags(write=False)
        self.signs.setflags(write=False)

    @property
    def scale(self) -> float:
        return 1.0 / math.sqrt(self.s)

    def column(self, i: int) -> list[tuple[int, int]]:
        """Column ``i`` as a list of (row_index, sign) pairs."""
        return [(int(r), int(g)) for r, g in zip(self.rows[i], self.signs[i])]

    def columns(self) -> list[list[tuple[int, int]]]:
        return [self.column(i) for i in range(self.n)]

    def column_norm_sq(self, i: int) -> float:
        """Squared norm of column ``i``, exact: sum of integer sign squares over s."""
        return int(np.sum(self.signs[i].astype(np.int64) ** 2)) / self.s

    def validate(self) -> None:
        """Check structural invariants, raising MatrixInvariantError on failure."""
        if self.rows.shape != (self.n, self.s) or self.signs.shape != (self.n, self.s):
            raise MatrixInvariantError(
                f"entry count mismatch: expected {self.s} entries in each of "
                f"{self.n} columns, got arrays of shape {self.rows.shape}"
            )
        if not 1 <= self.s <= self.m:
            raise MatrixInvariantError(f"sparsity s={self.s} outside [1, m={self.m}]")
        if self.rows.size and int(self.rows.max()) >= self.m:
            raise MatrixInvariantError(
                f"row index {int(self.rows.max())} outside [0, m={self.m})"
            )
        if not np.isin(self.signs, (-1, 1)).all():
            raise MatrixInvariantError("sign domain violated: signs must be -1 or +1")
        if self.s > 1:
            sorted_rows = np.sort(self.rows, axis=1)
            if (np.diff(sorted_rows.astype(np.int64), axis=1) == 0).any():
                raise MatrixInvariantError("duplicate row index within a column")

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseJLMatrix):
            return NotImplemented
        return (
            (self.n, self.m, self.s, self.seed) == (other.n, other.m, other.s, other.seed)
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.signs, other.signs)
        )


def sample_columns(m: int, s: int, roots: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sample one column per stream root: s distinct rows of [0, m) plus signs.

    Each lane runs ``s`` partial Fisher-Yates steps (bounded draws with
    modulo rejection) over its own copy of the row range, then draws ``s``
    sign words.  Returns (rows, signs) of shape (lanes, s).
    """
    lanes = roots.shape[0]
    ctrs = np.zeros(lanes, dtype=np.uint64)
    cur = np.broadcast_to(np.arange(m, dtype=np.uint32), (lanes, m)).copy()
    rows = np.empty((lanes, s), dtype=np.uint32)
    lane_idx = np.arange(lanes)
    for k in range(s):
        j = streams.next_below_vec(roots, ctrs, m - k)
        t = j.astype(np.int64) + k
        rows[:, k] = cur[lane_idx, t]
        cur[lane_idx, t] = cur[lane_idx, k]
    z = streams.next_u64_block_vec(roots, ctrs, s)
    signs = np.where((z & np.uint64(1)).astype(bool), 1, -1).astype(np.int8)
    return rows, signs


def sample_column_scalar(m: int, s: int, root: int) -> tuple[list[int], list[int]]:
    """Pure-Python twin of :func:`sample_columns` for one lane.

    Replays the same draws by the same rules (sparse swap map instead of a
    dense table); used to pin down the construction bit-for-bit.
    """
    st = streams.Stream(root)
    swap: dict[int, int] = {}
    rows = []
    for k in range(s):
        t = k + st.next_below(m - k)
        rows.append(swap.get(t, t))
        swap[t] = swap.get(k, k)
    signs = [st.next_sign() for _ in range(s)]
    return rows, signs


def _validate_build_args(n: int, m: int, s: int) -> None:
    if n <= 0 or m <= 0 or s <= 0:
        raise DomainError(f"n, m, s must be positive, got n={n}, m={m}, s={s}")
    if s > m:
        raise ConstraintViolation(f"invalid sparsity: s = {s} exceeds m = {m}")
    if m > 1 << 32:
        raise DomainError(f"m = {m} exceeds the uint32 row-index range")


def build_matrix(n: int, m: int, s: int, seed: int) -> SparseJLMatrix:
    """Construct the m x n projection determined by (n, m, s, seed).

    Each of the n columns independently selects s distinct rows uniformly
    without replacement and assigns each an independent uniform sign.
    """
    _validate_build_args(n, m, s)
    seed = seed & streams.MASK64
    roots = streams.substream_vec(seed, np.arange(n, dtype=np.uint64))
    rows = np.empty((n, s), dtype=np.uint32)
    signs = np.empty((n, s), dtype=np.int8)
    block = max(1, _CHUNK_ENTRIES // m)
    for start in range(0, n, block):
        stop = min(n, start + block)
        rows[start:stop], signs[start:stop] = sample_columns(m, s, roots[start:stop])
    return SparseJLMatrix(n=n, m=m, s=s, seed=seed, rows=rows, signs=signs)


def apply(matrix: SparseJLMatrix, x) -> np.ndarray:
    """Apply the projection: y = A x, in O(s n) plus output allocation."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (matrix.n,):
        raise DimensionMismatch(
            f"expected a vector of length n = {matrix.n}, got shape {x.shape}"
        )
    weights = matrix.signs * x[:, None]
    y = np.bincount(matrix.rows.ravel(), weights=weights.ravel(), minlength=matrix.m)
    y *= matrix.scale
    return y


def apply_batch(matrix: SparseJLMatrix, vectors) -> list[np.ndarray]:
    """Apply the projection to each vector in order."""
    out = []
    for i, x in enumerate(vectors):
        try:
            out.append(apply(matrix, x))
        except DimensionMismatch as exc:
            raise DimensionMismatch(f"batch element {i}: {exc}") from None
    return out


def serialize(matrix: SparseJLMatrix) -> bytes:
    """Binary encoding: header (version, n, m, s, seed) then column records.

    Each column record is s little-endian pairs of (uint32 row, sign byte)
    with 0x00 = -1 and 0x01 = +1.
    """
    header = _HEADER.pack(FORMAT_VERSION, matrix.n, matrix.m, matrix.s, matrix.seed)
    entries = np.empty(matrix.n * matrix.s, dtype=_ENTRY_DTYPE)
    entries["row"] = matrix.rows.ravel()
    entries["sign"] = (matrix.signs.ravel() > 0).astype(np.uint8)
    return header + entries.tobytes()


def deserialize(data: bytes) -> SparseJLMatrix:
    """Decode :func:`serialize` output, checking all structural invariants."""
    if len(data) < _HEADER.size:
        raise TruncatedStreamError(
            f"stream of {len(data)} bytes is shorter than the {_HEADER.size}-byte header"
        )
    version, n, m, s, seed = _HEADER.unpack_from(data)
    if version != FORMAT_VERSION:
        raise FormatVersionError(f"unsupported format version {version}, expected {FORMAT_VERSION}")
    expected = _HEADER.size + n * s * _ENTRY_DTYPE.itemsize
    if len(data) != expected:
        raise TruncatedStreamError(
            f"entry count mismatch: {n} columns of {s} entries need {expected} bytes, "
            f"stream has {len(data)}"
        )
    entries = np.frombuffer(data, dtype=_ENTRY_DTYPE, offset=_HEADER.size)
    sign_bytes = entries["sign"]
    if not np.isin(sign_bytes, (0, 1)).all():
        bad = int(sign_bytes[~np.isin(sign_bytes, (0, 1))][0])
        raise MatrixInvariantError(f"sign domain violated: byte {bad:#x} is not 0x00/0x01")
    rows = entries["row"].reshape(n, s).astype(np.uint32)
    signs = np.where(sign_bytes.reshape(n, s) == 1, 1, -1).astype(np.int8)
    matrix = SparseJLMatrix(n=n, m=m, s=s, seed=seed, rows=rows, signs=signs)
    matrix.validate()
    return matrix


def to_json_dict(matrix: SparseJLMatrix) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "n": matrix.n,
        "m": matrix.m,
        "s": matrix.s,
        "seed": matrix.seed,
        "columns": [[[int(r), int(g)] for r, g in zip(rs, gs)]
                    for rs, gs in zip(matrix.rows, matrix.signs)],
    }


def serialize_json(matrix: SparseJLMatrix) -> str:
    """Textual interchange variant of the binary format."""
    return json.dumps(to_json_dict(matrix), sort_keys=True)


def from_json_dict(doc: dict) -> SparseJLMatrix:
    try:
        version = doc["format_version"]
        n, m, s, seed = int(doc["n"]), int(doc["m"]), int(doc["s"]), int(doc["seed"])
        columns = doc["columns"]
    except (KeyError, TypeError) as exc:
        raise MatrixInvariantError(f"malformed matrix document: missing {exc}") from None
    if version != FORMAT_VERSION:
        raise FormatVersionError(f"unsupported format version {version}, expected {FORMAT_VERSION}")
    if len(columns) != n:
        raise MatrixInvariantError(f"entry count mismatch: {len(columns)} columns, header says {n}")
    rows = np.empty((n, s), dtype=np.uint32)
    signs = np.empty((n, s), dtype=np.int8)
    for i, col in enumerate(columns):
        if len(col) != s:
            raise MatrixInvariantError(
                f"entry count mismatch: column {i} has {len(col)} entries, expected {s}"
            )
        for k, (r, g) in enumerate(col):
            if g not in (-1, 1):
                raise MatrixInvariantError(f"sign domain violated: column {i} has sign {g}")
            if not 0 <= r < m:
                raise MatrixInvariantError(f"row index {r} outside [0, m={m}) in column {i}")
            rows[i, k] = r
            signs[i, k] = g
    matrix = SparseJLMatrix(n=n, m=m, s=s, seed=seed & streams.MASK64, rows=rows, signs=signs)
    matrix.validate()
    return matrix


def deserialize_json(text: str) -> SparseJLMatrix:
    return from_json_dict(json.loads(text))


def write_matrix(path, matrix: SparseJLMatrix, fmt: str = "binary") -> None:
    if fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(serialize(matrix))
    elif fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(serialize_json(matrix))
    else:
        raise DomainError(f"unknown matrix format {fmt!r}, expected 'binary' or 'json'")


def read_matrix(path) -> SparseJLMatrix:
    """Load a matrix file, accepting either the binary or the JSON encoding."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:1] == b"{":
        return deserialize_json(data.decode("utf-8"))
    return deserialize(data)
