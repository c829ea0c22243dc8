"""Binary linear algebra over GF(2).

Matrices are plain ``numpy`` arrays of dtype uint8 with entries in {0, 1};
row reduction is done on a bit-packed copy (64 columns per word).  A sparse
view is available as per-row column index lists.
"""

import numpy as np

from . import _kernels
from ._validation import check_binary_matrix, check_binary_vector
from .exceptions import DimensionError, ParseError

__all__ = [
    "pack_rows",
    "unpack_rows",
    "matmul",
    "rref",
    "rank",
    "kernel_basis",
    "row_basis",
    "solve",
    "inverse",
    "in_rowspace",
    "random_row_sample",
    "to_index_lists",
    "from_index_lists",
    "dumps_dense",
    "loads_dense",
    "dumps_alist",
    "loads_alist",
]


def pack_rows(m):
    """Pack a 0/1 matrix into little-endian uint64 words, 64 columns each."""
    m = check_binary_matrix(m)
    rows, cols = m.shape
    nw = max(1, (cols + 63) // 64)
    padded = np.zeros((rows, nw * 64), dtype=np.uint8)
    padded[:, :cols] = m
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64)


def unpack_rows(words, cols):
    bytes_ = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    return np.unpackbits(bytes_, axis=1, bitorder="little")[:, :cols].astype(np.uint8)


def matmul(a, b):
    """Matrix (or matrix-vector) product modulo 2."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    return (a @ b % 2).astype(np.uint8)


def rref(m, augment=None):
    """Reduced row echelon form.

    Parameters
    ----------
    m : array-like of shape (rows, cols)
    augment : array-like of shape (rows, k), optional
        Extra columns that receive the same row operations but are never
        chosen as pivots.

    Returns
    -------
    reduced : ndarray of shape (rows, cols)
    pivots : ndarray of int
        Pivot column of each of the first ``len(pivots)`` rows.
    augment : ndarray or None
    """
    m = check_binary_matrix(m)
    rows, cols = m.shape
    P = pack_rows(m)
    if augment is None:
        aug = np.zeros((rows, 0), dtype=np.uint8)
    else:
        aug = check_binary_matrix(np.asarray(augment).reshape(rows, -1), "augment").copy()
    piv = _kernels.rref_packed(P, aug, cols)
    reduced = unpack_rows(P, cols)
    return reduced, np.asarray(piv, dtype=np.int64), (aug if augment is not None else None)


def rank(m):
    """Row rank over GF(2)."""
    m = check_binary_matrix(m)
    if m.size == 0:
        return 0
    return int(rref(m)[1].shape[0])


def kernel_basis(m):
    """Basis of the right null space, one vector per row.

    The returned array has shape ``(cols - rank, cols)``.
    """
    m = check_binary_matrix(m)
    rows, cols = m.shape
    if rows == 0:
        return np.eye(cols, dtype=np.uint8)
    reduced, piv, _ = rref(m)
    r = piv.shape[0]
    free = np.setdiff1d(np.arange(cols), piv)
    basis = np.zeros((free.shape[0], cols), dtype=np.uint8)
    for t, f in enumerate(free):
        basis[t, f] = 1
        basis[t, piv] = reduced[:r, f]
    return basis


def row_basis(m):
    """Linearly independent rows spanning the row space of ``m``."""
    m = check_binary_matrix(m)
    if m.size == 0:
        return np.zeros((0, m.shape[1]), dtype=np.uint8)
    reduced, piv, _ = rref(m)
    return reduced[: piv.shape[0]].copy()


def solve(m, s):
    """Return some ``x`` with ``m @ x = s`` (mod 2), or None if inconsistent."""
    m = check_binary_matrix(m)
    rows, cols = m.shape
    s = check_binary_vector(s, rows, "s")
    if rows == 0:
        return np.zeros(cols, dtype=np.uint8)
    reduced, piv, aug = rref(m, s.reshape(-1, 1))
    r = piv.shape[0]
    if aug[r:, 0].any():
        return None
    x = np.zeros(cols, dtype=np.uint8)
    x[piv] = aug[:r, 0]
    return x


def inverse(m):
    """Inverse of a square invertible matrix over GF(2)."""
    m = check_binary_matrix(m)
    k = m.shape[0]
    if m.shape[1] != k:
        raise DimensionError("inverse needs a square matrix")
    reduced, piv, aug = rref(m, np.eye(k, dtype=np.uint8))
    if piv.shape[0] != k:
        raise np.linalg.LinAlgError("matrix is singular over GF(2)")
    return aug


def in_rowspace(m, v):
    """True when ``v`` is a GF(2) combination of the rows of ``m``."""
    m = check_binary_matrix(m)
    v = check_binary_vector(v, m.shape[1], "v")
    if not v.any():
        return True
    if m.shape[0] == 0:
        return False
    return solve(m.T, v) is not None


def random_row_sample(m, rng=None):
    """Uniformly random element of the row space of ``m``.

    ``rng`` may be a seed or a ``numpy.random.Generator``.  Each row is
    included independently with probability 1/2, which is uniform over the
    row space because the coefficient map is linear and surjective.
    """
    m = check_binary_matrix(m)
    rng = np.random.default_rng(rng)
    coeff = rng.integers(0, 2, size=m.shape[0], dtype=np.uint8)
    if m.shape[0] == 0:
        return np.zeros(m.shape[1], dtype=np.uint8)
    return matmul(coeff, m)


def to_index_lists(m):
    """Sparse view: the sorted column indices of each row."""
    m = check_binary_matrix(m)
    return [np.flatnonzero(row).tolist() for row in m]


def from_index_lists(lists, cols):
    m = np.zeros((len(lists), cols), dtype=np.uint8)
    for i, idx in enumerate(lists):
        for j in idx:
            if not 0 <= j < cols:
                raise DimensionError(f"column index {j} out of range in row {i}")
            m[i, j] ^= 1
    return m


# ---------------------------------------------------------------------------
# text formats


def dumps_dense(m):
    """``rows cols`` header followed by one line of 0/1 characters per row."""
    m = check_binary_matrix(m)
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    lines += ["".join("1" if b else "0" for b in row) for row in m]
    return "\n".join(lines) + "\n"


def _header(lines, kind):
    if not lines:
        raise ParseError(f"empty {kind} matrix text", line=1)
    parts = lines[0].split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise ParseError(f"bad {kind} header {lines[0]!r}, expected 'rows cols'", line=1)
    return int(parts[0]), int(parts[1])


def _body(lines, rows):
    """The ``rows`` lines after the header; only blank lines may follow them."""
    body = lines[1:1 + rows]
    if len(body) != rows:
        raise ParseError(f"expected {rows} rows, found {len(body)}", line=len(lines) + 1)
    for i, ln in enumerate(lines[1 + rows:], start=2 + rows):
        if ln:
            raise ParseError(f"unexpected text after {rows} rows", line=i)
    return body


def loads_dense(text):
    lines = [ln.strip() for ln in text.splitlines()]
    rows, cols = _header(lines, "dense")
    body = _body(lines, rows)
    m = np.zeros((rows, cols), dtype=np.uint8)
    for i, ln in enumerate(body):
        if len(ln) != cols:
            raise ParseError(f"row has {len(ln)} entries, expected {cols}", line=i + 2)
        for j, ch in enumerate(ln):
            if ch not in "01":
                raise ParseError(f"invalid character {ch!r}", line=i + 2, column=j + 1)
            m[i, j] = ch == "1"
    return m


def dumps_alist(m):
    """Header ``rows cols`` then each row's 1-based column indices."""
    m = check_binary_matrix(m)
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    lines += [" ".join(str(j + 1) for j in idx) for idx in to_index_lists(m)]
    return "\n".join(lines) + "\n"


def loads_alist(text):
    lines = [ln.strip() for ln in text.splitlines()]
    rows, cols = _header(lines, "alist")
    body = _body(lines, rows)
    lists = []
    for i, ln in enumerate(body):
        idx = []
        for tok in ln.split():
            if not tok.isdigit() or not 1 <= int(tok) <= cols:
                raise ParseError(f"bad column index {tok!r}", line=i + 2)
            idx.append(int(tok) - 1)
        lists.append(idx)
    return from_index_lists(lists, cols)
