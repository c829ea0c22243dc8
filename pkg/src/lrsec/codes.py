"""CSS codes and the constructors used throughout the package.

A :class:`CssCode` holds the two check matrices, recomputed logical bases and
an optional natural left/right partition of the data qubits.  Constructors
cover hypergraph products, lifted products over cyclic or bicyclic group
algebras (bivariate bicycle codes among them), and twisted fibre bundles.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gf2
from ._validation import check_binary_matrix
from .exceptions import CommutationError, DimensionError, ParseError, RingError

__all__ = [
    "CssCode",
    "DegreeStats",
    "Protograph",
    "TwistSpec",
    "new_css",
    "hgp",
    "lifted_product",
    "bivariate_bicycle",
    "fiber_bundle",
    "fb_to_lifted_product",
    "degree_stats",
    "repetition_checks",
    "hamming_checks",
    "steane_code",
    "repetition_memory_code",
    "gross_code",
    "fb126_code",
    "FB126_TWISTS",
    "hgp625_code",
    "builtin_code",
    "BUILTIN_CODES",
    "load_code",
    "save_code",
]


@dataclass(frozen=True, eq=False)
class CssCode:
    """A CSS code ``(hx, hz)`` with paired logical bases.

    Attributes
    ----------
    hx, hz : ndarray of uint8
        X- and Z-type check matrices, one check per row.
    lx, lz : ndarray of uint8
        Logical operator bases with ``lx @ lz.T == I_k``.  Rows of ``lx``
        are X logicals (they commute with every Z check).
    left : ndarray of bool or None
        Natural left/right partition mask over the data qubits, if any.
    """

    hx: np.ndarray
    hz: np.ndarray
    lx: np.ndarray
    lz: np.ndarray
    left: np.ndarray | None = None
    name: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.hx.shape[1]

    @property
    def k(self) -> int:
        return self.lx.shape[0]

    def checks(self, pauli):
        """Check matrix for ``pauli`` in {"X", "Z"}."""
        return self.hx if pauli == "X" else self.hz

    def logicals(self, pauli):
        return self.lx if pauli == "X" else self.lz

    def with_partition(self, left):
        left = np.asarray(left, dtype=bool)
        if left.shape != (self.n,):
            raise DimensionError(f"partition mask has shape {left.shape}, expected ({self.n},)")
        return CssCode(self.hx, self.hz, self.lx, self.lz, left, self.name, dict(self.meta))

    def __repr__(self):
        label = f"{self.name} " if self.name else ""
        return f"CssCode({label}n={self.n}, k={self.k}, mx={self.hx.shape[0]}, mz={self.hz.shape[0]})"


@dataclass(frozen=True)
class DegreeStats:
    r_hx: int
    c_hx: int
    r_hz: int
    c_hz: int
    r_hxz: int
    c_hxz: int
    delta_hxz: int


def _logical_basis(detect, stab):
    """Vectors in ker(detect) that are independent modulo rowspace(stab)."""
    n = detect.shape[1]
    ker = gf2.kernel_basis(detect)
    sb = gf2.row_basis(stab)
    stack = np.vstack([sb, ker]) if ker.size else sb
    if stack.shape[0] == 0:
        return np.zeros((0, n), dtype=np.uint8)
    _, piv, _ = gf2.rref(stack.T)
    r = sb.shape[0]
    chosen = [p - r for p in piv if p >= r]
    return ker[chosen].copy()


def new_css(hx, hz, left=None, name=""):
    """Validate ``(hx, hz)`` and compute paired logical bases.

    Raises
    ------
    DimensionError
        If the matrices have different column counts.
    CommutationError
        If ``hx @ hz.T`` is nonzero.
    """
    hx = check_binary_matrix(hx, "hx")
    hz = check_binary_matrix(hz, "hz")
    if hx.shape[1] != hz.shape[1]:
        raise DimensionError(f"hx has {hx.shape[1]} columns but hz has {hz.shape[1]}")
    if hx.shape[0] and hz.shape[0] and gf2.matmul(hx, hz.T).any():
        raise CommutationError("hx @ hz.T != 0")
    lx = _logical_basis(hz, hx)
    lz = _logical_basis(hx, hz)
    k = hx.shape[1] - gf2.rank(hx) - gf2.rank(hz)
    if lx.shape[0] != k or lz.shape[0] != k:
        raise RuntimeError("logical basis size disagrees with rank count")
    if k:
        pairing = gf2.matmul(lx, lz.T)
        lz = gf2.matmul(gf2.inverse(pairing).T, lz)
    if left is not None:
        left = np.asarray(left, dtype=bool)
        if left.shape != (hx.shape[1],):
            raise DimensionError("partition mask length must equal n")
    for a in (hx, hz, lx, lz):
        a.setflags(write=False)
    return CssCode(hx, hz, lx, lz, left, name)


def degree_stats(code):
    def rmax(m):
        return int(m.sum(axis=1).max()) if m.size else 0

    def cmax(m):
        return int(m.sum(axis=0).max()) if m.size else 0

    stacked = np.vstack([code.hx, code.hz])
    r_hxz = max(rmax(code.hx), rmax(code.hz))
    c_hxz = cmax(stacked)
    return DegreeStats(rmax(code.hx), cmax(code.hx), rmax(code.hz), cmax(code.hz),
                       r_hxz, c_hxz, max(r_hxz, c_hxz))


def max_degree(m):
    """delta(M) = max(max row weight, max column weight)."""
    m = np.asarray(m)
    if m.size == 0:
        return 0
    return int(max(m.sum(axis=1).max(), m.sum(axis=0).max()))


def _left_mask(n, n_left):
    mask = np.zeros(n, dtype=bool)
    mask[:n_left] = True
    return mask


def hgp(a, b, name=""):
    """Hypergraph product with the natural partition attached.

    ``hx = [A (x) I_nB | I_mA (x) B^T]`` and ``hz = [I_nA (x) B | A^T (x) I_mB]``,
    so ``n = nA*nB + mA*mB`` and the left block holds the first ``nA*nB``
    columns.  Both block pairs keep ``delta(A)`` and ``delta(B)`` as their
    maximum degrees.
    """
    a = check_binary_matrix(a, "a")
    b = check_binary_matrix(b, "b")
    ma, na = a.shape
    mb, nb = b.shape
    hx = np.hstack([np.kron(a, np.eye(nb, dtype=np.uint8)), np.kron(np.eye(ma, dtype=np.uint8), b.T)])
    hz = np.hstack([np.kron(np.eye(na, dtype=np.uint8), b), np.kron(a.T, np.eye(mb, dtype=np.uint8))])
    code = new_css(hx, hz, left=_left_mask(na * nb + ma * mb, na * nb), name=name)
    code.meta.update(family="hgp", a=a, b=b)
    return code


# ---------------------------------------------------------------------------
# protographs over group algebras


def _shift(l, power=1):
    """l x l cyclic shift ``S`` with S[i, j] = 1 iff j = i + 1 (mod l), raised to ``power``."""
    return np.roll(np.eye(l, dtype=np.uint8), power % l if l else 0, axis=1)


@dataclass(frozen=True)
class Protograph:
    """Matrix of group-algebra elements.

    ``ring`` is ``(l,)`` for F2[x]/(x^l - 1) or ``(l, m)`` for the group
    algebra of Z_l x Z_m.  Each entry is ``None`` (zero), a sequence of
    exponents (ints for the cyclic ring, ``(a, b)`` pairs for the bicyclic
    ring; repeated terms cancel), or an explicit square binary matrix.
    """

    entries: tuple
    ring: tuple

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.entries)
        object.__setattr__(self, "entries", rows)
        if rows and len({len(r) for r in rows}) != 1:
            raise DimensionError("protograph rows have different lengths")

    @property
    def shape(self):
        return (len(self.entries), len(self.entries[0]) if self.entries else 0)

    @property
    def lift_size(self):
        return int(np.prod(self.ring))

    def lift_entry(self, entry):
        size = self.lift_size
        if entry is None:
            return np.zeros((size, size), dtype=np.uint8)
        if isinstance(entry, np.ndarray):
            mat = check_binary_matrix(entry, "protograph entry")
            if mat.shape != (size, size):
                raise DimensionError(f"explicit entry has shape {mat.shape}, expected {(size, size)}")
            rw, cw = mat.sum(axis=1), mat.sum(axis=0)
            if len(set(rw.tolist()) | set(cw.tolist())) > 1:
                raise RingError("entry lift does not have constant row and column weight")
            return mat
        out = np.zeros((size, size), dtype=np.uint8)
        for term in entry:
            if len(self.ring) == 1:
                out ^= _shift(self.ring[0], int(term))
            else:
                a, b = term
                out ^= np.kron(_shift(self.ring[0], a), _shift(self.ring[1], b))
        return out

    def lift(self):
        """Binary matrix obtained by replacing each entry with its lift."""
        rows, cols = self.shape
        size = self.lift_size
        out = np.zeros((rows * size, cols * size), dtype=np.uint8)
        for i, j in itertools.product(range(rows), range(cols)):
            out[i * size:(i + 1) * size, j * size:(j + 1) * size] = self.lift_entry(self.entries[i][j])
        return out

    def weight_matrix(self):
        """Integer matrix of per-entry lift weights."""
        rows, cols = self.shape
        w = np.zeros((rows, cols), dtype=np.int64)
        for i, j in itertools.product(range(rows), range(cols)):
            w[i, j] = int(self.lift_entry(self.entries[i][j])[0].sum())
        return w

    def degree(self):
        w = self.weight_matrix()
        if w.size == 0:
            return 0
        return int(max(w.sum(axis=1).max(), w.sum(axis=0).max()))


def lifted_product(c, d, name=""):
    """Lifted product of two protographs over the same ring.

    ``hx = [C (x) I_mD | I_mC (x) D]``, ``hz = [I_nC (x) D* | C* (x) I_nD]``
    where ``*`` is the conjugate transpose, i.e. the transpose of the lift.
    """
    if tuple(c.ring) != tuple(d.ring):
        raise RingError(f"protographs over different rings {c.ring} and {d.ring}")
    L = c.lift_size
    mc, nc = c.shape
    md, nd = d.shape
    lc = [[c.lift_entry(c.entries[i][j]) for j in range(nc)] for i in range(mc)]
    ld = [[d.lift_entry(d.entries[i][j]) for j in range(nd)] for i in range(md)]

    def blocks(nrow, ncol, fn):
        out = np.zeros((nrow * L, ncol * L), dtype=np.uint8)
        for r, col in itertools.product(range(nrow), range(ncol)):
            blk = fn(r, col)
            if blk is not None:
                out[r * L:(r + 1) * L, col * L:(col + 1) * L] = blk
        return out

    # row/column multi-indices are flattened as (outer, inner)
    hx_left = blocks(mc * md, nc * md,
                     lambda r, q: lc[r // md][q // md] if r % md == q % md else None)
    hx_right = blocks(mc * md, mc * nd,
                      lambda r, q: ld[r % md][q % nd] if r // md == q // nd else None)
    hz_left = blocks(nc * nd, nc * md,
                     lambda r, q: ld[q % md][r % nd].T if r // nd == q // md else None)
    hz_right = blocks(nc * nd, mc * nd,
                      lambda r, q: lc[q // nd][r // nd].T if r % nd == q % nd else None)
    hx = np.hstack([hx_left, hx_right])
    hz = np.hstack([hz_left, hz_right])
    code = new_css(hx, hz, left=_left_mask(hx.shape[1], hx_left.shape[1]), name=name)
    code.meta.update(family="lp", c=c, d=d)
    return code


def bivariate_bicycle(l, m, a_terms, b_terms, name=""):
    """Bivariate bicycle code ``hx = [A | B]``, ``hz = [B^T | A^T]``.

    ``a_terms``/``b_terms`` list the ``(i, j)`` exponents of monomials
    ``x^i y^j`` with ``x = S_l (x) I_m`` and ``y = I_l (x) S_m``.
    """
    c = Protograph(((tuple(a_terms),),), (l, m))
    d = Protograph(((tuple(b_terms),),), (l, m))
    code = lifted_product(c, d, name=name)
    code.meta.update(family="bb", l=l, m=m, a_terms=tuple(a_terms), b_terms=tuple(b_terms))
    return code


@dataclass(frozen=True)
class TwistSpec:
    """Twist matrix (``-1`` marks an absent base entry) and fibre length."""

    twists: np.ndarray
    fibre: int

    def __post_init__(self):
        t = np.asarray(self.twists, dtype=np.int64)
        if t.ndim != 2:
            raise DimensionError("twist matrix must be 2-D")
        if ((t < -1) | (t >= self.fibre)).any():
            raise ValueError(f"twist entries must be -1 or in [0, {self.fibre})")
        object.__setattr__(self, "twists", t)

    @property
    def base(self):
        return (self.twists >= 0).astype(np.uint8)


def _twisted_base(spec, transpose_twist=False):
    t = spec.twists
    l = spec.fibre
    rows, cols = t.shape
    out = np.zeros((rows * l, cols * l), dtype=np.uint8)
    for i, j in itertools.product(range(rows), range(cols)):
        if t[i, j] >= 0:
            power = -t[i, j] if transpose_twist else t[i, j]
            out[i * l:(i + 1) * l, j * l:(j + 1) * l] = _shift(l, power)
    return out


def fiber_bundle(spec, f, transpose_twist=False, name=""):
    """Fibre bundle code ``hx = [B (x)_phi I | I (x) F]``, ``hz = [I (x) F^T | (B (x)_phi I)^T]``.

    Block ``(i, j)`` of the twisted base is ``S^T[i, j]`` (or ``S^-T[i, j]``
    with ``transpose_twist``) and zero where the twist is ``-1``.  The fibre
    check matrix ``f`` must be square and commute with the shift.
    """
    f = check_binary_matrix(f, "f")
    l = spec.fibre
    if f.shape != (l, l):
        raise DimensionError(f"fibre matrix must be {l}x{l}")
    left = _twisted_base(spec, transpose_twist)
    mb, nb = spec.twists.shape
    right = np.kron(np.eye(mb, dtype=np.uint8), f)
    hx = np.hstack([left, right])
    hz = np.hstack([np.kron(np.eye(nb, dtype=np.uint8), f.T), left.T])
    code = new_css(hx, hz, left=_left_mask(hx.shape[1], left.shape[1]), name=name)
    code.meta.update(family="fb", twists=spec.twists, fibre=l)
    return code


def fb_to_lifted_product(spec, f_poly=(0, 1), transpose_twist=False):
    """Quasi-cyclic protographs ``(C, D)`` reproducing :func:`fiber_bundle`.

    ``C[i, j] = x^T[i, j]`` (zero where absent) and ``D = [[f_poly]]``.
    """
    sign = -1 if transpose_twist else 1
    entries = tuple(
        tuple(None if t < 0 else ((sign * int(t)) % spec.fibre,) for t in row)
        for row in spec.twists
    )
    c = Protograph(entries, (spec.fibre,))
    d = Protograph(((tuple(f_poly),),), (spec.fibre,))
    return c, d


# ---------------------------------------------------------------------------
# named codes


def repetition_checks(n):
    """(n-1) x n open-boundary repetition-code checks."""
    h = np.zeros((n - 1, n), dtype=np.uint8)
    for i in range(n - 1):
        h[i, i] = h[i, i + 1] = 1
    return h


def hamming_checks():
    """[7,4,3] Hamming checks; column j is the binary expansion of j+1."""
    return np.array([[(j + 1) >> b & 1 for j in range(7)] for b in range(3)], dtype=np.uint8)


def steane_code():
    h = hamming_checks()
    return new_css(h, h, name="steane")


def repetition_memory_code(n=3):
    """Repetition code as a CSS code with Z checks only."""
    return new_css(np.zeros((0, n), dtype=np.uint8), repetition_checks(n), name=f"rep{n}")


GROSS_A = ((3, 0), (0, 1), (0, 2))
GROSS_B = ((0, 3), (1, 0), (2, 0))


def gross_code():
    """[[144, 12, 12]] bivariate bicycle code, A = x^3 + y + y^2, B = y^3 + x + x^2."""
    return bivariate_bicycle(12, 6, GROSS_A, GROSS_B, name="gross")


FB126_TWISTS = np.array([
    [1, 1, -1, 5, 0, -1, -1],
    [-1, -1, 4, 3, 2, -1, 3],
    [5, -1, 2, -1, 1, 0, -1],
    [7, -1, -1, 7, -1, 0, 4],
    [8, 5, 8, -1, -1, -1, 2],
    [-1, 6, 4, 3, -1, 1, -1],
    [-1, 8, -1, -1, 0, 6, 2],
], dtype=np.int64)


def periodic_repetition_checks(n):
    """n x n circulant with first row 1100...0."""
    return (np.eye(n, dtype=np.uint8) ^ _shift(n, 1)).astype(np.uint8)


def fb126_code(transpose_twist=False):
    spec = TwistSpec(FB126_TWISTS, 9)
    return fiber_bundle(spec, periodic_repetition_checks(9), transpose_twist, name="fb126")


def _random_biregular(rows, cols, row_w, col_w, rng):
    stubs = np.repeat(np.arange(cols), col_w)
    while True:
        rng.shuffle(stubs)
        h = np.zeros((rows, cols), dtype=np.uint8)
        ok = True
        for i in range(rows):
            cs = stubs[i * row_w:(i + 1) * row_w]
            if len(set(cs.tolist())) < row_w:
                ok = False
                break
            h[i, cs] = 1
        if ok:
            return h


def _classical_distance(h):
    ker = gf2.kernel_basis(h)
    best = h.shape[1]
    for coeffs in itertools.product((0, 1), repeat=ker.shape[0]):
        if any(coeffs):
            best = min(best, int(gf2.matmul(np.array(coeffs, dtype=np.uint8), ker).sum()))
    return best


def hgp625_code(seed=2025):
    """Hypergraph product of a (3,4)-biregular 15 x 20 classical code with itself.

    The classical matrix is drawn from a seeded configuration model and the
    first draw with full rank and classical distance 8 is kept, giving
    [[625, 25, 8]] with maximum degree 8.
    """
    rng = np.random.default_rng(seed)
    while True:
        a = _random_biregular(15, 20, 4, 3, rng)
        if gf2.rank(a) == 15 and _classical_distance(a) == 8:
            return hgp(a, a, name="hgp625")


def _hgp_rep3():
    return hgp(repetition_checks(3), repetition_checks(3), name="hgp13")


BUILTIN_CODES = {
    "gross": gross_code,
    "fb126": fb126_code,
    "hgp625": hgp625_code,
    "steane": steane_code,
    "rep3": repetition_memory_code,
    "hgp13": _hgp_rep3,
}


# minimum over both sides, except rep3 whose Z-memory side is the meaningful one
KNOWN_DISTANCES = {"gross": 12, "fb126": 9, "hgp625": 8, "steane": 3, "rep3": 3, "hgp13": 3}


def builtin_code(name):
    """Construct a builtin code; ``meta["distance"]`` holds its known distance."""
    try:
        code = BUILTIN_CODES[name]()
    except KeyError:
        raise KeyError(f"unknown builtin code {name!r}; choose from {sorted(BUILTIN_CODES)}") from None
    code.meta.setdefault("distance", KNOWN_DISTANCES[name])
    return code


# ---------------------------------------------------------------------------
# code bundle files

_SECTIONS = ("hx", "hz", "lx", "lz")


def save_code(code, path, sparse=False):
    """Write a single-file bundle with ``[hx]``, ``[hz]`` and optional ``[partition]`` sections."""
    dump = gf2.dumps_alist if sparse else gf2.dumps_dense
    fmt = "alist" if sparse else "dense"
    parts = [f"# css code bundle{(' ' + code.name) if code.name else ''}\n"]
    for key in ("hx", "hz"):
        parts.append(f"[{key} {fmt}]\n" + dump(getattr(code, key)))
    if code.left is not None:
        parts.append("[partition]\n" + "".join("1" if b else "0" for b in code.left) + "\n")
    Path(path).write_text("".join(parts))


def _parse_bundle(text):
    sections = {}
    current = None
    start = 0
    lines = text.splitlines()
    for ln_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if line.startswith("#") or (not line and current is None):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(f"unterminated section header {line!r}", line=ln_no)
            head = line[1:-1].split()
            if not head or head[0] not in _SECTIONS + ("partition",):
                raise ParseError(f"unknown section {line!r}", line=ln_no)
            current = (head[0], head[1] if len(head) > 1 else "dense")
            sections[current] = []
            start = ln_no
            continue
        if current is None:
            raise ParseError("content before first section header", line=ln_no)
        sections[current].append((raw, start))
    return sections


def _load_matrix(body, fmt, key):
    text = "\n".join(raw for raw, _ in body)
    offset = body[0][1] if body else 0
    try:
        return gf2.loads_alist(text) if fmt == "alist" else gf2.loads_dense(text)
    except ParseError as exc:
        line = None if exc.line is None else exc.line + offset
        raise ParseError(f"[{key}] {exc.args[0].split(' (line')[0]}", line=line, column=exc.column) from None


def load_code(path, name=None):
    """Load a code from a bundle file or a directory of matrix files.

    A directory may contain ``hx`` / ``hz`` files (suffix ``.alist`` selects
    the sparse reader) and an optional ``partition.txt`` mask.
    """
    path = Path(path)
    if not path.exists():
        raise ParseError(f"no such code file: {path}")
    if path.is_dir():
        mats = {}
        for key in ("hx", "hz"):
            found = sorted(path.glob(f"{key}*"))
            if not found:
                raise ParseError(f"directory {path} has no {key} file")
            fp = found[0]
            reader = gf2.loads_alist if fp.suffix == ".alist" else gf2.loads_dense
            mats[key] = reader(fp.read_text())
        left = None
        part = path / "partition.txt"
        if part.exists():
            left = _parse_mask(part.read_text().strip(), mats["hx"].shape[1], 1)
        return new_css(mats["hx"], mats["hz"], left=left, name=name or path.name)
    sections = _parse_bundle(path.read_text())
    mats = {}
    left = None
    for (key, fmt), body in sections.items():
        if key == "partition":
            left = body
        else:
            mats[key] = _load_matrix(body, fmt, key)
    for key in ("hx", "hz"):
        if key not in mats:
            raise ParseError(f"bundle {path} lacks a [{key}] section")
    if left is not None:
        raw, start = left[0]
        left = _parse_mask(raw.strip(), mats["hx"].shape[1], start + 1)
    return new_css(mats["hx"], mats["hz"], left=left, name=name or path.stem)


def _parse_mask(text, n, line):
    if len(text) != n or set(text) - {"0", "1"}:
        raise ParseError(f"partition mask must be {n} characters of 0/1", line=line)
    return np.array([c == "1" for c in text], dtype=bool)
