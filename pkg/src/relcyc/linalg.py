"""Exact dense linear algebra over the rationals.

Everything downstream — homology dimensions, identity certificates, the
harmonic splitting — reduces to ranks, kernels and images of matrices whose
entries are Python ints or ``fractions.Fraction``.  No floats anywhere.

Ranks go through fraction-free Bareiss elimination on a cleared-denominator
integer copy (controls coefficient growth); kernel/image bases go through
plain Gauss-Jordan over Fraction.  Subspaces are stored with their basis in
reduced echelon form so equality of subspaces is equality of objects.
"""

from fractions import Fraction
from math import gcd


class CompositionNotZero(Exception):
    """Two consecutive differentials failed to compose to zero."""


class NotComplementary(Exception):
    """A generalized eigenspace pair does not split the ambient space."""


class Matrix:
    """Dense row-major matrix; entries are ints or Fractions."""

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows, ncols, rows=None):
        if rows is None:
            rows = [[0] * ncols for _ in range(nrows)]
        assert len(rows) == nrows
        assert all(len(r) == ncols for r in rows)
        self.nrows = nrows
        self.ncols = ncols
        self.rows = rows

    @classmethod
    def zero(cls, nrows, ncols):
        return cls(nrows, ncols)

    @classmethod
    def identity(cls, n):
        rows = [[0] * n for _ in range(n)]
        for i in range(n):
            rows[i][i] = 1
        return cls(n, n, rows)

    @classmethod
    def from_cols(cls, nrows, cols):
        """Matrix whose columns are the given length-nrows vectors."""
        ncols = len(cols)
        rows = [[cols[j][i] for j in range(ncols)] for i in range(nrows)]
        return cls(nrows, ncols, rows)

    def copy(self):
        return Matrix(self.nrows, self.ncols, [list(r) for r in self.rows])

    def col(self, j):
        return [r[j] for r in self.rows]

    def is_zero(self):
        return all(not x for row in self.rows for x in row)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        # int 0 == Fraction(0), so plain list comparison does value equality
        return (self.nrows, self.ncols) == (other.nrows, other.ncols) and all(
            a == b for ra, rb in zip(self.rows, other.rows) for a, b in zip(ra, rb)
        )

    def __hash__(self):
        raise TypeError("matrices are mutable containers, not hashable")

    def __add__(self, other):
        assert (self.nrows, self.ncols) == (other.nrows, other.ncols)
        return Matrix(
            self.nrows,
            self.ncols,
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)],
        )

    def __sub__(self, other):
        assert (self.nrows, self.ncols) == (other.nrows, other.ncols)
        return Matrix(
            self.nrows,
            self.ncols,
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)],
        )

    def __neg__(self):
        return Matrix(self.nrows, self.ncols, [[-x for x in r] for r in self.rows])

    def scale(self, c):
        return Matrix(self.nrows, self.ncols, [[c * x for x in r] for r in self.rows])

    def __matmul__(self, other):
        assert self.ncols == other.nrows, (self.ncols, other.nrows)
        out = [[0] * other.ncols for _ in range(self.nrows)]
        for i, arow in enumerate(self.rows):
            orow = out[i]
            for k, a in enumerate(arow):
                if a:
                    for j, b in enumerate(other.rows[k]):
                        if b:
                            orow[j] += a * b
        return Matrix(self.nrows, other.ncols, out)

    def apply(self, vec):
        """Matrix-vector product."""
        assert len(vec) == self.ncols
        out = []
        for row in self.rows:
            s = 0
            for a, x in zip(row, vec):
                if a and x:
                    s += a * x
            out.append(s)
        return out

    def transpose(self):
        return Matrix(
            self.ncols,
            self.nrows,
            [[self.rows[i][j] for i in range(self.nrows)] for j in range(self.ncols)],
        )

    def __repr__(self):
        return "Matrix(%d, %d)" % (self.nrows, self.ncols)


def block_matrix(blocks, row_dims, col_dims):
    """Assemble a matrix from a 2-d grid of blocks (None = zero block).

    blocks[i][j] must be row_dims[i] x col_dims[j] when present.
    """
    nrows = sum(row_dims)
    ncols = sum(col_dims)
    rows = [[0] * ncols for _ in range(nrows)]
    roff = 0
    for bi, rd in enumerate(row_dims):
        coff = 0
        for bj, cd in enumerate(col_dims):
            blk = blocks[bi][bj]
            if blk is not None:
                assert blk.nrows == rd and blk.ncols == cd, (bi, bj)
                for i in range(rd):
                    brow = blk.rows[i]
                    target = rows[roff + i]
                    for j in range(cd):
                        if brow[j]:
                            target[coff + j] = brow[j]
            coff += cd
        roff += rd
    return Matrix(nrows, ncols, rows)


# ---------------------------------------------------------------------------
# elimination cores


def _cleared_int_row(row):
    """Scale a row by the lcm of denominators; returns a list of ints."""
    den = 1
    for x in row:
        if isinstance(x, Fraction) and x.denominator != 1:
            den = den * x.denominator // gcd(den, x.denominator)
    if den == 1:
        return [int(x) for x in row]
    return [int(x * den) for x in row]


def rank(m):
    """Rank over the rationals, via fraction-free Bareiss elimination."""
    rows = [_cleared_int_row(r) for r in m.rows if any(r)]
    if not rows:
        return 0
    ncols = m.ncols
    r = 0
    prev = 1
    for c in range(ncols):
        piv = None
        for i in range(r, len(rows)):
            if rows[i][c]:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pivrow = rows[r]
        pv = pivrow[c]
        for i in range(r + 1, len(rows)):
            row = rows[i]
            ric = row[c]
            # one-step fraction-free update: stays integral
            rows[i] = [(pv * row[j] - ric * pivrow[j]) // prev for j in range(ncols)]
        prev = pv
        r += 1
        if r == len(rows):
            break
    return r


def _rref(vectors, ncols):
    """Reduced row echelon form of a list of vectors; returns (rows, pivots)."""
    rows = [[Fraction(x) for x in v] for v in vectors if any(v)]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(rows)):
            if rows[i][c]:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = Fraction(1) / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        pivrow = rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                ci = rows[i][c]
                rows[i] = [a - ci * b for a, b in zip(rows[i], pivrow)]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


class Subspace:
    """Span of finitely many vectors in Q^ambient, held canonically.

    The basis is kept in reduced echelon form over the coordinates, so two
    Subspace objects are equal as objects iff they are equal as subspaces.
    """

    __slots__ = ("ambient", "vectors", "_pivots")

    def __init__(self, ambient, vectors):
        reduced, pivots = _rref(vectors, ambient)
        self.ambient = ambient
        self.vectors = reduced
        self._pivots = pivots

    @property
    def dim(self):
        return len(self.vectors)

    def contains(self, vec):
        """Exact membership test by reducing vec against the echelon basis."""
        assert len(vec) == self.ambient
        v = [Fraction(x) for x in vec]
        for row, p in zip(self.vectors, self._pivots):
            if v[p]:
                c = v[p]
                v = [a - c * b for a, b in zip(v, row)]
        return not any(v)

    def contains_subspace(self, other):
        return all(self.contains(v) for v in other.vectors)

    def basis_matrix(self):
        """Matrix with the basis vectors as columns."""
        return Matrix.from_cols(self.ambient, self.vectors)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient == other.ambient and self.vectors == other.vectors

    def __repr__(self):
        return "Subspace(dim=%d, ambient=%d)" % (self.dim, self.ambient)


def kernel_basis(m):
    """Basis of the right nullspace { v : m v = 0 }."""
    reduced, pivots = _rref(m.rows, m.ncols)
    pivset = set(pivots)
    vecs = []
    for fc in range(m.ncols):
        if fc in pivset:
            continue
        v = [Fraction(0)] * m.ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -reduced[i][fc]
        vecs.append(v)
    return Subspace(m.ncols, vecs)


def image_basis(m):
    """Basis of the column space."""
    return Subspace(m.nrows, [m.col(j) for j in range(m.ncols)])


def homology_dim(d_in, d_out):
    """dim ker(d_out) - rank(d_in) at the spot where d_in lands and d_out leaves.

    Checks d_out . d_in = 0 first; a nonzero composite means a wiring or sign
    bug upstream and is reported rather than silently producing garbage.
    """
    assert d_in.nrows == d_out.ncols, (d_in.nrows, d_out.ncols)
    if not (d_out @ d_in).is_zero():
        raise CompositionNotZero(
            "d_out . d_in != 0 on a %d-dimensional spot" % d_in.nrows
        )
    return d_in.nrows - rank(d_out) - rank(d_in)


def generalized_eigen_split(k_matrix):
    """Split along (K-I)^2: returns (ker (K-I)^2, im (K-I)^2).

    The pair is checked to be complementary — dims summing to the ambient
    dimension and meeting trivially; failure means K does not satisfy the
    split-root polynomial it was supposed to.
    """
    assert k_matrix.nrows == k_matrix.ncols
    n = k_matrix.nrows
    q = k_matrix - Matrix.identity(n)
    q2 = q @ q
    ker = kernel_basis(q2)
    im = image_basis(q2)
    if ker.dim + im.dim != n:
        raise NotComplementary("dims %d + %d != ambient %d" % (ker.dim, im.dim, n))
    combined = Subspace(n, ker.vectors + im.vectors)
    if combined.dim != n:
        raise NotComplementary(
            "generalized 1-eigenspace meets its complement nontrivially"
        )
    return ker, im


def matrix_poly_eval(k_matrix, coeffs):
    """Evaluate c0 + c1 K + ... + cd K^d by Horner's scheme."""
    assert k_matrix.nrows == k_matrix.ncols
    n = k_matrix.nrows
    if not coeffs:
        return Matrix.zero(n, n)
    acc = Matrix.identity(n).scale(coeffs[-1])
    for c in reversed(coeffs[:-1]):
        acc = acc @ k_matrix
        for i in range(n):
            acc.rows[i][i] += c
    return acc


def solve(m, rhs):
    """One exact solution X of m X = rhs (column-wise), or None if inconsistent."""
    assert m.nrows == rhs.nrows
    aug = [list(mr) + list(rr) for mr, rr in zip(m.rows, rhs.rows)]
    reduced, pivots = _rref(aug, m.ncols + rhs.ncols)
    for row, p in zip(reduced, pivots):
        if p >= m.ncols:
            return None  # pivot in the rhs part: inconsistent system
    sol = [[0] * rhs.ncols for _ in range(m.ncols)]
    for row, p in zip(reduced, pivots):
        for j in range(rhs.ncols):
            sol[p][j] = row[m.ncols + j]
    return Matrix(m.ncols, rhs.ncols, sol)
