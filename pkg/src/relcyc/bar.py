"""Normalized bar-complex oracle for relative Hochschild/cyclic homology.

This side of the package knows nothing about the small tensor complexes: it
works with honest bar words over the full extension E (or over A), using only
the multiplication table.  Degree-n chains live in C (x) Cbar^n, where slot 0
is unreduced and interior slots run over basis indices >= 1 (the unit class
is dropped).  The relative subcomplex of a square-zero extension is spanned
by the words with at least one slot in M; it is stable under both b and the
degree-raising operator B.

The only performance device is a conserved multigrading: the homogeneity
constraints w_k = w_i + w_j (one per nonzero structure constant) are solved
exactly, and every word gets the tuple of its slot weights summed.  b and B
preserve that label by construction, so homology is computed in small blocks.
"""

from .algebras import (
    AlgebraPresentation,
    IdealPair,
    SquareZeroExtension,
    multigrading,
)
from .chains import GradedChainComplex
from .linalg import Matrix


def _carrier(c):
    """(dim, table, m_start) for an algebra or a pair (m_start=None if absolute)."""
    if isinstance(c, (SquareZeroExtension, IdealPair)):
        return c.dim_e, c.emult, c.dim_a
    if isinstance(c, AlgebraPresentation):
        return c.dim, c.mult, None
    raise TypeError(
        "expected an AlgebraPresentation, IdealPair or SquareZeroExtension"
    )


class BarSide:
    """Word enumeration and operator assembly for one algebra's bar complex."""

    def __init__(self, c):
        self.dim, self.table, self.m_start = _carrier(c)
        self.weights = multigrading(self.dim, self.table)
        self._nonneg = all(w[0] >= 0 for w in self.weights) if self.weights[0] else False
        self._words = {}
        self._index = {}
        self._complexes = {}

    # -- words ------------------------------------------------------------

    def word_weight(self, word):
        acc = [0] * len(self.weights[0])
        for i in word:
            wt = self.weights[i]
            for s in range(len(acc)):
                acc[s] += wt[s]
        return tuple(acc)

    def words(self, n, relative=False, cap=None):
        """Degree-n bar words in lexicographic order.

        relative: keep only words with at least one M slot.  cap: keep only
        words whose first weight component is <= cap (requires nonnegative
        weights so the pruning below is sound).
        """
        key = (n, relative, cap)
        if key in self._words:
            return self._words[key]
        if cap is not None and not self._nonneg:
            raise ValueError("weight cap needs a nonnegative grading")
        out = []
        first_wt = [w[0] if w else 0 for w in self.weights]
        slots = [list(range(self.dim))] + [list(range(1, self.dim))] * n

        def rec(prefix, wsum):
            pos = len(prefix)
            if pos == n + 1:
                out.append(tuple(prefix))
                return
            for i in slots[pos]:
                if cap is not None and wsum + first_wt[i] > cap:
                    continue
                prefix.append(i)
                rec(prefix, wsum + first_wt[i])
                prefix.pop()

        rec([], 0)
        if relative:
            assert self.m_start is not None
            ms = self.m_start
            out = [w for w in out if any(i >= ms for i in w)]
        self._words[key] = out
        self._index[key] = {w: i for i, w in enumerate(out)}
        return out

    def word_index(self, n, relative=False, cap=None):
        self.words(n, relative, cap)
        return self._index[(n, relative, cap)]

    # -- single-word operators ---------------------------------------------

    def boundary_chain(self, word):
        """Hochschild b of one word, as a {word: coeff} chain."""
        n = len(word) - 1
        out = {}
        if n == 0:
            return out
        for i in range(n):
            sign = -1 if i % 2 else 1
            prod = self.table[word[i]][word[i + 1]]
            lo = 0 if i == 0 else 1  # interior products are reduced mod unit
            for k in range(lo, self.dim):
                c = prod[k]
                if c:
                    _acc(out, word[:i] + (k,) + word[i + 2:], sign * c)
        sign = -1 if n % 2 else 1
        prod = self.table[word[n]][word[0]]
        for k, c in enumerate(prod):
            if c:
                _acc(out, (k,) + word[1:n], sign * c)
        return out

    def connes_chain(self, word):
        """Normalized degree-raising operator B of one word."""
        out = {}
        if word[0] == 0:  # unit in slot 0 dies in every rotated interior
            return out
        n = len(word) - 1
        for i in range(n + 1):
            sign = -1 if (i * n) % 2 else 1
            _acc(out, (0,) + word[i:] + word[:i], sign)
        return out

    # -- assembled matrices -------------------------------------------------

    def matrix_of(self, op, n_src, n_dst, relative=False, cap=None):
        src = self.words(n_src, relative, cap)
        dst_index = self.word_index(n_dst, relative, cap)
        nrows = len(self.words(n_dst, relative, cap))
        rows = [[0] * len(src) for _ in range(nrows)]
        for j, word in enumerate(src):
            for w, c in op(word).items():
                i = dst_index.get(w)
                if i is None:
                    continue  # projection off the kept span (pure-A words)
                rows[i][j] += c
        return Matrix(nrows, len(src), rows)

    def hochschild_complex(self, top, relative=False, cap=None):
        key = ("hh", top, relative, cap)
        if key in self._complexes:
            return self._complexes[key]
        weights = [
            [self.word_weight(w) for w in self.words(n, relative, cap)]
            for n in range(top + 1)
        ]
        diffs = [None] + [
            self.matrix_of(self.boundary_chain, n, n - 1, relative, cap)
            for n in range(1, top + 1)
        ]
        cx = GradedChainComplex(weights, diffs)
        self._complexes[key] = cx
        return cx

    # -- the cyclic total complex -------------------------------------------

    def tot_positions(self, m, relative=False, cap=None):
        """Tot_m of the cyclic bicomplex: degrees m, m-2, ... down to >= 0."""
        out = []
        q = m
        while q >= 0:
            for w in self.words(q, relative, cap):
                out.append((q, w))
            q -= 2
        return out

    def cyclic_total_complex(self, top, relative=False, cap=None):
        key = ("hc", top, relative, cap)
        if key in self._complexes:
            return self._complexes[key]
        weights = []
        indexes = []
        for m in range(top + 1):
            pos = self.tot_positions(m, relative, cap)
            weights.append([self.word_weight(w) for (_, w) in pos])
            indexes.append({p: i for i, p in enumerate(pos)})
        diffs = [None]
        for m in range(1, top + 1):
            src = self.tot_positions(m, relative, cap)
            dst_index = indexes[m - 1]
            rows = [[0] * len(src) for _ in range(len(weights[m - 1]))]
            for j, (q, word) in enumerate(src):
                if q >= 1:
                    for w, c in self.boundary_chain(word).items():
                        i = dst_index.get((q - 1, w))
                        if i is not None:
                            rows[i][j] += c
                if q + 1 <= m - 1:
                    for w, c in self.connes_chain(word).items():
                        i = dst_index.get((q + 1, w))
                        if i is not None:
                            rows[i][j] += c
            diffs.append(Matrix(len(weights[m - 1]), len(src), rows))
        cx = GradedChainComplex(weights, diffs)
        self._complexes[key] = cx
        return cx

    def s_projection(self, m, relative=False, cap=None):
        """Chain-level periodicity S: Tot_m -> Tot_{m-2}, dropping degree m."""
        src = self.tot_positions(m, relative, cap)
        dst_index = {p: i for i, p in enumerate(self.tot_positions(m - 2, relative, cap))}
        rows = [[0] * len(src) for _ in range(len(dst_index))]
        for j, (q, word) in enumerate(src):
            i = dst_index.get((q, word))
            if i is not None:
                rows[i][j] = 1
        return Matrix(len(dst_index), len(src), rows)


_sides = {}


def side_for(c):
    key = id(c)
    cached = _sides.get(key)
    if cached is None or cached[0] is not c:
        cached = (c, BarSide(c))
        _sides[key] = cached
    return cached[1]


def _acc(chain, word, coeff):
    cur = chain.get(word, 0) + coeff
    if cur:
        chain[word] = cur
    else:
        chain.pop(word, None)


# ---------------------------------------------------------------------------
# public operations


def bar_boundary(c, n):
    """b: C (x) Cbar^n -> C (x) Cbar^(n-1) on the full word basis."""
    assert n >= 1
    return side_for(c).matrix_of(side_for(c).boundary_chain, n, n - 1)


def connes_B(c, n):
    """Normalized B: C (x) Cbar^n -> C (x) Cbar^(n+1) on the full word basis."""
    assert n >= 0
    return side_for(c).matrix_of(side_for(c).connes_chain, n, n + 1)


def relative_hh_dims(e, n_max):
    """dim HH_n(E, M) for 0 <= n <= n_max, from the relative bar complex."""
    cx = side_for(e).hochschild_complex(n_max + 1, relative=True)
    return [cx.homology_dim(n) for n in range(n_max + 1)]


def relative_hc_dims(e, n_max):
    """dim HC_n(E, M) from the finite-column cyclic total complex."""
    cx = side_for(e).cyclic_total_complex(n_max + 1, relative=True)
    return [cx.homology_dim(n) for n in range(n_max + 1)]


def hh_dims(c, n_max):
    """Absolute Hochschild dimensions (used by the exactness bookkeeping)."""
    cx = side_for(c).hochschild_complex(n_max + 1)
    return [cx.homology_dim(n) for n in range(n_max + 1)]


def hc_dims(c, n_max):
    """Absolute cyclic dimensions."""
    cx = side_for(c).cyclic_total_complex(n_max + 1)
    return [cx.homology_dim(n) for n in range(n_max + 1)]


def _section_boundary_matrix(e, n):
    """r . b_E . s : A-words(n) -> relative words(n-1).

    s views an A-bar word inside E (the A basis indices are the first E
    indices, so this is the identity on labels), b_E is the boundary of the
    big algebra, and r kills the pure-A part (nothing, on cycles).
    """
    side_e = side_for(e)
    side_a = side_for(e.a)
    src = side_a.words(n)
    dst_index = side_e.word_index(n - 1, relative=True)
    nrows = len(side_e.words(n - 1, relative=True))
    rows = [[0] * len(src) for _ in range(nrows)]
    for j, word in enumerate(src):
        for w, c in side_e.boundary_chain(word).items():
            i = dst_index.get(w)
            if i is not None:
                rows[i][j] += c
    return Matrix(nrows, len(src), rows)


def snake_connection_hh(e, n):
    """Connection HH_n(A) -> HH_{n-1}(E, M) by lift, boundary, restrict.

    Also checks independence of representatives: boundaries of A map to
    classes that vanish on the relative side.
    """
    assert n >= 1
    side_a = side_for(e.a)
    cx_a = side_a.hochschild_complex(n + 1)
    cx_rel = side_for(e).hochschild_complex(n, relative=True)
    chain_map = _section_boundary_matrix(e, n)
    induced = cx_a.induced_map(cx_rel, n, n - 1, chain_map)
    # representative independence: images of boundaries must be boundaries
    b_a = side_a.matrix_of(side_a.boundary_chain, n + 1, n)
    for j in range(b_a.ncols):
        img = chain_map.apply(b_a.col(j))
        coords = cx_rel.class_coords(n - 1, img)
        assert all(not c for c in coords), "connection depends on representatives"
    return induced


def _tot_section_matrix(e, m):
    """s then D_E then restrict, on cyclic total complexes: Tot_m(A) -> Tot_{m-1}(rel E)."""
    side_e = side_for(e)
    side_a = side_for(e.a)
    src = side_a.tot_positions(m)
    dst = side_e.tot_positions(m - 1, relative=True)
    dst_index = {p: i for i, p in enumerate(dst)}
    rows = [[0] * len(src) for _ in range(len(dst))]
    for j, (q, word) in enumerate(src):
        if q >= 1:
            for w, c in side_e.boundary_chain(word).items():
                i = dst_index.get((q - 1, w))
                if i is not None:
                    rows[i][j] += c
        if q + 1 <= m - 1:
            for w, c in side_e.connes_chain(word).items():
                i = dst_index.get((q + 1, w))
                if i is not None:
                    rows[i][j] += c
    return Matrix(len(dst), len(src), rows)


def snake_connection_hc(e, n):
    """Connection HC_n(A) -> HC_{n-1}(E, M) on the cyclic total complexes."""
    assert n >= 1
    side_a = side_for(e.a)
    cx_a = side_a.cyclic_total_complex(n + 1)
    cx_rel = side_for(e).cyclic_total_complex(n, relative=True)
    chain_map = _tot_section_matrix(e, n)
    induced = cx_a.induced_map(cx_rel, n, n - 1, chain_map)
    d_a = cx_a.diffs[n + 1]
    for j in range(d_a.ncols):
        img = chain_map.apply(d_a.col(j))
        coords = cx_rel.class_coords(n - 1, img)
        assert all(not c for c in coords), "connection depends on representatives"
    return induced


def inclusion_to_cyclic(c, n, relative=False):
    """Matrix of C_n -> Tot_n (the degree-n column), inducing HH_n -> HC_n."""
    side = side_for(c)
    src = side.words(n, relative=relative)
    dst = side.tot_positions(n, relative=relative)
    dst_index = {p: i for i, p in enumerate(dst)}
    rows = [[0] * len(src) for _ in range(len(dst))]
    for j, w in enumerate(src):
        rows[dst_index[(n, w)]][j] = 1
    return Matrix(len(dst), len(src), rows)


def connection_compatibility_hh_hc(e, n):
    """Both legs of the naturality square HH_n(A) -> HC_{n-1}(E,M).

    Returns (I . delta_HH, delta_HC . I) on homology bases; they must agree.
    """
    side_a = side_for(e.a)
    side_e = side_for(e)
    cx_a_hh = side_a.hochschild_complex(n + 1)
    cx_a_hc = side_a.cyclic_total_complex(n + 1)
    cx_rel_hh = side_e.hochschild_complex(n, relative=True)
    cx_rel_hc = side_e.cyclic_total_complex(n, relative=True)
    delta_hh = cx_a_hh.induced_map(cx_rel_hh, n, n - 1, _section_boundary_matrix(e, n))
    delta_hc = cx_a_hc.induced_map(cx_rel_hc, n, n - 1, _tot_section_matrix(e, n))
    i_a = cx_a_hh.induced_map(cx_a_hc, n, n, inclusion_to_cyclic(e.a, n))
    i_rel = cx_rel_hh.induced_map(
        cx_rel_hc, n - 1, n - 1, inclusion_to_cyclic(e, n - 1, relative=True)
    )
    return i_rel @ delta_hh, delta_hc @ i_a


def les_bookkeeping_hh(e, n_max):
    """Exactness accounting for the HH long exact sequence.

    For each n: dim HH_n(E,M) - dim HH_n(E) + dim HH_n(A) - rank(delta_n)
    - rank(delta_{n+1}) must vanish.  Returns the list of residuals.
    """
    from .linalg import rank as _rank

    rel = relative_hh_dims(e, n_max)
    abs_e = hh_dims(e, n_max)
    abs_a = hh_dims(e.a, n_max)
    deltas = {}
    for n in range(1, n_max + 2):
        deltas[n] = snake_connection_hh(e, n)
    out = []
    for n in range(n_max + 1):
        r_n = _rank(deltas[n]) if n >= 1 else 0
        r_n1 = _rank(deltas[n + 1])
        out.append(rel[n] - abs_e[n] + abs_a[n] - r_n - r_n1)
    return out
