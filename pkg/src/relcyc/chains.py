"""Chain complexes of rational vector spaces with a conserved grading.

All the complexes in this package (bar complexes, the small tensor complexes
and their totalizations) carry an extra grading by "weight" — any labelling
of basis elements that every differential preserves.  Homology then splits as
a direct sum over weights, which turns one big elimination into many small
ones.  The labels can be anything hashable and sortable (we use tuples of
integers derived from algebra gradings; the trivial labelling puts everything
in one block and costs nothing).

Degrees run 0..top; diffs[n] maps degree n to degree n-1, so homology is
available at degrees 0..top-1 (the spot at `top` lacks incoming boundaries).
"""

from .linalg import (
    CompositionNotZero,
    Matrix,
    Subspace,
    kernel_basis,
    rank,
    solve,
)


class NotACycle(Exception):
    """A vector handed to class_coords was not killed by the differential."""


class _Spot:
    """One degree of the complex: basis partitioned into weight blocks."""

    __slots__ = ("dim", "weights", "order", "positions")

    def __init__(self, weights):
        self.dim = len(weights)
        self.weights = list(weights)
        self.positions = {}
        for i, wt in enumerate(weights):
            self.positions.setdefault(wt, []).append(i)
        self.order = sorted(self.positions)


class GradedChainComplex:
    """dims/weights per degree plus differentials, homology computed blockwise.

    weights[n] is a list parallel to the degree-n basis; diffs[n] is the
    matrix of d: spot n -> spot n-1 for 1 <= n <= top.  The differential must
    preserve weights (checked during block extraction) and satisfy d.d = 0
    (checked blockwise when homology is requested).
    """

    def __init__(self, weights_by_degree, diffs):
        self.top = len(weights_by_degree) - 1
        self.spots = [_Spot(w) for w in weights_by_degree]
        assert len(diffs) == self.top + 1 and diffs[0] is None
        for n in range(1, self.top + 1):
            d = diffs[n]
            assert d.nrows == self.spots[n - 1].dim and d.ncols == self.spots[n].dim
        self.diffs = diffs
        self._blocks = {}  # (n, weight) -> Matrix
        self._homology = {}  # (n, weight) -> (reps, boundary Subspace)

    def dim(self, n):
        if 0 <= n <= self.top:
            return self.spots[n].dim
        return 0

    def weight_order(self, n):
        return self.spots[n].order

    def block(self, n, wt):
        """The weight-wt block of d: spot n -> spot n-1."""
        key = (n, wt)
        if key in self._blocks:
            return self._blocks[key]
        src = self.spots[n]
        dst = self.spots[n - 1] if n >= 1 else None
        cols = src.positions.get(wt, [])
        rows = dst.positions.get(wt, []) if dst is not None else []
        rowpos = {p: i for i, p in enumerate(rows)}
        out = [[0] * len(cols) for _ in rows]
        d = self.diffs[n] if 1 <= n <= self.top else None
        if d is not None:
            for j, cpos in enumerate(cols):
                for i in range(d.nrows):
                    val = d.rows[i][cpos]
                    if val:
                        bi = rowpos.get(i)
                        if bi is None:
                            raise AssertionError(
                                "differential does not preserve the grading "
                                "at degree %d, weight %r" % (n, wt)
                            )
                        out[bi][j] = val
        mat = Matrix(len(rows), len(cols), out)
        self._blocks[key] = mat
        return mat

    def _weights_at(self, n):
        if 0 <= n <= self.top:
            return self.spots[n].order
        return []

    def homology_dim(self, n):
        assert 0 <= n < self.top, "homology needs boundaries from degree n+1"
        total = 0
        for wt in self._merge_weights(n):
            reps, _ = self._homology_block(n, wt)
            total += len(reps)
        return total

    def _merge_weights(self, n):
        seen = set(self._weights_at(n))
        seen.update(self._weights_at(n + 1))
        return sorted(seen)

    def _homology_block(self, n, wt):
        key = (n, wt)
        if key in self._homology:
            return self._homology[key]
        d_out = self.block(n, wt) if n >= 1 else Matrix.zero(
            0, len(self.spots[n].positions.get(wt, [])))
        d_in = self.block(n + 1, wt)
        if d_out.nrows and d_in.ncols and not (d_out @ d_in).is_zero():
            raise CompositionNotZero("d.d != 0 at degree %d, weight %r" % (n, wt))
        cycles = kernel_basis(d_out)
        boundary = Subspace(d_in.nrows, [d_in.col(j) for j in range(d_in.ncols)])
        reps = []
        span = list(boundary.vectors)
        current = Subspace(d_out.ncols, span)
        for vec in cycles.vectors:
            if not current.contains(vec):
                reps.append(vec)
                span.append(vec)
                current = Subspace(d_out.ncols, span)
        self._homology[key] = (reps, boundary)
        return reps, boundary

    def homology_reps(self, n):
        """Cycle representatives of a homology basis, in full coordinates."""
        out = []
        spot = self.spots[n]
        for wt in self._merge_weights(n):
            reps, _ = self._homology_block(n, wt)
            pos = spot.positions.get(wt, [])
            for r in reps:
                full = [0] * spot.dim
                for c, p in zip(r, pos):
                    full[p] = c
                out.append(full)
        return out

    def class_coords(self, n, vec):
        """Coordinates of a cycle's class in the homology_reps(n) basis."""
        spot = self.spots[n]
        assert len(vec) == spot.dim
        coords = []
        for wt in self._merge_weights(n):
            pos = spot.positions.get(wt, [])
            part = [vec[p] for p in pos]
            reps, boundary = self._homology_block(n, wt)
            if not reps and not any(part):
                continue
            cols = [list(r) for r in reps] + [list(b) for b in boundary.vectors]
            if not cols:
                if any(part):
                    raise NotACycle("nonzero part in an empty homology block")
                continue
            m = Matrix.from_cols(len(part), cols)
            rhs = Matrix(len(part), 1, [[x] for x in part])
            sol = solve(m, rhs)
            if sol is None:
                raise NotACycle(
                    "vector is not a cycle modulo boundaries at degree %d, "
                    "weight %r" % (n, wt)
                )
            coords.extend(sol.rows[i][0] for i in range(len(reps)))
        return coords

    def rank_at(self, n):
        """Rank of d: spot n -> spot n-1, summed over weight blocks."""
        if not 1 <= n <= self.top:
            return 0
        return sum(rank(self.block(n, wt)) for wt in self._weights_at(n))

    def induced_map(self, other, n_src, n_dst, chain_map):
        """Matrix of a chain map on homology bases (self n_src -> other n_dst).

        chain_map is a Matrix from self's degree-n_src spot to other's
        degree-n_dst spot; it must send cycles to cycles.
        """
        reps = self.homology_reps(n_src)
        cols = []
        for r in reps:
            img = chain_map.apply(r)
            cols.append(other.class_coords(n_dst, img))
        height = other.homology_dim(n_dst)
        return Matrix.from_cols(height, cols) if cols else Matrix.zero(height, 0)
