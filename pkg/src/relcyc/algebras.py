"""Finite-dimensional algebra presentations and square-zero extensions.

An algebra A is given by structure constants on a chosen basis, with the
convention that basis element 0 *is* the unit.  That convention makes the
reduced space A-bar = A/k concrete: it is spanned by the basis classes of
indices >= 1, and "reduce mod the unit" just means dropping coordinate 0.

A square-zero extension E = A (+) M is assembled from an A-bimodule M and a
normal 2-cocycle f : A x A -> M via

    (a, m) (a', m') = (a a', a m' + m a' + f(a, a')),

so M sits inside E as an ideal with M.M = 0.  Conversely split_ideal takes a
concrete algebra C with a square-zero ideal spanned by basis elements and
extracts (A, M, f) using the complementary-basis section, with
f(a, a') = sec(a) sec(a') - sec(a a').
"""

from fractions import Fraction


class InvalidInput(Exception):
    """Presentation failed validation where a valid one was required."""


class NotAnIdeal(Exception):
    """The selected span is not a two-sided ideal; carries a witness product."""


class IdealNotSquareZero(Exception):
    """The selected ideal has a nonzero product of two of its elements."""


class ValidationReport:
    """Outcome of an axiom check: ok iff no failure strings were recorded."""

    def __init__(self, subject):
        self.subject = subject
        self.failures = []

    def fail(self, message):
        self.failures.append(message)

    @property
    def ok(self):
        return not self.failures

    def __repr__(self):
        state = "ok" if self.ok else "%d failure(s)" % len(self.failures)
        return "ValidationReport(%s: %s)" % (self.subject, state)


def _vec_add(u, v):
    return [a + b for a, b in zip(u, v)]


def _vec_scale(c, v):
    return [c * x for x in v]


def _vec_is_zero(v):
    return all(not x for x in v)


def _mat_vec(rows, v):
    return [sum(a * x for a, x in zip(row, v)) for row in rows]


def _mat_mul(a, b):
    n = len(b[0]) if b else 0
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(n)]
            for i in range(len(a))]


class AlgebraPresentation:
    """Structure constants c_{ij}^k with e_i e_j = sum_k c_{ij}^k e_k.

    mult[i][j] is the coefficient vector of e_i e_j; unit_index is always 0.
    """

    def __init__(self, basis_labels, mult, unit_index=0):
        assert unit_index == 0, "basis element 0 must be the unit"
        self.dim = len(basis_labels)
        self.basis_labels = list(basis_labels)
        self.mult = mult
        self.unit_index = 0
        assert len(mult) == self.dim
        assert all(len(row) == self.dim for row in mult)
        assert all(len(vec) == self.dim for row in mult for vec in row)

    def product(self, u, v):
        """Product of two coefficient vectors."""
        out = [0] * self.dim
        for i, cu in enumerate(u):
            if not cu:
                continue
            for j, cv in enumerate(v):
                if cv:
                    out = _vec_add(out, _vec_scale(cu * cv, self.mult[i][j]))
        return out


class BimodulePresentation:
    """An A-bimodule: per A-basis element, matrices for both actions on M.

    left_action[i] is the matrix of m -> e_i . m and right_action[i] of
    m -> m . e_i, both acting on coordinate columns over the M basis.
    """

    def __init__(self, basis_labels, left_action, right_action):
        self.dim = len(basis_labels)
        self.basis_labels = list(basis_labels)
        self.left_action = left_action
        self.right_action = right_action


class NormalCocycle:
    """values[i][j] = coordinates of f(e_i, e_j) in M; f extends by zero on M."""

    def __init__(self, values):
        self.values = values

    @classmethod
    def zero(cls, dim_a, dim_m):
        return cls([[[0] * dim_m for _ in range(dim_a)] for _ in range(dim_a)])


def validate_algebra(a):
    """Check two-sided unitality and associativity on all basis triples."""
    report = ValidationReport("algebra")
    for i in range(a.dim):
        unit_vec = [0] * a.dim
        unit_vec[i] = 1
        if a.mult[0][i] != unit_vec and [Fraction(x) for x in a.mult[0][i]] != [
            Fraction(x) for x in unit_vec
        ]:
            report.fail("unit fails on the left of basis element %d" % i)
        if [Fraction(x) for x in a.mult[i][0]] != [Fraction(x) for x in unit_vec]:
            report.fail("unit fails on the right of basis element %d" % i)
    for i in range(a.dim):
        for j in range(a.dim):
            for k in range(a.dim):
                lhs = [0] * a.dim
                for l, c in enumerate(a.mult[i][j]):
                    if c:
                        lhs = _vec_add(lhs, _vec_scale(c, a.mult[l][k]))
                rhs = [0] * a.dim
                for l, c in enumerate(a.mult[j][k]):
                    if c:
                        rhs = _vec_add(rhs, _vec_scale(c, a.mult[i][l]))
                if not _vec_is_zero([x - y for x, y in zip(lhs, rhs)]):
                    report.fail(
                        "associativity fails on basis triple (%d, %d, %d)" % (i, j, k)
                    )
                    return report
    return report


def validate_bimodule(a, m):
    """Check unitality, both associativity laws, and that the actions commute."""
    report = ValidationReport("bimodule")
    ident = [[1 if i == j else 0 for j in range(m.dim)] for i in range(m.dim)]

    def eq(p, q):
        return all(
            Fraction(p[i][j]) == Fraction(q[i][j])
            for i in range(m.dim)
            for j in range(m.dim)
        )

    if not eq(m.left_action[0], ident):
        report.fail("unit does not act as identity on the left")
    if not eq(m.right_action[0], ident):
        report.fail("unit does not act as identity on the right")
    for i in range(a.dim):
        for j in range(a.dim):
            lsum = [[0] * m.dim for _ in range(m.dim)]
            rsum = [[0] * m.dim for _ in range(m.dim)]
            for k, c in enumerate(a.mult[i][j]):
                if c:
                    for r in range(m.dim):
                        for s in range(m.dim):
                            lsum[r][s] += c * m.left_action[k][r][s]
                            rsum[r][s] += c * m.right_action[k][r][s]
            if not eq(_mat_mul(m.left_action[i], m.left_action[j]), lsum):
                report.fail("left action not associative on pair (%d, %d)" % (i, j))
                return report
            if not eq(_mat_mul(m.right_action[j], m.right_action[i]), rsum):
                report.fail("right action not associative on pair (%d, %d)" % (i, j))
                return report
            if not eq(
                _mat_mul(m.left_action[i], m.right_action[j]),
                _mat_mul(m.right_action[j], m.left_action[i]),
            ):
                report.fail("actions do not commute on pair (%d, %d)" % (i, j))
                return report
    return report


def validate_cocycle(a, m, f):
    """Check normality and the 2-cocycle identity on all basis triples."""
    report = ValidationReport("cocycle")
    for i in range(a.dim):
        if not _vec_is_zero(f.values[0][i]):
            report.fail("normality fails: f(1, e_%d) != 0" % i)
        if not _vec_is_zero(f.values[i][0]):
            report.fail("normality fails: f(e_%d, 1) != 0" % i)
    for i in range(a.dim):
        for j in range(a.dim):
            for k in range(a.dim):
                # a.f(b,c) - f(ab,c) + f(a,bc) - f(a,b).c
                term = _mat_vec(m.left_action[i], f.values[j][k])
                for l, c in enumerate(a.mult[i][j]):
                    if c:
                        term = _vec_add(term, _vec_scale(-c, f.values[l][k]))
                for l, c in enumerate(a.mult[j][k]):
                    if c:
                        term = _vec_add(term, _vec_scale(c, f.values[i][l]))
                term = _vec_add(
                    term, _vec_scale(-1, _mat_vec(m.right_action[k], f.values[i][j]))
                )
                if not _vec_is_zero(term):
                    report.fail(
                        "cocycle identity fails on basis triple (%d, %d, %d)"
                        % (i, j, k)
                    )
                    return report
    return report


class SquareZeroExtension:
    """E = A (+) M with the twisted product; carries the assembled table.

    The E basis is the A basis followed by the M basis; emult[i][j] is the
    coefficient vector of the product of the i-th and j-th E basis elements.
    """

    def __init__(self, a, m, f):
        self.a = a
        self.m = m
        self.f = f
        self.dim_a = a.dim
        self.dim_m = m.dim
        self.dim_e = a.dim + m.dim
        self.basis_labels = list(a.basis_labels) + list(m.basis_labels)
        self.emult = self._assemble_table()

    def _assemble_table(self):
        da, dm, de = self.dim_a, self.dim_m, self.dim_e
        table = [[[0] * de for _ in range(de)] for _ in range(de)]
        for i in range(de):
            for j in range(de):
                vec = table[i][j]
                if i < da and j < da:
                    for k, c in enumerate(self.a.mult[i][j]):
                        vec[k] = c
                    for k, c in enumerate(self.f.values[i][j]):
                        vec[da + k] += c
                elif i < da:  # A . M, left action
                    for k in range(dm):
                        vec[da + k] = self.m.left_action[i][k][j - da]
                elif j < da:  # M . A, right action
                    for k in range(dm):
                        vec[da + k] = self.m.right_action[j][k][i - da]
                # M . M = 0: leave zero
        return table

    def product(self, i, j):
        """Product of E basis elements, as a coefficient vector."""
        return self.emult[i][j]

    def is_m_index(self, i):
        return i >= self.dim_a


def build_extension(a, m, f):
    """Assemble E = A (+) M after validating every axiom.

    Also double-checks associativity and unitality of the assembled table on
    all basis triples, which exercises the bimodule and cocycle identities in
    combination.
    """
    for rep in (validate_algebra(a), validate_bimodule(a, m), validate_cocycle(a, m, f)):
        if not rep.ok:
            raise InvalidInput("; ".join(rep.failures))
    e = SquareZeroExtension(a, m, f)
    de = e.dim_e

    def prod_vec(u, v):
        out = [0] * de
        for i, cu in enumerate(u):
            if not cu:
                continue
            for j, cv in enumerate(v):
                if cv:
                    out = _vec_add(out, _vec_scale(cu * cv, e.emult[i][j]))
        return out

    for i in range(de):
        expected = ei_vec(de, i)
        if [Fraction(x) for x in e.emult[0][i]] != [Fraction(x) for x in expected]:
            raise InvalidInput("assembled extension is not left-unital at %d" % i)
        if [Fraction(x) for x in e.emult[i][0]] != [Fraction(x) for x in expected]:
            raise InvalidInput("assembled extension is not right-unital at %d" % i)
    for i in range(de):
        for j in range(de):
            for k in range(de):
                lhs = prod_vec(e.emult[i][j], ei_vec(de, k))
                rhs = prod_vec(ei_vec(de, i), e.emult[j][k])
                if not _vec_is_zero([x - y for x, y in zip(lhs, rhs)]):
                    raise InvalidInput(
                        "assembled extension not associative at (%d, %d, %d)"
                        % (i, j, k)
                    )
    return e


def ei_vec(dim, i):
    """Standard basis vector."""
    v = [0] * dim
    v[i] = 1
    return v


class IdealPair:
    """A unital algebra C with a distinguished two-sided basis ideal M.

    The basis is reordered complement-then-ideal so the M span is a terminal
    coordinate block, matching the SquareZeroExtension layout (dim_a, dim_m,
    emult, is_m_index).  The ideal need not square to zero, so only the
    word-level bar models apply to such a pair; the small tensor complexes
    require an actual square-zero extension.
    """

    def __init__(self, c, ideal_basis):
        ideal = sorted(set(ideal_basis))
        assert all(0 <= i < c.dim for i in ideal)
        if 0 in ideal:
            raise NotAnIdeal("the unit cannot lie in a proper ideal")
        ideal_set = set(ideal)
        for i in range(c.dim):
            for j in ideal:
                for prod in (c.mult[i][j], c.mult[j][i]):
                    for k, coeff in enumerate(prod):
                        if coeff and k not in ideal_set:
                            raise NotAnIdeal(
                                "product of basis elements %d, %d leaves the "
                                "span (coefficient on %s)"
                                % (i, j, c.basis_labels[k])
                            )
        comp = [i for i in range(c.dim) if i not in ideal_set]
        order = comp + ideal
        self.source = c
        self.order = order
        self.dim_a = len(comp)
        self.dim_m = len(ideal)
        self.dim_e = c.dim
        self.basis_labels = [c.basis_labels[i] for i in order]
        self.emult = [
            [[c.mult[order[i]][order[j]][order[k]] for k in range(c.dim)]
             for j in range(c.dim)]
            for i in range(c.dim)
        ]

    def product(self, i, j):
        """Product of basis elements in the reordered basis."""
        return self.emult[i][j]

    def is_m_index(self, i):
        return i >= self.dim_a


def ideal_pair(c, ideal_basis):
    """(C, M) with M a two-sided basis ideal, not necessarily square-zero."""
    return IdealPair(c, ideal_basis)


def split_ideal(c, ideal_basis):
    """Extract (A, M, f) from an algebra C and a square-zero basis ideal.

    ideal_basis is a set of C basis indices; its span must be a two-sided
    ideal with zero products, and the unit must lie outside.  The section
    A = C/M -> C spans the complementary basis elements, and
    f(a, a') = sec(a) sec(a') - sec(a a') lands in M.
    """
    ideal = sorted(set(ideal_basis))
    assert all(0 <= i < c.dim for i in ideal)
    if 0 in ideal:
        raise NotAnIdeal("the unit cannot lie in a proper ideal")
    comp = [i for i in range(c.dim) if i not in set(ideal)]
    ideal_set = set(ideal)

    for i in range(c.dim):
        for j in ideal:
            for prod in (c.mult[i][j], c.mult[j][i]):
                for k, coeff in enumerate(prod):
                    if coeff and k not in ideal_set:
                        raise NotAnIdeal(
                            "product of basis elements %d, %d leaves the span "
                            "(coefficient on %s)" % (i, j, c.basis_labels[k])
                        )
    for i in ideal:
        for j in ideal:
            if not _vec_is_zero(c.mult[i][j]):
                raise IdealNotSquareZero(
                    "product of ideal elements %s . %s is nonzero"
                    % (c.basis_labels[i], c.basis_labels[j])
                )

    da, dm = len(comp), len(ideal)
    a_mult = [
        [[c.mult[comp[i]][comp[j]][comp[k]] for k in range(da)] for j in range(da)]
        for i in range(da)
    ]
    a = AlgebraPresentation([c.basis_labels[i] for i in comp], a_mult)
    f_vals = [
        [[c.mult[comp[i]][comp[j]][ideal[k]] for k in range(dm)] for j in range(da)]
        for i in range(da)
    ]
    left = [
        [[c.mult[comp[i]][ideal[s]][ideal[r]] for s in range(dm)] for r in range(dm)]
        for i in range(da)
    ]
    right = [
        [[c.mult[ideal[s]][comp[i]][ideal[r]] for s in range(dm)] for r in range(dm)]
        for i in range(da)
    ]
    m = BimodulePresentation([c.basis_labels[i] for i in ideal], left, right)
    f = NormalCocycle(f_vals)
    return a, m, f


# ---------------------------------------------------------------------------
# stock examples used throughout the tests and docs


def multigrading(dim, table):
    """Per-basis-index weight tuples making the table homogeneous.

    Solves the constraints w_k = w_i + w_j, one for each nonzero structure
    constant c_{ij}^k, exactly over the rationals; the weight of index i is
    the tuple of values of a basis of the solution space (denominators
    cleared).  Every multiplication-derived operator preserves these labels,
    which is what lets homology computations split into small blocks.
    """
    from .linalg import Matrix, Subspace, kernel_basis

    rows = []
    for i in range(dim):
        for j in range(dim):
            for k, c in enumerate(table[i][j]):
                if c:
                    row = [0] * dim
                    row[k] += 1
                    row[i] -= 1
                    row[j] -= 1
                    if any(row):
                        rows.append(row)
    if not rows:
        sols = Subspace(dim, [[1 if t == s else 0 for s in range(dim)]
                              for t in range(dim)])
    else:
        sols = kernel_basis(Matrix(len(rows), dim, rows))
    cleared = []
    for vec in sols.vectors:
        den = 1
        for x in vec:
            den = den * x.denominator // _gcd(den, x.denominator)
        cleared.append([int(x * den) for x in vec])
    return [tuple(row[i] for row in cleared) for i in range(dim)]


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def polynomial_quotient(k):
    """The truncated polynomial algebra k[x]/(x^k), basis 1, x, ..., x^{k-1}."""
    labels = ["1"] + ["x%d" % i if i > 1 else "x" for i in range(1, k)]
    mult = [
        [[1 if l == i + j else 0 for l in range(k)] for j in range(k)]
        for i in range(k)
    ]
    return AlgebraPresentation(labels, mult)


def dual_numbers():
    """k[e]/(e^2) presented with its square-zero ideal (e)."""
    return polynomial_quotient(2)


def upper_triangular():
    """Upper-triangular 2x2 matrices on the basis (1, e11, e12)."""
    labels = ["1", "p", "u"]  # p = e11 idempotent, u = e12
    mult = [
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]],  # 1 . *
        [[0, 1, 0], [0, 1, 0], [0, 0, 1]],  # p.1 = p, p.p = p, p.u = u
        [[0, 0, 1], [0, 0, 0], [0, 0, 0]],  # u.1 = u, u.p = 0, u.u = 0
    ]
    return AlgebraPresentation(labels, mult)


def dual_numbers_pair():
    """E = dual numbers relative to the ideal (e)."""
    return build_extension(*split_ideal(dual_numbers(), [1]))


def upper_triangular_pair():
    """E = upper-triangular 2x2 matrices relative to the ideal (e12)."""
    return build_extension(*split_ideal(upper_triangular(), [2]))


def truncated_quartic_pair():
    """E = k[x]/(x^4) relative to the ideal (x^2): the nonzero-cocycle example."""
    return build_extension(*split_ideal(polynomial_quotient(4), [2, 3]))


def octic_pair():
    """(C, M) = k[x]/(x^8) with the ideal (x^2), whose nilpotency order is 4.

    The ideal does not square to zero (x^2 x^2 = x^4), so this is an
    IdealPair usable only with the word-level bar models.
    """
    return ideal_pair(polynomial_quotient(8), [2, 3, 4, 5, 6, 7])


def octic_mid_pair():
    """E = k[x]/(x^8) relative to the square-zero sub-ideal (x^4)."""
    return build_extension(*split_ideal(polynomial_quotient(8), [4, 5, 6, 7]))
