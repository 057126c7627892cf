#!/usr/bin/env python3
"""One-off sanity oracle: relative HH/HC dims from the UNREDUCED bar complex.

Self-contained on purpose -- no imports from the package.  The package
computes homology from the normalized (unit-reduced) complex; this script
takes the unreduced route, with its own word enumeration, its own operator
assembly and its own Gauss elimination, so the two can only agree if both
are right.  Output values are frozen into tests/test_acceptance.py.

Conventions:
  * chains of degree n are spanned by words (x_0, ..., x_n) of basis indices;
  * the relative subcomplex is spanned by words with at least one slot in
    the ideal M (kernel of E -> E/M slotwise);
  * b is the usual Hochschild boundary with wraparound term;
  * the degree-raising operator is (1 - lambda) s N  built from the signed
    cyclic rotation lambda, the extra degeneracy s (insert the unit in front)
    and the norm N = sum lambda^k;
  * HC_n is the homology of the total complex Tot_n = (+)_p C_{n-2p} under
    b + B  (they anticommute, so no interleaving signs are needed).
"""

from fractions import Fraction
from itertools import product


# ---------------------------------------------------------------------------
# the two test algebras, as structure constants


def dual_numbers():
    """k[e]/(e^2): basis (1, e), ideal M = <e>."""
    mult = {
        (0, 0): {0: 1},
        (0, 1): {1: 1},
        (1, 0): {1: 1},
        (1, 1): {},
    }
    unit = {0: 1}
    ideal = {1}
    return mult, unit, ideal, 2


def upper_triangular():
    """Upper triangular 2x2 matrices: basis (e11, e22, e12), M = <e12>."""
    # e11*e11=e11, e22*e22=e22, e11*e12=e12, e12*e22=e12, rest zero
    mult = {
        (0, 0): {0: 1},
        (0, 1): {},
        (0, 2): {2: 1},
        (1, 0): {},
        (1, 1): {1: 1},
        (1, 2): {},
        (2, 0): {},
        (2, 1): {2: 1},
        (2, 2): {},
    }
    unit = {0: 1, 1: 1}
    ideal = {2}
    return mult, unit, ideal, 3


# ---------------------------------------------------------------------------
# chains and operators; a chain is {word(tuple): Fraction}


def relative_words(dim, ideal, n):
    """All degree-n words with at least one slot in the ideal."""
    out = []
    for word in product(range(dim), repeat=n + 1):
        if any(x in ideal for x in word):
            out.append(word)
    return out


def add_term(chain, word, coeff):
    if coeff:
        c = chain.get(word, 0) + coeff
        if c:
            chain[word] = c
        else:
            chain.pop(word, None)


def boundary(mult, word):
    """Hochschild b of a single word."""
    n = len(word) - 1
    out = {}
    for i in range(n):
        sign = -1 if i % 2 else 1
        for k, c in mult[(word[i], word[i + 1])].items():
            add_term(out, word[:i] + (k,) + word[i + 2:], sign * c)
    sign = -1 if n % 2 else 1
    for k, c in mult[(word[n], word[0])].items():
        add_term(out, (k,) + word[1:n], sign * c)
    return out


def rotate(word):
    """Signed cyclic rotation lambda: sign (-1)^n, last slot to front."""
    n = len(word) - 1
    sign = -1 if n % 2 else 1
    return (word[n],) + word[:n], sign


def degree_raise(unit, word):
    """(1 - lambda) s N applied to a single word."""
    n = len(word) - 1
    norm = {}
    cur, sg = dict([(word, 1)]), 1
    for _ in range(n + 1):
        for w, c in cur.items():
            add_term(norm, w, c)
        nxt = {}
        for w, c in cur.items():
            rw, rs = rotate(w)
            add_term(nxt, rw, c * rs)
        cur = nxt
    out = {}
    for w, c in norm.items():
        for u, cu in unit.items():
            sw = (u,) + w  # extra degeneracy
            add_term(out, sw, c * cu)
            rw, rs = rotate(sw)
            add_term(out, rw, -c * cu * rs)
    return out


def matrix_of(op, domain, codomain_index):
    """Dense row-major matrix of a word-wise operator on the given basis."""
    rows = [[Fraction(0)] * len(domain) for _ in codomain_index]
    for j, word in enumerate(domain):
        for w, c in op(word).items():
            i = codomain_index.get(w)
            if i is None:
                # image word escapes the relative span => it must be zero
                assert c == 0, (word, w, c)
                continue
            rows[i][j] += c
    return rows


def rank(rows):
    """Plain Gauss elimination over Fraction."""
    rows = [list(r) for r in rows]
    r = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][col]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                q = rows[i][col] / pv
                rows[i] = [a - q * b for a, b in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    return r


def homology_dim(d_in, d_out, dim_here):
    """dim ker(d_out) - rank(d_in) for maps into/out of a space of dim_here."""
    rk_out = rank(d_out) if d_out else 0
    rk_in = rank(d_in) if d_in else 0
    return dim_here - rk_out - rk_in


# ---------------------------------------------------------------------------
# assembled computations


def hochschild_dims(alg, n_max):
    mult, unit, ideal, dim = alg
    bases = [relative_words(dim, ideal, n) for n in range(n_max + 2)]
    index = [{w: i for i, w in enumerate(b)} for b in bases]
    b_mats = [None] + [
        matrix_of(lambda w: boundary(mult, w), bases[n], index[n - 1])
        for n in range(1, n_max + 2)
    ]
    return [
        homology_dim(b_mats[n + 1], b_mats[n], len(bases[n]))
        for n in range(n_max + 1)
    ]


def cyclic_dims(alg, n_max):
    mult, unit, ideal, dim = alg
    top = n_max + 1
    bases = [relative_words(dim, ideal, n) for n in range(top + 1)]
    index = [{w: i for i, w in enumerate(b)} for b in bases]

    def total_positions(n):
        # (degree, offset) pieces of Tot_n = (+)_p C_{n-2p}
        return [n - 2 * p for p in range(n // 2 + 1)]

    def total_matrix(n):
        """b + B : Tot_n -> Tot_{n-1}, dense."""
        src = total_positions(n)
        dst = total_positions(n - 1)
        dst_off = {}
        off = 0
        for q in dst:
            dst_off[q] = off
            off += len(bases[q])
        nrows = off
        ncols = sum(len(bases[q]) for q in src)
        rows = [[Fraction(0)] * ncols for _ in range(nrows)]
        coloff = 0
        for q in src:
            for j, word in enumerate(bases[q]):
                if q - 1 >= 0:
                    for w, c in boundary(mult, word).items():
                        i = index[q - 1].get(w)
                        if i is not None:
                            rows[dst_off[q - 1] + i][coloff + j] += c
                if q + 1 in dst_off:
                    for w, c in degree_raise(unit, word).items():
                        i = index[q + 1].get(w)
                        if i is not None:
                            rows[dst_off[q + 1] + i][coloff + j] += c
            coloff += len(bases[q])
        return rows, ncols

    dims = []
    mats = {}
    for n in range(n_max + 2):
        mats[n], _ = total_matrix(n) if n >= 1 else ([], 0)
    for n in range(n_max + 1):
        here = sum(len(bases[q]) for q in total_positions(n))
        dims.append(homology_dim(mats[n + 1], mats[n], here))
    return dims


def main():
    t1 = dual_numbers()
    hh1 = hochschild_dims(t1, 6)
    hc1 = cyclic_dims(t1, 5)
    print("dual numbers, relative HH_0..6:", hh1)
    print("dual numbers, relative HC_0..5:", hc1)

    t2 = upper_triangular()
    hh2 = hochschild_dims(t2, 4)
    hc2 = cyclic_dims(t2, 3)
    print("upper triangular, relative HH_0..4:", hh2)
    print("upper triangular, relative HC_0..3:", hc2)

    assert hh1 == [1, 1, 1, 1, 1, 1, 1], hh1
    assert hc1 == [1, 0, 1, 0, 1, 0], hc1
    assert hh2 == [0, 0, 0, 0, 0], hh2
    assert hc2 == [0, 0, 0, 0], hc2
    print("all frozen values confirmed")


if __name__ == "__main__":
    main()
