"""Signed word calculus for the small tensor complexes of an extension.

A word is a tuple of E basis indices.  Slot 0 is the root and may carry any
index (an M index for the complexes X_v^w, a full-A index for the auxiliary
A-rooted spaces used by the connection maps and the retraction data); interior
slots never carry the unit index 0, since they live in reduced slot spaces.
M indices are those >= e.dim_a.

All operators below return chains: dicts mapping words to exact coefficients.
Three conventions do all the work here.

* Face products never produce a curvature term: the A-part product of two
  A indices is the product in A, and the f component is dropped.  f enters
  only through the explicit operators F_j.
* An interior slot produced by a face product is reduced: its unit
  coefficient is discarded.  A root slot keeps the full product.
* A rotation that moves a unit root into an interior slot kills the word.

Sign conventions: mu_l and F_j carry (-1)^l and (-1)^j respectively
(wraparound F_n carries -1); t carries (-1)^(i n) where i is the position of
the last M slot (i = 0 when there is none, making t the identity there).
"""

from collections import namedtuple
from fractions import Fraction

TensorWord = namedtuple("TensorWord", ("v", "w", "slots"))
TensorWord.__doc__ = (
    "Basis element of X_v^w: slot 0 in M, exactly w interior M slots, the "
    "rest reduced-A; slots is a tuple of (kind, basis index) with kind in "
    "{'M', 'Abar'} and the index taken in M's or A's own basis."
)


def is_m(e, i):
    return i >= e.dim_a


def word_w(e, word):
    """Number of interior M slots."""
    return sum(1 for i in word[1:] if i >= e.dim_a)


def i_of(e, word):
    """Position of the last M slot; 0 if only the root (or nothing) is in M."""
    for pos in range(len(word) - 1, 0, -1):
        if word[pos] >= e.dim_a:
            return pos
    return 0


def mu_product(e, i, j):
    """Product coefficient vector for face maps: the f component is dropped."""
    vec = e.emult[i][j]
    if i < e.dim_a and j < e.dim_a:
        return vec[: e.dim_a] + [0] * e.dim_m
    return vec


def f_product(e, i, j):
    """Cocycle value f(x_i, x_j) as an E vector (zero unless both are in A)."""
    if i < e.dim_a and j < e.dim_a:
        return [0] * e.dim_a + e.emult[i][j][e.dim_a:]
    return [0] * e.dim_e


def chain_add(acc, word, coeff):
    cur = acc.get(word, 0) + coeff
    if cur:
        acc[word] = cur
    else:
        acc.pop(word, None)


def chain_combine(acc, chain, scalar=1):
    for word, c in chain.items():
        chain_add(acc, word, scalar * c)
    return acc


def chain_op(e, op, chain, *args):
    """Apply a word operator linearly to a chain."""
    out = {}
    for word, c in chain.items():
        chain_combine(out, op(e, word, *args), c)
    return out


def face(e, word, l):
    """The signed face mu_l: multiply slots l, l+1 (wrapping at l = n)."""
    n = len(word) - 1
    out = {}
    sign = -1 if l % 2 else 1
    if l < n:
        prod = mu_product(e, word[l], word[l + 1])
        lo = 1 if l >= 1 else 0
        for k in range(lo, e.dim_e):
            if prod[k]:
                chain_add(out, word[:l] + (k,) + word[l + 2:], sign * prod[k])
    else:
        sign = -1 if n % 2 else 1
        prod = mu_product(e, word[n], word[0])
        for k in range(e.dim_e):
            if prod[k]:
                chain_add(out, (k,) + word[1:n], sign * prod[k])
    return out


def apply_b(e, word):
    """Hochschild boundary b = sum of the signed faces."""
    n = len(word) - 1
    out = {}
    for l in range(n + 1) if n >= 1 else ():
        chain_combine(out, face(e, word, l))
    return out


def apply_t(e, word):
    """Signed rotation bringing the last M slot to the front."""
    i = i_of(e, word)
    if i == 0:
        return {word: 1}
    if word[0] == 0:  # unit root would land in a reduced slot
        return {}
    n = len(word) - 1
    sign = -1 if (i * n) % 2 else 1
    return {word[i:] + word[:i]: sign}


def apply_t_power(e, word, k):
    chain = {word: 1}
    for _ in range(k):
        chain = chain_op(e, apply_t, chain)
    return chain


def apply_N(e, word):
    """N = id + t + ... + t^w, with w the interior M count."""
    w = word_w(e, word)
    out = {}
    chain = {word: 1}
    for _ in range(w + 1):
        chain_combine(out, chain)
        chain = chain_op(e, apply_t, chain)
    return out


def rotate_last(e, word):
    """The one-step rotation (-1)^n x_n (x) x_0 ... x_{n-1} (unit root kills)."""
    n = len(word) - 1
    if n == 0:
        return {word: 1}
    if word[0] == 0:
        return {}
    sign = -1 if n % 2 else 1
    return {(word[n],) + word[:n]: sign}


def apply_F(e, word, j):
    """The signed cocycle insertion F_j; {} outside 0 <= j <= n or off f."""
    n = len(word) - 1
    if j < 0 or j > n or n < 1:
        return {}
    out = {}
    if j < n:
        fv = f_product(e, word[j], word[j + 1])
        sign = -1 if j % 2 else 1
        for k in range(e.dim_a, e.dim_e):
            if fv[k]:
                chain_add(out, word[:j] + (k,) + word[j + 2:], sign * fv[k])
    else:
        fv = f_product(e, word[n], word[0])
        for k in range(e.dim_a, e.dim_e):
            if fv[k]:
                chain_add(out, word[1:n] + (k,), -fv[k])
    return out


def apply_d(e, word):
    """d = F_1 + ... + F_{n-1} (interior cocycle insertions only)."""
    n = len(word) - 1
    out = {}
    for j in range(1, n):
        chain_combine(out, apply_F(e, word, j))
    return out


def apply_d_prime(e, word):
    """d' = -d - sum_{j > i(x)} t . F_j, the twisted second differential."""
    n = len(word) - 1
    out = chain_combine({}, apply_d(e, word), -1)
    for j in range(i_of(e, word) + 1, n):
        chain_combine(out, chain_op(e, apply_t, apply_F(e, word, j)), -1)
    return out


# -- the public TensorWord layer --------------------------------------------


def to_tensor_word(e, word):
    """Clothe a raw M-rooted word as a TensorWord."""
    assert word[0] >= e.dim_a, "slot 0 must carry an M index"
    slots = []
    for pos, i in enumerate(word):
        if i >= e.dim_a:
            slots.append(("M", i - e.dim_a))
        else:
            assert pos >= 1 and i >= 1
            slots.append(("Abar", i))
    n = len(word) - 1
    w = word_w(e, word)
    return TensorWord(n + w, w, tuple(slots))


def from_tensor_word(e, tw):
    """Raw index tuple of a TensorWord."""
    out = []
    for kind, i in tw.slots:
        out.append(i + e.dim_a if kind == "M" else i)
    return tuple(out)
