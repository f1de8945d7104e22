"""Multi-index bookkeeping for p-forms stored on strictly increasing indices."""

from functools import lru_cache
from itertools import combinations


def perm_sign(seq):
    """Sign of the permutation sorting ``seq`` (distinct entries)."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def multi_indices(dim, p):
    return tuple(combinations(range(dim), p))


@lru_cache(maxsize=None)
def index_map(dim, p):
    return {idx: k for k, idx in enumerate(multi_indices(dim, p))}


def ncomp(dim, p):
    return len(multi_indices(dim, p))


@lru_cache(maxsize=None)
def wedge_table(dim, p, q):
    """For each (p+q)-index K: list of (I-slot, J-slot, sign) with I u J = K."""
    imap = index_map(dim, p)
    jmap = index_map(dim, q)
    table = []
    for K in multi_indices(dim, p + q):
        terms = []
        for I in combinations(K, p):
            J = tuple(k for k in K if k not in I)
            terms.append((imap[I], jmap[J], perm_sign(I + J)))
        table.append(tuple(terms))
    return tuple(table)


@lru_cache(maxsize=None)
def star_table(dim, p):
    """For each output (dim-p)-index J: (source p-slot I, sign) with *dx^I = sign dx^J."""
    imap = index_map(dim, p)
    table = []
    for J in multi_indices(dim, dim - p):
        I = tuple(k for k in range(dim) if k not in J)
        table.append((imap[I], perm_sign(I + J)))
    return tuple(table)


@lru_cache(maxsize=None)
def d_table(dim, p):
    """For each (p+1)-index K: list of (axis, p-slot, sign) in (d w)_K."""
    imap = index_map(dim, p)
    table = []
    for K in multi_indices(dim, p + 1):
        terms = []
        for m, k in enumerate(K):
            rest = K[:m] + K[m + 1 :]
            terms.append((k, imap[rest], (-1) ** m))
        table.append(tuple(terms))
    return tuple(table)


@lru_cache(maxsize=None)
def codiff_table(dim, p):
    """For each (p-1)-index I: list of (axis j, p-slot of {j} u I, sign of (j, I))."""
    kmap = index_map(dim, p)
    table = []
    for I in multi_indices(dim, p - 1):
        terms = []
        for j in range(dim):
            if j in I:
                continue
            K = tuple(sorted((j,) + I))
            terms.append((j, kmap[K], perm_sign((j,) + I)))
        table.append(tuple(terms))
    return tuple(table)
