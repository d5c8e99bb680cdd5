"""Word spans of creation/annihilation operators at finite truncation.

A word is a product a^(eps_n)(e_{i_n}) ... a^(eps_1)(e_{i_1}) of basis
creators (eps = +1) and annihilators (eps = -1) acting on the graded
quotient space, with the letter carrying eps_1 applied first.  The word's
signature is the tuple of exponents in operator order (leftmost factor
first); its total sum is the degree of the word as a block matrix.

``span_build`` assembles the linear span of all word values for one of
eight generating disciplines; ``mod_*`` kinds collect words of block
degree +1 (module candidates), ``alg_*`` kinds words of degree 0
(algebra candidates):

* ``"mod_alt"`` / ``"alg_alt"`` -- strictly alternating words ending
  (rightmost) in a creator, of odd / even length.
* ``"mod_nc"`` / ``"alg_nc"`` -- words whose partial sums read from the right
  never go negative (the word never dips below the grading it started
  from), with total +1 / 0.
* ``"mod_word"`` / ``"alg_word"`` -- all words of total +1 / 0.
* ``"mod_all"`` / ``"alg_all"`` -- every block matrix of degree +1 / 0, built
  directly, as the ambient comparison spaces.

Spans are finite-dimensional, so they stabilize once the word-length
horizon is large enough; ``OperatorSpan.stabilized`` records whether the
last length increment still changed the rank.  ``check_ternary`` and
``check_left_action`` test the algebraic closure properties that decide
whether a span can serve as a bimodule generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as _product

import numpy as np

SPAN_TOL = 1e-10

SPAN_KINDS = ("mod_alt", "alg_alt", "mod_nc", "alg_nc", "mod_word", "alg_word", "mod_all", "alg_all")

__all__ = [
    "SPAN_KINDS",
    "SPAN_TOL",
    "OperatorSpan",
    "signatures",
    "alternating_signature",
    "span_build",
    "check_ternary",
    "check_left_action",
]


def signatures(n, total, nc=False):
    """All +-1 tuples of length n with the given total sum.

    Tuples are in operator order: position 0 is the leftmost letter of the
    word, position n-1 the rightmost (applied first).  With ``nc=True``
    only tuples whose partial sums read from the right stay >= 0 are kept,
    i.e. words that never annihilate below their starting grade.  Result
    is exhaustive and lexicographically sorted; an unreachable total or a
    parity mismatch gives an empty list.
    """
    n = int(n)
    if n < 1:
        raise ValueError("signature length must be at least 1")
    total = int(total)
    if abs(total) > n or (n - total) % 2 != 0:
        return []
    out = []
    for sig in _product((-1, 1), repeat=n):
        if sum(sig) != total:
            continue
        if nc:
            running = 0
            ok = True
            for eps in reversed(sig):
                running += eps
                if running < 0:
                    ok = False
                    break
            if not ok:
                continue
        out.append(sig)
    return out


def alternating_signature(n):
    """The unique strictly alternating signature of length n ending in +1.

    The rightmost letter (applied first) is a creator; letters alternate
    leftwards.  Even n starts with an annihilator, odd n with a creator.
    """
    n = int(n)
    if n < 1:
        raise ValueError("signature length must be at least 1")
    return tuple(1 if (n - 1 - j) % 2 == 0 else -1 for j in range(n))


@dataclass(frozen=True)
class OperatorSpan:
    """Frobenius-orthonormal basis of a span of operators on the graded space.

    basis has shape (rank, R, R) where R is the total quotient dimension;
    rank_history[k] is the accumulated rank after words of length <= k+1,
    and stabilized records whether the final length increment changed it.
    """

    basis: np.ndarray
    which: str = "custom"
    horizon: int = 0
    stabilized: bool = True
    rank_history: tuple = ()

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=complex)
        if basis.ndim != 3 or basis.shape[1] != basis.shape[2]:
            raise ValueError("basis must be a stack of square matrices")
        object.__setattr__(self, "basis", basis)
        if basis.shape[0]:
            vecs = basis.reshape(basis.shape[0], -1)
            gram = vecs @ vecs.conj().T
            if np.max(np.abs(gram - np.eye(basis.shape[0]))) > 1e-12:
                raise ValueError("basis is not Frobenius-orthonormal")

    @property
    def rank(self):
        return int(self.basis.shape[0])

    @property
    def matrix_dim(self):
        return int(self.basis.shape[1])

    def contains(self, mat, reference=None):
        """Relative Frobenius distance of mat from the span (0 = member).

        With ``reference`` set, the residual is measured against
        max(reference, |mat|) instead of |mat| alone, so that products of
        unit-norm operators that vanish numerically count as members.
        """
        v = np.asarray(mat, dtype=complex).reshape(-1)
        if v.shape != (self.matrix_dim**2,):
            raise ValueError("matrix size does not match the span")
        scale = np.linalg.norm(v)
        if reference is not None:
            scale = max(scale, float(reference))
        if scale == 0.0:
            return 0.0
        if self.rank == 0:
            return float(np.linalg.norm(v) / scale)
        vecs = self.basis.reshape(self.rank, -1)
        resid = v - vecs.T @ (vecs.conj() @ v)
        return float(np.linalg.norm(resid) / scale)

    def contains_span(self, other):
        """Worst membership residual of other's basis in this span."""
        if other.matrix_dim != self.matrix_dim:
            raise ValueError("spans live on different spaces")
        if other.rank == 0:
            return 0.0
        return max(self.contains(mat) for mat in other.basis)


class _SpanAccumulator:
    """Incremental Frobenius-orthonormal basis with a relative rank cutoff."""

    def __init__(self, tol=SPAN_TOL):
        self.tol = float(tol)
        self.vecs = []

    @property
    def rank(self):
        return len(self.vecs)

    def add(self, mat):
        v = np.asarray(mat, dtype=complex).reshape(-1)
        scale = np.linalg.norm(v)
        if scale == 0.0:
            return False
        for _ in range(2):  # re-orthogonalize for numerical safety
            for q in self.vecs:
                v = v - (q.conj() @ v) * q
        resid = np.linalg.norm(v)
        if resid <= self.tol * scale:
            return False
        self.vecs.append(v / resid)
        return True

    def matrices(self, side):
        if not self.vecs:
            return np.zeros((0, side, side), dtype=complex)
        return np.array(self.vecs).reshape(len(self.vecs), side, side)


def _level_offsets(ranks):
    offs = [0]
    for r in ranks:
        offs.append(offs[-1] + r)
    return offs


def _block_creators(space):
    """Embed each basis creator as one matrix on the full graded space.

    The block from the top level has nowhere to go and is zero: creators
    annihilate the highest grade of the truncation.
    """
    ranks = space.ranks
    offs = _level_offsets(ranks)
    R = space.total_dim
    d = space.space.d
    out = []
    for i in range(d):
        big = np.zeros((R, R), dtype=complex)
        for n in range(len(ranks) - 1):
            big[offs[n + 1]:offs[n + 2], offs[n]:offs[n + 1]] = space.creator(n, i)
        out.append(big)
    return out


def _graded_block_basis(ranks, degree):
    """Orthonormal basis of all block matrices raising the grade by degree."""
    offs = _level_offsets(ranks)
    R = offs[-1]
    mats = []
    for n in range(len(ranks)):
        m = n + degree
        if not (0 <= m < len(ranks)):
            continue
        for i in range(ranks[m]):
            for j in range(ranks[n]):
                unit = np.zeros((R, R), dtype=complex)
                unit[offs[m] + i, offs[n] + j] = 1.0
                mats.append(unit)
    if not mats:
        return np.zeros((0, R, R), dtype=complex)
    return np.array(mats)


def _admissible_signatures(which, n):
    if which in ("mod_alt", "alg_alt"):
        want_odd = which == "mod_alt"
        if n % 2 == (0 if want_odd else 1):
            return []
        if which == "alg_alt" and n < 2:
            return []
        return [alternating_signature(n)]
    total = 1 if which.startswith("mod") else 0
    return signatures(n, total, nc=which.endswith("_nc"))


def span_build(space, which, horizon=None):
    """Span of all word operators of an admissible discipline up to a horizon.

    Letters run over the basis creators a*(e_i) and their adjoints; by
    linearity the span equals the one over arbitrary one-particle vectors.
    Default horizon is 2N+2 for truncation level N, which is enough for
    every span here to stabilize; a too-small horizon is reported through
    ``stabilized=False`` rather than an error.
    """
    if which not in SPAN_KINDS:
        raise ValueError(f"unknown span kind {which!r}; expected one of {SPAN_KINDS}")
    W = 2 * space.space.N + 2 if horizon is None else int(horizon)
    if W < 1:
        raise ValueError("horizon must be at least 1")
    ranks = space.ranks
    R = space.total_dim
    if which in ("mod_all", "alg_all"):
        basis = _graded_block_basis(ranks, 1 if which == "mod_all" else 0)
        return OperatorSpan(
            basis=basis,
            which=which,
            horizon=W,
            stabilized=True,
            rank_history=(basis.shape[0],),
        )

    ups = _block_creators(space)
    downs = [a.conj().T for a in ups]
    cache = {(): np.eye(R, dtype=complex)[None, :, :]}
    offs = _level_offsets(ranks)
    masks = {}

    def shift_mask(shift):
        # a word whose signature sums to `shift` is supported exactly on
        # the blocks (n + shift, n); masking to that support keeps the
        # rounding noise of earlier orthonormalizations from leaking into
        # other degrees, and makes fully annihilated words exactly zero
        if shift not in masks:
            m = np.zeros((R, R))
            for n in range(len(ranks)):
                t = n + shift
                if 0 <= t < len(ranks):
                    m[offs[t]:offs[t + 1], offs[n]:offs[n + 1]] = 1.0
            masks[shift] = m
        return masks[shift]

    def suffix_span(sig):
        # Span of all letter choices for the word with this signature,
        # shared across signatures through common right-hand tails.
        if sig in cache:
            return cache[sig]
        tail = suffix_span(sig[1:])
        if tail.shape[0] == 0:
            cache[sig] = tail
            return tail
        letters = ups if sig[0] > 0 else downs
        cands = np.concatenate([np.einsum("ab,rbc->rac", a, tail) for a in letters])
        cands = cands * shift_mask(sum(sig))
        # the masked candidates live entirely on one shift diagonal, so the
        # SVD only needs those columns (a large saving when R is sizable)
        support = shift_mask(sum(sig)).reshape(-1) > 0.5
        vecs = cands.reshape(cands.shape[0], R * R)[:, support]
        _, svals, vt = np.linalg.svd(vecs, full_matrices=False)
        keep = svals > SPAN_TOL * (svals[0] if svals.size else 0.0)
        onb_flat = np.zeros((int(keep.sum()), R * R), dtype=complex)
        onb_flat[:, support] = vt[keep]
        onb = onb_flat.reshape(-1, R, R)
        cache[sig] = onb
        return onb

    # the span sits inside the block space of its degree; once it fills
    # that space no longer word can add anything, so stop generating
    total_degree = 1 if which.startswith("mod") else 0
    ambient = int(shift_mask(total_degree).sum())
    acc = _SpanAccumulator()
    history = []
    for n in range(1, W + 1):
        for sig in _admissible_signatures(which, n):
            for mat in suffix_span(sig):
                acc.add(mat)
        history.append(acc.rank)
        if acc.rank == ambient and n < W:
            history.extend([ambient] * (W - n))
            break
    stabilized = len(history) >= 2 and history[-1] == history[-2]
    return OperatorSpan(
        basis=acc.matrices(R),
        which=which,
        horizon=W,
        stabilized=stabilized,
        rank_history=tuple(history),
    )


def check_ternary(span):
    """Worst distance of x y* z from the span, over basis triples (x, y, z).

    A value at rounding level certifies closure under the ternary product;
    a large value exhibits a witness triple.
    """
    worst = 0.0
    for x in span.basis:
        for y in span.basis:
            xy = x @ y.conj().T
            for z in span.basis:
                worst = max(worst, span.contains(xy @ z, reference=1.0))
    return worst


def check_left_action(acting, module):
    """Invariance and nondegeneracy of ``acting @ module`` products.

    Returns a dict with the worst membership residual of a product in the
    module span (``invariant``), the rank of the product span
    (``action_rank``), and whether that rank exhausts the module
    (``nondegenerate``).
    """
    if acting.matrix_dim != module.matrix_dim:
        raise ValueError("spans live on different spaces")
    R = module.matrix_dim
    mod_flat = module.basis.reshape(module.rank, R * R)
    chunks = []
    worst = 0.0
    for c in acting.basis:
        prods = (c @ module.basis).reshape(module.rank, R * R)
        norms = np.linalg.norm(prods, axis=1)
        resid = prods - (prods @ mod_flat.conj().T) @ mod_flat
        dists = np.linalg.norm(resid, axis=1) / np.maximum(norms, 1.0)
        if dists.size:
            worst = max(worst, float(dists.max()))
        chunks.append(prods)
    stacked = np.concatenate(chunks) if chunks else np.zeros((0, R * R))
    svals = np.linalg.svd(stacked, compute_uv=False)
    action_rank = int((svals > SPAN_TOL * svals[0]).sum()) if svals.size and svals[0] > 0 else 0
    return {
        "invariant": worst,
        "action_rank": action_rank,
        "nondegenerate": action_rank == module.rank,
    }
