"""Dense tensor-level arithmetic for truncated Fock spaces.

Levels are numbered 0..N; level n is the n-fold tensor power of C^d and has
dimension d**n, level 0 is one-dimensional and spanned by the vacuum.  A
multi-index (i1,...,in) over {0,...,d-1} is flattened big-endian (leftmost
factor most significant), so tensoring a new one-particle factor onto the
left is ``kron(x, eye)`` on flat coordinates and tensoring onto the right is
``kron(eye, x)``.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DEFAULT_LEVEL_CAP",
    "TruncatedFockSpace",
    "GradedVector",
    "GradedOperator",
    "encode_index",
    "decode_index",
    "inversions",
    "permutation_operator",
    "left_creator",
    "left_annihilator",
]

DEFAULT_LEVEL_CAP = 200_000


def _level_cap_from_env() -> int:
    return int(os.environ.get("FOCKBENCH_LEVEL_CAP", DEFAULT_LEVEL_CAP))


@dataclass(frozen=True)
class TruncatedFockSpace:
    """Shape data of a truncated full Fock space over C^d with levels 0..N.

    Parameters
    ----------
    d : int
        One-particle dimension (positive).
    N : int
        Level cutoff (positive); levels 0..N are kept.
    level_cap : int, optional
        Refuse construction when any level dimension d**n exceeds this cap.
        Defaults to the FOCKBENCH_LEVEL_CAP environment variable or 200000.
    """

    d: int
    N: int
    level_cap: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"one-particle dimension must be positive, got {self.d}")
        if self.N < 1:
            raise ValueError(f"level cutoff must be positive, got {self.N}")
        cap = self.level_cap if self.level_cap else _level_cap_from_env()
        object.__setattr__(self, "level_cap", cap)
        if self.d ** self.N > cap:
            raise ValueError(
                f"top level dimension {self.d}**{self.N} exceeds level cap {cap}"
            )

    def dim(self, n: int) -> int:
        """Dimension d**n of level n."""
        if not 0 <= n <= self.N:
            raise ValueError(f"level {n} outside 0..{self.N}")
        return self.d ** n

    @property
    def dims(self) -> tuple:
        return tuple(self.d ** n for n in range(self.N + 1))

    def levels(self) -> range:
        return range(self.N + 1)


def encode_index(multi_index, d: int) -> int:
    """Flatten a multi-index big-endian: (i1,...,in) -> sum i_k d**(n-k).

    The empty tuple encodes the vacuum (flat index 0 at level 0).
    """
    flat = 0
    for i in multi_index:
        i = int(i)
        if not 0 <= i < d:
            raise ValueError(f"index entry {i} outside 0..{d - 1}")
        flat = flat * d + i
    return flat


def decode_index(flat: int, n: int, d: int) -> tuple:
    """Inverse of :func:`encode_index` at level n."""
    flat = int(flat)
    if not 0 <= flat < d ** n:
        raise ValueError(f"flat index {flat} outside level of dimension {d}**{n}")
    out = []
    for _ in range(n):
        flat, r = divmod(flat, d)
        out.append(r)
    return tuple(reversed(out))


class GradedVector:
    """Element of the truncated Fock space: one dense complex vector per level."""

    def __init__(self, space: TruncatedFockSpace, levels=None):
        self.space = space
        if levels is None:
            self.levels = [np.zeros(space.dim(n), dtype=complex) for n in space.levels()]
        else:
            if len(levels) != space.N + 1:
                raise ValueError("need one component per level 0..N")
            self.levels = []
            for n, x in enumerate(levels):
                x = np.asarray(x, dtype=complex).reshape(-1)
                if x.shape != (space.dim(n),):
                    raise ValueError(f"level {n} component has length {x.size}, want {space.dim(n)}")
                self.levels.append(x)

    @classmethod
    def vacuum(cls, space: TruncatedFockSpace) -> "GradedVector":
        v = cls(space)
        v.levels[0][0] = 1.0
        return v

    def norm(self) -> float:
        return float(np.sqrt(sum(float(np.vdot(x, x).real) for x in self.levels)))

    def inner(self, other: "GradedVector") -> complex:
        """Inner product, antilinear in self (physics convention)."""
        return complex(sum(np.vdot(x, y) for x, y in zip(self.levels, other.levels)))

    def copy(self) -> "GradedVector":
        return GradedVector(self.space, [x.copy() for x in self.levels])


class GradedOperator:
    """Degree-g family of matrices T_n mapping level n to level n+g.

    ``blocks`` maps each source level n (with both n and n+g inside 0..N) to a
    dense matrix of shape d**(n+g) x d**n.  Application respects grading:
    (T x)_{n+g} = T_n x_n.
    """

    def __init__(self, space: TruncatedFockSpace, degree: int, blocks: dict):
        self.space = space
        self.degree = int(degree)
        self.blocks = {}
        for n, T in blocks.items():
            if not (0 <= n <= space.N and 0 <= n + self.degree <= space.N):
                raise ValueError(f"block at level {n} falls outside the truncation")
            T = np.asarray(T, dtype=complex)
            want = (space.dim(n + self.degree), space.dim(n))
            if T.shape != want:
                raise ValueError(f"block at level {n} has shape {T.shape}, want {want}")
            self.blocks[n] = T

    def matrix(self, n: int) -> np.ndarray:
        return self.blocks[n]

    def apply(self, vec: GradedVector) -> GradedVector:
        out = GradedVector(vec.space)
        for n, T in self.blocks.items():
            out.levels[n + self.degree] += T @ vec.levels[n]
        return out

    def adjoint(self) -> "GradedOperator":
        blocks = {n + self.degree: T.conj().T for n, T in self.blocks.items()}
        return GradedOperator(self.space, -self.degree, blocks)


def inversions(sigma) -> int:
    """Number of inverted pairs i<j with sigma[i] > sigma[j] (explicit count)."""
    sigma = tuple(sigma)
    return sum(1 for a, b in itertools.combinations(sigma, 2) if a > b)


def _check_permutation(sigma) -> tuple:
    sigma = tuple(int(s) for s in sigma)
    if sorted(sigma) != list(range(len(sigma))):
        raise ValueError(f"{sigma} is not a permutation of 0..{len(sigma) - 1}")
    return sigma


def position_map(sigma) -> list:
    """Tuple-position reading of the factor substitution x_j -> x_{sigma(j)}.

    Factors of a level-n simple tensor carry labels n..1 from left to right
    (label 1 is rightmost); sigma acts on 0-based labels.  Entry k of the
    returned list is the source tuple position that lands in position k.
    """
    sigma = _check_permutation(sigma)
    n = len(sigma)
    return [n - 1 - sigma[n - 1 - k] for k in range(n)]


def permutation_operator(sigma, space: TruncatedFockSpace):
    """Matrix of the factor substitution at level n = len(sigma), plus inv(sigma).

    Sends e_{i1} x ... x e_{in} (labels n..1 left to right) to the simple
    tensor whose label-j factor is the old label-sigma(j) factor.  Returns
    the d**n x d**n complex matrix and the inversion count of sigma.
    """
    sigma = _check_permutation(sigma)
    n = len(sigma)
    if n > space.N:
        raise ValueError(f"level {n} exceeds cutoff {space.N}")
    d = space.d
    dim = space.dim(n)
    P = np.zeros((dim, dim), dtype=complex)
    if n == 0:
        P[0, 0] = 1.0
        return P, 0
    pos = position_map(sigma)
    tuples = np.array(list(itertools.product(range(d), repeat=n)), dtype=np.int64)
    powers = d ** np.arange(n - 1, -1, -1, dtype=np.int64)
    out_flat = tuples[:, pos] @ powers
    P[out_flat, np.arange(dim)] = 1.0
    return P, inversions(sigma)


def _one_particle(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=complex).reshape(-1)
    if x.shape != (d,):
        raise ValueError(f"one-particle vector has length {x.size}, want {d}")
    return x


def left_creator(x, space: TruncatedFockSpace) -> GradedOperator:
    """Creation operator of the full Fock space: tensors x onto the left.

    The block at level n is x (x) id in flat coordinates, i.e.
    ``kron(x[:, None], eye(d**n))``; the vacuum is sent to x.
    """
    x = _one_particle(x, space.d)
    col = x.reshape(-1, 1)
    blocks = {n: np.kron(col, np.eye(space.dim(n), dtype=complex)) for n in range(space.N)}
    return GradedOperator(space, +1, blocks)


def left_annihilator(x, space: TruncatedFockSpace) -> GradedOperator:
    """Adjoint of :func:`left_creator`; annihilates the vacuum."""
    return left_creator(x, space).adjoint()
