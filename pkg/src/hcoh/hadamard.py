"""Power-of-two Hadamard matrices and streaming codeword assignment.

A Hadamard matrix of order n is a square {-1,+1} matrix C with pairwise
orthogonal rows and columns, i.e. C @ C.T == n * I exactly in integer
arithmetic.  Columns of such a matrix make good per-class target codes:
any two distinct classes sit at the maximal possible Hamming separation
(n/2 differing positions).

We build orders 2**k by Sylvester's recursion

    H_1 = [1],   H_2m = [[H_m,  H_m],
                         [H_m, -H_m]]

which is equivalent to entry(i, j) = (-1)**popcount(i & j) with 0-based
indices.  Beware the superficially similar closed form
(-1)**((i-1)*(j-1)) with ordinary multiplication: it is wrong for
order >= 4 (rows 1 and 3 come out identical), so it is not used here.

The codebook hands columns out to class labels as they first appear in a
stream: each new label draws a uniformly random unused column from a
seeded generator, so runs are reproducible and no label count has to be
fixed up front beyond the matrix order itself.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import CodebookExhaustedError, InvalidOrderError, UnknownLabelError

# Hard cap on the dense matrix order; an order-2**20 matrix of int8 would
# need ~1 TB.  Callers with smaller memory budgets can pass a lower cap.
MAX_ORDER = 2**20


def codeword_order(r: int, known_labels: int = 0) -> int:
    """Smallest power of two >= max(r, known_labels, 2).

    This is the order of the square codebook matrix needed to give every
    one of ``known_labels`` classes its own column of at least ``r``
    entries.  ``known_labels`` may be a lower bound; streams that exceed
    the chosen order raise :class:`CodebookExhaustedError` at assignment
    time rather than silently rebuilding.
    """
    if r < 1:
        raise InvalidOrderError(f"code length must be >= 1, got {r}")
    order = 2
    target = max(r, known_labels)
    while order < target:
        order *= 2
    return order


def build_hadamard(order: int, max_order: int = MAX_ORDER) -> np.ndarray:
    """Sylvester-construction Hadamard matrix of the given power-of-two order.

    Returns an (order, order) int8 array with entries in {-1,+1} satisfying
    H @ H.T == order * I exactly.
    """
    if order < 1 or order & (order - 1) != 0:
        raise InvalidOrderError(f"order must be a power of two, got {order}")
    if order > max_order:
        raise InvalidOrderError(f"order {order} exceeds the cap {max_order}")
    h = np.array([[1]], dtype=np.int8)
    while h.shape[0] < order:
        h = np.block([[h, h], [h, -h]])
    return h


@dataclass
class HadamardCodebook:
    """An order x order sign matrix plus a dynamic label -> column map.

    New labels draw columns without replacement from a permutation fixed
    by ``seed`` (Fisher-Yates via the PCG64 generator), so the same seed
    and the same label-arrival sequence always reproduce the same
    assignment.  Assignment is injective; columns are never reused.
    """

    order: int
    seed: int
    matrix: np.ndarray
    assignment: dict = field(default_factory=dict)
    _draw: np.ndarray = None
    _used: set = field(default_factory=set)
    _cursor: int = 0

    @classmethod
    def create(cls, order: int, seed: int, max_order: int = MAX_ORDER) -> "HadamardCodebook":
        matrix = build_hadamard(order, max_order=max_order)
        draw = np.random.default_rng(seed).permutation(order)
        return cls(order=order, seed=seed, matrix=matrix, _draw=draw)

    @classmethod
    def restore(cls, order: int, seed: int, assignment: dict,
                max_order: int = MAX_ORDER) -> "HadamardCodebook":
        """Rebuild a codebook persisted as (order, seed, assignment pairs).

        The matrix and the draw order are recomputed from their seeds; the
        recorded assignment is replayed so future draws skip used columns.
        """
        book = cls.create(order, seed, max_order=max_order)
        for label, column in assignment.items():
            if not 0 <= column < order:
                raise InvalidOrderError(
                    f"assigned column {column} out of range for order {order}")
            if column in book._used:
                raise InvalidOrderError(f"column {column} assigned twice")
            book.assignment[int(label)] = int(column)
            book._used.add(int(column))
        return book

    @property
    def free_columns(self) -> set:
        return set(range(self.order)) - self._used

    def assign_label(self, label: int) -> int:
        """Column index for ``label``, drawing a fresh column on first sight.

        Idempotent per label.  Raises CodebookExhaustedError when a new
        label arrives after all columns have been handed out.
        """
        label = int(label)
        if label in self.assignment:
            return self.assignment[label]
        while self._cursor < self.order and int(self._draw[self._cursor]) in self._used:
            self._cursor += 1
        if self._cursor >= self.order:
            raise CodebookExhaustedError(
                f"all {self.order} codewords assigned; cannot admit label {label}. "
                f"Rebuild with a larger declared label bound (see --max-labels).")
        column = int(self._draw[self._cursor])
        self._cursor += 1
        self.assignment[label] = column
        self._used.add(column)
        return column

    def codeword(self, label: int) -> np.ndarray:
        """The {-1,+1} column assigned to ``label`` (length ``order``)."""
        label = int(label)
        if label not in self.assignment:
            raise UnknownLabelError(f"label {label} has no assigned codeword")
        return self.matrix[:, self.assignment[label]].copy()
