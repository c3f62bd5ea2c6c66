"""Random-projection reduction of codewords to the working bit length.

When the codebook order exceeds the requested code length r, each
codeword is mapped through a fixed random Gaussian matrix and re-signed:

    target = sign(P.T @ codeword),   P[i, j] ~ N(0, 1) i.i.d.

Sign-of-Gaussian-projection is the classic angle-preserving LSH family:
two inputs at angle theta agree per output bit with probability
1 - theta/pi, so orthogonal codewords land at expected normalized
Hamming distance 0.5 while equal codewords collide exactly.  When the
dimensions already match the reducer is the identity and codewords pass
through untouched.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .hadamard import HadamardCodebook


def sign_pm1(values: np.ndarray) -> np.ndarray:
    """Elementwise sign into {-1,+1} with sign(0) = +1."""
    return np.where(np.asarray(values) >= 0, 1, -1).astype(np.int8)


@dataclass
class LshReducer:
    """Fixed seeded Gaussian projection from in_dim to out_dim signs.

    ``projection`` is None when in_dim == out_dim; the reducer is then
    exactly the identity.  The matrix is regenerable from (in_dim,
    out_dim, seed), which is all that checkpoints persist.
    """

    in_dim: int
    out_dim: int
    seed: int
    projection: np.ndarray = None

    @classmethod
    def create(cls, in_dim: int, out_dim: int, seed: int) -> "LshReducer":
        if in_dim < 1 or out_dim < 1:
            raise DimensionError(
                f"reducer dims must be positive, got {in_dim}x{out_dim}")
        projection = None
        if in_dim != out_dim:
            rng = np.random.default_rng(seed)
            projection = rng.standard_normal((in_dim, out_dim))
        return cls(in_dim=in_dim, out_dim=out_dim, seed=seed, projection=projection)

    @property
    def is_identity(self) -> bool:
        return self.projection is None

    def reduce(self, codeword: np.ndarray) -> np.ndarray:
        """Map a length-in_dim sign vector to a length-out_dim sign vector."""
        codeword = np.asarray(codeword)
        if codeword.shape != (self.in_dim,):
            raise DimensionError(
                f"codeword has shape {codeword.shape}, expected ({self.in_dim},)")
        if self.projection is None:
            return codeword.astype(np.int8)
        return sign_pm1(self.projection.T @ codeword.astype(np.float64))


@dataclass
class TargetCodeTable:
    """Per-label cache of reduced target codes.

    A label's code is computed once, on first request, and never changes
    afterwards; training touches only this table, so the per-instance
    cost of target lookup is O(1) after the first occurrence.
    """

    out_dim: int
    codes: dict = field(default_factory=dict)

    def target_for(self, label: int, book: HadamardCodebook,
                   reducer: LshReducer) -> np.ndarray:
        label = int(label)
        cached = self.codes.get(label)
        if cached is not None:
            return cached
        book.assign_label(label)
        code = reducer.reduce(book.codeword(label))
        if code.shape != (self.out_dim,):
            raise DimensionError(
                f"reducer emitted {code.shape}, table expects ({self.out_dim},)")
        code.setflags(write=False)
        self.codes[label] = code
        return code

    def __len__(self) -> int:
        return len(self.codes)
