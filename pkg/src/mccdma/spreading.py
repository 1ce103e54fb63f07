"""Walsh-Hadamard spreading and chip placement on the time-frequency grid.

Spreading codes are the first columns of the normalized Sylvester-Hadamard
matrix, so despreading needs no rescaling. Spreading and despreading of a
full symbol vector run through the fast transform, O(Lc log Lc) regardless
of the number of active users.

Chip mappings place the Lc chips of each spread symbol onto a logical
grid of `n_subcarriers` x `n_slots` cells. A slot is one OFDM symbol in
single-antenna operation and one space-time pair when the transmitter
encodes across two antennas; the 2D schemes therefore never straddle
incompatible space-time positions by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_SCHEMES = ("1Da", "1Db", "2Da", "2Db")


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def fwht(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform in Sylvester order."""
    x = np.array(np.moveaxis(np.asarray(values), axis, 0))
    n = x.shape[0]
    if not _is_pow2(n):
        raise ValueError(f"transform length must be a power of two, got {n}")
    h = 1
    while h < n:
        x = x.reshape(n // (2 * h), 2, h, *x.shape[1:])
        top = x[:, 0] + x[:, 1]
        bottom = x[:, 0] - x[:, 1]
        x = np.concatenate([top[:, None], bottom[:, None]], axis=1).reshape(
            n, *x.shape[3:]
        )
        h *= 2
    return np.moveaxis(x, 0, axis)


@dataclass(frozen=True)
class SpreadingMatrix:
    """First `num_users` columns of the normalized Sylvester-Hadamard matrix."""

    length: int
    num_users: int
    entries: np.ndarray = field(repr=False)

    def column(self, j: int) -> np.ndarray:
        return self.entries[:, j]


def generate_walsh_hadamard(length: int, num_users: int) -> SpreadingMatrix:
    """Build the Lc x Nu spreading matrix with orthonormal columns.

    Raises ValueError when `length` is not a power of two in [2, 1024]
    or when `num_users` exceeds `length`.
    """
    if not _is_pow2(length) or not 2 <= length <= 1024:
        raise ValueError(f"spreading length must be a power of two in [2, 1024], got {length}")
    if not 1 <= num_users <= length:
        raise ValueError(f"num_users must be in [1, {length}], got {num_users}")
    h = np.array([[1.0]])
    base = np.array([[1.0, 1.0], [1.0, -1.0]])
    while h.shape[0] < length:
        h = np.kron(base, h)
    entries = h[:, :num_users] / np.sqrt(length)
    return SpreadingMatrix(length, num_users, entries)


def spread(symbols: np.ndarray, codes: SpreadingMatrix) -> np.ndarray:
    """Compute C.x via the fast transform.

    `symbols` holds one value per active user, optionally stacked as
    (num_users, n) for many symbol vectors at once.
    """
    symbols = np.asarray(symbols)
    if symbols.shape[0] != codes.num_users:
        raise ValueError(
            f"expected {codes.num_users} user symbols, got {symbols.shape[0]}"
        )
    padded = np.zeros((codes.length,) + symbols.shape[1:], dtype=complex)
    padded[: codes.num_users] = symbols
    return fwht(padded, axis=0) / np.sqrt(codes.length)


def despread(chips: np.ndarray, code: np.ndarray) -> complex | np.ndarray:
    """Correlate chips with one user's code column."""
    chips = np.asarray(chips)
    code = np.asarray(code)
    if chips.shape[0] != code.shape[0]:
        raise ValueError(f"length mismatch: {chips.shape[0]} chips vs {code.shape[0]} code entries")
    return np.tensordot(code, chips, axes=(0, 0))


def despread_all(chips: np.ndarray, codes: SpreadingMatrix) -> np.ndarray:
    """Despread every user at once through the fast transform."""
    chips = np.asarray(chips)
    if chips.shape[0] != codes.length:
        raise ValueError(f"expected {codes.length} chips, got {chips.shape[0]}")
    return fwht(chips, axis=0)[: codes.num_users] / np.sqrt(codes.length)


class ChipMapping:
    """Placement of spread-symbol chip blocks on the logical grid.

    Schemes:

    * ``1Da`` -- Lc adjacent subcarriers within one slot.
    * ``1Db`` -- full-band stride interleaving: chip k of block b goes to
      subcarrier ``k * (n_subcarriers / Lc) + b`` of one slot.
    * ``2Da`` -- an Sf x St rectangle of adjacent subcarriers and adjacent
      slots, filled snake-wise along the time axis.
    * ``2Db`` -- the same rectangle with its frequency coordinate stride
      interleaved across the whole band.
    """

    def __init__(self, scheme: str, lc: int, n_subcarriers: int, n_slots: int,
                 time_spread: int = 2):
        if scheme not in _SCHEMES:
            raise ValueError(f"unknown chip mapping scheme {scheme!r}")
        if not _is_pow2(lc):
            raise ValueError(f"spreading length must be a power of two, got {lc}")
        self.scheme = scheme
        self.lc = lc
        self.n_subcarriers = n_subcarriers
        self.n_slots = n_slots
        if scheme.startswith("1"):
            self.st = 1
        else:
            if time_spread <= 1:
                raise ValueError("2D schemes need time_spread > 1")
            if lc % time_spread != 0:
                raise ValueError(f"time_spread {time_spread} does not divide Lc {lc}")
            self.st = time_spread
        self.sf = lc // self.st
        if self.sf > n_subcarriers:
            raise ValueError(f"frequency spread {self.sf} exceeds {n_subcarriers} subcarriers")
        if self.st > n_slots:
            raise ValueError(f"time spread {self.st} exceeds {n_slots} slots")
        if scheme in ("1Db", "2Db") and n_subcarriers % self.sf != 0:
            raise ValueError(
                f"interleaved scheme needs subcarrier count divisible by {self.sf}"
            )
        sub, slot = self._placements()
        self.num_blocks = sub.shape[0]
        # flat cell index per (block, chip) into a (n_slots, n_subcarriers) grid
        self.cell_index = slot * n_subcarriers + sub

    def _placements(self) -> tuple[np.ndarray, np.ndarray]:
        nc, lc = self.n_subcarriers, self.lc
        k = np.arange(lc)
        if self.st == 1:
            per_slot = nc // lc
            b = np.arange(per_slot * self.n_slots)
            slot = np.repeat(b // per_slot, lc).reshape(-1, lc)
            within = (b % per_slot)[:, None]
            if self.scheme == "1Da":
                sub = within * lc + k[None, :]
            else:
                sub = k[None, :] * (nc // lc) + within
            return sub, slot
        sf, st = self.sf, self.st
        cols = nc // sf
        groups = self.n_slots // st
        row = k // st
        j = k % st
        snake = np.where(row % 2 == 0, j, st - 1 - j)
        b = np.arange(cols * groups)
        group = (b // cols)[:, None]
        col = (b % cols)[:, None]
        slot = group * st + snake[None, :]
        if self.scheme == "2Da":
            sub = col * sf + row[None, :]
        else:
            sub = row[None, :] * (nc // sf) + col
        return sub, slot

    def map_chips(self, blocks: np.ndarray) -> np.ndarray:
        """Scatter (lc, num_blocks) chip blocks onto a fresh grid."""
        blocks = np.asarray(blocks)
        if blocks.shape != (self.lc, self.num_blocks):
            raise ValueError(
                f"expected blocks shaped ({self.lc}, {self.num_blocks}), got {blocks.shape}"
            )
        grid = np.zeros(self.n_slots * self.n_subcarriers, dtype=complex)
        grid[self.cell_index] = blocks.T
        return grid.reshape(self.n_slots, self.n_subcarriers)

    def demap_chips(self, grid: np.ndarray) -> np.ndarray:
        """Gather the chip blocks back out of a received grid."""
        grid = np.asarray(grid)
        if grid.shape != (self.n_slots, self.n_subcarriers):
            raise ValueError(
                f"expected grid shaped ({self.n_slots}, {self.n_subcarriers}), got {grid.shape}"
            )
        return grid.reshape(-1)[self.cell_index].T

    def gather_cells(self, per_cell: np.ndarray) -> np.ndarray:
        """Collect any per-cell quantity into (num_blocks, lc) block order."""
        per_cell = np.asarray(per_cell)
        if per_cell.shape != (self.n_slots, self.n_subcarriers):
            raise ValueError("per-cell array does not match the grid dimensions")
        return per_cell.reshape(-1)[self.cell_index]


@dataclass
class ResourceGrid:
    """Per-antenna complex chip grid of one transmitted frame."""

    cells: np.ndarray  # (antennas, subcarriers, symbols)

    @classmethod
    def empty(cls, antennas: int, subcarriers: int, symbols: int) -> "ResourceGrid":
        return cls(np.zeros((antennas, subcarriers, symbols), dtype=complex))

    @property
    def antennas(self) -> int:
        return self.cells.shape[0]

    @property
    def subcarriers(self) -> int:
        return self.cells.shape[1]

    @property
    def symbols(self) -> int:
        return self.cells.shape[2]
