"""Spreading codes, fast transform, and chip-mapping placement tests."""

import numpy as np
import pytest
from scipy.linalg import hadamard

from mccdma import spreading
from mccdma.spreading import ChipMapping, generate_walsh_hadamard


class TestWalshHadamard:
    def test_base_case(self):
        codes = generate_walsh_hadamard(2, 2)
        expected = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        np.testing.assert_allclose(codes.entries, expected)

    @pytest.mark.parametrize("lc", [4, 16, 32, 1024])
    def test_columns_orthonormal(self, lc):
        codes = generate_walsh_hadamard(lc, lc)
        gram = codes.entries.T @ codes.entries
        np.testing.assert_allclose(gram, np.eye(lc), atol=1e-12)

    @pytest.mark.parametrize("lc", [16, 32])
    def test_matches_reference_hadamard(self, lc):
        # independent construction via scipy
        codes = generate_walsh_hadamard(lc, lc)
        np.testing.assert_allclose(codes.entries, hadamard(lc) / np.sqrt(lc), atol=0)

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            generate_walsh_hadamard(3, 1)
        with pytest.raises(ValueError):
            generate_walsh_hadamard(16, 17)
        with pytest.raises(ValueError):
            generate_walsh_hadamard(2048, 1)


class TestSpreadDespread:
    def test_single_user_is_code_column(self):
        codes = generate_walsh_hadamard(16, 16)
        symbols = np.zeros(16, dtype=complex)
        symbols[5] = 2.0 - 1.0j
        np.testing.assert_allclose(
            spreading.spread(symbols, codes), (2.0 - 1.0j) * codes.column(5), atol=1e-14
        )

    def test_zero_in_zero_out(self):
        codes = generate_walsh_hadamard(32, 32)
        np.testing.assert_array_equal(
            spreading.spread(np.zeros(32, dtype=complex), codes), np.zeros(32)
        )

    @pytest.mark.parametrize("lc,nu", [(16, 16), (32, 32), (32, 7)])
    def test_fast_transform_matches_naive_multiply(self, lc, nu):
        # oracle: direct matrix-vector product with the scipy-built matrix
        rng = np.random.default_rng(42)
        codes = generate_walsh_hadamard(lc, nu)
        reference = hadamard(lc)[:, :nu] / np.sqrt(lc)
        worst = 0.0
        for _ in range(1000):
            x = (rng.standard_normal(nu) + 1j * rng.standard_normal(nu)) / np.sqrt(2)
            worst = max(worst, np.abs(spreading.spread(x, codes) - reference @ x).max())
        assert worst < 1e-12

    def test_despread_recovers_own_symbol(self):
        codes = generate_walsh_hadamard(16, 16)
        s = 0.7 + 0.2j
        chips = s * codes.column(3)
        assert abs(spreading.despread(chips, codes.column(3)) - s) < 1e-12

    def test_despread_rejects_other_codes(self):
        codes = generate_walsh_hadamard(16, 16)
        chips = (1.0 + 1.0j) * codes.column(2)
        assert abs(spreading.despread(chips, codes.column(9))) < 1e-12

    def test_despread_matches_dot_product(self):
        rng = np.random.default_rng(3)
        codes = generate_walsh_hadamard(32, 32)
        chips = rng.standard_normal(32) + 1j * rng.standard_normal(32)
        for j in (0, 13, 31):
            expected = np.dot(codes.column(j), chips)
            assert abs(spreading.despread(chips, codes.column(j)) - expected) < 1e-12

    @pytest.mark.parametrize("lc", [16, 32])
    def test_full_load_round_trip(self, lc):
        rng = np.random.default_rng(11)
        codes = generate_walsh_hadamard(lc, lc)
        symbols = rng.choice([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j], size=lc) / np.sqrt(2)
        chips = spreading.spread(symbols, codes)
        recovered = spreading.despread_all(chips, codes)
        np.testing.assert_allclose(recovered, symbols, atol=1e-12)

    def test_length_mismatch_errors(self):
        codes = generate_walsh_hadamard(16, 8)
        with pytest.raises(ValueError):
            spreading.spread(np.zeros(16), codes)
        with pytest.raises(ValueError):
            spreading.despread(np.zeros(8), codes.column(0))


def _placement_oracle(mapping):
    """Independent per-chip placement table built from the scheme definitions."""
    table = {}
    nc, lc, sf, st = mapping.n_subcarriers, mapping.lc, mapping.sf, mapping.st
    if st == 1:
        per_slot = nc // lc
        for b in range(mapping.num_blocks):
            slot, within = divmod(b, per_slot)
            for k in range(lc):
                sub = within * lc + k if mapping.scheme == "1Da" else k * (nc // lc) + within
                table[(b, k)] = (sub, slot)
    else:
        cols = nc // sf
        for b in range(mapping.num_blocks):
            group, col = divmod(b, cols)
            for k in range(lc):
                row, j = divmod(k, st)
                tcol = j if row % 2 == 0 else st - 1 - j
                sub = col * sf + row if mapping.scheme == "2Da" else row * (nc // sf) + col
                table[(b, k)] = (sub, group * st + tcol)
    return table


class TestChipMapping:
    def test_1da_adjacent(self):
        mapping = ChipMapping("1Da", 4, 8, 2)
        chips = np.zeros((4, mapping.num_blocks), dtype=complex)
        chips[:, 0] = [1, 2, 3, 4]
        grid = mapping.map_chips(chips)
        # block 0 chips land on subcarriers 0..3 of slot 0, in order
        np.testing.assert_array_equal(grid[0, :4], [1, 2, 3, 4])
        assert not grid[1].any()

    def test_1db_stride(self):
        mapping = ChipMapping("1Db", 4, 8, 2)
        chips = np.zeros((4, mapping.num_blocks), dtype=complex)
        chips[:, 0] = [1, 2, 3, 4]
        grid = mapping.map_chips(chips)
        np.testing.assert_array_equal(grid[0, [0, 2, 4, 6]], [1, 2, 3, 4])

    def test_2da_snake_order(self):
        # one block fills all 4 subcarriers x 2 slots snaking along time
        mapping = ChipMapping("2Da", 8, 4, 2, time_spread=2)
        assert mapping.num_blocks == 1
        chips = np.arange(1, 9, dtype=complex)[:, None]
        grid = mapping.map_chips(chips)
        expected = np.zeros((2, 4), dtype=complex)
        order = [(0, 0), (1, 0), (1, 1), (0, 1), (0, 2), (1, 2), (1, 3), (0, 3)]
        for value, (slot, sub) in enumerate(order, start=1):
            expected[slot, sub] = value
        np.testing.assert_array_equal(grid, expected)

    @pytest.mark.parametrize("scheme", ["1Da", "1Db", "2Da", "2Db"])
    def test_bijection_onto_used_cells(self, scheme):
        mapping = ChipMapping(scheme, 16, 64, 6, time_spread=2)
        flat = mapping.cell_index.ravel()
        assert len(set(flat.tolist())) == flat.size

    @pytest.mark.parametrize("scheme", ["1Da", "1Db", "2Da", "2Db"])
    def test_round_trip_random_blocks(self, scheme):
        rng = np.random.default_rng(5)
        mapping = ChipMapping(scheme, 16, 64, 6, time_spread=4)
        blocks = rng.standard_normal((16, mapping.num_blocks)) * (1 + 1j)
        np.testing.assert_array_equal(mapping.demap_chips(mapping.map_chips(blocks)), blocks)

    def test_single_chip_position(self):
        mapping = ChipMapping("2Db", 8, 16, 4, time_spread=2)
        blocks = np.zeros((8, mapping.num_blocks), dtype=complex)
        blocks[5, 2] = 1.0
        recovered = mapping.demap_chips(mapping.map_chips(blocks))
        np.testing.assert_array_equal(recovered, blocks)

    @pytest.mark.parametrize("scheme", ["1Da", "1Db", "2Da", "2Db"])
    def test_full_frame_against_placement_oracle(self, scheme):
        mapping = ChipMapping(scheme, 8, 32, 6, time_spread=2)
        oracle = _placement_oracle(mapping)
        for (b, k), (sub, slot) in oracle.items():
            assert mapping.cell_index[b, k] == slot * mapping.n_subcarriers + sub

    def test_interleaved_divisibility_error(self):
        with pytest.raises(ValueError):
            ChipMapping("1Db", 16, 40, 4)
        with pytest.raises(ValueError):
            ChipMapping("2Db", 16, 36, 4, time_spread=2)

    def test_spread_exceeding_grid_rejected(self):
        with pytest.raises(ValueError):
            ChipMapping("1Da", 64, 32, 4)  # frequency spread wider than the band
        with pytest.raises(ValueError):
            ChipMapping("2Da", 16, 32, 3, time_spread=4)  # deeper than the frame
        with pytest.raises(ValueError):
            ChipMapping("2Da", 16, 32, 8, time_spread=3)  # St must divide Lc

    def test_fwht_length_must_be_power_of_two(self):
        with pytest.raises(ValueError):
            spreading.fwht(np.zeros(12))

    def test_shape_validation(self):
        mapping = ChipMapping("1Da", 8, 32, 4)
        with pytest.raises(ValueError):
            mapping.map_chips(np.zeros((8, mapping.num_blocks + 1)))
        with pytest.raises(ValueError):
            mapping.demap_chips(np.zeros((5, 32)))
