"""Tests de la grille, des rectangles et des amas"""

from collections import deque

import numpy as np
import pytest

from src.errors import GridBoundsError, ParameterError
from src.lattice import (
    CellState, Grid, Rect, get_state, occupied_clusters, pack_bits, rect_count, set_state,
    summed_area, unpack_bits, window_sums
)


def bfs_clusters(mask: np.ndarray):
    """Oracle: composantes 4-connexes par parcours en largeur, (taille, diamètre)"""
    height, width = mask.shape
    seen = np.zeros_like(mask)
    found = []
    for y in range(height):
        for x in range(width):
            if not mask[y, x] or seen[y, x]:
                continue
            seen[y, x] = True
            queue = deque([(x, y)])
            xs, ys = [], []
            while queue:
                cx, cy = queue.popleft()
                xs.append(cx)
                ys.append(cy)
                for nx, ny in ((cx + 1, cy), (cx - 1, cy), (cx, cy + 1), (cx, cy - 1)):
                    if 0 <= nx < width and 0 <= ny < height and mask[ny, nx] and not seen[ny, nx]:
                        seen[ny, nx] = True
                        queue.append((nx, ny))
            found.append((len(xs), max(max(xs) - min(xs), max(ys) - min(ys))))
    return found


class TestCellAccess:
    def test_single_occupied_cell(self):
        g = Grid.from_masks(np.array([[True]]))
        assert get_state(g, (0, 0)) is CellState.OCCUPIED

    def test_single_closed_cell(self):
        g = Grid.from_masks(np.array([[False]]), np.array([[True]]))
        assert get_state(g, (0, 0)) is CellState.CLOSED

    def test_default_state_is_open(self):
        assert get_state(Grid(2, 2), (1, 1)) is CellState.OPEN

    def test_occupied_replaces_closed(self):
        g = set_state(Grid(3, 3), (1, 2), CellState.CLOSED)
        g = set_state(g, (1, 2), CellState.OCCUPIED)
        assert g.get_state((1, 2)) is CellState.OCCUPIED
        assert not g.closed_mask()[2, 1]

    def test_set_open_on_occupied(self):
        g = set_state(Grid(2, 2), (0, 0), CellState.OCCUPIED)
        assert set_state(g, (0, 0), CellState.OPEN).get_state((0, 0)) is CellState.OPEN

    def test_set_state_returns_copy(self):
        g = Grid(2, 2)
        set_state(g, (0, 0), CellState.OCCUPIED)
        assert g.occupied_count == 0

    @pytest.mark.parametrize('cell', [(-1, 0), (0, -1), (2, 0), (0, 2)])
    def test_out_of_bounds(self, cell):
        g = Grid(2, 2)
        with pytest.raises(GridBoundsError):
            set_state(g, cell, CellState.OCCUPIED)
        with pytest.raises(GridBoundsError):
            get_state(g, cell)

    def test_bounds_error_is_index_error(self):
        with pytest.raises(IndexError):
            Grid(1, 1).get_state((5, 5))

    def test_cells_beyond_first_word(self):
        g = set_state(Grid(130, 2), (129, 1), CellState.CLOSED)
        assert g.get_state((129, 1)) is CellState.CLOSED
        assert g.closed_count == 1


class TestGridInvariants:
    def test_dimensions_must_be_positive(self):
        with pytest.raises(ParameterError):
            Grid(0, 3)

    def test_overlapping_planes_rejected(self):
        mask = np.array([[True, False]])
        with pytest.raises(ParameterError):
            Grid.from_masks(mask, mask)

    def test_disjoint_after_random_edits(self, rng):
        g = Grid(70, 9)
        states = list(CellState)
        for _ in range(500):
            cell = (int(rng.integers(70)), int(rng.integers(9)))
            g = set_state(g, cell, states[int(rng.integers(3))])
            assert not np.any(g.occupied & g.closed)

    def test_with_states_bulk(self):
        selection = np.zeros((4, 5), dtype=bool)
        selection[1:3, 2:4] = True
        g = Grid(5, 4).with_states(selection, CellState.CLOSED)
        assert g.closed_count == 4
        g = g.with_states(selection, CellState.OCCUPIED)
        assert g.closed_count == 0 and g.occupied_count == 4

    def test_masks_partition_cells(self, rng):
        g = Grid.from_state_array(rng.integers(0, 3, size=(6, 75)).astype(np.uint8))
        total = g.open_mask().astype(int) + g.occupied_mask() + g.closed_mask()
        assert (total == 1).all()
        assert Grid.from_text("#x.").open_mask().tolist() == [[False, False, True]]

    def test_padding_bits_stay_zero(self):
        packed = pack_bits(np.ones((2, 70), dtype=bool))
        assert packed.shape == (2, 2)
        assert int(packed[0, 1]) == (1 << 6) - 1
        assert unpack_bits(packed, 70).all()


class TestTextFormat:
    def test_top_row_is_highest_y(self):
        g = Grid.from_text("#.\n.x\n")
        assert g.get_state((0, 1)) is CellState.OCCUPIED
        assert g.get_state((1, 0)) is CellState.CLOSED
        assert g.get_state((0, 0)) is CellState.OPEN

    def test_round_trip_is_exact(self):
        text = "..#x\n#...\nxx.#\n"
        assert Grid.from_text(text).to_text() == text

    def test_ragged_rows_rejected(self):
        with pytest.raises(ParameterError):
            Grid.from_text("..\n...\n")

    def test_unknown_character_rejected(self):
        with pytest.raises(ParameterError):
            Grid.from_text(".o\n")


class TestRect:
    def test_empty_rect(self):
        assert Rect(3, 3, 0, 5).is_empty
        assert list(Rect(3, 3, 0, 5).cells()) == []

    def test_negative_dimensions_rejected(self):
        with pytest.raises(ParameterError):
            Rect(0, 0, -1, 2)

    def test_intersection_disjoint_is_empty(self):
        assert Rect(0, 0, 2, 2).intersection(Rect(5, 5, 2, 2)).is_empty

    def test_text_round_trip(self):
        assert Rect.from_text(Rect(1, 2, 3, 4).to_text()) == Rect(1, 2, 3, 4)

    def test_rect_count_matches_slice_sum(self, rng):
        mask = rng.random((20, 30)) < 0.3
        sat = summed_area(mask)
        for _ in range(50):
            x0, y0 = int(rng.integers(0, 30)), int(rng.integers(0, 20))
            rect = Rect(x0, y0, int(rng.integers(0, 30 - x0 + 1)), int(rng.integers(0, 20 - y0 + 1)))
            assert rect_count(sat, rect) == int(mask[rect.slices()].sum())

    def test_window_sums(self, rng):
        mask = rng.random((12, 15)) < 0.4
        sums = window_sums(summed_area(mask), 3, 4)
        assert sums.shape == (10, 12)
        assert sums[5, 7] == mask[5:8, 7:11].sum()


class TestClusters:
    def test_empty(self):
        summary = occupied_clusters(Grid(4, 4))
        assert summary.cluster_count == 0
        assert summary.max_linf_diameter == 0

    def test_single_cell(self):
        summary = occupied_clusters(Grid.from_text("...\n.#.\n...\n"))
        assert summary.cluster_count == 1
        assert summary.max_linf_diameter == 0

    def test_l_shape(self):
        # {(0,0), (1,0), (1,1)}
        summary = occupied_clusters(Grid.from_text(".#\n##\n"))
        assert summary.cluster_count == 1
        assert summary.max_linf_diameter == 1
        assert summary.clusters[0].size == 3

    def test_diagonal_cells_are_separate(self):
        assert occupied_clusters(Grid.from_text("#.\n.#\n")).cluster_count == 2

    def test_agrees_with_bfs(self, random_grids):
        for g in random_grids(200, max_side=64):
            expected = bfs_clusters(g.occupied_mask())
            summary = occupied_clusters(g)
            assert summary.cluster_count == len(expected)
            assert sorted(c.size for c in summary.clusters) == sorted(size for size, _ in expected)
            assert summary.max_linf_diameter == max((d for _, d in expected), default=0)

    def test_diameter_invariant_under_symmetries(self, random_grids):
        for g in random_grids(30):
            mask = g.occupied_mask()
            reference = occupied_clusters(g).max_linf_diameter
            for k in range(4):
                for image in (np.rot90(mask, k), np.rot90(mask, k)[:, ::-1]):
                    transformed = Grid.from_masks(np.ascontiguousarray(image))
                    assert occupied_clusters(transformed).max_linf_diameter == reference
