"""Tests des chemins de blocs sûrs et des structures bloquantes"""

import numpy as np
import pytest

from src.blocking import (
    MAX_RUN, BlockingPath, BlockingVerdict, Step, build_blocking_structure, find_blocking_path,
    verify_blocking
)
from src.errors import ArgumentError
from src.fixtures import SAFE_FIXTURE_GEOMETRY, safe_block_fixture, staircase
from src.lattice import Rect
from src.safe_blocks import is_safe_block


def longest_admissible(field: np.ndarray) -> int:
    """Oracle: énumération exhaustive des chemins admissibles, longueur maximale (0 si aucun)"""
    h, w = field.shape
    best = 0

    def extend(bx, by, last, run, length):
        nonlocal best
        if bx == w - 1 or by == h - 1:
            best = max(best, length)
        for step, (dx, dy) in ((Step.E1, (1, 0)), (Step.E2, (0, 1))):
            nx, ny = bx + dx, by + dy
            if nx >= w or ny >= h or not field[ny, nx]:
                continue
            new_run = run + 1 if step is last else 1
            if new_run <= MAX_RUN:
                extend(nx, ny, step, new_run, length + 1)

    for by in range(h):
        for bx in range(w):
            if field[by, bx] and (bx == 0 or by == 0):
                extend(bx, by, None, 0, 1)
    return best


def strict_staircase(n: int):
    blocks = [(0, 0)]
    while blocks[-1] != (n - 1, n - 1):
        x, y = blocks[-1]
        blocks.append((x + 1, y) if x == y else (x, y + 1))
    return blocks


class TestPath:
    def test_all_true_field(self):
        window = Rect(0, 0, 6, 6)
        path = find_blocking_path(np.ones((6, 6), dtype=bool), window)
        assert path is not None
        assert path.problems(np.ones((6, 6), dtype=bool), window) == []

    def test_all_false_field(self):
        assert find_blocking_path(np.zeros((6, 6), dtype=bool), Rect(0, 0, 6, 6)) is None

    def test_strict_staircase_is_returned(self):
        field = np.zeros((6, 6), dtype=bool)
        expected = strict_staircase(6)
        for x, y in expected:
            field[y, x] = True
        path = find_blocking_path(field, Rect(0, 0, 6, 6))
        assert path.blocks == expected
        assert path.steps == [Step.E1, Step.E2] * 5

    def test_three_equal_steps_forbidden(self):
        # une seule rangée: le chemin horizontal complet ferait trois pas e1
        field = np.zeros((3, 5), dtype=bool)
        field[1, :] = True
        path = find_blocking_path(field, Rect(0, 0, 5, 3))
        assert path is None

    def test_window_offset(self):
        field = np.ones((3, 3), dtype=bool)
        path = find_blocking_path(field, Rect(4, 2, 3, 3))
        assert all(4 <= x < 7 and 2 <= y < 5 for x, y in path.blocks)
        assert path.blocks[0][0] == 4 or path.blocks[0][1] == 2

    def test_shape_mismatch(self):
        with pytest.raises(ArgumentError):
            find_blocking_path(np.ones((2, 3), dtype=bool), Rect(0, 0, 2, 2))

    def test_agrees_with_exhaustive_enumeration(self, rng):
        window = Rect(0, 0, 6, 6)
        for _ in range(200):
            field = rng.random((6, 6)) < 0.6
            expected = longest_admissible(field)
            path = find_blocking_path(field, window)
            if expected == 0:
                assert path is None
                continue
            assert path is not None
            assert len(path.blocks) == expected
            assert path.problems(field, window) == []
            start, end = path.blocks[0], path.blocks[-1]
            assert start[0] == 0 or start[1] == 0
            assert end[0] == 5 or end[1] == 5

    def test_problems_reports_bad_steps(self):
        path = BlockingPath([(0, 0), (1, 0), (2, 0), (3, 0)])
        assert any('consécutifs' in problem for problem in path.problems())

    def test_disconnected_blocks_rejected(self):
        with pytest.raises(ArgumentError):
            BlockingPath([(0, 0), (2, 0)])


class TestStructure:
    def test_single_block(self):
        g, z = safe_block_fixture()
        cert = is_safe_block(g, z, SAFE_FIXTURE_GEOMETRY)
        window = Rect(0, 0, g.width, g.height)
        structure = build_blocking_structure(BlockingPath([z]), {z: cert}, window)
        assert structure.segments == [Rect(15, 10, 1, 29), Rect(15, 27, 75, 1)]
        # A: strictement au-dessus du segment le plus haut de chaque colonne
        assert structure.region_a[39, 15] and not structure.region_a[38, 15]
        assert structure.region_a[28, 40] and not structure.region_a[27, 40]
        assert not structure.region_a[:, :15].any()

    def test_region_and_segments_are_disjoint(self):
        fixture = staircase(4)
        assert not np.any(fixture.structure.region_a & fixture.structure.segment_mask())

    def test_missing_certificate(self):
        g, z = safe_block_fixture()
        with pytest.raises(ArgumentError):
            build_blocking_structure(BlockingPath([z]), {}, Rect(0, 0, g.width, g.height))

    def test_segments_inside_cores(self):
        fixture = staircase(2, runs=4)
        cores = np.zeros_like(fixture.structure.segment_mask())
        for cert in fixture.certificates.values():
            for rect in cert.core:
                cores[rect.slices()] = True
        assert not np.any(fixture.structure.segment_mask() & ~cores)


class TestVerify:
    def test_open_below_structure(self):
        g, z = safe_block_fixture()
        cert = is_safe_block(g, z, SAFE_FIXTURE_GEOMETRY)
        structure = build_blocking_structure(BlockingPath([z]), {z: cert}, Rect(0, 0, g.width, g.height))
        assert verify_blocking(g, structure, SAFE_FIXTURE_GEOMETRY.m).holds

    @pytest.mark.parametrize('seed', range(10))
    def test_staircases_hold(self, seed):
        fixture = staircase(seed)
        assert fixture.path.problems() == []
        verdict = verify_blocking(fixture.grid, fixture.structure, fixture.geometry.m)
        assert verdict.status == BlockingVerdict.HOLDS

    @pytest.mark.slow
    def test_staircase_suite(self):
        for seed in range(100, 150):
            fixture = staircase(seed)
            assert verify_blocking(fixture.grid, fixture.structure, fixture.geometry.m).holds

    @pytest.mark.parametrize('seed', range(10))
    def test_sabotage_is_detected(self, seed):
        fixture = staircase(seed, sabotage=True)
        verdict = verify_blocking(fixture.grid, fixture.structure, fixture.geometry.m)
        assert verdict.status == BlockingVerdict.VIOLATED
        x, y = verdict.witness
        assert not fixture.structure.region_a[y, x]

        last = fixture.path.horizontal_runs()[-1][-1]
        cert = fixture.certificates[last]
        px, py = cert.pivot
        assert y < py
        column = fixture.grid.occupied_mask()[:py, px]
        assert column[-3:].all()
        assert verdict.max_cluster_diameter == 2
        assert 'rectangle vertical contient un site occupé' in cert.validate(fixture.grid, fixture.geometry)
