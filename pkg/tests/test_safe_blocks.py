"""Tests des blocs sûrs"""

import numpy as np
import pytest

from src.errors import GridBoundsError, ParameterError
from src.experiments import scan_q_value
from src.fixtures import SAFE_FIXTURE_GEOMETRY, safe_block_fixture, safe_tiling
from src.lattice import Grid, Rect
from src.random_init import ExperimentStream, PollutionParams, derive_seed, sample
from src.safe_blocks import (
    BlockGeometry, SafeCertificate, estimate_safe_prob, is_safe_block, safe_block_certificates,
    safe_block_field
)

DESK = BlockGeometry.desk_scale(m=5, M=12, N=10, v_h=12, h_w=24)


def naive_is_safe(g: Grid, z, geom: BlockGeometry) -> bool:
    """Oracle: boucles directes sur les pivots et les rectangles"""
    occupied, closed = g.occupied_mask(), g.closed_mask()
    block = geom.block_rect(z)
    half = (geom.m - 1) // 2

    def empty(x0, y0, w, h):
        if x0 < 0 or y0 < 0 or x0 + w > g.width or y0 + h > g.height:
            return False
        return not any(occupied[y, x] for y in range(y0, y0 + h) for x in range(x0, x0 + w))

    horizontal = any(empty(block.x0, ry, geom.h_w, geom.m)
                     for ry in range(block.y0, block.y0 + geom.N // 2 - geom.m + 1))
    if not horizontal:
        return False

    for y in range(block.y0 + geom.N // 2, block.y1):
        for x in range(block.x0, block.x1):
            if not closed[y, x]:
                continue
            if x - half < block.x0 or x + half >= block.x1:
                continue
            vy0 = block.y1 - geom.v_h
            if vy0 <= y and empty(x - half, vy0, geom.m, geom.v_h):
                return True
    return False


class TestGeometry:
    def test_from_probability(self):
        geom = BlockGeometry.from_probability(0.05, m=5, k=3, eps=0.2, delta=0.05)
        assert (geom.M, geom.N, geom.v_h, geom.h_w) == (2, 10, 12, 6)

    @pytest.mark.parametrize('kwargs', [{'m': 4}, {'m': 3}, {'k': 2}, {'eps': 0.0}])
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(ParameterError):
            BlockGeometry.from_probability(0.1, **kwargs)

    def test_desk_scale_checks_parity_only(self):
        BlockGeometry.desk_scale(m=3, M=4, N=4, v_h=2, h_w=2)
        with pytest.raises(ParameterError):
            BlockGeometry.desk_scale(m=6, M=30, N=20, v_h=30, h_w=90)

    def test_sampling_frame_contains_rectangles(self):
        width, height, (zx, zy) = DESK.sampling_frame()
        block = DESK.block_rect((zx, zy))
        assert width >= DESK.h_w and width >= block.x1
        assert block.y1 - DESK.v_h >= 0 and height == block.y1


class TestIsSafeBlock:
    def test_no_closed_cell(self):
        g = Grid(90, 40)
        assert is_safe_block(g, (0, 1), SAFE_FIXTURE_GEOMETRY) is None

    def test_constructed_fixture(self):
        g, z = safe_block_fixture()
        cert = is_safe_block(g, z, SAFE_FIXTURE_GEOMETRY)
        assert cert is not None
        assert cert.to_line() == 'safe z=0,1 pivot=15,38 vrect=13,10,5,30 hrect=0,25,90,5'
        assert cert.validate(g, SAFE_FIXTURE_GEOMETRY) == []

    def test_occupied_cell_in_vertical_rectangle(self):
        g, z = safe_block_fixture(extra_occupied=[(15, 30)])
        assert is_safe_block(g, z, SAFE_FIXTURE_GEOMETRY) is None

    def test_horizontal_rectangle_moves_down(self):
        g, z = safe_block_fixture(extra_occupied=[(60, 27)])
        cert = is_safe_block(g, z, SAFE_FIXTURE_GEOMETRY)
        assert cert.hrect == Rect(0, 22, 90, 5)
        assert cert.validate(g, SAFE_FIXTURE_GEOMETRY) == []

    def test_block_out_of_bounds(self):
        with pytest.raises(GridBoundsError):
            is_safe_block(Grid(20, 20), (3, 3), SAFE_FIXTURE_GEOMETRY)

    def test_certificate_line_round_trip(self):
        g, z = safe_block_fixture()
        cert = is_safe_block(g, z, SAFE_FIXTURE_GEOMETRY)
        assert SafeCertificate.from_line(cert.to_line()) == cert

    def test_malformed_line(self):
        with pytest.raises(ParameterError):
            SafeCertificate.from_line('safe z=0,1 pivot=oops')

    def test_validate_detects_occupied_rectangle(self):
        g, z = safe_block_fixture()
        cert = is_safe_block(g, z, SAFE_FIXTURE_GEOMETRY)
        spoiled, _ = safe_block_fixture(extra_occupied=[(15, 30)])
        assert any('vertical' in problem for problem in cert.validate(spoiled, SAFE_FIXTURE_GEOMETRY))

    def test_matches_naive_predicate(self):
        width, height, z = DESK.sampling_frame()
        for trial in range(300):
            g = sample(width, height, PollutionParams(0.01, 0.05, trial))
            cert = is_safe_block(g, z, DESK)
            assert (cert is not None) == naive_is_safe(g, z, DESK)
            if cert is not None:
                assert cert.validate(g, DESK) == []


class TestSafeField:
    def test_all_open_grid(self):
        g = Grid(150, 80)
        assert not safe_block_field(g, SAFE_FIXTURE_GEOMETRY, Rect(0, 1, 3, 3)).any()

    def test_tiling(self):
        g, window = safe_tiling(4, 3)
        field = safe_block_field(g, SAFE_FIXTURE_GEOMETRY, window)
        assert field.shape == (3, 4)
        assert field.all()
        assert len(safe_block_certificates(g, SAFE_FIXTURE_GEOMETRY, window)) == 12

    def test_window_out_of_bounds(self):
        g, window = safe_tiling(2, 2)
        with pytest.raises(GridBoundsError):
            safe_block_field(g, SAFE_FIXTURE_GEOMETRY, Rect(0, 1, 5, 2))


class TestEstimate:
    def test_no_closed_sites(self):
        estimate = estimate_safe_prob(DESK, PollutionParams(0.01, 0.0, 1), 50)
        assert estimate.fraction == 0.0
        assert estimate.ci == (0.0, 0.0)

    def test_all_closed(self):
        estimate = estimate_safe_prob(DESK, PollutionParams(0.0, 1.0, 1), 20)
        assert estimate.fraction == 1.0

    def test_deterministic(self):
        law = PollutionParams(0.01, 0.05, 9)
        assert estimate_safe_prob(DESK, law, 100) == estimate_safe_prob(DESK, law, 100)

    def test_matches_naive_oracle(self):
        law = PollutionParams(0.01, 0.05, 17)
        estimate = estimate_safe_prob(DESK, law, 300)
        width, height, z = DESK.sampling_frame()
        hits = sum(
            naive_is_safe(sample(width, height, law.with_seed(derive_seed(17, ExperimentStream.SAFE_BLOCKS, t))), z, DESK)
            for t in range(300)
        )
        assert estimate.hits == hits
        assert estimate.ci_low <= hits / 300 <= estimate.ci_high

    def test_small_p_geometry_matches_oracle(self):
        p = 0.05
        geom = BlockGeometry.from_probability(p, m=5, k=3, eps=0.2, delta=0.05)
        law = PollutionParams(p, scan_q_value(p, 5.0, 1.0), 3)
        estimate = estimate_safe_prob(geom, law, 200)
        width, height, z = geom.sampling_frame()
        hits = sum(
            naive_is_safe(sample(width, height, law.with_seed(derive_seed(3, ExperimentStream.SAFE_BLOCKS, t))), z, geom)
            for t in range(200)
        )
        assert estimate.hits == hits

    def test_monotone_in_q(self):
        fractions = [estimate_safe_prob(DESK, PollutionParams(0.01, q, 5), 200).fraction
                     for q in (0.01, 0.03, 0.1)]
        assert fractions == sorted(fractions)

    def test_trials_must_be_positive(self):
        with pytest.raises(ParameterError):
            estimate_safe_prob(DESK, PollutionParams(0.01, 0.05, 0), 0)
