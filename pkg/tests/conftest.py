"""Fixtures partagées des tests"""

import numpy as np
import pytest

from src.config import Config
from src.lab import PercolationLab
from src.lattice import Grid


def random_masks(rng: np.random.Generator, width: int, height: int, p: float, q: float):
    """Masques (occupé, fermé) disjoints tirés avec un générateur numpy"""
    u = rng.random((height, width))
    return u > 1.0 - p, u < q


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_grids(rng):
    """Fabrique de grilles aléatoires de tailles 8 à max_side"""
    def make(count: int, max_side: int = 32, p_range=(0.01, 0.5), q_range=(0.0, 0.2)):
        grids = []
        for _ in range(count):
            w, h = (int(v) for v in rng.integers(8, max_side + 1, size=2))
            p = float(rng.uniform(*p_range))
            q = float(rng.uniform(*q_range))
            grids.append(Grid.from_masks(*random_masks(rng, w, h, p, q)))
        return grids
    return make


@pytest.fixture
def config(tmp_path, monkeypatch):
    """Configuration par défaut, sorties et cache dans un répertoire temporaire"""
    for var in ('LOG_LEVEL', 'PERCOLATION_CACHE_ENABLED', 'PERCOLATION_WORKERS',
                'PERCOLATION_MEMORY_BUDGET_MB'):
        monkeypatch.delenv(var, raising=False)
    cfg = Config(str(tmp_path / 'absent.yaml'))
    cfg.set('cache.directory', str(tmp_path / 'cache'))
    cfg.set('output.directory', str(tmp_path / 'results'))
    return cfg


@pytest.fixture
def lab(config):
    return PercolationLab(config, use_cache=False)
