#!/usr/bin/env python3
"""
Random Init Module
==================

Configurations initiales polluées, reproductibles bit à bit.

Générateur:
- numpy Philox 4x64-10 (générateur à compteur aux constantes publiées),
  clé = graine 64 bits de l'essai
- un uniforme u par cellule, tiré en ordre ligne par ligne:
  fermé si u < q, occupé si u >= 1 - p, ouvert sinon

Augmenter q n'ajoute que des sites fermés: les grilles tirées avec les
mêmes uniformes sont couplées de façon monotone.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum, IntEnum
from typing import List, Sequence

import numpy as np

from .errors import ParameterError
from .lattice import Grid

logger = logging.getLogger('Percolation.random_init')

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_SUM_TOLERANCE = 1e-12


class BoundaryCondition(Enum):
    """Décoration du bord après tirage"""
    FREE = 'free'
    OCCUPIED_RING = 'ring'

    @classmethod
    def parse(cls, text: str) -> 'BoundaryCondition':
        key = text.strip().lower()
        if key in ('free', 'libre'):
            return cls.FREE
        if key in ('ring', 'occupied-ring', 'occupied_ring'):
            return cls.OCCUPIED_RING
        raise ParameterError(f"Condition de bord inconnue: {text!r}")


class ExperimentStream(IntEnum):
    """Identifiants d'expérience pour la dérivation des graines d'essai"""
    OCCUPATION = 1
    SAFE_BLOCKS = 2
    GOOD_BOXES = 3
    GOOD_WINDOW = 4
    FIXTURES = 5
    SELFTEST = 6


@dataclass(frozen=True)
class PollutionParams:
    """
    Loi initiale: occupé avec probabilité p, fermé avec probabilité q

    Attributes:
        p (float): Densité initiale d'occupation
        q (float): Densité de sites fermés
        seed (int): Graine 64 bits
    """
    p: float
    q: float
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0) or not (0.0 <= self.q <= 1.0):
            raise ParameterError(f"Probabilités hors de [0, 1]: p={self.p}, q={self.q}")
        if self.p + self.q > 1.0 + _SUM_TOLERANCE:
            raise ParameterError(f"p + q doit être <= 1 (p={self.p}, q={self.q})")
        if not (0 <= self.seed <= MASK64):
            raise ParameterError(f"Graine hors de l'intervalle 64 bits: {self.seed}")

    def with_seed(self, seed: int) -> 'PollutionParams':
        return replace(self, seed=seed)

    def with_q(self, q: float) -> 'PollutionParams':
        return replace(self, q=q)


def _mix64(z: int) -> int:
    """Finaliseur splitmix64 (bijection sur les entiers 64 bits)"""
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, experiment: int, trial: int) -> int:
    """
    Graine de l'essai `trial` de l'expérience `experiment`

    Fonction pure de (master_seed, experiment, trial), bijective en trial
    à (master_seed, experiment) fixés: aucune collision sur 2^64 essais.
    """
    base = _mix64((master_seed ^ _mix64((experiment * _GOLDEN) & MASK64)) & MASK64)
    return _mix64((base + trial) & MASK64)


def uniform_field(width: int, height: int, seed: int) -> np.ndarray:
    """Uniformes [0, 1) indexés [y, x], un par cellule"""
    rng = np.random.Generator(np.random.Philox(key=seed & MASK64))
    return rng.random((height, width))


def _decorate(occupied: np.ndarray, closed: np.ndarray, bc: BoundaryCondition):
    if bc is BoundaryCondition.OCCUPIED_RING:
        for edge in (np.s_[0, :], np.s_[-1, :], np.s_[:, 0], np.s_[:, -1]):
            occupied[edge] = True
            closed[edge] = False


def _grid_from_uniforms(u: np.ndarray, p: float, q: float, bc: BoundaryCondition) -> Grid:
    closed = u < q
    occupied = (u >= 1.0 - p) & ~closed
    _decorate(occupied, closed, bc)
    return Grid.from_masks(occupied, closed)


def sample(w: int, h: int, params: PollutionParams,
           bc: BoundaryCondition = BoundaryCondition.FREE) -> Grid:
    """
    Tire une configuration initiale w × h

    Example:
        >>> g = sample(16, 16, PollutionParams(p=0.3, q=0.1, seed=7))
        >>> g.width, g.height
        (16, 16)
    """
    if w < 1 or h < 1:
        raise ParameterError(f"Dimensions invalides {w}x{h}")
    return _grid_from_uniforms(uniform_field(w, h, params.seed), params.p, params.q, bc)


def sample_coupled(w: int, h: int, p: float, q_list: Sequence[float], seed: int,
                   bc: BoundaryCondition = BoundaryCondition.FREE) -> List[Grid]:
    """
    Une grille par q, toutes tirées avec les mêmes uniformes

    Pour q_i <= q_j: fermés(g_i) ⊆ fermés(g_j) et occupés identiques.
    """
    laws = [PollutionParams(p, q, seed) for q in q_list]
    if w < 1 or h < 1:
        raise ParameterError(f"Dimensions invalides {w}x{h}")
    u = uniform_field(w, h, seed)
    return [_grid_from_uniforms(u, law.p, law.q, bc) for law in laws]
