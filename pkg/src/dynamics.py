#!/usr/bin/env python3
"""
Dynamics Module
===============

Règles de percolation bootstrap et calcul de la configuration finale.

Trois règles:
- standard: au moins 2 des 4 voisins occupés
- modifiée: (est ou ouest occupé) et (nord ou sud occupé)
- modifiée + verticale: modifiée, ou nord et sud occupés

Deux moteurs:
- step / closure_naive: pas synchrones bit-parallèles sur les mots de 64 bits
- closure: front d'onde compilé (numba), ne réexamine que les voisins
  des cellules nouvellement occupées; même point fixe et même nombre de pas
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List

import numpy as np
from numba import njit

from .errors import ArgumentError, ContractError, GridBoundsError, ParameterError
from .lattice import (
    Cell, CellState, Grid, WORD_BITS, pack_bits
)

logger = logging.getLogger('Percolation.dynamics')


class Rule(Enum):
    """Règle de mise à jour"""
    STANDARD = 'standard'
    MODIFIED = 'modified'
    MODIFIED_PLUS_VERTICAL = 'modified-vertical'

    @property
    def code(self) -> int:
        """Code entier transmis aux noyaux compilés"""
        return _RULE_CODES[self]

    @classmethod
    def parse(cls, text: str) -> 'Rule':
        """
        Convertit un nom de règle (CLI, fichiers de config)

        Example:
            >>> Rule.parse('mod')
            <Rule.MODIFIED: 'modified'>
        """
        key = text.strip().lower().replace('_', '-')
        aliases = {
            'standard': cls.STANDARD,
            'std': cls.STANDARD,
            'modified': cls.MODIFIED,
            'mod': cls.MODIFIED,
            'modified-vertical': cls.MODIFIED_PLUS_VERTICAL,
            'modified-plus-vertical': cls.MODIFIED_PLUS_VERTICAL,
            'vertical': cls.MODIFIED_PLUS_VERTICAL,
        }
        if key not in aliases:
            raise ParameterError(f"Règle inconnue: {text!r}")
        return aliases[key]


_RULE_CODES = {Rule.STANDARD: 0, Rule.MODIFIED: 1, Rule.MODIFIED_PLUS_VERTICAL: 2}


@dataclass
class FinalGrid:
    """Point fixe de la dynamique et nombre de pas synchrones pour l'atteindre"""
    grid: Grid
    steps_to_fixpoint: int


# ============================================================================
# Pas synchrone bit-parallèle
# ============================================================================

_ONE = np.uint64(1)
_TOP = np.uint64(WORD_BITS - 1)


def _valid_words(width: int, height: int) -> np.ndarray:
    return pack_bits(np.ones((height, width), dtype=bool))


def _neighbour_planes(occ: np.ndarray):
    """Plans (est, ouest, nord, sud): bit x vaut 1 si le voisin de x est occupé"""
    height, words = occ.shape
    zero_col = np.zeros((height, 1), dtype=np.uint64)
    zero_row = np.zeros((1, words), dtype=np.uint64)

    following = np.concatenate([occ[:, 1:], zero_col], axis=1)
    preceding = np.concatenate([zero_col, occ[:, :-1]], axis=1)

    east = (occ >> _ONE) | (following << _TOP)
    west = (occ << _ONE) | (preceding >> _TOP)
    north = np.concatenate([occ[1:], zero_row], axis=0)
    south = np.concatenate([zero_row, occ[:-1]], axis=0)
    return east, west, north, south


def _firing_plane(occ: np.ndarray, rule: Rule) -> np.ndarray:
    east, west, north, south = _neighbour_planes(occ)
    if rule is Rule.STANDARD:
        return ((east & west) | (east & north) | (east & south)
                | (west & north) | (west & south) | (north & south))

    fire = (east | west) & (north | south)
    if rule is Rule.MODIFIED_PLUS_VERTICAL:
        fire |= north & south
    return fire


def step(g: Grid, r: Rule) -> Grid:
    """
    Un pas synchrone: chaque cellule ouverte dont le prédicat est vrai
    sur g devient occupée
    """
    fire = _firing_plane(g.occupied, r)
    open_cells = ~(g.occupied | g.closed) & _valid_words(g.width, g.height)
    return Grid(g.width, g.height, g.occupied | (fire & open_cells), g.closed.copy())


def closure_naive(g: Grid, r: Rule) -> FinalGrid:
    """Référence: itère step sur toute la grille jusqu'à stabilité"""
    valid = _valid_words(g.width, g.height)
    occ = g.occupied.copy()
    open_cells = ~(g.occupied | g.closed) & valid
    steps = 0

    while True:
        fresh = _firing_plane(occ, r) & open_cells & ~occ
        if not fresh.any():
            break
        occ |= fresh
        steps += 1

    return FinalGrid(Grid(g.width, g.height, occ, g.closed.copy()), steps)


# ============================================================================
# Moteur à front d'onde (compilé)
# ============================================================================

@njit(cache=True, nogil=True)
def _fires(states, y, x, rule_code):
    height, width = states.shape
    east = x + 1 < width and states[y, x + 1] == 1
    west = x > 0 and states[y, x - 1] == 1
    north = y + 1 < height and states[y + 1, x] == 1
    south = y > 0 and states[y - 1, x] == 1

    if rule_code == 0:
        return int(east) + int(west) + int(north) + int(south) >= 2
    horizontal = east or west
    vertical = north or south
    if rule_code == 2:
        return (horizontal and vertical) or (north and south)
    return horizontal and vertical


@njit(cache=True, nogil=True)
def _frontier_closure(states, rule_code):
    """
    Fait croître les états en place jusqu'au point fixe

    Couche par couche: les candidats d'une couche sont les voisins ouverts
    des cellules occupées à la couche précédente, évalués sur l'état
    figé avant écriture. Retourne le nombre de pas synchrones.
    """
    height, width = states.shape
    n = height * width
    frontier = np.empty(n, dtype=np.int64)
    fresh = np.empty(n, dtype=np.int64)
    stamp = np.zeros(n, dtype=np.int64)

    count = 0
    for y in range(height):
        for x in range(width):
            if states[y, x] == 1:
                frontier[count] = y * width + x
                count += 1

    dx = (1, -1, 0, 0)
    dy = (0, 0, 1, -1)
    layer = 0
    while count > 0:
        layer += 1
        fresh_count = 0
        for i in range(count):
            cy = frontier[i] // width
            cx = frontier[i] - cy * width
            for k in range(4):
                ny = cy + dy[k]
                nx = cx + dx[k]
                if nx < 0 or nx >= width or ny < 0 or ny >= height:
                    continue
                if states[ny, nx] != 0:
                    continue
                idx = ny * width + nx
                if stamp[idx] == layer:
                    continue
                stamp[idx] = layer
                if _fires(states, ny, nx, rule_code):
                    fresh[fresh_count] = idx
                    fresh_count += 1

        for i in range(fresh_count):
            cy = fresh[i] // width
            states[cy, fresh[i] - cy * width] = 1

        frontier, fresh = fresh, frontier
        count = fresh_count

    # la dernière couche est vide
    return layer - 1 if layer > 0 else 0


def closure(g: Grid, r: Rule) -> FinalGrid:
    """
    Configuration finale par propagation de front

    Résultat identique à closure_naive, cellule par cellule, y compris
    steps_to_fixpoint.
    """
    states = g.state_array()
    steps = _frontier_closure(states, r.code)
    return FinalGrid(Grid.from_state_array(states), int(steps))


# ============================================================================
# Occupation et élimination des sites fermés
# ============================================================================

_NEIGHBOUR_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def neighbours(cell: Cell) -> List[Cell]:
    x, y = cell
    return [(x + dx, y + dy) for dx, dy in _NEIGHBOUR_OFFSETS]


def eventually_occupied(g: Grid, r: Rule, x: Cell) -> bool:
    if not g.in_bounds(x):
        raise GridBoundsError(f"Cellule {x} hors de la grille")
    return closure(g, r).grid.get_state(x) is CellState.OCCUPIED


def _check_eliminable_args(g: Grid, x: Cell):
    if not g.in_bounds(x):
        raise ArgumentError(f"Cellule {x} hors de la grille")
    if any(not g.in_bounds(n) for n in neighbours(x)):
        raise ArgumentError(f"Les quatre voisins de {x} doivent être dans la grille")
    if g.get_state(x) is not CellState.CLOSED:
        raise ArgumentError(f"La cellule {x} n'est pas fermée")


def is_eliminable(g: Grid, r: Rule, x: Cell) -> bool:
    """True si les quatre voisins du site fermé x finissent occupés"""
    _check_eliminable_args(g, x)
    final = closure(g, r).grid
    return all(final.get_state(n) is CellState.OCCUPIED for n in neighbours(x))


def eliminable_sites(g: Grid, r: Rule) -> List[Cell]:
    """Tous les sites fermés intérieurs éliminables, à partir d'une seule fermeture"""
    final_occ = closure(g, r).grid.occupied_mask()
    closed = g.closed_mask()

    surrounded = np.zeros_like(closed)
    surrounded[1:-1, 1:-1] = (final_occ[1:-1, 2:] & final_occ[1:-1, :-2]
                              & final_occ[2:, 1:-1] & final_occ[:-2, 1:-1])
    ys, xs = np.nonzero(closed & surrounded)
    return [(int(x), int(y)) for y, x in zip(ys, xs)]


def eliminate(g: Grid, r: Rule, x: Cell) -> Grid:
    """Remplace le site fermé éliminable x par un site occupé"""
    if not is_eliminable(g, r, x):
        raise ContractError(f"Le site fermé {x} n'est pas éliminable")
    logger.debug(f"🧹 Élimination du site fermé {x}")
    return g.set_state(x, CellState.OCCUPIED)

