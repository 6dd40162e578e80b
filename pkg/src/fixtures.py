#!/usr/bin/env python3
"""
Fixtures Module
===============

Configurations construites à la main, partagées par les tests et selftest.

Fixtures:
- cheminée: colonne ouverte entre deux fermés, flancs occupés
- croix d'élimination: site fermé dont les bras rejoignent des régions occupées
- bloc sûr et pavages de blocs sûrs
- escaliers de blocs sûrs avec sites occupés épars (et variante sabotée)
- boîtes bonnes sur réseau occupé stable (et variante sans G2)
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .blocking import BlockingPath, BlockingStructure, build_blocking_structure, find_blocking_path
from .errors import ParameterError
from .good_boxes import GoodBoxParams, is_good_box
from .lattice import Cell, CellState, Grid, Rect
from .random_init import ExperimentStream, derive_seed
from .safe_blocks import BlockGeometry, BlockIndex, SafeCertificate, safe_block_certificates, safe_block_field

logger = logging.getLogger('Percolation.fixtures')

SAFE_FIXTURE_GEOMETRY = BlockGeometry.desk_scale(m=5, M=30, N=20, v_h=30, h_w=90, k=3)
STAIRCASE_GEOMETRY = BlockGeometry.desk_scale(m=9, M=24, N=20, v_h=40, h_w=72, k=3)
GOOD_FIXTURE_PARAMS = GoodBoxParams.desk_scale(
    side=48, r=6, iv=8, strip_w=16, strip_h=12, closed_cap=2, margin=8
)

LATTICE_PITCH = 5
LATTICE_SHEAR = 2


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=derive_seed(seed, ExperimentStream.FIXTURES, 0)))


# ============================================================================
# Dynamique
# ============================================================================

def chimney(height: int = 7) -> Tuple[Grid, Cell]:
    """
    Colonne x=1 ouverte, fermée aux deux bouts, colonnes 0 et 2 occupées

    Returns:
        Tuple (grille, cellule centrale de la cheminée)
    """
    if height < 3:
        raise ParameterError("Une cheminée doit avoir au moins 3 rangées")
    occupied = np.zeros((height, 3), dtype=bool)
    closed = np.zeros((height, 3), dtype=bool)
    occupied[:, 0] = occupied[:, 2] = True
    closed[0, 1] = closed[-1, 1] = True
    return Grid.from_masks(occupied, closed), (1, height // 2)


def elimination_cross() -> Tuple[Grid, Cell]:
    """
    Site fermé au centre d'une grille 9×9, rangée basse et colonne droite
    occupées, un site occupé sur chacun des quatre bras
    """
    occupied = np.zeros((9, 9), dtype=bool)
    occupied[0, :] = True
    occupied[:, 8] = True
    for x, y in ((1, 4), (6, 4), (4, 7), (4, 2)):
        occupied[y, x] = True
    closed = np.zeros_like(occupied)
    closed[4, 4] = True
    return Grid.from_masks(occupied, closed), (4, 4)


# ============================================================================
# Blocs sûrs
# ============================================================================

def _place_pivot(closed: np.ndarray, geom: BlockGeometry, z: BlockIndex) -> Cell:
    block = geom.block_rect(z)
    pivot = (block.x0 + geom.M // 2, block.y1 - 2)
    closed[pivot[1], pivot[0]] = True
    return pivot


def safe_block_fixture(extra_occupied: Optional[List[Cell]] = None) -> Tuple[Grid, BlockIndex]:
    """
    Bloc z=(0, 1) de SAFE_FIXTURE_GEOMETRY avec pivot en haut de la colonne du milieu

    Returns:
        Tuple (grille 90×40, indice du bloc)
    """
    geom = SAFE_FIXTURE_GEOMETRY
    width, height = geom.h_w, 2 * geom.N
    occupied = np.zeros((height, width), dtype=bool)
    closed = np.zeros_like(occupied)
    _place_pivot(closed, geom, (0, 1))
    for x, y in extra_occupied or []:
        occupied[y, x] = True
    return Grid.from_masks(occupied, closed), (0, 1)


def safe_tiling(columns: int, rows: int) -> Tuple[Grid, Rect]:
    """
    Pavage columns × rows de blocs sûrs à partir de z=(0, 1)

    Returns:
        Tuple (grille, fenêtre de blocs)
    """
    geom = SAFE_FIXTURE_GEOMETRY
    width = (columns - 1) * geom.M + geom.h_w
    height = (rows + 1) * geom.N
    occupied = np.zeros((height, width), dtype=bool)
    closed = np.zeros_like(occupied)
    for zy in range(1, rows + 1):
        for zx in range(columns):
            _place_pivot(closed, geom, (zx, zy))
    return Grid.from_masks(occupied, closed), Rect(0, 1, columns, rows)


@dataclass
class StaircaseFixture:
    """Escalier de blocs sûrs et structure bloquante associée"""
    grid: Grid
    geometry: BlockGeometry
    path: BlockingPath
    certificates: Dict[BlockIndex, SafeCertificate]
    structure: BlockingStructure
    intended: List[BlockIndex]


def _staircase_blocks(rng: np.random.Generator, runs: int) -> List[BlockIndex]:
    blocks = []
    zx, zy = 0, 1
    for run in range(runs):
        length = int(rng.integers(1, 4))
        if run > 0:
            zy += 1
        blocks.append((zx, zy))
        for _ in range(length - 1):
            zx += 1
            blocks.append((zx, zy))
    return blocks


def staircase(seed: int, runs: int = 3, density: float = 0.01, sabotage: bool = False) -> StaircaseFixture:
    """
    Escalier aléatoire de blocs sûrs (STAIRCASE_GEOMETRY)

    Les sites occupés épars sont placés sous la structure, hors des
    rectangles protecteurs, à distance ℓ∞ >= 3 les uns des autres: aucun
    amas ne croît dans la configuration fermée. La variante sabotée occupe
    une colonne sous le pivot du dernier bloc contributeur, dans son
    rectangle vertical, aussi haute que le permet la borne m/4 sur les amas.
    """
    geom = STAIRCASE_GEOMETRY
    rng = _rng(seed)
    blocks = _staircase_blocks(rng, runs)

    last_zx = max(zx for zx, _ in blocks)
    top_zy = max(zy for _, zy in blocks)
    width = last_zx * geom.M + geom.h_w
    height = (top_zy + 1) * geom.N

    closed = np.zeros((height, width), dtype=bool)
    for z in blocks:
        _place_pivot(closed, geom, z)
    clean = Grid.from_masks(np.zeros_like(closed), closed)

    window = Rect(0, 1, last_zx + 1, top_zy)
    certs = safe_block_certificates(clean, geom, window)
    path = find_blocking_path(safe_block_field(clean, geom, window), window)
    structure = build_blocking_structure(path, certs, Rect(0, 0, width, height))

    protected = np.zeros_like(closed)
    for cert in certs.values():
        protected[cert.vrect.slices()] = True
        protected[cert.hrect.slices()] = True

    segments = structure.segment_mask()
    has_segment = segments.any(axis=0)
    below = has_segment[None, :] & ~structure.region_a & ~segments
    candidates = np.argwhere(below & ~protected & ~closed)

    occupied = np.zeros_like(closed)
    blocked = np.zeros_like(closed)
    target = int(density * len(candidates))
    for index in rng.permutation(len(candidates)):
        if occupied.sum() >= target:
            break
        y, x = candidates[index]
        if blocked[y, x]:
            continue
        occupied[y, x] = True
        blocked[max(0, y - 2):y + 3, max(0, x - 2):x + 3] = True

    if sabotage:
        last = certs[path.horizontal_runs()[-1][-1]]
        px, py = last.pivot
        depth = int(geom.m // 4) + 1
        occupied[py - depth:py, px] = True

    grid = Grid.from_masks(occupied, closed)
    return StaircaseFixture(grid, geom, path, certs, structure, blocks)


# ============================================================================
# Boîtes bonnes
# ============================================================================

@dataclass
class GoodBoxFixture:
    """Grille (boîte + cadre d'une cellule) et boîte évaluée"""
    grid: Grid
    box: Rect
    params: GoodBoxParams
    closed_sites: List[Cell]


def stable_lattice(height: int, width: int, offset: int = 0) -> np.ndarray:
    """
    Sites (x, y) avec x - 2y ≡ offset (mod 5)

    Chaque ligne et chaque colonne a un site occupé toutes les 5 cellules,
    et aucun site ouvert n'a à la fois un voisin horizontal et un voisin
    vertical occupés: la configuration est figée pour la règle modifiée.
    """
    ys, xs = np.mgrid[0:height, 0:width]
    return (xs - LATTICE_SHEAR * ys - offset) % LATTICE_PITCH == 0


def good_box(seed: int, max_closed: int = 3, max_attempts: int = 500) -> GoodBoxFixture:
    """
    Boîte bonne: réseau stable de pas 5 et 1 à max_closed sites fermés
    hors du réseau, placés par rejet jusqu'à G1-G6

    Sans intervalle de bord occupé, la fermeture ne change rien: tout
    envahissement vient du bord.
    """
    gp = GOOD_FIXTURE_PARAMS
    side = gp.side
    rng = _rng(seed)
    base = stable_lattice(side, side, int(rng.integers(0, LATTICE_PITCH)))
    box = Rect(1, 1, side, side)
    count = int(rng.integers(1, max_closed + 1))

    for _ in range(max_attempts):
        sites = [tuple(int(v) for v in rng.integers(gp.margin, side - gp.margin, size=2)) for _ in range(count)]
        if any(base[y, x] for x, y in sites):
            continue
        grid = _framed(base, sites)
        if is_good_box(grid, box, gp).good:
            return GoodBoxFixture(grid, box, gp, [(x + 1, y + 1) for x, y in sites])

    raise ParameterError(f"Aucune boîte bonne trouvée en {max_attempts} tentatives (graine {seed})")


def g2_broken_box(seed: int) -> GoodBoxFixture:
    """
    Un seul site fermé dans la moitié basse, colonne vidée au-dessus de lui
    jusqu'au haut de la boîte: cheminée que l'envahissement par le sud ne
    peut pas remplir
    """
    gp = GOOD_FIXTURE_PARAMS
    side = gp.side
    rng = _rng(seed)
    occupied = stable_lattice(side, side, int(rng.integers(0, LATTICE_PITCH)))

    x = int(rng.integers(gp.margin, side - gp.margin))
    y = int(rng.integers(gp.margin, side // 2))
    occupied[y + 1:, x] = False
    return GoodBoxFixture(_framed(occupied, [(x, y)]), Rect(1, 1, side, side), gp, [(x + 1, y + 1)])


def _framed(box_occupied: np.ndarray, closed_sites: List[Cell]) -> Grid:
    side = box_occupied.shape[0]
    occupied = np.zeros((side + 2, side + 2), dtype=bool)
    occupied[1:-1, 1:-1] = box_occupied
    closed = np.zeros_like(occupied)
    for x, y in closed_sites:
        closed[y + 1, x + 1] = True
    occupied &= ~closed
    return Grid.from_masks(occupied, closed)


def convert_closed(grid: Grid, cell: Cell) -> Grid:
    """Site fermé rendu occupé (utilisé pour la stabilité de G1-G6)"""
    return grid.set_state(cell, CellState.OCCUPIED)
