#!/usr/bin/env python3
"""
Blocking Module
===============

Chemins de blocs sûrs et structures bloquantes.

Un chemin avance par pas e1 (est) ou e2 (nord), jamais trois pas
identiques de suite. Le dernier bloc de chaque tronçon horizontal apporte
la partie de son cœur située (au sens large) sous son pivot et à sa droite.
La région A est l'ensemble des cellules strictement au-dessus de ces
segments, colonne par colonne.

La vérification compare les configurations finales (règle modifiée)
obtenues en rendant A entièrement occupée puis entièrement fermée.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from .dynamics import Rule, closure
from .errors import ArgumentError, GridBoundsError
from .lattice import Cell, CellState, Grid, Rect, occupied_clusters
from .safe_blocks import BlockIndex, SafeCertificate

logger = logging.getLogger('Percolation.blocking')


class Step(Enum):
    E1 = 'e1'
    E2 = 'e2'

    @property
    def offset(self) -> Tuple[int, int]:
        return (1, 0) if self is Step.E1 else (0, 1)


MAX_RUN = 2


@dataclass
class BlockingPath:
    """Suite de blocs z0 ... zL et pas entre blocs consécutifs"""
    blocks: List[BlockIndex]
    steps: List[Step] = field(default_factory=list)

    def __post_init__(self):
        if not self.steps and len(self.blocks) > 1:
            self.steps = [_step_between(a, b) for a, b in zip(self.blocks, self.blocks[1:])]

    def problems(self, field_: Optional[np.ndarray] = None, window: Optional[Rect] = None) -> List[str]:
        """Invariants non respectés (pas, longueur des tronçons, blocs sûrs)"""
        issues = []
        if not self.blocks:
            return ["chemin vide"]
        if len(self.steps) != len(self.blocks) - 1:
            issues.append("nombre de pas incohérent")

        run = 0
        previous = None
        for (a, b), step_ in zip(zip(self.blocks, self.blocks[1:]), self.steps):
            if (b[0] - a[0], b[1] - a[1]) != step_.offset:
                issues.append(f"pas {step_.value} incohérent entre {a} et {b}")
            run = run + 1 if step_ is previous else 1
            previous = step_
            if run > MAX_RUN:
                issues.append(f"trois pas {step_.value} consécutifs avant {b}")

        if field_ is not None and window is not None:
            for zx, zy in self.blocks:
                if not window.contains((zx, zy)) or not field_[zy - window.y0, zx - window.x0]:
                    issues.append(f"bloc {(zx, zy)} non sûr")
        return issues

    def horizontal_runs(self) -> List[List[BlockIndex]]:
        """Découpe le chemin en tronçons reliés par des pas e1"""
        runs = [[self.blocks[0]]]
        for block, step_ in zip(self.blocks[1:], self.steps):
            if step_ is Step.E1:
                runs[-1].append(block)
            else:
                runs.append([block])
        return runs


def _step_between(a: BlockIndex, b: BlockIndex) -> Step:
    offset = (b[0] - a[0], b[1] - a[1])
    if offset == (1, 0):
        return Step.E1
    if offset == (0, 1):
        return Step.E2
    raise ArgumentError(f"Blocs {a} et {b} non reliés par e1 ou e2")


def find_blocking_path(field_: np.ndarray, window: Rect) -> Optional[BlockingPath]:
    """
    Chemin admissible du bord gauche/bas au bord droit/haut de la fenêtre

    Programmation dynamique sur les états (bloc, dernier pas, longueur du
    tronçon courant). Parmi les chemins admissibles, retourne le plus long;
    à longueur égale, le premier rencontré en ordre de balayage.

    Args:
        field_: Champ booléen indexé [zy - window.y0, zx - window.x0]
        window: Fenêtre en indices de blocs

    Returns:
        BlockingPath ou None si aucun chemin n'existe
    """
    if window.is_empty:
        return None
    if field_.shape != (window.h, window.w):
        raise ArgumentError(f"Champ de forme {field_.shape}, attendu {(window.h, window.w)}")

    # état = (bx, by, dernier pas ou None, longueur du tronçon)
    best: Dict[tuple, int] = {}
    parent: Dict[tuple, Optional[tuple]] = {}

    for diagonal in range(window.w + window.h - 1):
        for bx in range(max(0, diagonal - window.h + 1), min(diagonal, window.w - 1) + 1):
            by = diagonal - bx
            if not field_[by, bx]:
                continue
            if bx == 0 or by == 0:
                best[(bx, by, None, 0)] = 1
                parent[(bx, by, None, 0)] = None

            for step_ in (Step.E1, Step.E2):
                dx, dy = step_.offset
                px, py = bx - dx, by - dy
                if px < 0 or py < 0:
                    continue
                for last in (None, Step.E1, Step.E2):
                    for run in range(MAX_RUN + 1):
                        prev = (px, py, last, run)
                        if prev not in best:
                            continue
                        new_run = run + 1 if step_ is last else 1
                        if new_run > MAX_RUN:
                            continue
                        state = (bx, by, step_, new_run)
                        if best[prev] + 1 > best.get(state, 0):
                            best[state] = best[prev] + 1
                            parent[state] = prev

    end = None
    for state, length in best.items():
        bx, by = state[0], state[1]
        if bx == window.w - 1 or by == window.h - 1:
            if end is None or length > best[end]:
                end = state
    if end is None:
        return None

    blocks = []
    state = end
    while state is not None:
        blocks.append((state[0] + window.x0, state[1] + window.y0))
        state = parent[state]
    blocks.reverse()
    return BlockingPath(blocks)


@dataclass
class BlockingStructure:
    """
    Segments de cœur et région A (au-dessus des segments) dans une fenêtre

    Attributes:
        segments (List[Rect]): Segments d'épaisseur 1
        window (Rect): Fenêtre de cellules
        region_a (np.ndarray): Masque [y - window.y0, x - window.x0] de A
    """
    segments: List[Rect]
    window: Rect
    region_a: np.ndarray

    def segment_mask(self) -> np.ndarray:
        mask = np.zeros((self.window.h, self.window.w), dtype=bool)
        for segment in self.segments:
            part = segment.intersection(self.window)
            if part.is_empty:
                continue
            mask[part.y0 - self.window.y0:part.y1 - self.window.y0,
                 part.x0 - self.window.x0:part.x1 - self.window.x0] = True
        return mask

    def region_a_cells(self, width: int, height: int) -> np.ndarray:
        """Masque de A à l'échelle d'une grille width × height"""
        full = np.zeros((height, width), dtype=bool)
        full[self.window.slices()] = self.region_a
        return full


def _contribution(cert: SafeCertificate) -> List[Rect]:
    """Parties du cœur sous le pivot (colonne) et à sa droite (ligne)"""
    px, py = cert.pivot
    vcore, hcore = cert.core
    parts = [Rect(vcore.x0, vcore.y0, 1, max(0, py - vcore.y0 + 1))]
    right = Rect(px, hcore.y0, max(0, hcore.x1 - px), 1)
    if not right.is_empty:
        parts.append(right)
    return parts


def build_blocking_structure(path: BlockingPath, certs: Dict[BlockIndex, SafeCertificate],
                             window: Rect) -> BlockingStructure:
    """
    Assemble la structure bloquante d'un chemin

    Raises:
        ArgumentError: si un bloc du chemin n'a pas de certificat
    """
    missing = [z for z in path.blocks if z not in certs]
    if missing:
        raise ArgumentError(f"Certificats manquants pour les blocs {missing}")

    segments = []
    for run in path.horizontal_runs():
        segments.extend(_contribution(certs[run[-1]]))

    structure = BlockingStructure(segments, window, np.zeros((window.h, window.w), dtype=bool))
    seg_mask = structure.segment_mask()

    has_segment = seg_mask.any(axis=0)
    rows = np.arange(window.h)[:, None]
    top = np.where(has_segment, window.h - 1 - np.argmax(seg_mask[::-1], axis=0), window.h)
    structure.region_a = has_segment[None, :] & (rows > top[None, :])

    logger.debug(f"🧱 Structure bloquante: {len(segments)} segments, |A| = {int(structure.region_a.sum())}")
    return structure


@dataclass
class BlockingVerdict:
    """Résultat de la vérification: holds, cluster-precondition-failed ou violated"""
    status: str
    witness: Optional[Cell] = None
    max_cluster_diameter: int = 0

    HOLDS = 'holds'
    PRECONDITION_FAILED = 'cluster-precondition-failed'
    VIOLATED = 'violated'

    @property
    def holds(self) -> bool:
        return self.status == self.HOLDS


def verify_blocking(g: Grid, s: BlockingStructure, m: int) -> BlockingVerdict:
    """
    Compare les fermetures (règle modifiée) avec A occupée et A fermée

    Returns:
        BlockingVerdict, avec une cellule témoin de A^c en cas de désaccord
    """
    if not s.window.within(g.width, g.height):
        raise GridBoundsError(f"Fenêtre {s.window} hors de la grille")

    region = s.region_a_cells(g.width, g.height)
    final_open = closure(g.with_states(region, CellState.OCCUPIED), Rule.MODIFIED).grid
    final_closed = closure(g.with_states(region, CellState.CLOSED), Rule.MODIFIED).grid

    diameter = occupied_clusters(final_closed).max_linf_diameter
    if diameter > m / 4:
        logger.warning(f"⚠️  Amas de diamètre {diameter} > m/4 dans la configuration fermée")
        return BlockingVerdict(BlockingVerdict.PRECONDITION_FAILED, max_cluster_diameter=diameter)

    differ = (final_open.occupied_mask() != final_closed.occupied_mask()) & ~region
    if differ.any():
        y, x = (int(v) for v in np.argwhere(differ)[0])
        logger.info(f"❌ Structure franchie en {(x, y)}")
        return BlockingVerdict(BlockingVerdict.VIOLATED, witness=(x, y), max_cluster_diameter=diameter)

    return BlockingVerdict(BlockingVerdict.HOLDS, max_cluster_diameter=diameter)
