#!/usr/bin/env python3
"""
Lattice Module
==============

Représentation des grilles finies et géométrie des cellules.

Fonctionnalités:
- Grille à deux plans de bits (occupé, fermé) empaquetés en mots de 64 bits
- Rectangles et requêtes de comptage par table de sommes cumulées
- Analyse des amas occupés (connexité à 4 voisins)
- Format texte des fixtures ('.', '#', 'x')

Conventions:
- Coordonnées (x=colonne, y=ligne), y croissant vers le nord
- Stockage ligne par ligne: la ligne d'index y correspond à la coordonnée y
- Hors de la grille, les cellules sont ouvertes pour toujours
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, List, Optional, Tuple

import numpy as np
from scipy import ndimage

from .errors import GridBoundsError, ParameterError

Cell = Tuple[int, int]

WORD_BITS = 64

# Connexité à 4 voisins pour scipy.ndimage.label
_FOUR_NEIGHBOURS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


class CellState(Enum):
    """État d'une cellule, la valeur est le caractère du format texte"""
    OPEN = '.'
    OCCUPIED = '#'
    CLOSED = 'x'


# Codes utilisés par les tableaux d'états (uint8)
STATE_OPEN = 0
STATE_OCCUPIED = 1
STATE_CLOSED = 2


def words_per_row(width: int) -> int:
    """Nombre de mots de 64 bits nécessaires pour une ligne"""
    return (width + WORD_BITS - 1) // WORD_BITS


def pack_bits(mask: np.ndarray) -> np.ndarray:
    """
    Empaquette un masque booléen (hauteur, largeur) en mots uint64

    Le bit i du mot j d'une ligne correspond à la colonne 64*j + i.
    Les bits de remplissage au-delà de la largeur sont nuls.
    """
    height, width = mask.shape
    words = words_per_row(width)
    padded = np.zeros((height, words * WORD_BITS), dtype=bool)
    padded[:, :width] = mask
    packed = np.packbits(padded, axis=1, bitorder='little')
    return packed.view('<u8').astype(np.uint64)


def unpack_bits(words: np.ndarray, width: int) -> np.ndarray:
    """Opération inverse de pack_bits"""
    raw = np.ascontiguousarray(words.astype('<u8')).view(np.uint8)
    return np.unpackbits(raw, axis=1, bitorder='little', count=width).astype(bool)


@dataclass(frozen=True)
class Rect:
    """
    Rectangle de cellules [x0, x0+w-1] × [y0, y0+h-1]

    Un rectangle de largeur ou hauteur nulle est l'ensemble vide.
    """
    x0: int
    y0: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 0 or self.h < 0:
            raise ParameterError(f"Dimensions de rectangle négatives: {self.w}x{self.h}")

    @property
    def x1(self) -> int:
        """Colonne exclusive de fin"""
        return self.x0 + self.w

    @property
    def y1(self) -> int:
        """Ligne exclusive de fin"""
        return self.y0 + self.h

    @property
    def is_empty(self) -> bool:
        return self.w == 0 or self.h == 0

    @property
    def area(self) -> int:
        return self.w * self.h

    def contains(self, cell: Cell) -> bool:
        x, y = cell
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1

    def within(self, width: int, height: int) -> bool:
        """True si le rectangle tient dans une grille width × height"""
        if self.is_empty:
            return True
        return self.x0 >= 0 and self.y0 >= 0 and self.x1 <= width and self.y1 <= height

    def intersection(self, other: 'Rect') -> 'Rect':
        x0 = max(self.x0, other.x0)
        y0 = max(self.y0, other.y0)
        x1 = min(self.x1, other.x1)
        y1 = min(self.y1, other.y1)
        return Rect(x0, y0, max(0, x1 - x0), max(0, y1 - y0))

    def cells(self) -> Iterator[Cell]:
        for y in range(self.y0, self.y1):
            for x in range(self.x0, self.x1):
                yield (x, y)

    def slices(self) -> Tuple[slice, slice]:
        """Tranches numpy (lignes, colonnes) pour indexer un masque [y, x]"""
        return slice(self.y0, self.y1), slice(self.x0, self.x1)

    def to_text(self) -> str:
        return f"{self.x0},{self.y0},{self.w},{self.h}"

    @classmethod
    def from_text(cls, text: str) -> 'Rect':
        try:
            x0, y0, w, h = (int(part) for part in text.split(','))
        except ValueError as e:
            raise ParameterError(f"Rectangle illisible: {text!r}") from e
        return cls(x0, y0, w, h)


@dataclass
class ClusterInfo:
    """Taille et boîte englobante d'un amas occupé"""
    size: int
    bbox: Rect

    @property
    def linf_diameter(self) -> int:
        return max(self.bbox.w - 1, self.bbox.h - 1)


@dataclass
class ClusterSummary:
    """Résumé des amas occupés d'une grille"""
    cluster_count: int = 0
    max_linf_diameter: int = 0
    clusters: List[ClusterInfo] = field(default_factory=list)


class Grid:
    """
    Configuration finie: deux plans de bits disjoints (occupé, fermé)

    Les plans sont des tableaux uint64 de forme (hauteur, mots par ligne),
    ligne y = coordonnée y. Une grille partagée n'est plus modifiée:
    set_state et with_states retournent une nouvelle grille.

    Attributes:
        width (int): Largeur en cellules
        height (int): Hauteur en cellules
        occupied (np.ndarray): Plan des cellules occupées
        closed (np.ndarray): Plan des cellules fermées
    """

    __slots__ = ('width', 'height', 'occupied', 'closed')

    def __init__(self, width: int, height: int,
                 occupied: Optional[np.ndarray] = None,
                 closed: Optional[np.ndarray] = None):
        if width < 1 or height < 1:
            raise ParameterError(f"Grille invalide {width}x{height}: dimensions >= 1 requises")

        shape = (height, words_per_row(width))
        self.width = width
        self.height = height
        self.occupied = np.zeros(shape, dtype=np.uint64) if occupied is None else np.array(occupied, dtype=np.uint64)
        self.closed = np.zeros(shape, dtype=np.uint64) if closed is None else np.array(closed, dtype=np.uint64)

        if self.occupied.shape != shape or self.closed.shape != shape:
            raise ParameterError(f"Plans de bits de forme incorrecte, attendu {shape}")
        if np.any(self.occupied & self.closed):
            raise ParameterError("Les plans occupé et fermé doivent être disjoints")

    # ------------------------------------------------------------------
    # Constructeurs
    # ------------------------------------------------------------------

    @classmethod
    def from_masks(cls, occupied: np.ndarray, closed: Optional[np.ndarray] = None) -> 'Grid':
        """Construit une grille depuis des masques booléens indexés [y, x]"""
        occupied = np.asarray(occupied, dtype=bool)
        if occupied.ndim != 2:
            raise ParameterError("Masque 2D attendu")
        height, width = occupied.shape
        if closed is None:
            closed = np.zeros_like(occupied)
        closed = np.asarray(closed, dtype=bool)
        if closed.shape != occupied.shape:
            raise ParameterError("Masques de dimensions différentes")
        return cls(width, height, pack_bits(occupied), pack_bits(closed))

    @classmethod
    def from_state_array(cls, states: np.ndarray) -> 'Grid':
        """Construit une grille depuis un tableau d'états uint8 (0 ouvert, 1 occupé, 2 fermé)"""
        return cls.from_masks(states == STATE_OCCUPIED, states == STATE_CLOSED)

    # ------------------------------------------------------------------
    # Vues
    # ------------------------------------------------------------------

    def occupied_mask(self) -> np.ndarray:
        return unpack_bits(self.occupied, self.width)

    def closed_mask(self) -> np.ndarray:
        return unpack_bits(self.closed, self.width)

    def open_mask(self) -> np.ndarray:
        return ~(self.occupied_mask() | self.closed_mask())

    def state_array(self) -> np.ndarray:
        states = np.zeros((self.height, self.width), dtype=np.uint8)
        states[self.occupied_mask()] = STATE_OCCUPIED
        states[self.closed_mask()] = STATE_CLOSED
        return states

    @property
    def occupied_count(self) -> int:
        return int(self.occupied_mask().sum())

    @property
    def closed_count(self) -> int:
        return int(self.closed_mask().sum())

    @property
    def area(self) -> int:
        return self.width * self.height

    # ------------------------------------------------------------------
    # Accès cellule
    # ------------------------------------------------------------------

    def in_bounds(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def _check_bounds(self, cell: Cell):
        if not self.in_bounds(cell):
            raise GridBoundsError(f"Cellule {cell} hors de la grille {self.width}x{self.height}")

    def get_state(self, cell: Cell) -> CellState:
        self._check_bounds(cell)
        x, y = cell
        word, bit = divmod(x, WORD_BITS)
        mask = np.uint64(1) << np.uint64(bit)
        if self.occupied[y, word] & mask:
            return CellState.OCCUPIED
        if self.closed[y, word] & mask:
            return CellState.CLOSED
        return CellState.OPEN

    def set_state(self, cell: Cell, state: CellState) -> 'Grid':
        """Retourne une copie où la cellule a l'état demandé"""
        self._check_bounds(cell)
        x, y = cell
        word, bit = divmod(x, WORD_BITS)
        mask = np.uint64(1) << np.uint64(bit)

        result = self.copy()
        result.occupied[y, word] &= ~mask
        result.closed[y, word] &= ~mask
        if state is CellState.OCCUPIED:
            result.occupied[y, word] |= mask
        elif state is CellState.CLOSED:
            result.closed[y, word] |= mask
        return result

    def with_states(self, selection: np.ndarray, state: CellState) -> 'Grid':
        """Retourne une copie où toutes les cellules sélectionnées ont l'état demandé"""
        selection = np.asarray(selection, dtype=bool)
        if selection.shape != (self.height, self.width):
            raise ParameterError("Masque de sélection de dimensions incorrectes")

        occupied = self.occupied_mask() & ~selection
        closed = self.closed_mask() & ~selection
        if state is CellState.OCCUPIED:
            occupied |= selection
        elif state is CellState.CLOSED:
            closed |= selection
        return Grid.from_masks(occupied, closed)

    def copy(self) -> 'Grid':
        return Grid(self.width, self.height, self.occupied.copy(), self.closed.copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and np.array_equal(self.occupied, other.occupied)
                and np.array_equal(self.closed, other.closed))

    __hash__ = None

    def __repr__(self) -> str:
        return (f"Grid({self.width}x{self.height}, occupied={self.occupied_count}, "
                f"closed={self.closed_count})")

    # ------------------------------------------------------------------
    # Format texte
    # ------------------------------------------------------------------

    def to_text(self) -> str:
        """Une ligne par rangée, de la plus haute (y max) à la plus basse"""
        chars = np.full((self.height, self.width), CellState.OPEN.value)
        chars[self.occupied_mask()] = CellState.OCCUPIED.value
        chars[self.closed_mask()] = CellState.CLOSED.value
        return ''.join(''.join(row) + '\n' for row in chars[::-1])

    @classmethod
    def from_text(cls, text: str) -> 'Grid':
        rows = text.splitlines()
        if not rows:
            raise ParameterError("Fixture vide")
        width = len(rows[0])
        if any(len(row) != width for row in rows):
            raise ParameterError("Toutes les rangées d'une fixture doivent avoir la même longueur")

        valid = {state.value for state in CellState}
        for row in rows:
            bad = set(row) - valid
            if bad:
                raise ParameterError(f"Caractères inconnus dans la fixture: {sorted(bad)}")

        chars = np.array([list(row) for row in reversed(rows)])
        return cls.from_masks(chars == CellState.OCCUPIED.value, chars == CellState.CLOSED.value)


def get_state(grid: Grid, cell: Cell) -> CellState:
    return grid.get_state(cell)


def set_state(grid: Grid, cell: Cell, state: CellState) -> Grid:
    return grid.set_state(cell, state)


def occupied_clusters(grid: Grid) -> ClusterSummary:
    """
    Étiquette les amas occupés (connexité à 4 voisins)

    Returns:
        ClusterSummary avec taille et boîte englobante de chaque amas
    """
    labels, count = ndimage.label(grid.occupied_mask(), structure=_FOUR_NEIGHBOURS)
    if count == 0:
        return ClusterSummary()

    sizes = np.bincount(labels.ravel())[1:]
    clusters = []
    for size, (rows, cols) in zip(sizes, ndimage.find_objects(labels)):
        bbox = Rect(cols.start, rows.start, cols.stop - cols.start, rows.stop - rows.start)
        clusters.append(ClusterInfo(size=int(size), bbox=bbox))

    return ClusterSummary(
        cluster_count=int(count),
        max_linf_diameter=max(c.linf_diameter for c in clusters),
        clusters=clusters
    )


def summed_area(mask: np.ndarray) -> np.ndarray:
    """Table de sommes cumulées de forme (h+1, w+1), S[y, x] = somme sur [0,x) × [0,y)"""
    sat = np.zeros((mask.shape[0] + 1, mask.shape[1] + 1), dtype=np.int64)
    sat[1:, 1:] = np.cumsum(np.cumsum(mask, axis=0, dtype=np.int64), axis=1)
    return sat


def rect_count(sat: np.ndarray, rect: Rect) -> int:
    """Nombre de cellules marquées dans un rectangle (tenant dans la grille)"""
    if rect.is_empty:
        return 0
    return int(sat[rect.y1, rect.x1] - sat[rect.y0, rect.x1] - sat[rect.y1, rect.x0] + sat[rect.y0, rect.x0])


def window_sums(sat: np.ndarray, win_h: int, win_w: int) -> np.ndarray:
    """
    Sommes de toutes les fenêtres win_w × win_h à positions entières

    Returns:
        Tableau [y0, x0] des comptes, vide si la fenêtre dépasse la grille
    """
    return (sat[win_h:, win_w:] - sat[:-win_h, win_w:]
            - sat[win_h:, :-win_w] + sat[:-win_h, :-win_w])
