#!/usr/bin/env python3
"""
Safe Blocks Module
==================

Détection des blocs sûrs et estimation de leur probabilité.

Un bloc R_z = (M·z1, N·z2) + [0, M-1] × [0, N-1] est sûr s'il existe:
- un pivot fermé dans sa moitié haute (y >= y0 + N // 2)
- un rectangle vertical m × v_h sans site occupé, de bord haut inclus
  dans le bord haut du bloc, dont la colonne du milieu contient le pivot
- un rectangle horizontal h_w × m sans site occupé, de bord gauche inclus
  dans la moitié basse du bord gauche du bloc

Les lignes médianes des deux rectangles forment le cœur du bloc.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import GridBoundsError, ParameterError
from .lattice import Cell, Grid, Rect, rect_count, summed_area
from .random_init import ExperimentStream, PollutionParams, derive_seed, sample
from .utils import ProportionEstimate, proportion_estimate

logger = logging.getLogger('Percolation.safe_blocks')

BlockIndex = Tuple[int, int]


@dataclass(frozen=True)
class BlockGeometry:
    """
    Dimensions des blocs et des rectangles protecteurs

    Attributes:
        m (int): Épaisseur (impaire) des rectangles protecteurs
        k (int): Facteur d'allongement des rectangles
        M (int): Largeur d'un bloc
        N (int): Hauteur d'un bloc
        v_h (int): Hauteur du rectangle vertical
        h_w (int): Largeur du rectangle horizontal
    """
    m: int
    k: int
    M: int
    N: int
    v_h: int
    h_w: int
    eps: Optional[float] = None
    delta: Optional[float] = None
    p: Optional[float] = None

    def __post_init__(self):
        if self.m < 1 or self.m % 2 == 0:
            raise ParameterError(f"m doit être un entier impair positif (m={self.m})")
        for name in ('k', 'M', 'N', 'v_h', 'h_w'):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} doit être >= 1 (reçu {getattr(self, name)})")

    @classmethod
    def from_probability(cls, p: float, m: int = 5, k: int = 3,
                         eps: float = 0.2, delta: float = 0.05) -> 'BlockGeometry':
        """
        Dimensions dérivées de p

        M = ⌊δ/p·log(1/p)⌋, N = 2m⌈ε/(mp)⌉, v_h = k⌈ε/p⌉, h_w = k⌊δ/p·log(1/p)⌋
        """
        if not 0.0 < p < 1.0:
            raise ParameterError(f"p doit être dans ]0, 1[ (p={p})")
        if m < 5 or m % 2 == 0:
            raise ParameterError(f"m doit être impair et >= 5 (m={m})")
        if k < 3:
            raise ParameterError(f"k doit être >= 3 (k={k})")
        if eps <= 0 or delta <= 0:
            raise ParameterError("eps et delta doivent être positifs")

        scale = math.log(1.0 / p) / p
        return cls(
            m=m, k=k,
            M=math.floor(delta * scale),
            N=2 * m * math.ceil(eps / (m * p)),
            v_h=k * math.ceil(eps / p),
            h_w=k * math.floor(delta * scale),
            eps=eps, delta=delta, p=p
        )

    @classmethod
    def desk_scale(cls, m: int, M: int, N: int, v_h: int, h_w: int, k: int = 3) -> 'BlockGeometry':
        """Dimensions explicites (seules positivité et parité de m sont vérifiées)"""
        return cls(m=m, k=k, M=M, N=N, v_h=v_h, h_w=h_w)

    def block_rect(self, z: BlockIndex) -> Rect:
        return Rect(self.M * z[0], self.N * z[1], self.M, self.N)

    @property
    def half_width(self) -> int:
        return (self.m - 1) // 2

    def sampling_frame(self) -> Tuple[int, int, BlockIndex]:
        """
        Plus petite grille contenant un bloc et ses rectangles protecteurs

        Returns:
            Tuple (largeur, hauteur, indice du bloc)
        """
        row = math.ceil(max(0, self.v_h - self.N) / self.N)
        return max(self.M, self.h_w), (row + 1) * self.N, (0, row)


@dataclass(frozen=True)
class SafeCertificate:
    """Témoin qu'un bloc est sûr: pivot fermé et deux rectangles vides d'occupés"""
    z: BlockIndex
    pivot: Cell
    vrect: Rect
    hrect: Rect

    @property
    def vcore(self) -> Rect:
        """Colonne médiane du rectangle vertical"""
        return Rect(self.vrect.x0 + (self.vrect.w - 1) // 2, self.vrect.y0, 1, self.vrect.h)

    @property
    def hcore(self) -> Rect:
        """Ligne médiane du rectangle horizontal"""
        return Rect(self.hrect.x0, self.hrect.y0 + (self.hrect.h - 1) // 2, self.hrect.w, 1)

    @property
    def core(self) -> Tuple[Rect, Rect]:
        return self.vcore, self.hcore

    def validate(self, g: Grid, geom: BlockGeometry) -> List[str]:
        """
        Revérifie indépendamment toutes les conditions du certificat

        Returns:
            Liste des problèmes (vide si le certificat est valide)
        """
        problems = []
        block = geom.block_rect(self.z)
        px, py = self.pivot

        if not block.contains(self.pivot) or py < block.y0 + geom.N // 2:
            problems.append("pivot hors de la moitié haute du bloc")
        if not g.in_bounds(self.pivot) or not g.closed_mask()[py, px]:
            problems.append("pivot non fermé")

        if (self.vrect.w, self.vrect.h) != (geom.m, geom.v_h):
            problems.append("rectangle vertical de mauvaises dimensions")
        if self.vrect.y1 != block.y1 or self.vrect.x0 < block.x0 or self.vrect.x1 > block.x1:
            problems.append("bord haut du rectangle vertical hors du bord haut du bloc")
        if self.vcore.x0 != px or not self.vrect.contains(self.pivot):
            problems.append("pivot hors de la colonne médiane")

        if (self.hrect.w, self.hrect.h) != (geom.h_w, geom.m):
            problems.append("rectangle horizontal de mauvaises dimensions")
        if self.hrect.x0 != block.x0 or self.hrect.y0 < block.y0 or self.hrect.y1 > block.y0 + geom.N // 2:
            problems.append("bord gauche du rectangle horizontal hors de la moitié basse")

        occupied = g.occupied_mask()
        for name, rect in (('vertical', self.vrect), ('horizontal', self.hrect)):
            if not rect.within(g.width, g.height):
                problems.append(f"rectangle {name} hors de la grille")
            elif occupied[rect.slices()].any():
                problems.append(f"rectangle {name} contient un site occupé")

        return problems

    def to_line(self) -> str:
        """
        Sérialisation sur une ligne

        Example:
            >>> cert.to_line()
            'safe z=0,1 pivot=15,38 vrect=13,10,5,30 hrect=0,25,90,5'
        """
        return (f"safe z={self.z[0]},{self.z[1]} pivot={self.pivot[0]},{self.pivot[1]} "
                f"vrect={self.vrect.to_text()} hrect={self.hrect.to_text()}")

    @classmethod
    def from_line(cls, line: str) -> 'SafeCertificate':
        fields = line.split()
        if not fields or fields[0] != 'safe':
            raise ParameterError(f"Ligne de certificat invalide: {line!r}")
        try:
            values = dict(item.split('=', 1) for item in fields[1:])
            zx, zy = (int(v) for v in values['z'].split(','))
            px, py = (int(v) for v in values['pivot'].split(','))
            return cls((zx, zy), (px, py), Rect.from_text(values['vrect']), Rect.from_text(values['hrect']))
        except (KeyError, ValueError) as e:
            raise ParameterError(f"Ligne de certificat invalide: {line!r}") from e


def _find_hrect(sat: np.ndarray, block: Rect, geom: BlockGeometry, width: int) -> Optional[Rect]:
    """Rectangle horizontal admissible le plus haut, ou None"""
    if block.x0 + geom.h_w > width:
        return None
    for ry in range(block.y0 + geom.N // 2 - geom.m, block.y0 - 1, -1):
        hrect = Rect(block.x0, ry, geom.h_w, geom.m)
        if rect_count(sat, hrect) == 0:
            return hrect
    return None


def _certify(occupied_sat: np.ndarray, closed: np.ndarray, g: Grid,
             z: BlockIndex, geom: BlockGeometry) -> Optional[SafeCertificate]:
    block = geom.block_rect(z)
    if not block.within(g.width, g.height):
        raise GridBoundsError(f"Bloc {z} hors de la grille {g.width}x{g.height}")

    hrect = _find_hrect(occupied_sat, block, geom, g.width)
    if hrect is None:
        return None

    vbottom = block.y1 - geom.v_h
    if vbottom < 0:
        return None

    half = geom.half_width
    lowest = max(block.y0 + geom.N // 2, vbottom)
    # pivots du plus haut au plus bas, puis de gauche à droite
    for y in range(block.y1 - 1, lowest - 1, -1):
        for x in range(block.x0 + half, block.x1 - half):
            if not closed[y, x]:
                continue
            vrect = Rect(x - half, vbottom, geom.m, geom.v_h)
            if rect_count(occupied_sat, vrect) == 0:
                return SafeCertificate(z, (x, y), vrect, hrect)
    return None


def is_safe_block(g: Grid, z: BlockIndex, geom: BlockGeometry) -> Optional[SafeCertificate]:
    """
    Certificat du bloc z s'il est sûr, None sinon

    Raises:
        GridBoundsError: si le bloc sort de la grille
    """
    return _certify(summed_area(g.occupied_mask()), g.closed_mask(), g, z, geom)


def _check_window(g: Grid, geom: BlockGeometry, window: Rect):
    for corner in ((window.x0, window.y0), (window.x1 - 1, window.y1 - 1)):
        if not window.is_empty and not geom.block_rect(corner).within(g.width, g.height):
            raise GridBoundsError(f"Fenêtre de blocs {window} hors de la grille")


def safe_block_certificates(g: Grid, geom: BlockGeometry, window: Rect) -> Dict[BlockIndex, SafeCertificate]:
    """Certificats de tous les blocs sûrs de la fenêtre (en indices de blocs)"""
    _check_window(g, geom, window)
    sat = summed_area(g.occupied_mask())
    closed = g.closed_mask()

    certs = {}
    for zy in range(window.y0, window.y1):
        for zx in range(window.x0, window.x1):
            cert = _certify(sat, closed, g, (zx, zy), geom)
            if cert is not None:
                certs[(zx, zy)] = cert
    return certs


def safe_block_field(g: Grid, geom: BlockGeometry, window: Rect) -> np.ndarray:
    """
    Champ booléen des blocs sûrs

    Returns:
        Tableau [zy - window.y0, zx - window.x0]
    """
    field = np.zeros((window.h, window.w), dtype=bool)
    for zx, zy in safe_block_certificates(g, geom, window):
        field[zy - window.y0, zx - window.x0] = True
    return field


def estimate_safe_prob(geom: BlockGeometry, params: PollutionParams, trials: int) -> ProportionEstimate:
    """
    Estimation Monte Carlo de la probabilité qu'un bloc soit sûr

    Chaque essai tire le plus petit cadre contenant le bloc et ses
    rectangles protecteurs, graine dérivée de params.seed.
    """
    if trials < 1:
        raise ParameterError("trials doit être >= 1")

    width, height, z = geom.sampling_frame()
    hits = 0
    for trial in range(trials):
        law = params.with_seed(derive_seed(params.seed, ExperimentStream.SAFE_BLOCKS, trial))
        if is_safe_block(sample(width, height, law), z, geom) is not None:
            hits += 1

    estimate = proportion_estimate(hits, trials, degenerate=params.q == 0.0)
    logger.info(f"✅ Blocs sûrs: {hits}/{trials} ({estimate.fraction:.3f})")
    return estimate
