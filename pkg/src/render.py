#!/usr/bin/env python3
"""
Render Module
=============

Images des configurations initiale et finale, un pixel par cellule.

Couleurs par défaut:
- noir: initialement occupé
- gris: occupé à la fin seulement
- rouge: fermé
- blanc: jamais occupé

Format de base P6 (portable pixmap binaire), ligne du haut en premier.
PNG optionnel via matplotlib.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Set, Tuple, Union

import numpy as np

from .errors import ArgumentError, ParameterError
from .lattice import Grid

logger = logging.getLogger('Percolation.render')

RGB = Tuple[int, int, int]


def parse_rgb(text: str) -> RGB:
    """
    Convertit "255,0,0" en (255, 0, 0)

    Raises:
        ParameterError: si la couleur est mal formée
    """
    try:
        values = tuple(int(part) for part in text.split(','))
    except ValueError as e:
        raise ParameterError(f"Couleur invalide: {text!r}") from e
    if len(values) != 3 or not all(0 <= v <= 255 for v in values):
        raise ParameterError(f"Couleur invalide: {text!r}")
    return values


@dataclass(frozen=True)
class RenderPalette:
    initial_occupied: RGB = (0, 0, 0)
    eventually_occupied: RGB = (128, 128, 128)
    closed: RGB = (255, 0, 0)
    never_occupied_open: RGB = (255, 255, 255)

    def __post_init__(self):
        colors = self.colors()
        for color in colors:
            if len(color) != 3 or not all(0 <= int(c) <= 255 for c in color):
                raise ParameterError(f"Couleur invalide: {color}")
        if len(set(colors)) != 4:
            raise ParameterError("Les quatre couleurs de la palette doivent être distinctes")

    def colors(self) -> Tuple[RGB, RGB, RGB, RGB]:
        return (tuple(self.initial_occupied), tuple(self.eventually_occupied),
                tuple(self.closed), tuple(self.never_occupied_open))


def _classify(initial: Grid, final: Grid) -> np.ndarray:
    """Classe par cellule: 0 initial, 1 final seulement, 2 fermé, 3 jamais occupé"""
    if (initial.width, initial.height) != (final.width, final.height):
        raise ArgumentError(
            f"Dimensions différentes: {initial.width}x{initial.height} et {final.width}x{final.height}"
        )
    classes = np.full((initial.height, initial.width), 3, dtype=np.uint8)
    classes[final.occupied_mask()] = 1
    classes[initial.occupied_mask()] = 0
    classes[initial.closed_mask()] = 2
    return classes


def to_rgb(initial: Grid, final: Grid, palette: RenderPalette = RenderPalette()) -> np.ndarray:
    """Tableau (hauteur, largeur, 3) uint8, rangée du haut (y max) en premier"""
    lut = np.array(palette.colors(), dtype=np.uint8)
    return lut[_classify(initial, final)[::-1]]


def render(initial: Grid, final: Grid, palette: RenderPalette = RenderPalette()) -> bytes:
    """
    Image P6 de la configuration

    Example:
        >>> g = Grid.from_text("x")
        >>> render(g, g)
        b'P6\\n1 1\\n255\\n\\xff\\x00\\x00'
    """
    pixels = to_rgb(initial, final, palette)
    header = f"P6\n{initial.width} {initial.height}\n255\n".encode('ascii')
    return header + pixels.tobytes()


def read_ppm(data: bytes) -> np.ndarray:
    """Décode une image P6 produite par render"""
    parts = data.split(b'\n', 3)
    if len(parts) != 4 or parts[0] != b'P6' or parts[2] != b'255':
        raise ParameterError("Image P6 invalide")
    width, height = (int(v) for v in parts[1].split())
    pixels = np.frombuffer(parts[3], dtype=np.uint8)
    if pixels.size != width * height * 3:
        raise ParameterError("Taille de l'image P6 incohérente")
    return pixels.reshape(height, width, 3)


def colors_present(data: bytes) -> Set[RGB]:
    """Ensemble des couleurs d'une image P6"""
    pixels = read_ppm(data).reshape(-1, 3)
    return {tuple(int(c) for c in row) for row in np.unique(pixels, axis=0)}


def write_ppm(data: bytes, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    logger.info(f"🖼️  Image P6 écrite: {path} ({len(data)} octets)")
    return path


def write_png(initial: Grid, final: Grid, path: Union[str, Path],
              palette: RenderPalette = RenderPalette()) -> Path:
    """Même image en PNG (matplotlib)"""
    from matplotlib import image as mpimg

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mpimg.imsave(path, to_rgb(initial, final, palette))
    logger.info(f"🖼️  Image PNG écrite: {path}")
    return path
