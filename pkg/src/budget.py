#!/usr/bin/env python3
"""
Memory Budget Module
====================

Limite la taille des grilles tirées par les expériences.

Une grille de c cellules coûte environ BYTES_PER_CELL × c octets au pic
d'une fermeture: uniformes float64, tableau d'états uint8, front, nouvelle
couche et marques en int64, masques booléens reconstruits.

Ce module:
- Refuse explicitement les grilles qui dépassent le budget
- Plafonne les côtés de boîte par défaut
- Lit le budget dans la configuration ou PERCOLATION_MEMORY_BUDGET_MB
"""

import logging
import math
import os
from typing import Optional

from .errors import MemoryBudgetError, ParameterError

logger = logging.getLogger('Percolation.budget')

# uniformes + états + (front, couche, marques) + masques
UNIFORM_BYTES = 8
STATE_BYTES = 1
KERNEL_BYTES = 3 * 8
MASK_BYTES = 3
BYTES_PER_CELL = UNIFORM_BYTES + STATE_BYTES + KERNEL_BYTES + MASK_BYTES
DEFAULT_BUDGET_MB = 2048
ENV_VAR = 'PERCOLATION_MEMORY_BUDGET_MB'


class MemoryBudget:
    """
    Budget mémoire des expériences

    Attributes:
        limit_mb (float): Budget en mégaoctets
    """

    def __init__(self, limit_mb: float = DEFAULT_BUDGET_MB):
        if limit_mb <= 0:
            raise ParameterError(f"Budget mémoire invalide: {limit_mb} Mo")
        self.limit_mb = float(limit_mb)

    @classmethod
    def from_env(cls, default_mb: Optional[float] = None) -> 'MemoryBudget':
        """
        Budget lu dans PERCOLATION_MEMORY_BUDGET_MB, sinon default_mb
        """
        raw = os.getenv(ENV_VAR)
        if raw:
            try:
                return cls(float(raw))
            except ValueError:
                logger.warning(f"⚠️  {ENV_VAR} invalide ({raw!r}), valeur par défaut utilisée")
        return cls(default_mb if default_mb is not None else DEFAULT_BUDGET_MB)

    @property
    def max_cells(self) -> int:
        return int(self.limit_mb * 1024 * 1024 // BYTES_PER_CELL)

    def check(self, cells: int, what: str = "grille") -> None:
        """
        Vérifie qu'une grille de `cells` cellules tient dans le budget

        Raises:
            MemoryBudgetError: avec un message explicite sinon
        """
        if cells > self.max_cells:
            needed_mb = cells * BYTES_PER_CELL / (1024 * 1024)
            raise MemoryBudgetError(
                f"{what} de {cells} cellules (~{needed_mb:.0f} Mo) au-delà du budget de "
                f"{self.limit_mb:.0f} Mo (augmentez {ENV_VAR} ou limits.memory_budget_mb)"
            )

    def cap_side(self, side: int) -> int:
        """Plafonne le côté d'une boîte carrée au budget"""
        cap = math.isqrt(self.max_cells)
        if side > cap:
            logger.warning(f"⚠️  Côté {side} plafonné à {cap} par le budget mémoire")
            return cap
        return side

    def __repr__(self) -> str:
        return f"MemoryBudget({self.limit_mb:.0f} Mo)"
