#!/usr/bin/env python3
"""
Errors Module
=============

Hiérarchie d'exceptions du laboratoire de percolation.

Toutes les erreurs dérivent de PercolationError, ce qui permet à la CLI
de les distinguer des erreurs Python inattendues.
"""


class PercolationError(Exception):
    """Erreur de base du package"""


class GridBoundsError(PercolationError, IndexError):
    """Coordonnée ou rectangle hors de la grille"""


class ParameterError(PercolationError, ValueError):
    """Paramètres invalides (loi, géométrie, spécification d'expérience)"""


class ArgumentError(PercolationError, ValueError):
    """Précondition d'un argument non respectée"""


class ContractError(PercolationError):
    """Contrat de l'appelant rompu (ex: site non éliminable)"""


class MemoryBudgetError(PercolationError):
    """Refus d'allocation au-delà du budget mémoire"""
