"""
Polluted Bootstrap Percolation Package
======================================

Simulateur et laboratoire de vérification pour la percolation bootstrap
(règles standard et modifiée) dans un environnement pollué par des sites fermés.

Modules:
    - lattice: Grille en plans de bits, rectangles, amas
    - dynamics: Règles, pas synchrone, fermeture par front, éliminabilité
    - random_init: Tirages pollués reproductibles et couplés
    - safe_blocks, blocking, good_boxes: Certificats combinatoires
    - fixtures: Configurations construites pour les vérifications
    - experiments: Balayages, bissection du seuil, comparaison des règles
    - render: Images P6 (et PNG)
    - lab: Orchestration (configuration, cache, budget mémoire, logs)
    - cli: Ligne de commande
    - config, env_loader, cache_manager, budget, utils: Outils communs
"""

__version__ = '1.0.0'
__author__ = 'Percolation Lab Team'

from .errors import (
    ArgumentError, ContractError, GridBoundsError, MemoryBudgetError, ParameterError, PercolationError
)
from .lattice import CellState, Grid, Rect, get_state, occupied_clusters, set_state
from .dynamics import Rule, closure, closure_naive, eliminate, eventually_occupied, is_eliminable, step
from .random_init import BoundaryCondition, PollutionParams, sample, sample_coupled
from .config import Config
from .cache_manager import CacheManager
from .lab import PercolationLab
from .env_loader import load_environment

__all__ = [
    'ArgumentError',
    'ContractError',
    'GridBoundsError',
    'MemoryBudgetError',
    'ParameterError',
    'PercolationError',
    'CellState',
    'Grid',
    'Rect',
    'get_state',
    'set_state',
    'occupied_clusters',
    'Rule',
    'step',
    'closure',
    'closure_naive',
    'eventually_occupied',
    'is_eliminable',
    'eliminate',
    'BoundaryCondition',
    'PollutionParams',
    'sample',
    'sample_coupled',
    'Config',
    'CacheManager',
    'PercolationLab',
    'load_environment',
]
