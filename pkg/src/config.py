#!/usr/bin/env python3
"""
Configuration Module
====================

Gère la configuration du laboratoire via fichier YAML.

Fonctionnalités:
- Chargement de configuration YAML
- Valeurs par défaut (fichier absent: aucune écriture implicite)
- Récupération de valeurs imbriquées
- Surcharge par variables d'environnement

La configuration permet de personnaliser:
- Paramètres de simulation par défaut (p, q, règle, bord, graine)
- Essais, tolérance et parallélisme des expériences
- Dimensions des blocs sûrs et des boîtes bonnes
- Palette des images, cache, logs et budget mémoire
"""

import copy
import logging
import os
from pathlib import Path
from typing import Any, Dict

import yaml

logger = logging.getLogger('Percolation.config')

_TRUE_VALUES = ('1', 'true', 'yes', 'on')


class Config:
    """
    Gestionnaire de configuration du laboratoire

    Les variables d'environnement surchargent les valeurs du fichier.

    Attributes:
        config_file (Path): Chemin vers le fichier de configuration
        data (Dict): Données de configuration chargées
    """

    def __init__(self, config_file: str = 'configs/config.yaml'):
        self.config_file = Path(config_file)
        self.data = {}
        self.load()

    def load(self):
        """
        Charge la configuration depuis le fichier YAML

        Les sections absentes du fichier prennent leurs valeurs par défaut.
        Applique ensuite les surcharges des variables d'environnement.
        """
        self.data = self.get_default_config()
        if self.config_file.exists():
            try:
                with open(self.config_file, 'r', encoding='utf-8') as f:
                    loaded = yaml.safe_load(f) or {}
                _merge(self.data, loaded)
                logger.debug(f"✅ Configuration chargée depuis {self.config_file}")
            except yaml.YAMLError as e:
                logger.warning(f"⚠️  Erreur lors du chargement de la config: {e}")
        else:
            logger.debug(f"📝 {self.config_file} absent, configuration par défaut")

        self._apply_env_overrides()

    def get_default_config(self) -> Dict[str, Any]:
        """
        Retourne la configuration par défaut

        Returns:
            Dictionnaire avec toutes les options par défaut
        """
        return {
            'simulation': {
                'p': 0.1,
                'q': 0.01,
                # standard, modified, modified-vertical
                'rule': 'modified',
                # free ou ring (anneau occupé)
                'bc': 'free',
                'seed': 0
            },

            'experiments': {
                'trials': 100,
                'tol': 0.25,
                'beta': 1.0,
                'alphas': [0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0],
                'p_list': [0.12, 0.10, 0.08, 0.06],
                # Plafond des essais après doublements (multiple de trials)
                'max_trials_factor': 8,
                'workers': 1,
                # Durées écrites dans la colonne seconds des CSV
                'record_timing': False
            },

            'certificates': {
                'm': 5,
                'k': 3,
                'eps': 0.2,
                'delta': 0.05,
                # n des boîtes bonnes, 0 = ⌊log log 1/p⌋
                'n': 0
            },

            'render': {
                'initial_occupied': [0, 0, 0],
                'eventually_occupied': [128, 128, 128],
                'closed': [255, 0, 0],
                'never_occupied_open': [255, 255, 255]
            },

            'cache': {
                'enabled': True,
                'directory': '.cache'
            },

            'logging': {
                # Niveau de log (DEBUG, INFO, WARNING, ERROR)
                'level': 'INFO',
                # Répertoire des logs (vide = pas de fichier)
                'directory': ''
            },

            'output': {
                'directory': 'results'
            },

            'limits': {
                'memory_budget_mb': 2048
            }
        }

    def _apply_env_overrides(self):
        """
        Applique les surcharges depuis les variables d'environnement

        Variables supportées:
        - LOG_LEVEL: Niveau de logging
        - PERCOLATION_CACHE_ENABLED: Activer/désactiver le cache
        - PERCOLATION_WORKERS: Nombre de threads pour les essais
        - PERCOLATION_MEMORY_BUDGET_MB: Budget mémoire
        """
        if os.getenv('LOG_LEVEL'):
            self.data['logging']['level'] = os.getenv('LOG_LEVEL').upper()

        if os.getenv('PERCOLATION_CACHE_ENABLED'):
            self.data['cache']['enabled'] = os.getenv('PERCOLATION_CACHE_ENABLED').lower() in _TRUE_VALUES

        for var, key, cast in (('PERCOLATION_WORKERS', 'experiments.workers', int),
                               ('PERCOLATION_MEMORY_BUDGET_MB', 'limits.memory_budget_mb', float)):
            raw = os.getenv(var)
            if not raw:
                continue
            try:
                self.set(key, cast(raw))
            except ValueError:
                logger.warning(f"⚠️  {var} invalide ({raw!r}), ignorée")

    def get(self, key: str, default: Any = None) -> Any:
        """
        Récupère une valeur de configuration

        Supporte la notation par points pour les valeurs imbriquées.

        Example:
            >>> config = Config()
            >>> config.get('simulation.rule')
            'modified'
        """
        value = self.data
        for k in key.split('.'):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any):
        """Définit une valeur de configuration (notation par points supportée)"""
        keys = key.split('.')
        data = self.data
        for k in keys[:-1]:
            data = data.setdefault(k, {})
        data[keys[-1]] = value

    def validate(self) -> tuple[bool, list[str]]:
        """
        Valide la configuration

        Returns:
            Tuple (is_valid, errors)
        """
        errors = []

        p, q = self.get('simulation.p'), self.get('simulation.q')
        if not isinstance(p, (int, float)) or not 0 <= p <= 1:
            errors.append("simulation.p doit être dans [0, 1]")
        elif not isinstance(q, (int, float)) or q < 0 or p + q > 1 + 1e-12:
            errors.append("simulation.q doit être >= 0 avec p + q <= 1")

        if self.get('simulation.rule') not in ('standard', 'modified', 'modified-vertical'):
            errors.append("simulation.rule doit valoir standard, modified ou modified-vertical")
        if self.get('simulation.bc') not in ('free', 'ring'):
            errors.append("simulation.bc doit valoir free ou ring")

        for key in ('experiments.trials', 'experiments.workers', 'experiments.max_trials_factor'):
            value = self.get(key)
            if not isinstance(value, int) or value < 1:
                errors.append(f"{key} doit être un entier positif")

        tol = self.get('experiments.tol')
        if not isinstance(tol, (int, float)) or tol <= 0:
            errors.append("experiments.tol doit être > 0")

        m = self.get('certificates.m')
        if not isinstance(m, int) or m < 5 or m % 2 == 0:
            errors.append("certificates.m doit être impair et >= 5")

        budget = self.get('limits.memory_budget_mb')
        if not isinstance(budget, (int, float)) or budget <= 0:
            errors.append("limits.memory_budget_mb doit être positif")

        return len(errors) == 0, errors

    def display(self):
        """Affiche la configuration actuelle"""
        print("\n" + "=" * 60)
        print("📋 CONFIGURATION ACTUELLE")
        print("=" * 60)
        print(yaml.dump(self.data, default_flow_style=False, allow_unicode=True, sort_keys=False))
        print("=" * 60 + "\n")

    def to_dict(self) -> Dict[str, Any]:
        """Copie profonde du dictionnaire de configuration"""
        return copy.deepcopy(self.data)


def _merge(base: Dict[str, Any], override: Dict[str, Any]):
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = value
