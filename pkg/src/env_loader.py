#!/usr/bin/env python3
"""
Environment Loader Module
=========================

Charge les variables d'environnement (.env) et les fichiers d'expérience.

Fonctionnalités:
- Recherche et chargement du fichier .env (python-dotenv)
- Lecture des fichiers d'expérience `clé=valeur` (commentaires `#`)
- Affichage des variables PERCOLATION_*
"""

import os
from pathlib import Path
from typing import Dict, Optional, Union

from dotenv import dotenv_values, find_dotenv, load_dotenv

from .errors import ParameterError

ENV_PREFIX = 'PERCOLATION_'


def load_environment(env_file: Optional[str] = None) -> bool:
    """
    Charge le fichier .env dans os.environ sans écraser l'existant

    Args:
        env_file: Chemin explicite, sinon recherche depuis le répertoire courant

    Returns:
        True si un fichier a été chargé
    """
    path = env_file or find_dotenv(usecwd=True)
    if not path or not Path(path).exists():
        return False
    return load_dotenv(path, override=False)


def load_experiment_file(path: Union[str, Path]) -> Dict[str, str]:
    """
    Lit un fichier d'expérience `clé=valeur`

    Example:
        >>> load_experiment_file('runs/phase.env')
        {'p': '0.1', 'alphas': '0.05,20', 'seed': '7'}

    Raises:
        ParameterError: si le fichier n'existe pas
    """
    path = Path(path)
    if not path.is_file():
        raise ParameterError(f"Fichier d'expérience introuvable: {path}")
    values = dotenv_values(path)
    return {key.strip(): value for key, value in values.items() if value is not None}


def get_env_vars(prefix: str = ENV_PREFIX) -> Dict[str, str]:
    """Variables d'environnement commençant par `prefix`"""
    return {key: value for key, value in os.environ.items() if key.startswith(prefix)}


def display_env_info():
    """Affiche les variables du laboratoire présentes dans l'environnement"""
    variables = get_env_vars()
    if os.getenv('LOG_LEVEL'):
        variables['LOG_LEVEL'] = os.environ['LOG_LEVEL']

    print("\n" + "=" * 60)
    print("🔐 VARIABLES D'ENVIRONNEMENT")
    print("=" * 60)
    if not variables:
        print("   (aucune)")
    for key, value in sorted(variables.items()):
        print(f"   {key} = {value}")
    print("=" * 60 + "\n")
