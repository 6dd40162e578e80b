#!/usr/bin/env python3
"""
Script de Vérification de l'Environnement
==========================================

Vérifie que le laboratoire peut tourner: fichier .env, variables
PERCOLATION_*, configuration, budget mémoire et noyaux compilés.

Usage:
    python scripts/check_env.py [--config configs/config.yaml]
"""

import argparse
import math
import sys
import time
from importlib import metadata
from pathlib import Path

# Ajouter le répertoire parent au path
sys.path.insert(0, str(Path(__file__).parent.parent))

from dotenv import find_dotenv

from src.budget import MemoryBudget
from src.config import Config
from src.dynamics import Rule, closure
from src.env_loader import display_env_info, load_environment
from src.fixtures import chimney
from src.lattice import CellState

PACKAGES = ['numpy', 'numba', 'scipy', 'matplotlib', 'PyYAML', 'python-dotenv']


def main():
    """Vérifie la configuration de l'environnement"""
    parser = argparse.ArgumentParser(description="Vérification de l'environnement du laboratoire")
    parser.add_argument('--config', type=str, default='configs/config.yaml')
    args = parser.parse_args()

    print("\n" + "=" * 70)
    print("🔍 VÉRIFICATION DE L'ENVIRONNEMENT".center(70))
    print("=" * 70)

    problems = []

    # 1. Fichier .env (optionnel)
    print("\n📁 Recherche du fichier .env...")
    env_file = find_dotenv(usecwd=True)
    if env_file:
        load_environment(env_file)
        print(f"✅ Fichier .env chargé: {env_file}")
    else:
        print("ℹ️  Aucun fichier .env (valeurs de la configuration utilisées)")

    display_env_info()

    # 2. Paquets installés
    print("📦 Paquets requis...")
    for name in PACKAGES:
        try:
            print(f"   ✅ {name:<14} {metadata.version(name)}")
        except metadata.PackageNotFoundError:
            print(f"   ❌ {name:<14} absent")
            problems.append(f"installer {name} (pip install -r requirements.txt)")

    # 3. Configuration
    print(f"\n📋 Configuration: {args.config}")
    config = Config(args.config)
    is_valid, errors = config.validate()
    if is_valid:
        print("✅ Configuration valide")
    for error in errors:
        print(f"   ⚠️  {error}")
        problems.append(error)

    # 4. Budget mémoire
    budget = MemoryBudget.from_env(config.get('limits.memory_budget_mb'))
    side = math.isqrt(budget.max_cells)
    print(f"\n💾 {budget}: boîtes jusqu'à {side} x {side} cellules")

    # 5. Compilation des noyaux
    print("\n⚙️  Compilation du noyau de fermeture...")
    start = time.perf_counter()
    grid, center = chimney()
    result = closure(grid, Rule.STANDARD)
    elapsed = time.perf_counter() - start
    if result.grid.get_state(center) is CellState.OCCUPIED:
        print(f"✅ Noyau prêt ({elapsed:.1f}s, compilation comprise)")
    else:
        print("❌ Résultat inattendu sur la cheminée")
        problems.append("noyau de fermeture incohérent")

    # 6. Résumé final
    print("\n" + "=" * 70)
    print("📋 RÉSUMÉ".center(70))
    print("=" * 70)

    if not problems:
        print("\n✅ Votre environnement est correctement configuré!")
        print("\n🚀 Vous pouvez maintenant exécuter:")
        print("   python scripts/percolation.py selftest")
        print("\n" + "=" * 70)
        return 0

    print("\n⚠️  Votre environnement nécessite des corrections")
    print("\n📝 Actions à faire:")
    for i, problem in enumerate(problems, 1):
        print(f"   {i}. {problem}")
    print("\n" + "=" * 70)
    return 1


if __name__ == '__main__':
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n\n⚠️  Interruption par l'utilisateur (Ctrl+C)")
        sys.exit(130)
    except Exception as e:
        print(f"\n❌ Erreur inattendue: {e}")
        import traceback
        traceback.print_exc()
        sys.exit(1)
