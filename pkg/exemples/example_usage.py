#!/usr/bin/env python3
"""
Exemples d'Utilisation du Laboratoire de Percolation
====================================================

Ce fichier contient des exemples pratiques d'utilisation de la bibliothèque.
"""

import sys
from pathlib import Path

# Ajouter le répertoire parent au path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import Config
from src.dynamics import Rule, closure, eventually_occupied
from src.experiments import estimate_qc, scan_q
from src.fixtures import chimney, good_box, staircase
from src.blocking import verify_blocking
from src.good_boxes import verify_spread
from src.lab import PercolationLab
from src.lattice import Grid
from src.random_init import BoundaryCondition, PollutionParams, sample
from src.render import render, write_ppm


# ============================================================================
# EXEMPLE 1 : Tirage et Fermeture
# ============================================================================

def example_basic():
    """Tire une configuration et calcule sa fermeture"""
    print("\n" + "=" * 70)
    print("EXEMPLE 1 : Tirage et Fermeture")
    print("=" * 70)

    law = PollutionParams(p=0.1, q=0.01, seed=7)
    initial = sample(200, 200, law, BoundaryCondition.OCCUPIED_RING)
    result = closure(initial, Rule.MODIFIED)

    print(f"\n📊 Résultats:")
    print(f"   Occupés au départ : {initial.occupied_count}")
    print(f"   Occupés à la fin  : {result.grid.occupied_count}")
    print(f"   Fermés            : {initial.closed_count}")
    print(f"   Pas               : {result.steps_to_fixpoint}")


# ============================================================================
# EXEMPLE 2 : Grille Écrite à la Main
# ============================================================================

def example_text_grid():
    """Les lignes du texte vont du haut (y max) vers le bas"""
    print("\n" + "=" * 70)
    print("EXEMPLE 2 : Grille Textuelle")
    print("=" * 70)

    g = Grid.from_text(".#.\n#x#\n.#.\n")
    print(f"\n{g.to_text()}")
    for rule in Rule:
        final = closure(g, rule).grid
        print(f"   {rule.value:<18} -> {final.occupied_count} occupés")

    grid, center = chimney()
    print(f"\n🏭 Cheminée: modifiée {eventually_occupied(grid, Rule.MODIFIED, center)}, "
          f"standard {eventually_occupied(grid, Rule.STANDARD, center)}")


# ============================================================================
# EXEMPLE 3 : Balayage en q
# ============================================================================

def example_scan():
    """Balayage couplé le long de q = α·p²/log(1/p)"""
    print("\n" + "=" * 70)
    print("EXEMPLE 3 : Balayage")
    print("=" * 70)

    rows = scan_q(0.15, [0.0, 0.5, 2.0, 8.0], 1.0, Rule.MODIFIED, L=60, trials=50,
                  master_seed=1, bc=BoundaryCondition.OCCUPIED_RING)
    for row in rows:
        print(f"   α={row.alpha:<5g} fraction={row.fraction:.2f} [{row.ci_low:.2f}, {row.ci_high:.2f}]")


# ============================================================================
# EXEMPLE 4 : Seuil avec un Oracle
# ============================================================================

def example_threshold():
    """La bissection accepte une fonction q -> fraction à la place de la simulation"""
    print("\n" + "=" * 70)
    print("EXEMPLE 4 : Bissection")
    print("=" * 70)

    result = estimate_qc(0.1, Rule.MODIFIED, L=50, trials=10, master_seed=0, tol=0.05,
                         oracle=lambda q: 1.0 if q < 0.003 else 0.0)
    print(f"\n🎯 q_hat = {result.q_hat:.5f} dans {result.bracket} ({result.outcome})")


# ============================================================================
# EXEMPLE 5 : Certificats Construits
# ============================================================================

def example_certificates():
    """Escalier de blocs sûrs et boîte bonne construits"""
    print("\n" + "=" * 70)
    print("EXEMPLE 5 : Certificats")
    print("=" * 70)

    fixture = staircase(3)
    verdict = verify_blocking(fixture.grid, fixture.structure, fixture.geometry.m)
    print(f"\n🚧 Escalier: {verdict.status} (diamètre max {verdict.max_cluster_diameter})")

    sabotaged = staircase(3, sabotage=True)
    verdict = verify_blocking(sabotaged.grid, sabotaged.structure, sabotaged.geometry.m)
    print(f"🚧 Escalier saboté: {verdict.status}, témoin {verdict.witness}")

    box = good_box(0)
    print(f"🌊 Boîte bonne envahie depuis le sud: {verify_spread(box.grid, box.box, box.params, 'south')}")


# ============================================================================
# EXEMPLE 6 : Laboratoire, Cache et Image
# ============================================================================

def example_lab():
    """Le laboratoire applique la configuration, le cache et le budget mémoire"""
    print("\n" + "=" * 70)
    print("EXEMPLE 6 : Laboratoire")
    print("=" * 70)

    config = Config('configs/config.yaml')
    config.set('experiments.trials', 40)
    lab = PercolationLab(config)

    result = lab.qc(0.15, Rule.MODIFIED, 40, 40, seed=2, tol=0.25, bc=BoundaryCondition.FREE)
    print(f"\n🎯 q_c ≈ {result.q_hat:.3e} (relancer l'exemple relit le cache)")

    summary = lab.simulate(120, PollutionParams(0.1, 0.01, 7), Rule.MODIFIED, BoundaryCondition.OCCUPIED_RING)
    path = write_ppm(render(summary.initial, summary.final), 'results/example.ppm')
    print(f"🖼️  Image: {path}")


# ============================================================================
# Point d'Entrée
# ============================================================================

def main():
    """Exécute tous les exemples (commentez ceux que vous ne voulez pas)"""
    print("\n" + "=" * 70)
    print("EXEMPLES D'UTILISATION - PERCOLATION POLLUÉE".center(70))
    print("=" * 70)

    example_basic()
    example_text_grid()
    example_scan()
    example_threshold()
    example_certificates()
    # example_lab()  # écrit dans .cache/ et results/

    print("\n" + "=" * 70)
    print("✅ Exemples terminés!")
    print("=" * 70)


if __name__ == '__main__':
    main()
