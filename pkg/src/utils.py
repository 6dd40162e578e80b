#!/usr/bin/env python3
"""
Utilities Module
================

Fonctions utilitaires diverses pour le laboratoire.

Inclut:
- Intervalles de confiance de Wilson et estimations de proportion
- Formatage de nombres, probabilités et durées
- Barres ASCII et tableaux markdown pour les résumés de la CLI
"""

from typing import Any, Dict, NamedTuple

from scipy import stats

CONFIDENCE = 0.95


class ProportionEstimate(NamedTuple):
    """Proportion estimée et son intervalle de confiance à 95%"""
    fraction: float
    ci_low: float
    ci_high: float
    hits: int
    trials: int

    @property
    def ci(self) -> tuple[float, float]:
        return self.ci_low, self.ci_high

    @property
    def center(self) -> float:
        """Milieu de l'intervalle"""
        return 0.5 * (self.ci_low + self.ci_high)


def wilson_interval(hits: int, trials: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    """
    Intervalle de score de Wilson (scipy.stats.binomtest)

    Args:
        hits: Nombre de succès
        trials: Nombre d'essais (>= 1)
        confidence: Niveau de confiance

    Returns:
        Tuple (borne basse, borne haute)

    Example:
        >>> low, high = wilson_interval(50, 100)
        >>> round(low, 3), round(high, 3)
        (0.404, 0.596)
    """
    if trials <= 0:
        return 0.0, 1.0

    ci = stats.binomtest(int(hits), int(trials)).proportion_ci(confidence_level=confidence, method='wilson')
    low = 0.0 if hits == 0 else max(0.0, float(ci.low))
    high = 1.0 if hits == trials else min(1.0, float(ci.high))
    return low, high


def proportion_estimate(hits: int, trials: int, degenerate: bool = False) -> ProportionEstimate:
    """
    Construit une estimation de proportion

    Args:
        hits: Nombre de succès
        trials: Nombre d'essais
        degenerate: True si l'issue est certaine (intervalle de largeur nulle)
    """
    fraction = safe_divide(hits, trials)
    if degenerate:
        return ProportionEstimate(fraction, fraction, fraction, hits, trials)
    low, high = wilson_interval(hits, trials)
    return ProportionEstimate(fraction, low, high, hits, trials)


def format_number(num: int) -> str:
    """
    Formate un nombre avec des séparateurs de milliers

    Example:
        >>> format_number(1234567)
        '1 234 567'
    """
    return f"{num:,}".replace(',', ' ')


def format_duration(seconds: float) -> str:
    """
    Formate une durée en secondes en format lisible

    Returns:
        Durée formatée (ex: "2m 5.3s")
    """
    minutes, secs = divmod(seconds, 60)
    hours, minutes = divmod(int(minutes), 60)

    parts = []
    if hours > 0:
        parts.append(f"{hours}h")
    if minutes > 0:
        parts.append(f"{minutes}m")
    parts.append(f"{secs:.1f}s")

    return " ".join(parts)


def format_probability(value: float) -> str:
    """Notation compacte pour les petites probabilités (ex: 2.17e-04)"""
    if value == 0 or 1e-3 <= abs(value) < 1e3:
        return f"{value:.4f}"
    return f"{value:.2e}"


def generate_ascii_bar(value: float, max_value: float, length: int = 40, char: str = '█') -> str:
    """
    Génère une barre ASCII pour visualiser une valeur

    Example:
        >>> generate_ascii_bar(75, 100, 20)
        '███████████████░░░░░'
    """
    if max_value == 0:
        filled = 0
    else:
        filled = int((value / max_value) * length)

    filled = max(0, min(filled, length))
    return char * filled + '░' * (length - filled)


def create_stats_table(values: Dict[str, Any], title: str = "Résultats") -> str:
    """
    Crée un tableau markdown de métriques

    Args:
        values: Dictionnaire métrique -> valeur
        title: Titre du tableau

    Returns:
        Tableau markdown formaté
    """
    table = f"### {title}\n\n"
    table += "| Métrique | Valeur |\n"
    table += "|----------|--------|\n"

    for key, value in values.items():
        display_key = key.replace('_', ' ').capitalize()

        if isinstance(value, bool):
            display_value = "oui" if value else "non"
        elif isinstance(value, int):
            display_value = format_number(value)
        elif isinstance(value, float):
            display_value = format_probability(value)
        else:
            display_value = str(value)

        table += f"| {display_key} | **{display_value}** |\n"

    return table


def safe_divide(numerator: float, denominator: float, default: float = 0.0) -> float:
    """
    Division sécurisée (évite la division par zéro)
    """
    if denominator == 0:
        return default

    return numerator / denominator


def parse_float_list(text: str) -> list[float]:
    """
    Convertit "0.1, 0.2,0.5" en [0.1, 0.2, 0.5]

    Example:
        >>> parse_float_list("0, 0.5,1")
        [0.0, 0.5, 1.0]
    """
    return [float(part) for part in text.split(',') if part.strip()]


def parse_pair(text: str) -> tuple[int, int]:
    """Convertit "3,4" en (3, 4)"""
    parts = [part.strip() for part in text.replace('x', ',').split(',')]
    if len(parts) != 2:
        raise ValueError(f"Paire attendue, reçu {text!r}")
    return int(parts[0]), int(parts[1])
