#!/usr/bin/env python3
"""
Selftest Module
===============

Versions réduites des suites d'invariants, exécutables depuis la CLI.

Vérifications:
- confluence: fermeture par front == balayage naïf
- monotonie et domination des règles
- cheminée: bloquée par la règle modifiée, remplie par la règle standard
- élimination des sites fermés éliminables
- envahissement des boîtes bonnes (et échec sans G2)
- structures bloquantes (et variantes sabotées)
- déterminisme des images
"""

import logging
import time
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np

from .blocking import verify_blocking
from .dynamics import Rule, closure, closure_naive, eliminable_sites, eliminate
from .fixtures import chimney, g2_broken_box, good_box, staircase
from .good_boxes import SIDES, spread_from_side, verify_spread
from .random_init import ExperimentStream, PollutionParams, derive_seed, sample, sample_coupled
from .render import render

logger = logging.getLogger('Percolation.selftest')

RULES = (Rule.STANDARD, Rule.MODIFIED, Rule.MODIFIED_PLUS_VERTICAL)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _random_grids(seed: int, count: int, max_side: int = 32):
    rng = np.random.Generator(np.random.Philox(key=derive_seed(seed, ExperimentStream.SELFTEST, 0)))
    for trial in range(count):
        w, h = (int(v) for v in rng.integers(8, max_side + 1, size=2))
        p = float(rng.uniform(0.01, 0.5))
        q = float(rng.uniform(0.0, 0.2))
        law = PollutionParams(p, q, derive_seed(seed, ExperimentStream.SELFTEST, trial + 1))
        yield sample(w, h, law)


def check_confluence(seed: int, count: int = 60) -> Tuple[bool, str]:
    for g in _random_grids(seed, count):
        for rule in RULES:
            fast, slow = closure(g, rule), closure_naive(g, rule)
            if fast.grid != slow.grid or fast.steps_to_fixpoint != slow.steps_to_fixpoint:
                return False, f"désaccord sur {g!r} ({rule.value})"
    return True, f"{count} grilles × {len(RULES)} règles"


def check_domination(seed: int, count: int = 60) -> Tuple[bool, str]:
    for trial, g in enumerate(_random_grids(seed, count)):
        finals = [closure(g, rule).grid.occupied_mask() for rule in
                  (Rule.MODIFIED, Rule.MODIFIED_PLUS_VERTICAL, Rule.STANDARD)]
        if np.any(finals[0] & ~finals[1]) or np.any(finals[1] & ~finals[2]):
            return False, f"domination violée sur {g!r}"

        low, high = sample_coupled(g.width, g.height, 0.2, [0.02, 0.08],
                                   derive_seed(seed, ExperimentStream.SELFTEST, 10_000 + trial))
        for rule in RULES:
            if np.any(closure(high, rule).grid.occupied_mask() & ~closure(low, rule).grid.occupied_mask()):
                return False, f"monotonie en q violée ({rule.value})"
    return True, f"{count} grilles"


def check_chimney(seed: int) -> Tuple[bool, str]:
    g, (cx, cy) = chimney()
    modified = closure(g, Rule.MODIFIED).grid.occupied_mask()[:, cx]
    standard = closure(g, Rule.STANDARD).grid.occupied_mask()[:, cx]
    passed = not modified[1:-1].any() and standard[1:-1].all()
    return passed, "cheminée ouverte (modifiée), remplie (standard)"


def check_elimination(seed: int, count: int = 60) -> Tuple[bool, str]:
    checked = 0
    for g in _random_grids(seed, count):
        for rule in RULES:
            before = closure(g, rule).grid
            for x, y in eliminable_sites(g, rule):
                after = closure(eliminate(g, rule, (x, y)), rule).grid
                a, b = before.occupied_mask(), after.occupied_mask()
                a[y, x] = b[y, x] = False
                if np.any(a != b):
                    return False, f"désaccord hors de {(x, y)} ({rule.value})"
                checked += 1
    return True, f"{checked} sites éliminés"


def check_spread(seed: int, count: int = 10) -> Tuple[bool, str]:
    for trial in range(count):
        fixture = good_box(seed + trial)
        for side in SIDES:
            if not verify_spread(fixture.grid, fixture.box, fixture.params, side):
                return False, f"envahissement incomplet depuis {side} (graine {seed + trial})"
    for trial in range(3):
        broken = g2_broken_box(seed + trial)
        if spread_from_side(broken.grid, broken.box, 'south'):
            return False, "la variante sans G2 est envahie"
    return True, f"{count} boîtes bonnes, 3 variantes sans G2"


def check_blocking(seed: int, count: int = 5) -> Tuple[bool, str]:
    for trial in range(count):
        fixture = staircase(seed + trial)
        verdict = verify_blocking(fixture.grid, fixture.structure, fixture.geometry.m)
        if not verdict.holds:
            return False, f"escalier {seed + trial}: {verdict.status}"
    for trial in range(2):
        fixture = staircase(seed + trial, sabotage=True)
        verdict = verify_blocking(fixture.grid, fixture.structure, fixture.geometry.m)
        if verdict.status != verdict.VIOLATED:
            return False, f"escalier saboté {seed + trial}: {verdict.status}"
    return True, f"{count} escaliers, 2 sabotés"


def check_render(seed: int) -> Tuple[bool, str]:
    law = PollutionParams(0.1, 0.01, derive_seed(seed, ExperimentStream.SELFTEST, 99))
    images = []
    for _ in range(2):
        initial = sample(48, 48, law)
        images.append(render(initial, closure(initial, Rule.MODIFIED).grid))
    return images[0] == images[1], f"{len(images[0])} octets"


CHECKS: List[Tuple[str, Callable[[int], Tuple[bool, str]]]] = [
    ('confluence', check_confluence),
    ('domination', check_domination),
    ('chimney', check_chimney),
    ('elimination', check_elimination),
    ('spread', check_spread),
    ('blocking', check_blocking),
    ('render', check_render),
]


def run_selftest(seed: int = 0) -> List[CheckResult]:
    """
    Exécute toutes les vérifications

    Une exception dans une vérification est rapportée comme un échec.
    """
    results = []
    for name, check in CHECKS:
        start = time.perf_counter()
        try:
            passed, detail = check(seed)
        except Exception as e:
            logger.exception(f"❌ {name}: exception")
            passed, detail = False, f"{type(e).__name__}: {e}"
        elapsed = time.perf_counter() - start
        logger.info(f"{'✅' if passed else '❌'} {name}: {detail} ({elapsed:.2f}s)")
        results.append(CheckResult(name, passed, detail, elapsed))
    return results
