#!/usr/bin/env python3
"""
Good Boxes Module
=================

Boîtes « bonnes » (conditions G1 à G6) et vérification de l'envahissement.

Conditions évaluées sur une boîte carrée S:
- G1: deux sites fermés sont à distance ℓ∞ >= margin
- G2: chaque site fermé voit un site occupé à distance <= r dans les
  quatre directions axiales, dans S
- G3: tout intervalle horizontal ou vertical de iv cellules de S contient
  un site occupé
- G4: toute bande strip_w × strip_h de S contient au plus closed_cap sites fermés
- G5: aucun site fermé à distance < margin du bord de S
- G6: au plus un site fermé par ligne et par colonne de S

Si S est bonne et qu'un intervalle extérieur de son bord est entièrement
occupé, la règle modifiée occupe tous les sites non fermés de S.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .dynamics import Rule, closure
from .errors import ContractError, GridBoundsError, ParameterError
from .lattice import CellState, Grid, Rect, summed_area, window_sums
from .random_init import ExperimentStream, PollutionParams, derive_seed, sample
from .utils import ProportionEstimate, proportion_estimate

logger = logging.getLogger('Percolation.good_boxes')

CONDITIONS = ('g1', 'g2', 'g3', 'g4', 'g5', 'g6')
SIDES = ('north', 'south', 'east', 'west')


def recommended_n(p: float) -> int:
    """n = ⌊log log(1/p)⌋, au moins 2"""
    if not 0.0 < p < 1.0:
        raise ParameterError(f"p doit être dans ]0, 1[ (p={p})")
    inner = math.log(1.0 / p)
    return max(2, math.floor(math.log(inner))) if inner > 1.0 else 2


def good_q(p: float, n: int) -> float:
    """Densité de sites fermés q = p² / (log(1/p) · n⁴)"""
    return p * p / (math.log(1.0 / p) * n ** 4)


@dataclass(frozen=True)
class GoodBoxParams:
    """
    Paramètres géométriques d'une boîte

    Attributes:
        side (int): Côté N de la boîte
        r (int): Portée de G2
        iv (int): Longueur des intervalles de G3
        strip_w (int): Largeur des bandes de G4
        strip_h (int): Hauteur des bandes de G4
        closed_cap (float): Nombre maximal de fermés par bande (G4)
        margin (int): Séparation de G1 et marge de G5
    """
    side: int
    r: int
    iv: int
    strip_w: int
    strip_h: int
    closed_cap: float
    margin: int
    n: Optional[int] = None
    p: Optional[float] = None

    def __post_init__(self):
        for name in ('side', 'r', 'iv', 'strip_w', 'strip_h', 'margin'):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} doit être >= 1 (reçu {getattr(self, name)})")
        if self.closed_cap < 0:
            raise ParameterError("closed_cap doit être positif")

    @classmethod
    def from_probability(cls, n: int, p: float) -> 'GoodBoxParams':
        if n < 2:
            raise ParameterError(f"n doit être >= 2 (n={n})")
        if not 0.0 < p < 1.0:
            raise ParameterError(f"p doit être dans ]0, 1[ (p={p})")

        log_term = math.log(1.0 / p)
        return cls(
            side=math.floor(n * log_term / p),
            r=math.ceil(n / p),
            iv=math.floor(3 * log_term / p),
            strip_w=math.floor(n * log_term / p),
            strip_h=math.floor(n * n / p),
            closed_cap=n / 4,
            margin=2 * math.ceil(n / p),
            n=n, p=p
        )

    @classmethod
    def desk_scale(cls, side: int, r: int, iv: int, strip_w: int, strip_h: int,
                   closed_cap: float, margin: int) -> 'GoodBoxParams':
        return cls(side, r, iv, strip_w, strip_h, closed_cap, margin)


@dataclass(frozen=True)
class Witness:
    """Témoin d'une condition violée, en coordonnées de la grille"""
    kind: str
    cells: Tuple[Tuple[int, int], ...] = ()
    rect: Optional[Rect] = None
    direction: Optional[str] = None

    def to_text(self) -> str:
        parts = [self.kind]
        if self.cells:
            parts.append('cells=' + ';'.join(f"{x},{y}" for x, y in self.cells))
        if self.rect is not None:
            parts.append(f"rect={self.rect.to_text()}")
        if self.direction:
            parts.append(f"direction={self.direction}")
        return ' '.join(parts)


@dataclass
class GoodReport:
    """Verdicts G1 à G6 et témoins des conditions violées"""
    g1: bool = True
    g2: bool = True
    g3: bool = True
    g4: bool = True
    g5: bool = True
    g6: bool = True
    witnesses: Dict[str, Witness] = field(default_factory=dict)

    @property
    def good(self) -> bool:
        return all(self.flags().values())

    def flags(self) -> Dict[str, bool]:
        return {name: getattr(self, name) for name in CONDITIONS}

    def fail(self, name: str, witness: Witness):
        setattr(self, name, False)
        self.witnesses[name] = witness

    def to_lines(self) -> List[str]:
        """Format texte: une ligne de verdicts puis une ligne par témoin"""
        lines = ['good ' + ' '.join(f"{k}={int(v)}" for k, v in self.flags().items())]
        for name, witness in self.witnesses.items():
            lines.append(f"witness {name} {witness.to_text()}")
        return lines


# ============================================================================
# Conditions
# ============================================================================

def _first(mask: np.ndarray) -> Optional[Tuple[int, int]]:
    """Premier indice (ligne, colonne) vrai en ordre de balayage"""
    hits = np.argwhere(mask)
    return (int(hits[0][0]), int(hits[0][1])) if len(hits) else None


def _check_g1(report, closed, sat_closed, box, gp):
    # fenêtre (2·margin - 1)² centrée sur chaque fermé, bornée à la boîte
    ys, xs = np.nonzero(closed)
    reach = gp.margin - 1
    for y, x in zip(ys, xs):
        y0, y1 = max(0, y - reach), min(closed.shape[0], y + reach + 1)
        x0, x1 = max(0, x - reach), min(closed.shape[1], x + reach + 1)
        count = sat_closed[y1, x1] - sat_closed[y0, x1] - sat_closed[y1, x0] + sat_closed[y0, x0]
        if count > 1:
            neighbours = np.argwhere(closed[y0:y1, x0:x1])
            oy, ox = next((int(a) + y0, int(b) + x0) for a, b in neighbours if (a + y0, b + x0) != (y, x))
            report.fail('g1', Witness('pair', ((box.x0 + int(x), box.y0 + int(y)), (box.x0 + ox, box.y0 + oy))))
            return


def _check_g2(report, closed, occupied, box, gp):
    side_h, side_w = occupied.shape
    row_sum = np.zeros((side_h, side_w + 1), dtype=np.int64)
    row_sum[:, 1:] = np.cumsum(occupied, axis=1)
    col_sum = np.zeros((side_h + 1, side_w), dtype=np.int64)
    col_sum[1:, :] = np.cumsum(occupied, axis=0)

    for y, x in zip(*np.nonzero(closed)):
        spans = {
            'east': row_sum[y, min(side_w, x + gp.r + 1)] - row_sum[y, x + 1],
            'west': row_sum[y, x] - row_sum[y, max(0, x - gp.r)],
            'north': col_sum[min(side_h, y + gp.r + 1), x] - col_sum[y + 1, x],
            'south': col_sum[y, x] - col_sum[max(0, y - gp.r), x],
        }
        for direction, count in spans.items():
            if count == 0:
                report.fail('g2', Witness('site', ((box.x0 + int(x), box.y0 + int(y)),), direction=direction))
                return


def _check_g3(report, occupied, box, gp):
    side_h, side_w = occupied.shape
    if gp.iv <= side_w:
        row_sum = np.zeros((side_h, side_w + 1), dtype=np.int64)
        row_sum[:, 1:] = np.cumsum(occupied, axis=1)
        empty = (row_sum[:, gp.iv:] - row_sum[:, :-gp.iv]) == 0
        hit = _first(empty)
        if hit is not None:
            y, x = hit
            report.fail('g3', Witness('interval', rect=Rect(box.x0 + x, box.y0 + y, gp.iv, 1)))
            return
    if gp.iv <= side_h:
        col_sum = np.zeros((side_h + 1, side_w), dtype=np.int64)
        col_sum[1:, :] = np.cumsum(occupied, axis=0)
        empty = (col_sum[gp.iv:, :] - col_sum[:-gp.iv, :]) == 0
        hit = _first(empty)
        if hit is not None:
            y, x = hit
            report.fail('g3', Witness('interval', rect=Rect(box.x0 + x, box.y0 + y, 1, gp.iv)))


def _check_g4(report, closed, sat_closed, box, gp):
    side_h, side_w = closed.shape
    if gp.strip_w > side_w or gp.strip_h > side_h:
        return
    counts = window_sums(sat_closed, gp.strip_h, gp.strip_w)
    hit = _first(counts > gp.closed_cap)
    if hit is not None:
        y, x = hit
        report.fail('g4', Witness('strip', rect=Rect(box.x0 + x, box.y0 + y, gp.strip_w, gp.strip_h)))


def _check_g5(report, closed, box, gp):
    side_h, side_w = closed.shape
    ys, xs = np.mgrid[0:side_h, 0:side_w]
    distance = np.minimum(np.minimum(xs, side_w - 1 - xs), np.minimum(ys, side_h - 1 - ys))
    hit = _first(closed & (distance < gp.margin))
    if hit is not None:
        y, x = hit
        report.fail('g5', Witness('site', ((box.x0 + x, box.y0 + y),)))


def _check_g6(report, closed, box):
    rows = np.nonzero(closed.sum(axis=1) > 1)[0]
    if len(rows):
        y = int(rows[0])
        report.fail('g6', Witness('row', rect=Rect(box.x0, box.y0 + y, closed.shape[1], 1)))
        return
    cols = np.nonzero(closed.sum(axis=0) > 1)[0]
    if len(cols):
        x = int(cols[0])
        report.fail('g6', Witness('column', rect=Rect(box.x0 + x, box.y0, 1, closed.shape[0])))


def is_good_box(g: Grid, box: Rect, gp: GoodBoxParams) -> GoodReport:
    """
    Évalue littéralement G1 à G6 sur la boîte

    Raises:
        GridBoundsError: si la boîte sort de la grille
    """
    if box.is_empty or not box.within(g.width, g.height):
        raise GridBoundsError(f"Boîte {box} hors de la grille {g.width}x{g.height}")

    occupied = g.occupied_mask()[box.slices()]
    closed = g.closed_mask()[box.slices()]
    sat_closed = summed_area(closed)

    report = GoodReport()
    _check_g1(report, closed, sat_closed, box, gp)
    _check_g2(report, closed, occupied, box, gp)
    _check_g3(report, occupied, box, gp)
    _check_g4(report, closed, sat_closed, box, gp)
    _check_g5(report, closed, box, gp)
    _check_g6(report, closed, box)
    return report


# ============================================================================
# Envahissement depuis un côté
# ============================================================================

def boundary_interval(box: Rect, side: str) -> Rect:
    """Intervalle extérieur d'un côté de la boîte, coins diagonaux exclus"""
    if side == 'south':
        return Rect(box.x0, box.y0 - 1, box.w, 1)
    if side == 'north':
        return Rect(box.x0, box.y1, box.w, 1)
    if side == 'west':
        return Rect(box.x0 - 1, box.y0, 1, box.h)
    if side == 'east':
        return Rect(box.x1, box.y0, 1, box.h)
    raise ParameterError(f"Côté inconnu: {side!r}")


def spread_from_side(g: Grid, box: Rect, side: str) -> bool:
    """
    Occupe l'intervalle extérieur du côté choisi puis ferme la dynamique
    modifiée; True si tous les sites non fermés de la boîte sont occupés
    """
    interval = boundary_interval(box, side)
    if not interval.within(g.width, g.height):
        raise ContractError(f"L'intervalle extérieur {side} de {box} sort de la grille")

    selection = np.zeros((g.height, g.width), dtype=bool)
    selection[interval.slices()] = True
    final = closure(g.with_states(selection, CellState.OCCUPIED), Rule.MODIFIED).grid

    inside = final.occupied_mask()[box.slices()] | final.closed_mask()[box.slices()]
    return bool(inside.all())


def verify_spread(g: Grid, box: Rect, gp: GoodBoxParams, side: str) -> bool:
    """
    Envahissement d'une boîte bonne depuis un côté

    Raises:
        ContractError: si la boîte n'est pas bonne ou si l'intervalle sort de la grille
    """
    report = is_good_box(g, box, gp)
    if not report.good:
        failed = [name for name, ok in report.flags().items() if not ok]
        raise ContractError(f"La boîte {box} n'est pas bonne ({', '.join(failed)})")
    return spread_from_side(g, box, side)


# ============================================================================
# Estimation
# ============================================================================

@dataclass
class GoodEstimate:
    """Fraction de boîtes bonnes et fréquences d'échec par condition"""
    estimate: ProportionEstimate
    failure_fractions: Dict[str, float]

    @property
    def fraction(self) -> float:
        return self.estimate.fraction


def estimate_good_prob(gp: GoodBoxParams, params: PollutionParams, trials: int,
                       budget=None) -> GoodEstimate:
    """
    Estimation Monte Carlo de la probabilité qu'une boîte soit bonne

    Les graines d'essai ne dépendent pas de q: deux appels à q différents
    sont couplés.
    """
    if trials < 1:
        raise ParameterError("trials doit être >= 1")
    if budget is not None:
        budget.check(gp.side * gp.side, "boîte")

    box = Rect(0, 0, gp.side, gp.side)
    hits = 0
    failures = dict.fromkeys(CONDITIONS, 0)
    for trial in range(trials):
        law = params.with_seed(derive_seed(params.seed, ExperimentStream.GOOD_BOXES, trial))
        report = is_good_box(sample(gp.side, gp.side, law), box, gp)
        hits += report.good
        for name, ok in report.flags().items():
            failures[name] += not ok

    logger.info(f"✅ Boîtes bonnes: {hits}/{trials}")
    return GoodEstimate(
        estimate=proportion_estimate(hits, trials),
        failure_fractions={name: count / trials for name, count in failures.items()}
    )
