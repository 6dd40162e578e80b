#!/usr/bin/env python3
"""
Experiments Module
==================

Mesures Monte Carlo sur des boîtes L × L.

Expériences:
- estimate_occupation: probabilité que la cible (centre) soit finalement occupée
- scan_q: balayage couplé de q = α·p²/(log 1/p)^β
- estimate_qc: bissection du seuil q où la fraction croise 1/2
- compare_rules: seuils des règles standard et modifiée, et leur rapport
- good_box_window: densité de boîtes bonnes et plus grande composante

Toutes les sorties sont des fonctions pures de la spécification et de la
graine maîtresse. Les essais peuvent tourner sur un pool de threads: le
résultat est un simple comptage, indépendant de l'ordonnancement.
"""

import csv
import io
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage

from .budget import MemoryBudget
from .dynamics import Rule, closure
from .errors import ParameterError
from .good_boxes import GoodBoxParams, is_good_box
from .lattice import Cell, Grid, Rect, occupied_clusters
from .random_init import (
    BoundaryCondition, ExperimentStream, PollutionParams, derive_seed, sample, sample_coupled
)
from .utils import ProportionEstimate, proportion_estimate

logger = logging.getLogger('Percolation.experiments')

_FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


def default_L(p: float) -> int:
    """
    Côté de boîte par défaut L = ⌈8/p · log(1/p)⌉

    Example:
        >>> default_L(0.1)
        185
    """
    if not 0.0 < p < 1.0:
        raise ParameterError(f"Côté par défaut indéfini pour p={p}")
    return math.ceil(8.0 / p * math.log(1.0 / p))


def scan_q_value(p: float, alpha: float, beta: float) -> float:
    """q = α·p²/(log(1/p))^β"""
    return alpha * p * p / math.log(1.0 / p) ** beta


def alpha_of(p: float, q: float) -> float:
    """α = q·log(1/p)/p² (0 si p vaut 0 ou 1)"""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return q * math.log(1.0 / p) / (p * p)


def _count(trials: Sequence[int], trial_fn: Callable[[int], int], workers: int) -> int:
    if workers <= 1 or len(trials) < 2:
        return sum(trial_fn(t) for t in trials)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return sum(executor.map(trial_fn, trials))


def _is_degenerate(p: float, bc: BoundaryCondition) -> bool:
    return p == 1.0 or (p == 0.0 and bc is BoundaryCondition.FREE)


# ============================================================================
# Spécification et lignes de résultats
# ============================================================================

@dataclass(frozen=True)
class TrialSpec:
    """
    Spécification d'une estimation d'occupation

    Attributes:
        rule (Rule): Règle de mise à jour
        L (int): Côté de la boîte
        p, q (float): Densités occupée et fermée
        bc (BoundaryCondition): Condition au bord
        trials (int): Nombre d'essais
        master_seed (int): Graine maîtresse
        target (Cell): Cellule cible (centre par défaut)
    """
    rule: Rule
    L: int
    p: float
    q: float
    bc: BoundaryCondition = BoundaryCondition.FREE
    trials: int = 100
    master_seed: int = 0
    target: Optional[Cell] = None

    def __post_init__(self):
        PollutionParams(self.p, self.q)
        if self.L < 1:
            raise ParameterError(f"L doit être >= 1 (L={self.L})")
        if self.trials < 1:
            raise ParameterError(f"trials doit être >= 1 (trials={self.trials})")
        if self.target is None:
            object.__setattr__(self, 'target', (self.L // 2, self.L // 2))
        x, y = self.target
        if not (0 <= x < self.L and 0 <= y < self.L):
            raise ParameterError(f"Cible {self.target} hors de la boîte {self.L}x{self.L}")

    def with_q(self, q: float) -> 'TrialSpec':
        return TrialSpec(self.rule, self.L, self.p, q, self.bc, self.trials, self.master_seed, self.target)

    def to_dict(self) -> dict:
        return {
            'rule': self.rule.value, 'L': self.L, 'p': self.p, 'q': self.q,
            'bc': self.bc.value, 'trials': self.trials,
            'master_seed': self.master_seed, 'target': list(self.target)
        }


@dataclass
class ScanRow:
    """Une ligne de résultat, dans l'ordre exact des colonnes CSV"""
    p: float
    q: float
    alpha: float
    beta_label: str
    rule: str
    L: int
    bc: str
    trials: int
    hits: int
    fraction: float
    ci_low: float
    ci_high: float
    seconds: float = 0.0

    @classmethod
    def from_estimate(cls, spec: TrialSpec, estimate: ProportionEstimate, alpha: float,
                      beta_label: str, seconds: float) -> 'ScanRow':
        return cls(
            p=spec.p, q=spec.q, alpha=alpha, beta_label=beta_label,
            rule=spec.rule.value, L=spec.L, bc=spec.bc.value,
            trials=estimate.trials, hits=estimate.hits, fraction=estimate.fraction,
            ci_low=estimate.ci_low, ci_high=estimate.ci_high, seconds=seconds
        )

    @property
    def estimate(self) -> ProportionEstimate:
        return ProportionEstimate(self.fraction, self.ci_low, self.ci_high, self.hits, self.trials)


SCAN_FIELDS = [f.name for f in fields(ScanRow)]


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows: Sequence, columns: Sequence[str]) -> str:
    """CSV avec en-tête, point décimal, fin de ligne '\\n'"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        values = asdict(row)
        writer.writerow([_format_cell(values[name]) for name in columns])
    return buffer.getvalue()


def write_scan_csv(rows: Sequence[ScanRow], path: Union[str, Path]) -> Path:
    """Écrit les lignes de scan (fichier écrit en une fois)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(rows_to_csv(rows, SCAN_FIELDS))
    logger.info(f"💾 {len(rows)} lignes écrites dans {path}")
    return path


# ============================================================================
# Occupation de la cible
# ============================================================================

def _trial_seed(master_seed: int, trial: int) -> int:
    return derive_seed(master_seed, ExperimentStream.OCCUPATION, trial)


def _occupation_hits(spec: TrialSpec, trials: Sequence[int], workers: int) -> int:
    tx, ty = spec.target

    def one(trial: int) -> int:
        law = PollutionParams(spec.p, spec.q, _trial_seed(spec.master_seed, trial))
        final = closure(sample(spec.L, spec.L, law, spec.bc), spec.rule).grid
        return int(final.occupied_mask()[ty, tx])

    return _count(trials, one, workers)


def estimate_occupation(spec: TrialSpec, workers: int = 1, record_timing: bool = False,
                        budget: Optional[MemoryBudget] = None) -> ScanRow:
    """
    Fraction des essais où la cible est finalement occupée

    Returns:
        ScanRow (α = q·log(1/p)/p², β = 1)
    """
    if budget is not None:
        budget.check(spec.L * spec.L, "boîte")

    start = time.perf_counter()
    hits = _occupation_hits(spec, range(spec.trials), workers)
    elapsed = time.perf_counter() - start

    estimate = proportion_estimate(hits, spec.trials, degenerate=_is_degenerate(spec.p, spec.bc))
    logger.info(f"✅ Occupation p={spec.p} q={spec.q}: {hits}/{spec.trials} ({elapsed:.2f}s)")
    return ScanRow.from_estimate(spec, estimate, alpha_of(spec.p, spec.q), "beta=1",
                                 elapsed if record_timing else 0.0)


def scan_q(p: float, alphas: Sequence[float], beta: float, rule: Rule, L: int, trials: int,
           master_seed: int, bc: BoundaryCondition = BoundaryCondition.FREE,
           workers: int = 1, record_timing: bool = False,
           budget: Optional[MemoryBudget] = None) -> List[ScanRow]:
    """
    Balayage couplé en q = α·p²/(log(1/p))^β

    Un même champ d'uniformes par essai sert à tous les α: pour chaque
    essai, l'occupation de la cible est décroissante en α.

    Raises:
        ParameterError: si un q obtenu est invalide (q < 0 ou p + q > 1)
    """
    if not 0.0 < p < 1.0:
        raise ParameterError(f"p doit être dans ]0, 1[ pour un scan (p={p})")
    if not alphas:
        return []
    qs = [scan_q_value(p, alpha, beta) for alpha in alphas]
    specs = [TrialSpec(rule, L, p, q, bc, trials, master_seed) for q in qs]
    if budget is not None:
        budget.check(L * L, "boîte")

    tx, ty = specs[0].target

    def one(trial: int) -> np.ndarray:
        grids = sample_coupled(L, L, p, qs, _trial_seed(master_seed, trial), bc)
        return np.array([closure(g, rule).grid.occupied_mask()[ty, tx] for g in grids], dtype=np.int64)

    logger.info(f"🚀 Scan p={p}, {len(alphas)} valeurs de α, β={beta:g}, L={L}, {trials} essais")
    start = time.perf_counter()
    if workers <= 1:
        hits = sum((one(t) for t in range(trials)), np.zeros(len(qs), dtype=np.int64))
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            hits = sum(executor.map(one, range(trials)), np.zeros(len(qs), dtype=np.int64))
    elapsed = time.perf_counter() - start

    rows = []
    for spec, alpha, count in zip(specs, alphas, hits):
        estimate = proportion_estimate(int(count), trials, degenerate=_is_degenerate(p, bc))
        seconds = elapsed / len(qs) if record_timing else 0.0
        rows.append(ScanRow.from_estimate(spec, estimate, float(alpha), f"beta={beta:g}", seconds))
    logger.info(f"✅ Scan terminé en {elapsed:.2f}s")
    return rows


# ============================================================================
# Seuil et comparaison des règles
# ============================================================================

@dataclass
class QcResult:
    """
    Résultat d'une bissection de seuil

    outcome vaut 'bracketed', 'no-threshold' (fraction < 1/2 dès q = 0) ou
    'above-range' (fraction >= 1/2 jusqu'à q = 1 - p).
    """
    p: float
    rule: str
    L: int
    q_hat: float
    bracket: Tuple[float, float]
    outcome: str
    evaluations: List[Tuple[float, float, int]] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.outcome == 'bracketed'

    def to_dict(self) -> dict:
        data = asdict(self)
        data['bracket'] = list(self.bracket)
        data['evaluations'] = [list(e) for e in self.evaluations]
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'QcResult':
        return cls(
            p=data['p'], rule=data['rule'], L=data['L'], q_hat=data['q_hat'],
            bracket=tuple(data['bracket']), outcome=data['outcome'],
            evaluations=[tuple(e) for e in data.get('evaluations', [])]
        )


class _MonteCarloOracle:
    """Fraction estimée à q, essais doublés tant que l'intervalle contient 1/2"""

    def __init__(self, base: TrialSpec, max_trials: int, workers: int):
        self.base = base
        self.max_trials = max(max_trials, base.trials)
        self.workers = workers

    def __call__(self, q: float) -> Tuple[float, int]:
        spec = self.base.with_q(q)
        n = spec.trials
        hits = _occupation_hits(spec, range(n), self.workers)
        estimate = proportion_estimate(hits, n)
        while estimate.ci_low < 0.5 < estimate.ci_high and n < self.max_trials:
            extra = min(n, self.max_trials - n)
            hits += _occupation_hits(spec, range(n, n + extra), self.workers)
            n += extra
            estimate = proportion_estimate(hits, n)
            logger.debug(f"🔁 q={q:.3e}: intervalle à cheval sur 1/2, {n} essais")
        return estimate.center, n


def estimate_qc(p: float, rule: Rule, L: int, trials: int, master_seed: int, tol: float,
                bc: BoundaryCondition = BoundaryCondition.FREE,
                oracle: Optional[Callable[[float], float]] = None,
                max_trials: Optional[int] = None, max_iterations: int = 64,
                workers: int = 1) -> QcResult:
    """
    Bissection sur q de la fraction couplée, cible 1/2

    Le crochet initial est [0, 1 - p]. À chaque étape la décision se fait
    sur le milieu de l'intervalle de score; la bissection s'arrête quand
    la largeur du crochet est <= tol · q_hat.

    Args:
        oracle: Fonction q -> fraction remplaçant la simulation (tests)
        max_trials: Plafond des essais après doublements (défaut 8 × trials)

    Raises:
        ParameterError: si tol <= 0
    """
    if tol <= 0:
        raise ParameterError(f"tol doit être > 0 (tol={tol})")
    if not 0.0 <= p < 1.0:
        raise ParameterError(f"p doit être dans [0, 1[ (p={p})")

    if oracle is None:
        base = TrialSpec(rule, L, p, 0.0, bc, trials, master_seed)
        mc = _MonteCarloOracle(base, max_trials or 8 * trials, workers)
        evaluate = mc
    else:
        evaluate = lambda q: (float(oracle(q)), 0)

    evaluations = []

    def above_half(q: float) -> bool:
        fraction, n = evaluate(q)
        evaluations.append((q, fraction, n))
        return fraction >= 0.5

    lo, hi = 0.0, 1.0 - p
    result = QcResult(p, rule.value, L, 0.0, (0.0, 0.0), 'no-threshold', evaluations)
    if not above_half(lo):
        logger.warning(f"⚠️  Pas de seuil: fraction < 1/2 dès q = 0 (p={p}, {rule.value})")
        return result
    if above_half(hi):
        result.q_hat, result.bracket, result.outcome = hi, (hi, hi), 'above-range'
        return result

    for _ in range(max_iterations):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * mid:
            break
        if above_half(mid):
            lo = mid
        else:
            hi = mid

    result.q_hat, result.bracket, result.outcome = 0.5 * (lo + hi), (lo, hi), 'bracketed'
    logger.info(f"✅ q_c({rule.value}, p={p}) ≈ {result.q_hat:.4e} dans [{lo:.4e}, {hi:.4e}]")
    return result


@dataclass
class CompareRow:
    p: float
    L: int
    q_hat_standard: float
    q_hat_modified: float
    ratio: float


COMPARE_FIELDS = [f.name for f in fields(CompareRow)]


def compare_rules(p_list: Sequence[float], L_rule: Union[int, Callable[[float], int], None],
                  trials: int, master_seed: int, tol: float = 0.25,
                  bc: BoundaryCondition = BoundaryCondition.FREE, workers: int = 1,
                  oracles: Optional[dict] = None) -> List[CompareRow]:
    """
    Seuils des règles standard et modifiée pour chaque p, et leur rapport

    Args:
        L_rule: Côté fixe, fonction p -> L, ou None pour default_L
        oracles: {Rule: fonction (p, q) -> fraction} remplaçant la simulation
    """
    rows = []
    for p in p_list:
        if L_rule is None:
            L = default_L(p)
        elif callable(L_rule):
            L = int(L_rule(p))
        else:
            L = int(L_rule)

        q_hats = {}
        for rule in (Rule.STANDARD, Rule.MODIFIED):
            oracle = None
            if oracles and rule in oracles:
                oracle = (lambda fn, pp: (lambda q: fn(pp, q)))(oracles[rule], p)
            q_hats[rule] = estimate_qc(p, rule, L, trials, master_seed, tol, bc,
                                       oracle=oracle, workers=workers).q_hat

        std, mod = q_hats[Rule.STANDARD], q_hats[Rule.MODIFIED]
        if mod > 0:
            ratio = std / mod
        else:
            ratio = math.inf if std > 0 else math.nan
        rows.append(CompareRow(p, L, std, mod, ratio))
        logger.info(f"📊 p={p}: q_std={std:.3e}, q_mod={mod:.3e}, rapport {ratio:.3f}")
    return rows


def write_compare_csv(rows: Sequence[CompareRow], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(rows_to_csv(rows, COMPARE_FIELDS))
    logger.info(f"💾 Comparaison écrite dans {path}")
    return path


# ============================================================================
# Fenêtres de boîtes bonnes
# ============================================================================

@dataclass
class WindowResult:
    """Densité de boîtes bonnes et fraction de la plus grande composante"""
    density: ProportionEstimate
    largest_fraction: float
    per_trial_largest: List[float]


def _good_field(g: Grid, gp: GoodBoxParams, wx: int, wy: int) -> np.ndarray:
    good = np.zeros((wy, wx), dtype=bool)
    for by in range(wy):
        for bx in range(wx):
            box = Rect(bx * gp.side, by * gp.side, gp.side, gp.side)
            good[by, bx] = is_good_box(g, box, gp).good
    return good


def largest_component_fraction(good: np.ndarray) -> float:
    """Fraction des boîtes de la fenêtre dans la plus grande composante 4-connexe"""
    labels, count = ndimage.label(good, structure=_FOUR_CONNECTED)
    if count == 0:
        return 0.0
    sizes = np.bincount(labels.ravel())[1:]
    return float(sizes.max()) / good.size


def good_box_window(p: float, n: int, q: float, window: Tuple[int, int], trials: int,
                    master_seed: int, gp: Optional[GoodBoxParams] = None,
                    budget: Optional[MemoryBudget] = None) -> WindowResult:
    """
    Tire une grille couvrant wx × wy boîtes et marque les boîtes bonnes

    Les boîtes sont disjointes: leurs qualités sont indépendantes.

    Raises:
        MemoryBudgetError: si la grille dépasse le budget
    """
    wx, wy = window
    if wx < 1 or wy < 1 or trials < 1:
        raise ParameterError(f"Fenêtre {window} ou nombre d'essais {trials} invalide")
    gp = gp or GoodBoxParams.from_probability(n, p)
    width, height = wx * gp.side, wy * gp.side
    (budget or MemoryBudget.from_env()).check(width * height, "fenêtre de boîtes")

    good_total = 0
    largest = []
    for trial in range(trials):
        law = PollutionParams(p, q, derive_seed(master_seed, ExperimentStream.GOOD_WINDOW, trial))
        good = _good_field(sample(width, height, law), gp, wx, wy)
        good_total += int(good.sum())
        largest.append(largest_component_fraction(good))

    density = proportion_estimate(good_total, trials * wx * wy)
    logger.info(f"✅ Fenêtre {wx}x{wy}: densité {density.fraction:.3f}, "
                f"plus grande composante {np.mean(largest):.3f}")
    return WindowResult(density, float(np.mean(largest)), largest)


# ============================================================================
# Simulation unique
# ============================================================================

@dataclass
class SimulationSummary:
    """Statistiques d'un tirage et de sa configuration finale"""
    width: int
    height: int
    initial_occupied_fraction: float
    final_occupied_fraction: float
    closed_fraction: float
    steps_to_fixpoint: int
    cluster_count: int
    max_cluster_diameter: int
    target: Cell
    target_occupied: bool
    initial: Grid = field(repr=False, compare=False, default=None)
    final: Grid = field(repr=False, compare=False, default=None)

    def to_dict(self) -> dict:
        data = {f.name: getattr(self, f.name) for f in fields(self) if f.name not in ('initial', 'final')}
        data['target'] = list(self.target)
        return data


def simulate(L: int, params: PollutionParams, rule: Rule,
             bc: BoundaryCondition = BoundaryCondition.FREE,
             target: Optional[Cell] = None, budget: Optional[MemoryBudget] = None) -> SimulationSummary:
    """Un tirage L × L, sa fermeture et un résumé"""
    if budget is not None:
        budget.check(L * L, "boîte")
    target = target or (L // 2, L // 2)
    initial = sample(L, L, params, bc)
    result = closure(initial, rule)
    final = result.grid
    clusters = occupied_clusters(final)
    area = initial.area
    return SimulationSummary(
        width=L, height=L,
        initial_occupied_fraction=initial.occupied_count / area,
        final_occupied_fraction=final.occupied_count / area,
        closed_fraction=initial.closed_count / area,
        steps_to_fixpoint=result.steps_to_fixpoint,
        cluster_count=clusters.cluster_count,
        max_cluster_diameter=clusters.max_linf_diameter,
        target=target,
        target_occupied=bool(final.occupied_mask()[target[1], target[0]]),
        initial=initial, final=final
    )
