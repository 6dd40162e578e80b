#!/usr/bin/env python3
"""
Lab Module
==========

Classe principale du laboratoire de percolation polluée.

Ce module orchestre, pour chaque sous-commande de la CLI:
- la simulation d'une boîte et son image
- les scans, seuils et comparaisons de règles
- les certificats (blocs sûrs, boîtes bonnes, structures bloquantes)

Le module intègre:
- Cache des résultats d'expériences déterministes
- Budget mémoire
- Logging détaillé
"""

import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .blocking import (
    BlockingPath, BlockingStructure, BlockingVerdict, build_blocking_structure,
    find_blocking_path, verify_blocking
)
from .budget import MemoryBudget
from .cache_manager import CacheManager, spec_key
from .config import Config
from .dynamics import Rule
from .errors import ContractError
from .experiments import (
    CompareRow, QcResult, ScanRow, SimulationSummary, WindowResult,
    compare_rules, default_L, estimate_qc, good_box_window,
    scan_q, simulate, write_compare_csv, write_scan_csv
)
from .fixtures import g2_broken_box, good_box, staircase
from .good_boxes import (
    GoodBoxParams, GoodEstimate, GoodReport, estimate_good_prob,
    is_good_box, recommended_n, spread_from_side, verify_spread
)
from .lattice import Grid, Rect
from .random_init import BoundaryCondition, ExperimentStream, PollutionParams, derive_seed, sample
from .render import RenderPalette, render, write_png, write_ppm
from .safe_blocks import BlockGeometry, SafeCertificate, estimate_safe_prob, safe_block_certificates
from .safe_blocks import is_safe_block, safe_block_field
from .selftest import CheckResult, run_selftest
from .utils import ProportionEstimate


@dataclass
class BlockReport:
    """Résultat de la sous-commande block"""
    path: Optional[BlockingPath]
    structure: Optional[BlockingStructure]
    verdict: Optional[BlockingVerdict]
    safe_blocks: int

    @property
    def holds(self) -> bool:
        return self.verdict is not None and self.verdict.holds


class PercolationLab:
    """
    Point d'entrée des expériences

    Attributes:
        config (Config): Configuration
        cache (CacheManager): Cache des résultats (None si désactivé)
        budget (MemoryBudget): Budget mémoire
        workers (int): Threads pour les essais
        logger (logging.Logger): Logger pour le suivi
    """

    def __init__(self, config: Optional[Config] = None, use_cache: Optional[bool] = None,
                 workers: Optional[int] = None):
        self.config = config or Config()
        self.logger = self._setup_logger()

        if use_cache is None:
            use_cache = bool(self.config.get('cache.enabled', True))
        self.cache = CacheManager(self.config.get('cache.directory', '.cache')) if use_cache else None

        self.budget = MemoryBudget(self.config.get('limits.memory_budget_mb', 2048))
        self.workers = workers or int(self.config.get('experiments.workers', 1))
        self.record_timing = bool(self.config.get('experiments.record_timing', False))

        self.logger.debug(f"🚀 Laboratoire prêt ({self.budget}, {self.workers} thread(s))")

    def _setup_logger(self) -> logging.Logger:
        """
        Configure le système de logging

        Returns:
            Logger racine 'Percolation'
        """
        logger = logging.getLogger('Percolation')

        log_level = str(self.config.get('logging.level', 'INFO')).upper()
        logger.setLevel(getattr(logging, log_level, logging.INFO))

        # Éviter les duplications
        if logger.handlers:
            return logger

        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

        log_dir = self.config.get('logging.directory', '')
        if log_dir:
            try:
                Path(log_dir).mkdir(parents=True, exist_ok=True)
                file_handler = logging.FileHandler(Path(log_dir) / 'percolation.log', encoding='utf-8')
                file_handler.setLevel(logging.DEBUG)
                file_handler.setFormatter(formatter)
                logger.addHandler(file_handler)
            except OSError as e:
                logger.warning(f"⚠️  Impossible de créer le fichier log: {e}")

        return logger

    # ------------------------------------------------------------------
    # Cache
    # ------------------------------------------------------------------

    def _cached(self, kind: str, spec: Dict, compute, encode, decode):
        key = spec_key(kind, spec, __version__)
        if self.cache is not None:
            data = self.cache.get(key)
            if data is not None:
                self.logger.info(f"💾 {kind}: résultat repris du cache")
                return decode(data)
        result = compute()
        if self.cache is not None:
            self.cache.set(key, encode(result))
        return result

    def default_side(self, p: float) -> int:
        return self.budget.cap_side(default_L(p))

    # ------------------------------------------------------------------
    # Simulation et image
    # ------------------------------------------------------------------

    def simulate(self, L: int, params: PollutionParams, rule: Rule,
                 bc: BoundaryCondition = BoundaryCondition.FREE,
                 target: Optional[Tuple[int, int]] = None) -> SimulationSummary:
        self.logger.info(f"🚀 Simulation {L}x{L}, p={params.p}, q={params.q}, {rule.value}, bord {bc.value}")
        return simulate(L, params, rule, bc, target, budget=self.budget)

    def render_image(self, L: int, params: PollutionParams, rule: Rule, bc: BoundaryCondition,
                     out: str, palette: Optional[RenderPalette] = None,
                     png: Optional[str] = None) -> Tuple[SimulationSummary, Path]:
        palette = palette or RenderPalette()
        summary = self.simulate(L, params, rule, bc)
        path = write_ppm(render(summary.initial, summary.final, palette), out)
        if png:
            write_png(summary.initial, summary.final, png, palette)
        return summary, path

    # ------------------------------------------------------------------
    # Expériences
    # ------------------------------------------------------------------

    def scan(self, p: float, alphas: Sequence[float], beta: float, rule: Rule, L: int,
             trials: int, seed: int, bc: BoundaryCondition, out: Optional[str] = None) -> List[ScanRow]:
        spec = {'p': p, 'alphas': list(alphas), 'beta': beta, 'rule': rule.value, 'L': L,
                'trials': trials, 'seed': seed, 'bc': bc.value, 'timing': self.record_timing}
        rows = self._cached(
            'scan', spec,
            lambda: scan_q(p, alphas, beta, rule, L, trials, seed, bc,
                           self.workers, self.record_timing, self.budget),
            lambda rs: [asdict(r) for r in rs],
            lambda data: [ScanRow(**r) for r in data]
        )
        if out:
            write_scan_csv(rows, out)
        return rows

    def qc(self, p: float, rule: Rule, L: int, trials: int, seed: int, tol: float,
           bc: BoundaryCondition) -> QcResult:
        self.budget.check(L * L, "boîte")
        factor = int(self.config.get('experiments.max_trials_factor', 8))
        spec = {'p': p, 'rule': rule.value, 'L': L, 'trials': trials, 'seed': seed,
                'tol': tol, 'bc': bc.value, 'max_trials': factor * trials}
        return self._cached(
            'qc', spec,
            lambda: estimate_qc(p, rule, L, trials, seed, tol, bc,
                                max_trials=factor * trials, workers=self.workers),
            QcResult.to_dict, QcResult.from_dict
        )

    def compare(self, p_list: Sequence[float], L: Optional[int], trials: int, seed: int,
                tol: float, bc: BoundaryCondition, out: Optional[str] = None) -> List[CompareRow]:
        for p in p_list:
            self.budget.check((L or self.default_side(p)) ** 2, "boîte")
        spec = {'p_list': list(p_list), 'L': L, 'trials': trials, 'seed': seed,
                'tol': tol, 'bc': bc.value}
        rows = self._cached(
            'compare', spec,
            lambda: compare_rules(p_list, L if L else self.default_side, trials, seed, tol, bc, self.workers),
            lambda rs: [asdict(r) for r in rs],
            lambda data: [CompareRow(**r) for r in data]
        )
        if out:
            write_compare_csv(rows, out)
        return rows

    # ------------------------------------------------------------------
    # Certificats
    # ------------------------------------------------------------------

    def geometry(self, p: float) -> BlockGeometry:
        return BlockGeometry.from_probability(
            p, m=int(self.config.get('certificates.m', 5)), k=int(self.config.get('certificates.k', 3)),
            eps=float(self.config.get('certificates.eps', 0.2)),
            delta=float(self.config.get('certificates.delta', 0.05))
        )

    def good_params(self, p: float, n: Optional[int] = None) -> GoodBoxParams:
        n = n or int(self.config.get('certificates.n', 0)) or recommended_n(p)
        return GoodBoxParams.from_probability(n, p)

    def safe_check(self, params: PollutionParams) -> Tuple[Optional[SafeCertificate], BlockGeometry]:
        """Tire le cadre minimal d'un bloc et cherche un certificat"""
        geom = self.geometry(params.p)
        width, height, z = geom.sampling_frame()
        self.budget.check(width * height, "cadre de bloc")
        law = params.with_seed(derive_seed(params.seed, ExperimentStream.SAFE_BLOCKS, 0))
        return is_safe_block(sample(width, height, law), z, geom), geom

    def safe_estimate(self, params: PollutionParams, trials: int) -> ProportionEstimate:
        geom = self.geometry(params.p)
        width, height, _ = geom.sampling_frame()
        self.budget.check(width * height, "cadre de bloc")
        return estimate_safe_prob(geom, params, trials)

    def good_check(self, params: PollutionParams, n: Optional[int] = None) -> Tuple[GoodReport, GoodBoxParams]:
        gp = self.good_params(params.p, n)
        self.budget.check(gp.side * gp.side, "boîte")
        law = params.with_seed(derive_seed(params.seed, ExperimentStream.GOOD_BOXES, 0))
        grid = sample(gp.side, gp.side, law)
        return is_good_box(grid, Rect(0, 0, gp.side, gp.side), gp), gp

    def good_estimate(self, params: PollutionParams, trials: int, n: Optional[int] = None) -> GoodEstimate:
        return estimate_good_prob(self.good_params(params.p, n), params, trials, budget=self.budget)

    def good_window(self, params: PollutionParams, window: Tuple[int, int], trials: int,
                    n: Optional[int] = None) -> WindowResult:
        gp = self.good_params(params.p, n)
        return good_box_window(params.p, gp.n, params.q, window, trials, params.seed, gp=gp, budget=self.budget)

    def block(self, params: Optional[PollutionParams] = None, blocks: Tuple[int, int] = (4, 4),
              fixture_seed: Optional[int] = None, sabotage: bool = False) -> BlockReport:
        """
        Cherche un chemin de blocs sûrs et vérifie la structure bloquante

        Avec fixture_seed, utilise un escalier construit; sinon tire une
        grille couvrant blocks = (wx, wy) blocs de la géométrie de p.
        """
        if fixture_seed is not None:
            fixture = staircase(fixture_seed, sabotage=sabotage)
            verdict = verify_blocking(fixture.grid, fixture.structure, fixture.geometry.m)
            return BlockReport(fixture.path, fixture.structure, verdict, len(fixture.certificates))

        geom = self.geometry(params.p)
        wx, wy = blocks
        _, _, (_, row) = geom.sampling_frame()
        width = (wx - 1) * geom.M + max(geom.M, geom.h_w)
        height = (row + wy) * geom.N
        self.budget.check(width * height, "fenêtre de blocs")

        law = params.with_seed(derive_seed(params.seed, ExperimentStream.SAFE_BLOCKS, 1))
        grid = sample(width, height, law)
        window = Rect(0, row, wx, wy)
        certs = safe_block_certificates(grid, geom, window)
        path = find_blocking_path(safe_block_field(grid, geom, window), window)
        if path is None:
            self.logger.info(f"❌ Aucun chemin de blocs sûrs ({len(certs)} blocs sûrs sur {wx * wy})")
            return BlockReport(None, None, None, len(certs))

        structure = build_blocking_structure(path, certs, Rect(0, 0, width, height))
        verdict = verify_blocking(grid, structure, geom.m)
        return BlockReport(path, structure, verdict, len(certs))

    def spread(self, side: str, params: Optional[PollutionParams] = None, n: Optional[int] = None,
               fixture_seed: Optional[int] = None, broken: bool = False) -> Tuple[Optional[bool], str]:
        """
        Envahissement d'une boîte depuis un côté

        Returns:
            Tuple (envahie, description); envahie vaut None si la boîte
            tirée n'est pas bonne (rien à vérifier)
        """
        if fixture_seed is not None:
            if broken:
                fixture = g2_broken_box(fixture_seed)
                return spread_from_side(fixture.grid, fixture.box, side), "boîte construite sans G2"
            fixture = good_box(fixture_seed)
            return verify_spread(fixture.grid, fixture.box, fixture.params, side), "boîte bonne construite"

        gp = self.good_params(params.p, n)
        self.budget.check((gp.side + 2) ** 2, "boîte")
        law = params.with_seed(derive_seed(params.seed, ExperimentStream.GOOD_BOXES, 0))
        inner = sample(gp.side, gp.side, law)
        grid = Grid.from_masks(*_framed_masks(inner))
        box = Rect(1, 1, gp.side, gp.side)
        try:
            return verify_spread(grid, box, gp, side), f"boîte tirée de côté {gp.side}"
        except ContractError as e:
            self.logger.info(f"ℹ️  {e}")
            return None, str(e)

    def selftest(self, seed: int = 0) -> List[CheckResult]:
        self.logger.info("🚀 Lancement des vérifications internes")
        return run_selftest(seed)


def _framed_masks(inner: Grid) -> Tuple[np.ndarray, np.ndarray]:
    occupied = np.zeros((inner.height + 2, inner.width + 2), dtype=bool)
    closed = np.zeros_like(occupied)
    occupied[1:-1, 1:-1] = inner.occupied_mask()
    closed[1:-1, 1:-1] = inner.closed_mask()
    return occupied, closed
