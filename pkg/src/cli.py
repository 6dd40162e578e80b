#!/usr/bin/env python3
"""
Command Line Module
===================

Sous-commandes du laboratoire de percolation polluée.

Usage:
    python scripts/percolation.py <commande> [options]

Commandes:
    simulate    Tirage, fermeture et statistiques
    render      Simulation et image P6 (PNG en option)
    scan        Fraction occupée le long de q = α·p²/(log 1/p)^β
    qc          Bissection du seuil q_c(p)
    compare     Seuils des règles standard et modifiée
    safe        Certificat de bloc sûr / probabilité estimée
    good        Boîte bonne / probabilité estimée / fenêtre de boîtes
    block       Chemin de blocs sûrs et vérification de la structure bloquante
    spread      Envahissement d'une boîte bonne depuis un côté
    selftest    Vérifications internes réduites

Codes de sortie:
    0 succès, 1 échec de vérification, 2 erreur d'utilisation
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from . import __version__
from .config import Config
from .dynamics import Rule
from .cache_manager import CacheManager
from .env_loader import display_env_info, load_experiment_file
from .errors import ArgumentError, GridBoundsError, MemoryBudgetError, ParameterError
from .experiments import COMPARE_FIELDS, SCAN_FIELDS, alpha_of, rows_to_csv
from .good_boxes import SIDES, good_q
from .lab import PercolationLab
from .random_init import BoundaryCondition, PollutionParams
from .render import RenderPalette, parse_rgb
from .utils import (
    create_stats_table, format_duration, format_probability, generate_ascii_bar,
    parse_float_list, parse_pair
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

USAGE_ERRORS = (ParameterError, ArgumentError, GridBoundsError, MemoryBudgetError)

# Conversion des valeurs lues dans un fichier d'expérience
FILE_KEYS: Dict[str, Callable[[str], Any]] = {
    'p': float,
    'q': float,
    'L': int,
    'rule': str,
    'bc': str,
    'seed': int,
    'trials': int,
    'tol': float,
    'alphas': parse_float_list,
    'beta': float,
    'p_list': parse_float_list,
    'out': str,
    'png': str,
    'workers': int,
    'n': int,
    'window': parse_pair,
    'blocks': parse_pair,
    'side': str,
    'target': parse_pair,
}


def _pair(text: str):
    try:
        return parse_pair(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _floats(text: str):
    try:
        return parse_float_list(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Liste de nombres invalide: {text!r}") from e


# ============================================================================
# Arguments
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    """Construit le parseur et ses sous-commandes"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, default='configs/config.yaml',
                        help='Fichier de configuration YAML (défaut: configs/config.yaml)')
    common.add_argument('--config-file', type=str, default=None,
                        help="Fichier d'expérience clé=valeur (les options explicites priment)")
    common.add_argument('--seed', type=int, default=None, help='Graine maîtresse')
    common.add_argument('--no-cache', action='store_true', help='Désactiver le cache des résultats')
    common.add_argument('--clear-cache', action='store_true', help='Nettoyer le cache avant de commencer')
    common.add_argument('--show-config', action='store_true',
                        help="Afficher la configuration et l'environnement, puis quitter")
    common.add_argument('--workers', type=int, default=None, help="Threads pour les essais")
    common.add_argument('--verbose', '-v', action='store_true', help='Mode verbeux (logs DEBUG)')

    law = argparse.ArgumentParser(add_help=False)
    law.add_argument('--p', type=float, default=None, help="Densité initiale d'occupation")
    law.add_argument('--q', type=float, default=None, help='Densité de sites fermés')

    box = argparse.ArgumentParser(add_help=False)
    box.add_argument('--L', dest='L', type=int, default=None,
                     help='Côté de la boîte (défaut: ⌈8/p·log(1/p)⌉, plafonné par le budget mémoire)')
    box.add_argument('--rule', type=str, default=None, help='standard, modified ou modified-vertical')
    box.add_argument('--bc', type=str, default=None, help='Bord: free ou ring')

    parser = argparse.ArgumentParser(
        prog='percolation',
        description='Laboratoire de percolation bootstrap polluée',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Exemples d'utilisation:
  %(prog)s simulate --p 0.1 --q 0.01 --L 200
  %(prog)s render --p 0.1 --q 0.01 --L 200 --bc ring --seed 7 --out fig.ppm
  %(prog)s scan --p 0.1 --alphas 0.05,1,20 --trials 400 --out scan.csv
  %(prog)s qc --p 0.1 --rule modified --tol 0.2
  %(prog)s compare --p-list 0.12,0.10,0.08 --out compare.csv
  %(prog)s block --fixture 3 --sabotage
  %(prog)s selftest
        """
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest='command', metavar='<commande>')
    commands.required = True

    sub = commands.add_parser('simulate', parents=[common, law, box], help='Tirage, fermeture et statistiques')
    sub.add_argument('--target', type=_pair, default=None, help='Site observé x,y (défaut: centre)')
    sub.add_argument('--out', type=str, default=None, help='Résumé JSON')

    sub = commands.add_parser('render', parents=[common, law, box], help='Image de la configuration finale')
    sub.add_argument('--out', type=str, default=None, help='Fichier P6 (défaut: <output>/render.ppm)')
    sub.add_argument('--png', type=str, default=None, help='Copie PNG (matplotlib)')
    for name in ('initial', 'eventual', 'closed', 'open'):
        sub.add_argument(f'--palette-{name}', type=str, default=None, metavar='R,G,B')

    sub = commands.add_parser('scan', parents=[common, law, box], help='Balayage en α')
    sub.add_argument('--alphas', type=_floats, default=None, help='Valeurs de α séparées par des virgules')
    sub.add_argument('--beta', type=float, default=None, help='Exposant du logarithme (défaut: 1)')
    sub.add_argument('--trials', type=int, default=None)
    sub.add_argument('--out', type=str, default=None, help='Fichier CSV (défaut: sortie standard)')

    sub = commands.add_parser('qc', parents=[common, law, box], help='Bissection du seuil')
    sub.add_argument('--trials', type=int, default=None)
    sub.add_argument('--tol', type=float, default=None, help='Tolérance relative de la bissection')
    sub.add_argument('--out', type=str, default=None, help='Résultat JSON')

    sub = commands.add_parser('compare', parents=[common, box], help='Standard contre modifiée')
    sub.add_argument('--p-list', dest='p_list', type=_floats, default=None)
    sub.add_argument('--trials', type=int, default=None)
    sub.add_argument('--tol', type=float, default=None)
    sub.add_argument('--out', type=str, default=None, help='Fichier CSV (défaut: sortie standard)')

    sub = commands.add_parser('safe', parents=[common, law], help='Blocs sûrs')
    sub.add_argument('--trials', type=int, default=None, help='Estimer la probabilité sur N essais')

    sub = commands.add_parser('good', parents=[common, law], help='Boîtes bonnes')
    sub.add_argument('--n', type=int, default=None, help='Paramètre n (défaut: ⌊log log 1/p⌋, au moins 2)')
    sub.add_argument('--trials', type=int, default=None, help='Estimer la probabilité sur N essais')
    sub.add_argument('--window', type=_pair, default=None, help='Fenêtre de boîtes wx,wy')

    sub = commands.add_parser('block', parents=[common, law], help='Structure bloquante')
    sub.add_argument('--blocks', type=_pair, default=None, help='Fenêtre de blocs wx,wy (défaut: 4,4)')
    sub.add_argument('--fixture', type=int, default=None, metavar='SEED', help='Escalier construit')
    sub.add_argument('--sabotage', action='store_true', help="Saboter l'escalier construit")

    sub = commands.add_parser('spread', parents=[common, law], help="Envahissement d'une boîte")
    sub.add_argument('--side', type=str, choices=SIDES, default=None)
    sub.add_argument('--n', type=int, default=None)
    sub.add_argument('--fixture', type=int, default=None, metavar='SEED', help='Boîte bonne construite')
    sub.add_argument('--broken', action='store_true', help='Variante construite sans G2')

    commands.add_parser('selftest', parents=[common], help='Vérifications internes')

    return parser


def apply_experiment_file(args: argparse.Namespace) -> argparse.Namespace:
    """
    Complète les options absentes avec le fichier d'expérience

    Seules les clés connues de la sous-commande sont reprises.
    """
    if not args.config_file:
        return args

    for raw_key, raw_value in load_experiment_file(args.config_file).items():
        key = raw_key.strip().replace('-', '_')
        key = 'L' if key in ('L', 'l') else key.lower()
        if key not in FILE_KEYS or not hasattr(args, key) or getattr(args, key) is not None:
            continue
        try:
            setattr(args, key, FILE_KEYS[key](raw_value.strip()))
        except ValueError as e:
            raise ParameterError(f"Valeur invalide pour {raw_key} dans {args.config_file}: {raw_value!r}") from e
    return args


# ============================================================================
# Affichage
# ============================================================================

def print_banner():
    """Affiche la bannière"""
    banner = """
╔══════════════════════════════════════════════════════════════╗
║                                                              ║
║          🧪 PERCOLATION BOOTSTRAP POLLUÉE                    ║
║                                                              ║
║          Simulation, certificats et expériences              ║
║                                                              ║
╚══════════════════════════════════════════════════════════════╝
"""
    print(banner)


def print_section(title: str):
    print("\n" + "=" * 70)
    print(title.center(70))
    print("=" * 70)


def save_json(data: dict, filepath: str):
    """Sauvegarde un résultat en JSON"""
    path = Path(filepath)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
    print(f"💾 Résultat sauvegardé dans: {path}")


# ============================================================================
# Résolution des paramètres
# ============================================================================

class Settings:
    """Valeurs effectives: option explicite, puis fichier d'expérience, puis configuration"""

    def __init__(self, args: argparse.Namespace, config: Config):
        self.args = args
        self.config = config

    def pick(self, name: str, key: str, default: Any = None) -> Any:
        value = getattr(self.args, name, None)
        return value if value is not None else self.config.get(key, default)

    @property
    def seed(self) -> int:
        return int(self.pick('seed', 'simulation.seed', 0))

    @property
    def rule(self) -> Rule:
        return Rule.parse(str(self.pick('rule', 'simulation.rule', 'modified')))

    @property
    def bc(self) -> BoundaryCondition:
        return BoundaryCondition.parse(str(self.pick('bc', 'simulation.bc', 'free')))

    @property
    def p(self) -> float:
        return float(self.pick('p', 'simulation.p', 0.1))

    @property
    def trials(self) -> int:
        trials = int(self.pick('trials', 'experiments.trials', 100))
        if trials < 1:
            raise ParameterError("trials doit être >= 1")
        return trials

    @property
    def tol(self) -> float:
        return float(self.pick('tol', 'experiments.tol', 0.25))

    def params(self, q: Optional[float] = None) -> PollutionParams:
        if q is None:
            q = float(self.pick('q', 'simulation.q', 0.01))
        return PollutionParams(self.p, q, self.seed)

    def side(self, lab: PercolationLab, p: float) -> int:
        L = getattr(self.args, 'L', None)
        if L is None:
            return lab.default_side(p)
        if L < 1:
            raise ParameterError("L doit être >= 1")
        return L

    def out(self, default_name: Optional[str] = None) -> Optional[str]:
        out = getattr(self.args, 'out', None)
        if out is None and default_name:
            out = str(Path(self.config.get('output.directory', 'results')) / default_name)
        return out

    def palette(self) -> RenderPalette:
        pairs = (('initial', 'initial_occupied'), ('eventual', 'eventually_occupied'),
                 ('closed', 'closed'), ('open', 'never_occupied_open'))
        colors = {}
        for flag, field_name in pairs:
            raw = getattr(self.args, f'palette_{flag}', None)
            if raw is not None:
                colors[field_name] = parse_rgb(raw)
            else:
                configured = self.config.get(f'render.{field_name}')
                if configured is not None:
                    colors[field_name] = tuple(int(c) for c in configured)
        return RenderPalette(**colors)


# ============================================================================
# Sous-commandes
# ============================================================================

def cmd_simulate(lab: PercolationLab, s: Settings) -> int:
    params = s.params()
    L = s.side(lab, params.p)
    summary = lab.simulate(L, params, s.rule, s.bc, s.args.target)

    print_section("📊 SIMULATION")
    print(create_stats_table(summary.to_dict(), f"{L}x{L}, p={params.p}, q={params.q}, {s.rule.value}"))
    print(f"   Occupation finale : {generate_ascii_bar(summary.final_occupied_fraction, 1.0)}")
    if s.args.out:
        save_json(summary.to_dict(), s.args.out)
    return EXIT_OK


def cmd_render(lab: PercolationLab, s: Settings) -> int:
    params = s.params()
    L = s.side(lab, params.p)
    palette = s.palette()
    summary, path = lab.render_image(L, params, s.rule, s.bc, s.out('render.ppm'), palette, s.args.png)

    print_section("🖼️  IMAGE")
    print(f"   Fichier P6         : {path}")
    if s.args.png:
        print(f"   Fichier PNG        : {s.args.png}")
    print(f"   Occupation finale  : {format_probability(summary.final_occupied_fraction)}")
    print(f"   Pas jusqu'au point fixe : {summary.steps_to_fixpoint}")
    return EXIT_OK


def cmd_scan(lab: PercolationLab, s: Settings) -> int:
    p = s.p
    alphas = s.pick('alphas', 'experiments.alphas')
    beta = float(s.pick('beta', 'experiments.beta', 1.0))
    L = s.side(lab, p)
    rows = lab.scan(p, alphas, beta, s.rule, L, s.trials, s.seed, s.bc, s.args.out)

    if s.args.out is None:
        sys.stdout.write(rows_to_csv(rows, SCAN_FIELDS))
        return EXIT_OK

    print_section(f"📈 BALAYAGE p={p}, {s.rule.value}, L={L}")
    for row in rows:
        print(f"   α={row.alpha:<8g} q={row.q:<12.3e} {generate_ascii_bar(row.fraction, 1.0, 30)} "
              f"{row.fraction:.3f} [{row.ci_low:.3f}, {row.ci_high:.3f}]")
    print(f"\n💾 CSV: {s.args.out}")
    return EXIT_OK


def cmd_qc(lab: PercolationLab, s: Settings) -> int:
    p = s.p
    L = s.side(lab, p)
    result = lab.qc(p, s.rule, L, s.trials, s.seed, s.tol, s.bc)

    print_section(f"🎯 SEUIL q_c (p={p}, {s.rule.value}, L={L})")
    print(f"   q_hat     : {result.q_hat:.6e}")
    print(f"   intervalle: [{result.bracket[0]:.6e}, {result.bracket[1]:.6e}]")
    print(f"   issue     : {result.outcome}")
    print(f"   α estimé  : {alpha_of(p, result.q_hat):.4f}")
    print(f"   évaluations: {len(result.evaluations)}")
    if s.args.out:
        save_json(result.to_dict(), s.args.out)
    return EXIT_OK


def cmd_compare(lab: PercolationLab, s: Settings) -> int:
    p_list = s.pick('p_list', 'experiments.p_list')
    rows = lab.compare(p_list, s.args.L, s.trials, s.seed, s.tol, s.bc, s.args.out)

    if s.args.out is None:
        sys.stdout.write(rows_to_csv(rows, COMPARE_FIELDS))
        return EXIT_OK

    print_section("⚖️  STANDARD CONTRE MODIFIÉE")
    print(f"   {'p':>8} {'L':>6} {'q_hat std':>14} {'q_hat mod':>14} {'ratio':>10}")
    for row in rows:
        print(f"   {row.p:>8g} {row.L:>6} {row.q_hat_standard:>14.4e} {row.q_hat_modified:>14.4e} {row.ratio:>10.3f}")
    print(f"\n💾 CSV: {s.args.out}")
    return EXIT_OK


def cmd_safe(lab: PercolationLab, s: Settings) -> int:
    params = s.params()
    geom = lab.geometry(params.p)

    if s.args.trials is not None:
        estimate = lab.safe_estimate(params, s.trials)
        print_section("🧱 PROBABILITÉ DE BLOC SÛR")
        print(create_stats_table({
            'm': geom.m, 'M': geom.M, 'N': geom.N,
            'fraction': estimate.fraction, 'ci_low': estimate.ci_low, 'ci_high': estimate.ci_high,
            'essais': estimate.trials,
        }, f"p={params.p}, q={params.q}"))
        return EXIT_OK

    cert, geom = lab.safe_check(params)
    print_section("🧱 BLOC SÛR")
    print(f"   Géométrie: m={geom.m} M={geom.M} N={geom.N} v_h={geom.v_h} h_w={geom.h_w}")
    if cert is None:
        print("   ❌ Aucun certificat: le bloc n'est pas sûr")
        return EXIT_OK
    print(f"   ✅ {cert.to_line()}")
    return EXIT_OK


def cmd_good(lab: PercolationLab, s: Settings) -> int:
    p = s.p
    gp = lab.good_params(p, s.args.n)
    q = s.args.q if s.args.q is not None else good_q(p, gp.n)
    params = PollutionParams(p, q, s.seed)

    if s.args.window is not None:
        result = lab.good_window(params, s.args.window, s.trials, s.args.n)
        print_section("🗺️  FENÊTRE DE BOÎTES BONNES")
        print(create_stats_table({
            'densité': result.density.fraction, 'ci_low': result.density.ci_low,
            'ci_high': result.density.ci_high, 'plus_grande_composante': result.largest_fraction,
        }, f"p={p}, q={q:.3e}, fenêtre {s.args.window[0]}x{s.args.window[1]}"))
        return EXIT_OK

    if s.args.trials is not None:
        estimate = lab.good_estimate(params, s.trials, s.args.n)
        print_section("📦 PROBABILITÉ DE BOÎTE BONNE")
        values = {'fraction': estimate.fraction, 'ci_low': estimate.estimate.ci_low,
                  'ci_high': estimate.estimate.ci_high}
        values.update({f"échec_{name}": frac for name, frac in estimate.failure_fractions.items()})
        print(create_stats_table(values, f"n={gp.n}, côté {gp.side}, q={q:.3e}"))
        return EXIT_OK

    report, gp = lab.good_check(params, s.args.n)
    print_section("📦 BOÎTE BONNE")
    print(f"   n={gp.n} côté={gp.side} q={q:.3e}")
    for line in report.to_lines():
        print(f"   {line}")
    return EXIT_OK


def cmd_block(lab: PercolationLab, s: Settings) -> int:
    if s.args.fixture is not None:
        report = lab.block(fixture_seed=s.args.fixture, sabotage=s.args.sabotage)
    else:
        report = lab.block(s.params(), s.args.blocks or (4, 4))

    print_section("🚧 STRUCTURE BLOQUANTE")
    print(f"   Blocs sûrs : {report.safe_blocks}")
    if report.path is None:
        print("   ❌ Aucun chemin de blocs sûrs")
        return EXIT_OK
    print(f"   Chemin     : {' '.join(f'{x},{y}' for x, y in report.path.blocks)}")
    verdict = report.verdict
    print(f"   Verdict    : {verdict.status}")
    if verdict.witness is not None:
        print(f"   Témoin     : {verdict.witness}")
    print(f"   Diamètre max des amas: {verdict.max_cluster_diameter}")
    return EXIT_FAILED if verdict.status == verdict.VIOLATED else EXIT_OK


def cmd_spread(lab: PercolationLab, s: Settings) -> int:
    side = s.args.side or 'south'
    if s.args.fixture is not None:
        spread, description = lab.spread(side, fixture_seed=s.args.fixture, broken=s.args.broken)
    else:
        p = s.p
        q = s.args.q if s.args.q is not None else good_q(p, lab.good_params(p, s.args.n).n)
        spread, description = lab.spread(side, PollutionParams(p, q, s.seed), s.args.n)

    print_section("🌊 ENVAHISSEMENT")
    print(f"   {description}, côté {side}")
    if spread is None:
        print("   ℹ️  boîte non bonne: envahissement non vérifié")
        return EXIT_OK
    print(f"   {'✅ boîte entièrement envahie' if spread else '❌ envahissement incomplet'}")
    return EXIT_OK if spread else EXIT_FAILED


def cmd_selftest(lab: PercolationLab, s: Settings) -> int:
    results = lab.selftest(s.seed)

    print_section("🧪 VÉRIFICATIONS INTERNES")
    for result in results:
        mark = '✅' if result.passed else '❌'
        print(f"   {mark} {result.name:<12} {result.detail} ({format_duration(result.seconds)})")
    failed = [r.name for r in results if not r.passed]
    print(f"\n   {len(results) - len(failed)}/{len(results)} vérifications réussies")
    return EXIT_FAILED if failed else EXIT_OK


COMMANDS: Dict[str, Callable[[PercolationLab, Settings], int]] = {
    'simulate': cmd_simulate,
    'render': cmd_render,
    'scan': cmd_scan,
    'qc': cmd_qc,
    'compare': cmd_compare,
    'safe': cmd_safe,
    'good': cmd_good,
    'block': cmd_block,
    'spread': cmd_spread,
    'selftest': cmd_selftest,
}


# ============================================================================
# Point d'entrée
# ============================================================================

def main(argv: Optional[List[str]] = None) -> int:
    """
    Point d'entrée de la ligne de commande

    Returns:
        0 succès, 1 échec de vérification, 2 erreur d'utilisation
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        args = apply_experiment_file(args)
        config = Config(args.config)
        if args.verbose:
            config.set('logging.level', 'DEBUG')

        if args.show_config:
            config.display()
            display_env_info()
            return EXIT_OK

        is_valid, errors = config.validate()
        if not is_valid:
            print("\n⚠️  Avertissements de configuration:\n")
            for error in errors:
                print(f"   {error}")

        if args.workers is not None and args.workers < 1:
            raise ParameterError("--workers doit être >= 1")

        if args.clear_cache:
            cache = CacheManager(config.get('cache.directory', '.cache'))
            count = cache.clear()
            info = cache.get_cache_info()
            print(f"🧹 Cache nettoyé: {count} fichier(s) supprimé(s) ({info['cache_directory']})", file=sys.stderr)

        # Le cache n'est utilisé que par scan, qc et compare
        use_cache = False if args.no_cache or args.command not in ('scan', 'qc', 'compare') else None
        lab = PercolationLab(config, use_cache=use_cache, workers=args.workers)
        settings = Settings(args, config)

        writes_csv_to_stdout = args.command in ('scan', 'compare') and getattr(args, 'out', None) is None
        if not writes_csv_to_stdout:
            print_banner()
        return COMMANDS[args.command](lab, settings)

    except USAGE_ERRORS as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
