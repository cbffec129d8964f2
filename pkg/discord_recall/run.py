import argparse
import json
import logging
import sys

from .engine.config_loader import Defaults, load_defaults, load_game, load_state
from .engine.games import ACTIONS, GameParseError, best_behavioral, best_mixed
from .engine.measures import (
    GridSpec,
    correlation_report,
    direction_label,
    measurement_for_basis,
)
from .engine.noise import (
    CHANNELS,
    first_strength_below,
    parse_subsystems,
    sweep,
    write_sweep_csv,
)
from .engine.qstate import StateParseError, make_discordant_state, validate
from .engine.qstrategy import (
    chi_square,
    expected_quantum_payoff,
    joint_action_distribution,
    make_alternating_scheme,
    sample_play,
)
from .engine.report import build_reproduce_report, render_report_table, render_rows

logging.basicConfig(level=logging.INFO, format="%(message)s")

# Logger dédié aux diagnostics de l'optimiseur (un enregistrement par tour de raffinement)
diag_logger = logging.getLogger("diagnostics")

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3

PAYOFF_THRESHOLD = 0.75


def _dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True)


def _read_state(path):
    """Return ``(state, exit_code)``; ``state`` is None on failure."""
    try:
        rho = load_state(path)
    except StateParseError as exc:
        logging.error(f"Fichier d'état illisible : {exc}")
        return None, EXIT_PARSE
    report = validate(rho)
    if not report.passed:
        logging.error(f"État invalide ({path}) : {'; '.join(report.failures)}")
        return None, EXIT_VALIDATION
    if rho.dim != 4:
        logging.error(f"État invalide ({path}) : deux qubits attendus (dim 4), reçu dim {rho.dim}")
        return None, EXIT_VALIDATION
    return rho, EXIT_OK


def cmd_reproduce(args) -> int:
    report = build_reproduce_report(args.variant, grid=args.grid_spec, grid_steps=args.grid_steps)
    if args.format == "json":
        print(_dumps(report.to_dict()))
    else:
        print(render_report_table(report))
    return EXIT_OK if report.passed else EXIT_MISMATCH


def cmd_analyze(args) -> int:
    rho, code = _read_state(args.state_file)
    if rho is None:
        return code
    grid = args.grid_spec
    if args.grid is not None:
        grid = GridSpec.from_resolution(
            args.grid, min_rounds=grid.min_rounds, angle_tol=grid.angle_tol, workers=grid.workers
        )
    measured = (args.measure,) if args.measure else ("A", "B")
    bases = (args.basis,) if args.basis else ("comp", "x")
    try:
        report = correlation_report(rho, measured=measured, bases=bases, grid=grid)
    except ValueError as exc:
        logging.error(f"Paramètres d'analyse invalides : {exc}")
        return EXIT_VALIDATION
    for failure in report.consistency_failures():
        logging.warning(f"Incohérence numérique : {failure}")
    if args.format == "json":
        print(_dumps(report.to_dict()))
        return EXIT_OK
    rows = [("S_A", report.s_a), ("S_B", report.s_b), ("S_AB", report.s_ab),
            ("I", report.mutual_information)]
    for entry in report.fixed:
        label = direction_label(entry.measured)
        rows.append((f"J({label}) [{entry.basis}]", entry.classical_correlation))
        rows.append((f"D({label}) [{entry.basis}]", entry.discord))
    for sub, opt in sorted(report.optimized.items()):
        label = direction_label(sub)
        rows.append((f"J({label}) [optimised]", opt.classical_correlation))
        rows.append((f"D({label}) [optimised]", opt.discord))
        rows.append((f"theta({label})", opt.angles.theta))
        rows.append((f"phi({label})", opt.angles.phi))
    rows.append(("negativity", report.negativity))
    rows.append(("chsh_max", report.chsh_max))
    print(render_rows(rows))
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.state:
        rho, code = _read_state(args.state)
        if rho is None:
            return code
    else:
        rho = make_discordant_state()
    scheme = make_alternating_scheme()
    if args.order == "BA":
        scheme = scheme.reversed()
    if args.swap_stage2:
        scheme = scheme.with_swapped_actions(1)
    dist = joint_action_distribution(rho, scheme)
    counts = sample_play(rho, scheme, args.seed, args.n, streams=args.streams)
    test = chi_square(counts, dist)
    logging.info(f"Simulation : {args.n} parties, graine {args.seed}, {args.streams} flux")
    if args.format == "json":
        print(_dumps({
            "seed": args.seed,
            "n": args.n,
            "streams": args.streams,
            "counts": {"".join(k): v for k, v in counts.items()},
            "frequencies": {"".join(k): v / args.n for k, v in counts.items()},
            "analytic": dist.to_dict(),
            "chi_square": {
                "statistic": test.statistic,
                "dof": test.dof,
                "p_value": test.p_value,
                "critical_999": test.critical,
                "passed": test.passed,
            },
        }))
        return EXIT_OK
    lines = [f"{'actions':<8} {'count':>8} {'frequency':>12} {'analytic':>12}"]
    for seq, count in counts.items():
        lines.append(
            f"{''.join(seq):<8} {count:>8d} {count / args.n:>12.6f} {dist.probability(*seq):>12.6f}"
        )
    lines.append("")
    lines.append(f"chi2 = {test.statistic:.6g} (dof {test.dof}, p = {test.p_value:.6g}, "
                 f"99.9% critical {test.critical:.6g}) {'pass' if test.passed else 'FAIL'}")
    print("\n".join(lines))
    return EXIT_OK


def cmd_sweep(args) -> int:
    subsystems = parse_subsystems(args.subsystems)
    rows = sweep(make_discordant_state(), args.kind, subsystems, args.steps, grid=args.grid_spec)
    try:
        write_sweep_csv(rows, args.out)
    except OSError as exc:
        logging.error(f"Impossible d'écrire {args.out} : {exc}")
        return EXIT_PARSE
    logging.info(f"Balayage enregistré dans {args.out}")
    below = first_strength_below(rows, PAYOFF_THRESHOLD)
    print(f"sweep: local {args.kind} noise on {''.join(subsystems)}, {args.steps} strengths "
          "(robustness probe, not a stated result)")
    if below is None:
        print(f"payoff stays >= {PAYOFF_THRESHOLD} over [0, 1]")
    else:
        print(f"payoff first drops below {PAYOFF_THRESHOLD} at strength {below:.6g}")
    return EXIT_OK


def cmd_solve(args) -> int:
    try:
        game = load_game(args.game_file)
    except GameParseError as exc:
        logging.error(f"Fichier de jeu invalide : {exc}")
        return EXIT_PARSE
    strategy, behavioral = best_behavioral(game, args.grid_steps)
    mixed, mixed_value = best_mixed(game)
    data = {
        "behavioral": {
            "prob_left": list(strategy.vector(game)),
            "value": behavioral,
        },
        "mixed": {
            "plan": "".join(next(iter(mixed.weights))),
            "value": mixed_value,
        },
    }
    if game.stages == 2 and tuple(game.actions) == ACTIONS:
        data["quantum"] = {
            "scheme": "alternating",
            "value": expected_quantum_payoff(make_discordant_state(), make_alternating_scheme(), game),
        }
    if args.format == "json":
        print(_dumps(data))
        return EXIT_OK
    rows = [(f"behavioral p[{i}]", p) for i, p in enumerate(data["behavioral"]["prob_left"])]
    rows.append(("behavioral value", behavioral))
    rows.append((f"mixed value [{data['mixed']['plan']}]", mixed_value))
    if "quantum" in data:
        rows.append(("quantum value [alternating]", data["quantum"]["value"]))
    print(render_rows(rows))
    return EXIT_OK


def build_parser(defaults: Defaults | None = None) -> argparse.ArgumentParser:
    defaults = defaults or Defaults()
    parser = argparse.ArgumentParser(
        description="Discorde quantique et stratégies comportementales à mémoire imparfaite"
    )
    parser.add_argument(
        "--config",
        type=str,
        default="config.ini",
        help="Fichier INI de configuration des paramètres",
    )
    parser.add_argument("--verbose", action="store_true", help="Active les traces DEBUG")
    parser.add_argument(
        "--diagnostics",
        type=str,
        help="Fichier recevant les traces de raffinement de l'optimiseur",
    )
    parser.set_defaults(grid_spec=defaults.grid, grid_steps=defaults.grid_steps)
    sub = parser.add_subparsers(dest="command", required=True)

    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=["table", "json"], default="table",
                     help="Format de sortie")

    p = sub.add_parser("reproduce", parents=[fmt], help="Recalcule toutes les valeurs de référence")
    p.add_argument(
        "--variant",
        choices=["single-infoset", "stage-aware", "both"],
        default="both",
        help="Structure d'ensembles d'information du jeu",
    )
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("analyze", parents=[fmt], help="Analyse un état à deux qubits (JSON)")
    p.add_argument("state_file", help="Fichier JSON {dim, re, im}")
    p.add_argument("--measure", choices=["A", "B"], type=str.upper,
                   help="Sous-système mesuré (défaut : les deux)")
    p.add_argument("--basis", type=str,
                   help="Base fixe : comp, x ou theta,phi en radians (défaut : comp et x)")
    p.add_argument("--grid", type=int, help="Résolution N de la grille (N x 2(N-1))")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", parents=[fmt], help="Monte Carlo du schéma alterné")
    p.add_argument("--seed", type=int, default=defaults.seed,
                   help="Graine aléatoire pour reproduire les résultats")
    p.add_argument("--n", type=int, default=defaults.plays, help="Nombre de parties")
    p.add_argument("--streams", type=int, default=defaults.streams,
                   help="Nombre de flux aléatoires indépendants")
    p.add_argument("--state", type=str, help="État JSON à utiliser au lieu de ρ_AB")
    p.add_argument("--order", choices=["AB", "BA"], default="AB",
                   help="Ordre d'évaluation des mesures")
    p.add_argument("--swap-stage2", action="store_true",
                   help="Échange L et R dans la règle de l'étape 2")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="Balayage de bruit local, export CSV")
    p.add_argument("--kind", choices=sorted(CHANNELS), default=defaults.sweep_kind,
                   help="Canal de bruit")
    p.add_argument("--steps", type=int, default=defaults.sweep_steps,
                   help="Nombre d'intensités sur [0, 1]")
    p.add_argument("--subsystems", type=str.upper, default=defaults.sweep_subsystems,
                   help="Qubits bruités : A, B ou AB")
    p.add_argument("--out", type=str, default="sweep.csv", help="Fichier CSV de sortie")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("solve", parents=[fmt], help="Résout un jeu décrit en JSON")
    p.add_argument("game_file", help="Fichier JSON {stages, information_sets, payoff}")
    p.add_argument("--grid-steps", type=int, default=defaults.grid_steps,
                   help="Points par axe de la recherche comportementale")
    p.set_defaults(func=cmd_solve)
    return parser


def main(argv=None) -> int:
    # Preliminary parse to load configuration defaults
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=str, default="config.ini")
    pre_args, _ = pre.parse_known_args(argv)
    try:
        defaults = load_defaults(pre_args.config)
    except ValueError as exc:
        logging.error(f"Configuration invalide : {exc}")
        return EXIT_PARSE

    parser = build_parser(defaults)
    args = parser.parse_args(argv)

    if args.command == "simulate":
        if args.n < 1:
            parser.error("--n must be >= 1")
        if args.streams < 1:
            parser.error("--streams must be >= 1")
        if args.seed < 0:
            parser.error("--seed must be >= 0")
    if args.command == "sweep":
        if args.steps < 2:
            parser.error("--steps must be >= 2")
        try:
            parse_subsystems(args.subsystems)
        except ValueError as exc:
            parser.error(str(exc))
    if args.command == "solve" and args.grid_steps < 2:
        parser.error("--grid-steps must be >= 2")
    if args.command == "analyze":
        if args.grid is not None and args.grid < 2:
            parser.error("--grid must be >= 2")
        if args.basis is not None:
            try:
                measurement_for_basis("A", args.basis)
            except ValueError as exc:
                parser.error(str(exc))

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    handler = None
    diag_level = diag_logger.level
    if args.diagnostics:
        handler = logging.FileHandler(args.diagnostics, mode="w")
        handler.setFormatter(logging.Formatter("%(message)s"))
        diag_logger.addHandler(handler)
        diag_logger.setLevel(logging.DEBUG)
        diag_logger.propagate = False
    try:
        return args.func(args)
    finally:
        if handler is not None:
            diag_logger.removeHandler(handler)
            diag_logger.propagate = True
            diag_logger.setLevel(diag_level)
            handler.close()


if __name__ == "__main__":
    sys.exit(main())
