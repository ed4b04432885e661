from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, NoReturn, Optional, Type

from experimentos.config_store import ENGINE_NAMES, ExperimentConfig, load_config
from experimentos.pipeline import cmd_compare, cmd_forward, cmd_perturb, cmd_reconstruct, cmd_verify
from indicadores.sampling import Method, SamplingGrid
from resolvedores.analytic_disk import AnalyticDiskSolver
from resolvedores.base import BaseForwardSolver
from resolvedores.nystrom import NystromSolver
from utils.errors import NumericalError, ValidationError


ENGINES: Dict[str, Type[BaseForwardSolver]] = {
    "bie": NystromSolver,
    "analytic": AnalyticDiskSolver,
}

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

DEFAULT_OUTPUT = "resultados"


class _Parser(argparse.ArgumentParser):
    """Erros de uso saem com código 1."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: erro: {message}\n")


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"semente deve ser inteiro de 64 bits sem sinal: {text}")
    return value


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", "-o", dest="out", default=None, help="Diretório de saída (padrão: o da configuração).")
    common.add_argument("--verbose", "-v", action="store_true", help="Exibe informações detalhadas.")
    common.add_argument(
        "--workers",
        type=int,
        default=1,
        help="Threads para retrosubstituições e varreduras (padrão: 1).",
    )

    parser = _Parser(
        description="Reconstrutor: dados de campo distante 2D, ruído e indicadores de amostragem.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("forward", parents=[common], help="Resolve o problema direto e grava o arquivo FARFIELD.")
    p.add_argument("--config", required=True, help="Arquivo de configuração do experimento.")
    p.add_argument("--engine", choices=ENGINE_NAMES, default=None, help="Motor do problema direto.")

    p = sub.add_parser("perturb", parents=[common], help="Aplica ruído gaussiano com erro relativo δ.")
    p.add_argument("input_file", help="Arquivo FARFIELD de entrada.")
    p.add_argument("--delta", type=float, required=True, help="Nível relativo de ruído δ >= 0.")
    p.add_argument("--seed", type=_seed, default=0, help="Semente do gerador (padrão: 0).")

    p = sub.add_parser("reconstruct", parents=[common], help="Calcula os mapas dos indicadores.")
    p.add_argument("input_file", help="Arquivo FARFIELD de entrada.")
    p.add_argument("--config", default=None, help="Configuração com grade, métodos e ρ (opcional).")

    p = sub.add_parser("compare", parents=[common], help="forward + perturb + reconstruct com os quatro indicadores.")
    p.add_argument("--config", required=True, help="Arquivo de configuração do experimento.")
    p.add_argument("--engine", choices=ENGINE_NAMES, default=None, help="Motor do problema direto.")
    p.add_argument("--seed", type=_seed, default=None, help="Semente do ruído (substitui noise.seed).")

    p = sub.add_parser("verify", parents=[common], help="Verifica as identidades do operador de campo distante.")
    p.add_argument("input_file", help="Arquivo FARFIELD de entrada.")
    p.add_argument("--seed", type=_seed, default=0, help="Semente da perturbação de estabilidade (padrão: 0).")
    p.add_argument("--config", default=None, help="Configuração com a grade de verificação (opcional).")

    return parser.parse_args(argv)


def get_solver_class(engine: str) -> Type[BaseForwardSolver]:
    try:
        return ENGINES[engine]
    except KeyError:
        raise ValidationError(f"Motor não suportado: {engine}") from None


def _load(args: argparse.Namespace) -> Optional[ExperimentConfig]:
    if not getattr(args, "config", None):
        return None
    config = load_config(args.config)
    return config.with_overrides(
        engine=getattr(args, "engine", None),
        seed=getattr(args, "seed", None) if args.command == "compare" else None,
        output=args.out,
    )


def _output_dir(args: argparse.Namespace, config: Optional[ExperimentConfig]) -> Path:
    if args.out:
        return Path(args.out)
    return config.output if config is not None else Path(DEFAULT_OUTPUT)


def run(args: argparse.Namespace) -> int:
    config = _load(args)
    out_dir = _output_dir(args, config)

    if args.command == "forward":
        solver = get_solver_class(config.engine)(config.solver_settings(args.workers))
        outcome = cmd_forward(config, solver)
        print(f"Arquivo gerado em: {outcome.far_field_path}")
        if args.verbose:
            print(f"Reciprocidade: {outcome.report.results['reciprocity_residual']:.3e}")
            print(f"Unitariedade: {outcome.report.results['unitarity_residual']:.3e}")
        return EXIT_OK

    if args.command == "perturb":
        outcome = cmd_perturb(args.input_file, args.delta, args.seed, out_dir)
        print(f"Arquivo gerado em: {outcome.far_field_path}")
        if args.verbose:
            print(f"Erro relativo: {outcome.report.results['relative_error']:.17g}")
        return EXIT_OK

    if args.command == "reconstruct":
        if config is not None:
            kwargs = dict(
                grid=config.grid,
                methods=config.methods,
                rhos=config.rhos,
                epsilon=config.epsilon,
                curves=[c.curve for c in config.scatterer.components],
                notes=config.notes,
            )
        else:
            kwargs = dict(grid=SamplingGrid(4.0, 151), methods=[Method.NEW], rhos=[1.0])
        outcome = cmd_reconstruct(args.input_file, output=out_dir, workers=args.workers, **kwargs)
        print(f"Relatório gerado em: {outcome.report_path}")
        return EXIT_OK

    if args.command == "compare":
        solver = get_solver_class(config.engine)(config.solver_settings(args.workers))
        outcomes = cmd_compare(config, solver, workers=args.workers)
        for outcome in outcomes:
            print(f"Relatório gerado em: {outcome.report_path}")
        return EXIT_OK

    if args.command == "verify":
        outcome = cmd_verify(args.input_file, out_dir, seed=args.seed, grid=config.grid if config else None)
        for name, check in outcome.report.results["checks"].items():
            status = "ok" if check["passed"] else "FALHOU"
            print(f"{name}: {status} (valor {check['value']:.3e}, limite {check['threshold']:.3e})")
        print(f"Relatório gerado em: {outcome.report_path}")
        return EXIT_OK if outcome.passed else EXIT_NUMERICAL

    raise ValidationError(f"comando desconhecido: {args.command}")  # pragma: no cover


def main(argv: list[str] | None = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        return run(args)
    except (ValidationError, FileNotFoundError) as exc:
        if args.verbose:
            logging.getLogger(__name__).exception("Falha de validação")
        print(f"Erro de validação: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"Falha numérica: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
