"""
Comandos do experimento: forward -> perturb -> reconstruct, compare e verify.

Cada comando grava seus arquivos no diretório de saída e um relatório JSON
com o manifesto (caminho, papel, SHA-256) de tudo o que foi emitido.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np

from indicadores.sampling import (
    DEFAULT_EPSILON,
    IndicatorMap,
    Method,
    SamplingGrid,
    argmax_distance,
    chain_report,
    stability_report,
    sweep,
    top_fraction_near_boundary,
)
from resolvedores.base import BaseForwardSolver
from utils import specfun
from utils.farfield import (
    FarFieldMatrix,
    NoiseSpec,
    funk_hecke_scalar,
    funk_hecke_vector,
    perturb,
    r_form_min_eigenvalue,
    read_far_field,
    reciprocity_residual,
    relative_error,
    unitarity_residual,
    write_far_field,
)
from utils.file_utils import build_output_path, write_csv, write_pgm
from utils.geometry import BoundaryCurve

from .config_store import ExperimentConfig
from .report_store import RunReport, save_report


logger = logging.getLogger(__name__)

FARFIELD_EXT = ".farfield"

RECIPROCITY_TOLERANCE = 1e-6
UNITARITY_TOLERANCE = 1e-6
R_FORM_TOLERANCE = 1e-8
CHAIN_TOLERANCE = 1e-8
FUNK_HECKE_TOLERANCE = 1e-10
FUNK_HECKE_ARGUMENTS = (0.0, 1.0, 5.0, 10.0)  # k|p|
VERIFY_GRID = SamplingGrid(extent=4.0, points_per_side=41)
VERIFY_DELTA = 0.3


@dataclass
class CommandOutcome:
    """Resultado de um comando: relatório, arquivos e, se houver, a matriz produzida."""

    report: RunReport
    report_path: Path
    far_field: Optional[FarFieldMatrix] = None
    far_field_path: Optional[Path] = None
    maps: list[IndicatorMap] = field(default_factory=list)
    passed: bool = True


def _output_path(directory: Union[str, Path], name: str, ext: str) -> Path:
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    return build_output_path(name, str(out_dir), ext)


def _operator_residuals(F: FarFieldMatrix) -> dict[str, float]:
    return {
        "reciprocity_residual": reciprocity_residual(F),
        "unitarity_residual": unitarity_residual(F),
        "r_form_min_eigenvalue": r_form_min_eigenvalue(F),
        "spectral_norm": F.spectral_norm(),
    }


def _curves(config: ExperimentConfig) -> list[BoundaryCurve]:
    return [c.curve for c in config.scatterer.components]


def _parameters(config: ExperimentConfig) -> dict[str, Any]:
    return {
        "k": config.k,
        "n_dirs": config.n_dirs,
        "engine": config.engine,
        "nodes": config.nodes,
        "components": [
            {
                "kind": c.curve.kind.value,
                "center": list(c.curve.center),
                "radius": c.curve.radius,
                "condition": c.condition.kind.value,
                "impedance": str(c.condition.impedance),
                "contrast": str(c.condition.contrast),
            }
            for c in config.scatterer.components
        ],
        "noise": {"delta": config.deltas, "seed": config.seed},
        "grid": {
            "extent": config.grid.extent,
            "points": config.grid.points_per_side,
            "center": list(config.grid.center),
        },
        "methods": [m.value for m in config.methods],
        "rho": config.rhos,
        "fm_epsilon": config.epsilon,
        "source": config.source,
    }


# ----------------------------------------------------------------------
# forward
# ----------------------------------------------------------------------


def cmd_forward(config: ExperimentConfig, solver: BaseForwardSolver) -> CommandOutcome:
    """Resolve o problema direto e grava o arquivo FARFIELD."""
    report = RunReport(command="forward", name=config.name, parameters=_parameters(config), notes=list(config.notes))
    try:
        result = solver.solve(config.scatterer, config.n_dirs)
    except Exception as e:
        logger.error("Falha no problema direto de %s (k=%s, motor %s): %s", config.name, config.k, solver.name, e)
        raise

    F = result.far_field
    path = write_far_field(_output_path(config.output, config.name, FARFIELD_EXT), F)
    report.add_file(path, "farfield")
    report.results.update(_operator_residuals(F))
    report.results.update(
        {
            "engine": result.engine,
            "nodes": result.nodes,
            "condition_estimate": result.condition_estimate,
            "warnings": result.warnings,
        }
    )
    report.timings["forward_seconds"] = result.elapsed_seconds
    report_path = save_report(report, config.output)
    logger.info(
        "Forward %s: reciprocidade %.2e, unitariedade %.2e",
        config.name,
        report.results["reciprocity_residual"],
        report.results["unitarity_residual"],
    )
    return CommandOutcome(report=report, report_path=report_path, far_field=F, far_field_path=path)


# ----------------------------------------------------------------------
# perturb
# ----------------------------------------------------------------------


def perturb_file_name(stem: str, delta: float) -> str:
    return f"{stem}_delta{delta:g}"


def cmd_perturb(
    infile: Union[str, Path],
    delta: float,
    seed: int,
    output: Union[str, Path],
    name: Optional[str] = None,
) -> CommandOutcome:
    """F^δ com erro relativo espectral δ, gravado ao lado do relatório."""
    start = time.perf_counter()
    F = read_far_field(infile)
    noise = NoiseSpec(delta=delta, seed=seed)
    noisy = perturb(F, noise)

    stem = name or Path(infile).stem
    out_name = perturb_file_name(stem, delta)
    path = write_far_field(_output_path(output, out_name, FARFIELD_EXT), noisy)

    report = RunReport(
        command="perturb",
        name=out_name,
        parameters={"input": str(infile), "delta": delta, "seed": seed, "norm": "spectral"},
    )
    report.add_file(path, "farfield")
    report.results["relative_error"] = relative_error(F, noisy)
    report.timings["perturb_seconds"] = time.perf_counter() - start
    report_path = save_report(report, output)
    return CommandOutcome(report=report, report_path=report_path, far_field=noisy, far_field_path=path)


# ----------------------------------------------------------------------
# reconstruct
# ----------------------------------------------------------------------


def map_file_name(stem: str, indicator: IndicatorMap) -> str:
    return f"{stem}_{indicator.method.value}_rho{indicator.rho:g}"


def csv_header(indicator: IndicatorMap) -> str:
    return (
        f"indicator {indicator.method.value} rho={indicator.rho:g} "
        f"k={indicator.k:g} N={indicator.n} delta={indicator.delta:g}"
    )


def cmd_reconstruct(
    source: Union[str, Path, FarFieldMatrix],
    grid: SamplingGrid,
    methods: Sequence[Method],
    rhos: Sequence[float],
    output: Union[str, Path],
    name: Optional[str] = None,
    epsilon: float = DEFAULT_EPSILON,
    delta: float = 0.0,
    curves: Optional[Sequence[BoundaryCurve]] = None,
    workers: int = 1,
    notes: Sequence[str] = (),
) -> CommandOutcome:
    """Um CSV e uma imagem PGM por (método, ρ), mais o relatório com argmax e margens."""
    if isinstance(source, FarFieldMatrix):
        F, stem = source, name or "dados"
    else:
        F, stem = read_far_field(source), name or Path(source).stem

    report = RunReport(
        command="reconstruct",
        name=stem,
        parameters={
            "input": None if isinstance(source, FarFieldMatrix) else str(source),
            "grid": {"extent": grid.extent, "points": grid.points_per_side, "center": list(grid.center)},
            "methods": [m.value for m in methods],
            "rho": list(rhos),
            "fm_epsilon": epsilon,
            "delta": delta,
        },
        notes=list(notes),
    )

    start = time.perf_counter()
    chain = chain_report(F, grid)
    report.timings["chain_seconds"] = time.perf_counter() - start
    report.results["chain"] = chain.as_dict()
    report.results["maps"] = []

    maps = []
    for method in methods:
        for rho in rhos:
            start = time.perf_counter()
            indicator = sweep(F, grid, method, rho, epsilon=epsilon, workers=workers, delta=delta)
            elapsed = time.perf_counter() - start

            file_name = map_file_name(stem, indicator)
            image = indicator.image()
            csv_path = write_csv(_output_path(output, file_name, ".csv"), image, csv_header(indicator))
            pgm_path = write_pgm(_output_path(output, file_name, ".pgm"), image)
            report.add_file(csv_path, f"csv:{method.value}:{rho:g}")
            report.add_file(pgm_path, f"pgm:{method.value}:{rho:g}")

            p, q = indicator.argmax()
            entry: dict[str, Any] = {
                "method": method.value,
                "rho": rho,
                "argmax_index": [p, q],
                "argmax_point": list(indicator.argmax_point()),
                "max": float(indicator.values[p, q]),
            }
            if curves:
                entry["argmax_distance"] = argmax_distance(indicator, curves)
                entry["top2_near_boundary"] = top_fraction_near_boundary(indicator, curves)
            report.results["maps"].append(entry)
            report.timings[f"{method.value}_rho{rho:g}_seconds"] = elapsed
            maps.append(indicator)

    report_path = save_report(report, output)
    return CommandOutcome(report=report, report_path=report_path, far_field=F, maps=maps)


# ----------------------------------------------------------------------
# compare
# ----------------------------------------------------------------------


def cmd_compare(config: ExperimentConfig, solver: BaseForwardSolver, workers: int = 1) -> list[CommandOutcome]:
    """forward + perturb (cada δ) + reconstruct com os quatro indicadores."""
    outcomes = [cmd_forward(config, solver)]
    forward = outcomes[0]
    curves = _curves(config)
    for delta in config.deltas:
        perturbed = cmd_perturb(forward.far_field_path, delta, config.seed, config.output, name=config.name)
        outcomes.append(perturbed)
        outcomes.append(
            cmd_reconstruct(
                perturbed.far_field_path,
                config.grid,
                list(Method),
                config.rhos,
                config.output,
                epsilon=config.epsilon,
                delta=delta,
                curves=curves,
                workers=workers,
                notes=config.notes,
            )
        )
    return outcomes


# ----------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------


def _check(value: float, threshold: float, passed: bool, **extra: Any) -> dict[str, Any]:
    return {"value": value, "threshold": threshold, "passed": bool(passed), **extra}


def _funk_hecke_error(k: float, n: int) -> float:
    worst = 0.0
    direction = np.array([math.cos(0.3), math.sin(0.3)])
    for t in FUNK_HECKE_ARGUMENTS:
        if t > n / 4:
            continue
        p = (t / k) * direction
        scalar = abs(funk_hecke_scalar(k, p, n) - 2.0 * math.pi * specfun.bessel_j(0, t))
        vector = np.max(np.abs(funk_hecke_vector(k, p, n) - (2.0 * math.pi / 1j) * direction * specfun.bessel_j(1, t)))
        worst = max(worst, scalar, float(vector))
    return worst


def cmd_verify(
    infile: Union[str, Path],
    output: Union[str, Path],
    seed: int = 0,
    grid: Optional[SamplingGrid] = None,
    name: Optional[str] = None,
) -> CommandOutcome:
    """Reciprocidade, unitariedade (ou positividade de R), cadeia, estabilidade e Funk–Hecke."""
    grid = grid or VERIFY_GRID
    F = read_far_field(infile)
    stem = name or Path(infile).stem
    checks: dict[str, dict[str, Any]] = {}

    reciprocity = reciprocity_residual(F)
    checks["reciprocity"] = _check(reciprocity, RECIPROCITY_TOLERANCE, reciprocity <= RECIPROCITY_TOLERANCE)

    unitarity = unitarity_residual(F)
    if unitarity <= UNITARITY_TOLERANCE:
        checks["operator_identity"] = _check(unitarity, UNITARITY_TOLERANCE, True, mode="unitarity")
    else:
        min_eig = r_form_min_eigenvalue(F)
        checks["operator_identity"] = _check(
            min_eig, -R_FORM_TOLERANCE, min_eig >= -R_FORM_TOLERANCE, mode="r_positivity", unitarity=unitarity
        )

    chain = chain_report(F, grid)
    checks["chain"] = _check(
        min(chain.lower, chain.middle, chain.upper),
        -CHAIN_TOLERANCE * chain.scale,
        chain.passed(CHAIN_TOLERANCE),
        margins=chain.as_dict(),
    )

    noisy = perturb(F, NoiseSpec(delta=VERIFY_DELTA, seed=seed))
    stability = stability_report(F, noisy, grid)
    checks["stability"] = _check(stability.max_deviation, stability.bound, stability.passed, seed=seed)

    fh_error = _funk_hecke_error(F.k, F.n)
    checks["funk_hecke"] = _check(fh_error, FUNK_HECKE_TOLERANCE, fh_error <= FUNK_HECKE_TOLERANCE)

    passed = all(c["passed"] for c in checks.values())
    report = RunReport(
        command="verify",
        name=stem,
        parameters={"input": str(infile), "k": F.k, "n_dirs": F.n, "seed": seed},
        results={"passed": passed, "checks": checks},
    )
    report_path = save_report(report, output)
    for check_name, check in checks.items():
        if not check["passed"]:
            logger.warning("Verificação %s falhou: %s (limite %s)", check_name, check["value"], check["threshold"])
    return CommandOutcome(report=report, report_path=report_path, far_field=F, passed=passed)
