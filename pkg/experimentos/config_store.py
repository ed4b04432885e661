"""
Leitura e validação das configurações de experimento (texto `chave = valor`).

- Comentários com `#`, linhas em branco permitidas.
- Listas separadas por vírgula; pontos como `x, y`; complexos na sintaxe do
  Python (`1+1j`, `0.5j`).
- Componentes em grupos repetidos `component.<i>.<campo>`, i = 1, 2, ...
- Chaves desconhecidas são rejeitadas; `note` pode se repetir.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional, Union

from indicadores.sampling import DEFAULT_EPSILON, Method, SamplingGrid, method_from_name
from resolvedores.base import BoundaryCondition, Component, ConditionKind, ScattererConfig, SolverSettings
from utils.errors import ConfigError, ValidationError
from utils.farfield import NoiseSpec
from utils.geometry import CurveKind, curve_from_name


logger = logging.getLogger(__name__)

ENGINE_NAMES = ("bie", "analytic")

DEFAULT_CONFIG: dict[str, Any] = {
    "name": "experimento",
    "k": None,  # obrigatório
    "n_dirs": "64",
    "engine": "bie",
    "nodes": "0",  # 0 = automático
    "noise.delta": "0",
    "noise.seed": "0",
    "grid.extent": "4",
    "grid.points": "151",
    "grid.center": "0, 0",
    "methods": "new",
    "rho": "1",
    "fm.epsilon": str(DEFAULT_EPSILON),
    "output": "resultados",
}

COMPONENT_DEFAULTS: dict[str, Optional[str]] = {
    "kind": None,  # obrigatório
    "center": "0, 0",
    "radius": None,
    "condition": "dirichlet",
    "impedance": "0",
    "contrast": "0",
}

_COMPONENT_KEY = re.compile(r"^component\.(\d+)\.([a-z_]+)$")


# ----------------------------------------------------------------------
# Conversão de valores
# ----------------------------------------------------------------------


def _as_float(key: str, value: str) -> float:
    try:
        out = float(value)
    except ValueError:
        raise ConfigError(f"esperado número real, recebido {value!r}", key) from None
    if not math.isfinite(out):
        raise ConfigError(f"valor não finito: {value!r}", key)
    return out


def _as_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"esperado inteiro, recebido {value!r}", key) from None


def _as_complex(key: str, value: str) -> complex:
    try:
        return complex(value.replace(" ", ""))
    except ValueError:
        raise ConfigError(f"esperado número complexo (ex.: 1+1j), recebido {value!r}", key) from None


def _as_point(key: str, value: str) -> tuple[float, float]:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"esperado ponto 'x, y', recebido {value!r}", key)
    return (_as_float(key, parts[0]), _as_float(key, parts[1]))


def _as_list(value: str) -> list[str]:
    return [p.strip() for p in value.split(",") if p.strip()]


# ----------------------------------------------------------------------
# Configuração
# ----------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """Experimento completo: obstáculo, dados, ruído, grade e indicadores."""

    name: str
    scatterer: ScattererConfig
    n_dirs: int
    engine: str = "bie"
    nodes: int = 0
    deltas: list[float] = field(default_factory=lambda: [0.0])
    seed: int = 0
    grid: SamplingGrid = field(default_factory=lambda: SamplingGrid(4.0, 151))
    methods: list[Method] = field(default_factory=lambda: [Method.NEW])
    rhos: list[float] = field(default_factory=lambda: [1.0])
    epsilon: float = DEFAULT_EPSILON
    output: Path = Path("resultados")
    notes: list[str] = field(default_factory=list)
    source: Optional[str] = None

    def __post_init__(self) -> None:
        self.validate()

    @property
    def k(self) -> float:
        return self.scatterer.k

    def validate(self) -> None:
        if self.engine not in ENGINE_NAMES:
            raise ConfigError(f"motor desconhecido {self.engine!r} (válidos: {', '.join(ENGINE_NAMES)})", "engine")
        if self.n_dirs < 4 or self.n_dirs % 2:
            raise ConfigError(f"N deve ser par e >= 4: {self.n_dirs}", "n_dirs")
        if self.nodes:
            try:
                SolverSettings(nodes_per_component=self.nodes)
            except ValidationError as e:
                raise ConfigError(str(e), "nodes") from None
        for delta in self.deltas:
            NoiseSpec(delta=delta, seed=self.seed)
        if not self.methods:
            raise ConfigError("informe ao menos um método", "methods")
        for rho in self.rhos:
            if rho < 1.0:
                raise ConfigError(f"ρ deve ser >= 1: {rho}", "rho")
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"ε deve estar em (0, 1): {self.epsilon}", "fm.epsilon")

        comps = self.scatterer.components
        for index, comp in enumerate(comps, start=1):
            if comp.condition.kind is ConditionKind.PENETRABLE:
                key = f"component.{index}.condition"
                if comp.curve.kind is not CurveKind.CIRCLE:
                    raise ConfigError("meio penetrável suportado apenas para discos", key)
                if self.engine != "analytic":
                    raise ConfigError("meio penetrável exige o motor analítico (engine = analytic)", key)
        if self.engine == "analytic":
            if len(comps) != 1 or comps[0].curve.kind is not CurveKind.CIRCLE:
                raise ConfigError("o motor analítico aceita um único disco", "engine")

    def solver_settings(self, workers: int = 1) -> SolverSettings:
        return SolverSettings(nodes_per_component=self.nodes or None, workers=workers)

    def with_overrides(
        self,
        engine: Optional[str] = None,
        seed: Optional[int] = None,
        output: Optional[Union[str, Path]] = None,
    ) -> "ExperimentConfig":
        """Cópia com os valores da linha de comando aplicados (e revalidada)."""
        changes: dict[str, Any] = {}
        if engine is not None:
            changes["engine"] = engine
        if seed is not None:
            changes["seed"] = seed
        if output is not None:
            changes["output"] = Path(output)
        return replace(self, **changes) if changes else self


def _read_pairs(text: str, source: str) -> tuple[dict[str, str], list[str]]:
    pairs: dict[str, str] = {}
    notes: list[str] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{line_no}: esperado 'chave = valor'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "note":
            notes.append(value)
            continue
        if key in pairs:
            raise ConfigError(f"{source}:{line_no}: chave repetida", key)
        if key not in DEFAULT_CONFIG:
            match = _COMPONENT_KEY.match(key)
            if not match or match.group(2) not in COMPONENT_DEFAULTS:
                raise ConfigError(f"{source}:{line_no}: chave desconhecida", key)
        pairs[key] = value
    return pairs, notes


def _build_components(pairs: dict[str, str]) -> list[Component]:
    groups: dict[int, dict[str, str]] = {}
    for key, value in pairs.items():
        match = _COMPONENT_KEY.match(key)
        if match:
            groups.setdefault(int(match.group(1)), {})[match.group(2)] = value
    if not groups:
        raise ConfigError("nenhuma componente definida (component.1.kind = ...)")
    if sorted(groups) != list(range(1, len(groups) + 1)):
        raise ConfigError(f"componentes devem ser numeradas 1..n sem lacunas: {sorted(groups)}")

    components = []
    for index in sorted(groups):
        values = {**COMPONENT_DEFAULTS, **groups[index]}
        prefix = f"component.{index}"
        if values["kind"] is None:
            raise ConfigError("campo obrigatório ausente", f"{prefix}.kind")
        radius = _as_float(f"{prefix}.radius", values["radius"]) if values["radius"] is not None else None
        try:
            curve = curve_from_name(values["kind"], _as_point(f"{prefix}.center", values["center"]), radius)
        except ConfigError:
            raise
        except ValidationError as e:
            raise ConfigError(str(e), f"{prefix}.kind") from None

        name = values["condition"].strip().lower()
        try:
            if name == ConditionKind.DIRICHLET.value:
                condition = BoundaryCondition.dirichlet()
            elif name == ConditionKind.NEUMANN.value:
                condition = BoundaryCondition.neumann()
            elif name == ConditionKind.IMPEDANCE.value:
                condition = BoundaryCondition.robin(_as_complex(f"{prefix}.impedance", values["impedance"]))
            elif name == ConditionKind.PENETRABLE.value:
                condition = BoundaryCondition.penetrable(_as_complex(f"{prefix}.contrast", values["contrast"]))
            else:
                valid = ", ".join(c.value for c in ConditionKind)
                raise ConfigError(f"condição desconhecida {name!r} (válidas: {valid})", f"{prefix}.condition")
        except ConfigError:
            raise
        except ValidationError as e:
            raise ConfigError(str(e), f"{prefix}.condition") from None
        components.append(Component(curve=curve, condition=condition))
    return components


def parse_config(text: str, source: str = "<texto>") -> ExperimentConfig:
    pairs, notes = _read_pairs(text, source)
    values = {**DEFAULT_CONFIG, **{k: v for k, v in pairs.items() if k in DEFAULT_CONFIG}}
    if values["k"] is None:
        raise ConfigError("campo obrigatório ausente", "k")

    try:
        scatterer = ScattererConfig(components=_build_components(pairs), k=_as_float("k", values["k"]))
    except ConfigError:
        raise
    except ValidationError as e:
        raise ConfigError(str(e)) from None

    try:
        grid = SamplingGrid(
            extent=_as_float("grid.extent", values["grid.extent"]),
            points_per_side=_as_int("grid.points", values["grid.points"]),
            center=_as_point("grid.center", values["grid.center"]),
        )
        methods = [method_from_name(m) for m in _as_list(values["methods"])]
    except ConfigError:
        raise
    except ValidationError as e:
        raise ConfigError(str(e)) from None

    seed = _as_int("noise.seed", values["noise.seed"])
    if not 0 <= seed < 2**64:
        raise ConfigError(f"semente deve ser inteiro de 64 bits sem sinal: {seed}", "noise.seed")

    try:
        config = ExperimentConfig(
            name=values["name"],
            scatterer=scatterer,
            n_dirs=_as_int("n_dirs", values["n_dirs"]),
            engine=values["engine"].strip().lower(),
            nodes=_as_int("nodes", values["nodes"]),
            deltas=[_as_float("noise.delta", d) for d in _as_list(values["noise.delta"])],
            seed=seed,
            grid=grid,
            methods=methods,
            rhos=[_as_float("rho", r) for r in _as_list(values["rho"])],
            epsilon=_as_float("fm.epsilon", values["fm.epsilon"]),
            output=Path(values["output"]),
            notes=notes,
            source=source,
        )
    except ConfigError:
        raise
    except ValidationError as e:
        raise ConfigError(str(e)) from None

    for note in config.notes:
        logger.warning("Nota do experimento %s: %s", config.name, note)
    return config


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    cfg_path = Path(path)
    if not cfg_path.is_file():
        raise FileNotFoundError(f"Arquivo não encontrado: {cfg_path}")
    return parse_config(cfg_path.read_text(encoding="utf-8"), source=str(cfg_path))
