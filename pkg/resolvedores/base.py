from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from utils.errors import ValidationError
from utils.farfield import FarFieldMatrix
from utils.geometry import BoundaryCurve


logger = logging.getLogger(__name__)


class ConditionKind(Enum):
    """Condição na fronteira de cada componente."""

    DIRICHLET = "dirichlet"  # u = 0 (som suave)
    NEUMANN = "neumann"  # ∂u/∂ν = 0 (som rígido)
    IMPEDANCE = "impedance"  # ∂u/∂ν + λu = 0
    PENETRABLE = "penetrable"  # Δu + k²(1+q)u = 0 no interior (apenas discos)


@dataclass(frozen=True)
class BoundaryCondition:
    """Tipo de condição com o parâmetro λ (impedância) ou q (contraste)."""

    kind: ConditionKind = ConditionKind.DIRICHLET
    impedance: complex = 0j  # λ, Im λ >= 0
    contrast: complex = 0j  # q, Im q >= 0, 1+q fora de (-inf, 0]

    def __post_init__(self) -> None:
        object.__setattr__(self, "impedance", complex(self.impedance))
        object.__setattr__(self, "contrast", complex(self.contrast))
        if not (np.isfinite(self.impedance) and np.isfinite(self.contrast)):
            raise ValidationError("parâmetros da condição devem ser finitos")
        if self.kind is ConditionKind.IMPEDANCE and self.impedance.imag < 0:
            raise ValidationError(f"impedância exige Im λ >= 0: {self.impedance}")
        if self.kind is ConditionKind.PENETRABLE:
            if self.contrast.imag < 0:
                raise ValidationError(f"contraste exige Im q >= 0: {self.contrast}")
            refr = 1.0 + self.contrast
            if refr.imag == 0 and refr.real <= 0:
                raise ValidationError(f"1 + q não pode ser real não positivo: {self.contrast}")

    @classmethod
    def dirichlet(cls) -> "BoundaryCondition":
        return cls(ConditionKind.DIRICHLET)

    @classmethod
    def neumann(cls) -> "BoundaryCondition":
        return cls(ConditionKind.NEUMANN)

    @classmethod
    def robin(cls, impedance: complex) -> "BoundaryCondition":
        return cls(ConditionKind.IMPEDANCE, impedance=impedance)

    @classmethod
    def penetrable(cls, contrast: complex) -> "BoundaryCondition":
        return cls(ConditionKind.PENETRABLE, contrast=contrast)


@dataclass(frozen=True)
class Component:
    """Uma componente conexa do obstáculo."""

    curve: BoundaryCurve
    condition: BoundaryCondition = field(default_factory=BoundaryCondition.dirichlet)


@dataclass
class ScattererConfig:
    """Obstáculo (uma ou mais componentes disjuntas) e número de onda."""

    components: list[Component]
    k: float

    def __post_init__(self) -> None:
        self.k = float(self.k)
        if not math.isfinite(self.k) or self.k <= 0.0:
            raise ValidationError(f"número de onda deve ser > 0: {self.k}")
        if not self.components:
            raise ValidationError("o obstáculo precisa de ao menos uma componente")
        self.components = list(self.components)
        self._check_disjoint()

    def _check_disjoint(self) -> None:
        nodes = [c.curve.discretize(64).position for c in self.components]
        for i in range(len(nodes)):
            for j in range(i + 1, len(nodes)):
                gap = float(cdist(nodes[i], nodes[j]).min())
                if gap <= 0.0:
                    raise ValidationError(f"componentes {i + 1} e {j + 1} se tocam (distância {gap})")
                ci, cj = self.components[i].curve, self.components[j].curve
                if np.any(cj.contains(nodes[i])) or np.any(ci.contains(nodes[j])):
                    raise ValidationError(f"componentes {i + 1} e {j + 1} não são disjuntas")


@dataclass
class SolverSettings:
    """Opções comuns dos resolvedores diretos."""

    nodes_per_component: Optional[int] = None  # 2m; None = max(128, 16·⌈k·diam⌉)
    target_tolerance: float = 1e-8  # usado na verificação de autoconvergência
    check_convergence: bool = False  # resolve de novo com 4m nós e compara
    condition_limit: float = 1e12  # estimativa de número de condição aceitável
    workers: int = 1  # retrosubstituições concorrentes por direção de incidência

    def __post_init__(self) -> None:
        nodes = self.nodes_per_component
        if nodes is not None:
            if isinstance(nodes, bool) or int(nodes) != nodes or nodes < 32 or nodes % 4:
                raise ValidationError(f"nós por componente devem ser múltiplo de 4 e >= 32: {nodes}")
            self.nodes_per_component = int(nodes)
        if not self.target_tolerance > 0:
            raise ValidationError("tolerância deve ser > 0")
        if self.workers < 1:
            raise ValidationError("workers deve ser >= 1")

    def nodes_for(self, curve: BoundaryCurve, k: float) -> int:
        if self.nodes_per_component is not None:
            return self.nodes_per_component
        return max(128, 16 * math.ceil(k * curve.diameter()))


@dataclass
class ForwardResult:

    success: bool
    engine: str
    far_field: Optional[FarFieldMatrix] = None
    nodes: list[int] = field(default_factory=list)
    condition_estimate: Optional[float] = None
    elapsed_seconds: float = 0.0
    warnings: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)


class BaseForwardSolver(ABC):
    """Interface base dos resolvedores do problema direto."""

    name = "base"
    tag = "[BASE]"

    def __init__(self, settings: Optional[SolverSettings] = None) -> None:
        self.settings = settings or SolverSettings()

    @abstractmethod
    def solve(self, config: ScattererConfig, n_dirs: int) -> ForwardResult:
        """Calcula a matriz de campo distante N×N para o obstáculo."""
        raise NotImplementedError

    def _log(self, message: str) -> None:
        logger.info("%s %s", self.tag, message)
