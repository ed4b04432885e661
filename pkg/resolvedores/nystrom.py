"""
Resolvedor de Nyström para o espalhamento exterior por obstáculos suaves com
uma ou mais componentes (Dirichlet, Neumann ou impedância).

Formulação
----------
Cada componente j carrega uma densidade φ_j e contribui com o potencial

    u^s = α_j S[φ_j] + β_j D[φ_j],     S[φ](x) = ∫ Φ(x,y) φ(y) ds(y),
                                        D[φ](x) = ∫ ∂Φ(x,y)/∂ν(y) φ(y) ds(y),

com Φ(x,y) = (i/4) H(1)_0(k|x-y|) e η = k:

- Dirichlet: (α, β) = (-iη, 1)  → campo combinado clássico, (I + K - iηS)φ = -2u^i
- Neumann/impedância: (α, β) = (1, iη) → Burton–Miller indireto,
  (-I + K' + iηT)φ = -2∂u^i/∂ν, com T pela fórmula de Maue
  T = d/ds S d/ds + k² ν·S ν, derivadas tangenciais por diferenciação
  espectral (interpolação trigonométrica).

Os operadores usam a convenção "vezes 2" (S, K, K', T com fator 2 no núcleo).
Nos blocos diagonais a singularidade logarítmica é separada,
K(t,τ) = K1(t,τ) ln(4 sin²((t-τ)/2)) + K2(t,τ), e integrada com os pesos
R_j exatos para polinômios trigonométricos; blocos entre componentes são
suaves e usam a regra do trapézio.

O campo distante sai das densidades com Φ∞(x̂, y) = e^{-ik x̂·y}, que é a
normalização u∞ = √(8kπ) e^{-iπ/4} lim √r e^{-ikr} u^s.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg, special

from utils.errors import NumericalError, ValidationError
from utils.farfield import FarFieldMatrix, _check_direction_count, directions
from utils.geometry import Discretization

from .base import (
    BaseForwardSolver,
    BoundaryCondition,
    ConditionKind,
    ForwardResult,
    ScattererConfig,
    SolverSettings,
)


logger = logging.getLogger(__name__)

_CHUNK = 1024


# ----------------------------------------------------------------------
# Quadratura e diferenciação periódicas
# ----------------------------------------------------------------------


def log_weights(m: int) -> np.ndarray:
    """Pesos R_{|i-j|} para ∫ ln(4 sin²((t-τ)/2)) f(τ) dτ nos nós πj/m (matriz 2m×2m)."""
    j = np.arange(2 * m)
    modes = np.arange(1, m)
    t = math.pi * j / m
    alternating = np.where(j % 2, -1.0, 1.0)
    column = -(2 * math.pi / m) * (np.cos(np.outer(t, modes)) @ (1.0 / modes)) - (math.pi / m**2) * alternating
    return linalg.circulant(column)


def log_kernel(m: int) -> np.ndarray:
    """ln(4 sin²((t_i - t_j)/2)) com diagonal zerada."""
    d = np.arange(2 * m)
    column = np.zeros(2 * m)
    column[1:] = np.log(4.0 * np.sin(math.pi * d[1:] / (2 * m)) ** 2)
    return linalg.circulant(column)


def differentiation_matrix(m: int) -> np.ndarray:
    """Derivada do interpolante trigonométrico nos 2m nós equiespaçados."""
    d = np.arange(1, 2 * m)
    h = math.pi / m
    column = np.zeros(2 * m)
    column[1:] = 0.5 * np.where(d % 2, -1.0, 1.0) / np.tan(d * h / 2)
    return linalg.circulant(column)


# ----------------------------------------------------------------------
# Blocos dos operadores
# ----------------------------------------------------------------------


@dataclass
class _Panel:
    disc: Discretization
    condition: BoundaryCondition
    offset: int

    @property
    def size(self) -> int:
        return 2 * self.disc.m

    @property
    def rows(self) -> slice:
        return slice(self.offset, self.offset + self.size)

    @property
    def weight(self) -> float:
        return math.pi / self.disc.m

    @property
    def is_dirichlet(self) -> bool:
        return self.condition.kind is ConditionKind.DIRICHLET


def _operator_blocks(target: _Panel, source: _Panel, k: float, with_normal: bool) -> dict[str, np.ndarray]:
    """Blocos S, K (e K', S~, G se pedidos) já com os pesos de quadratura."""
    same = target is source
    xa, xb = target.disc.position, source.disc.position
    diff = xa[:, None, :] - xb[None, :, :]
    r = np.hypot(diff[..., 0], diff[..., 1])
    if same:
        np.fill_diagonal(r, 1.0)

    h0 = special.hankel1(0, k * r)
    h1 = special.hankel1(1, k * r)
    jac_b = source.disc.jacobian[None, :]
    n_b = source.disc.unnormalized_normal
    nb_diff = np.einsum("ijk,jk->ij", diff, n_b)

    ops = {
        "S": 0.5j * h0 * jac_b,
        "K": 0.5j * k * h1 / r * nb_diff,
    }
    if with_normal:
        nu_a = target.disc.normal
        na_diff = np.einsum("ijk,ik->ij", diff, nu_a)
        ops["Kp"] = -0.5j * k * h1 / r * na_diff * jac_b
        ops["St"] = 0.5j * h0
        geometry = nu_a @ n_b.T
    else:
        geometry = None

    w = source.weight
    if not same:
        out = {name: w * mat for name, mat in ops.items()}
        if geometry is not None:
            out["G"] = geometry
        return out

    m = source.disc.m
    weights = log_weights(m)
    log_part = log_kernel(m)
    jac = source.disc.jacobian
    j0, j1 = h0.real, h1.real
    curvature = np.sum(source.disc.unnormalized_normal * source.disc.second, axis=1) / (2 * math.pi * jac**2)
    smooth_log = 0.5j - np.euler_gamma / math.pi - np.log(k * jac / 2) / math.pi

    singular = {
        "S": -j0 * jac_b / (2 * math.pi),
        "K": -k / (2 * math.pi) * nb_diff * j1 / r,
    }
    diagonal_s1 = {"S": -jac / (2 * math.pi), "K": np.zeros_like(jac)}
    diagonal_s2 = {"S": smooth_log * jac, "K": curvature}
    if with_normal:
        singular["Kp"] = k / (2 * math.pi) * na_diff * j1 / r * jac_b
        singular["St"] = -j0 / (2 * math.pi)
        diagonal_s1["Kp"] = np.zeros_like(jac)
        diagonal_s1["St"] = np.full_like(jac, -1.0 / (2 * math.pi))
        diagonal_s2["Kp"] = curvature
        diagonal_s2["St"] = smooth_log

    out = {}
    for name, full in ops.items():
        part1 = singular[name].astype(np.complex128)
        np.fill_diagonal(part1, diagonal_s1[name])
        part2 = full - part1 * log_part
        np.fill_diagonal(part2, diagonal_s2[name])
        out[name] = weights * part1 + w * part2
    if geometry is not None:
        out["G"] = geometry
    return out


# ----------------------------------------------------------------------
# Sistema de Nyström
# ----------------------------------------------------------------------


class NystromSystem:
    """Operador de fronteira montado e fatorado uma única vez por obstáculo."""

    def __init__(self, config: ScattererConfig, settings: SolverSettings, node_scale: int = 1) -> None:
        self.k = config.k
        self.eta = config.k
        self.settings = settings
        self.panels: list[_Panel] = []

        offset = 0
        for index, comp in enumerate(config.components, start=1):
            if comp.condition.kind is ConditionKind.PENETRABLE:
                raise ValidationError(
                    f"componente {index}: meio penetrável suportado apenas para discos (motor analítico)"
                )
            nodes = settings.nodes_for(comp.curve, self.k) * node_scale
            disc = comp.curve.discretize(nodes // 2)
            self.panels.append(_Panel(disc=disc, condition=comp.condition, offset=offset))
            offset += disc.m * 2
        self.size = offset

        self.position = np.concatenate([p.disc.position for p in self.panels])
        self.normal = np.concatenate([p.disc.normal for p in self.panels])
        self.unnormalized_normal = np.concatenate([p.disc.unnormalized_normal for p in self.panels])
        self.jacobian = np.concatenate([p.disc.jacobian for p in self.panels])
        self.node_weight = np.concatenate([np.full(p.size, p.weight) for p in self.panels])
        self.alpha = np.concatenate(
            [np.full(p.size, -1j * self.eta if p.is_dirichlet else 1.0 + 0j) for p in self.panels]
        )
        self.beta = np.concatenate([np.full(p.size, 1.0 + 0j if p.is_dirichlet else 1j * self.eta) for p in self.panels])

        matrix = self._assemble()
        self._lu = linalg.lu_factor(matrix)
        self.condition_estimate = self._condition(matrix)
        if self.condition_estimate > settings.condition_limit:
            kinds = ", ".join(p.condition.kind.value for p in self.panels)
            raise NumericalError(
                f"sistema mal condicionado (estimativa {self.condition_estimate:.3e}) "
                f"para k={self.k}, componentes [{kinds}]"
            )

    @property
    def nodes(self) -> list[int]:
        return [p.size for p in self.panels]

    def _assemble(self) -> np.ndarray:
        n = self.size
        with_normal = any(not p.is_dirichlet for p in self.panels)
        names = ["S", "K"] + (["Kp", "St", "G"] if with_normal else [])
        glob = {name: np.zeros((n, n), dtype=np.complex128) for name in names}

        for a in self.panels:
            for b in self.panels:
                for name, block in _operator_blocks(a, b, self.k, with_normal).items():
                    glob[name][a.rows, b.rows] = block

        eye = np.eye(n)
        value_trace = glob["S"] * self.alpha[None, :] + (glob["K"] + eye) * self.beta[None, :]
        if not with_normal:
            return value_trace

        diff_op = linalg.block_diag(*[differentiation_matrix(p.disc.m) for p in self.panels])
        hyper = (diff_op @ glob["St"] @ diff_op) / self.jacobian[:, None] + self.k**2 * glob["St"] * glob["G"]
        normal_trace = (glob["Kp"] - eye) * self.alpha[None, :] + hyper * self.beta[None, :]

        matrix = np.empty((n, n), dtype=np.complex128)
        for p in self.panels:
            rows = p.rows
            if p.condition.kind is ConditionKind.DIRICHLET:
                matrix[rows] = value_trace[rows]
            elif p.condition.kind is ConditionKind.NEUMANN:
                matrix[rows] = normal_trace[rows]
            else:
                matrix[rows] = normal_trace[rows] + p.condition.impedance * value_trace[rows]
        return matrix

    def _condition(self, matrix: np.ndarray) -> float:
        lu, _ = self._lu
        gecon = linalg.get_lapack_funcs("gecon", (lu,))
        rcond, info = gecon(lu, np.linalg.norm(matrix, 1), norm="1")
        if info != 0 or rcond <= 0:
            return math.inf
        return float(1.0 / rcond)

    def _rhs(self, inc: np.ndarray) -> np.ndarray:
        ui = np.exp(1j * self.k * (self.position @ inc.T))
        dui = 1j * self.k * (self.normal @ inc.T) * ui
        rhs = np.empty_like(ui)
        for p in self.panels:
            rows = p.rows
            if p.condition.kind is ConditionKind.DIRICHLET:
                rhs[rows] = -2.0 * ui[rows]
            elif p.condition.kind is ConditionKind.NEUMANN:
                rhs[rows] = -2.0 * dui[rows]
            else:
                rhs[rows] = -2.0 * (dui[rows] + p.condition.impedance * ui[rows])
        return rhs

    def densities(self, inc: ArrayLike) -> np.ndarray:
        """Densidades (uma coluna por direção de incidência)."""
        rhs = self._rhs(np.atleast_2d(np.asarray(inc, dtype=float)))
        workers = self.settings.workers
        if workers == 1 or rhs.shape[1] < 2 * workers:
            return linalg.lu_solve(self._lu, rhs)
        chunks = np.array_split(np.arange(rhs.shape[1]), workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda cols: linalg.lu_solve(self._lu, rhs[:, cols]), chunks))
        return np.hstack(parts)

    def far_field_kernel(self, obs: np.ndarray) -> np.ndarray:
        phase = np.exp(-1j * self.k * (obs @ self.position.T))
        amplitude = self.alpha * self.jacobian - 1j * self.k * self.beta * (obs @ self.unnormalized_normal.T)
        return self.node_weight * amplitude * phase

    def near_field_kernel(self, points: np.ndarray) -> np.ndarray:
        diff = points[:, None, :] - self.position[None, :, :]
        r = np.hypot(diff[..., 0], diff[..., 1])
        single = 0.25j * special.hankel1(0, self.k * r) * self.jacobian
        double = 0.25j * self.k * special.hankel1(1, self.k * r) / r * np.einsum("ijk,jk->ij", diff, self.unnormalized_normal)
        return self.node_weight * (self.alpha * single + self.beta * double)

    def min_panel_length(self) -> float:
        return min(p.disc.panel_length() for p in self.panels)


# ----------------------------------------------------------------------
# Resolvedor
# ----------------------------------------------------------------------


class NystromSolver(BaseForwardSolver):
    """Dados de campo distante por equações integrais de fronteira."""

    name = "bie"
    tag = "[BIE]"

    def solve(self, config: ScattererConfig, n_dirs: int) -> ForwardResult:
        n = _check_direction_count(n_dirs)
        result = ForwardResult(success=False, engine=self.name)
        start = time.perf_counter()
        try:
            entries, system = self._far_field(config, n, node_scale=1)
            result.nodes = system.nodes
            result.condition_estimate = system.condition_estimate
            self._log(
                f"Sistema com {system.size} incógnitas (nós {system.nodes}), "
                f"condição estimada {system.condition_estimate:.3e}"
            )

            if self.settings.check_convergence:
                refined, _ = self._far_field(config, n, node_scale=2)
                change = float(np.max(np.abs(refined - entries)))
                self._log(f"Autoconvergência: variação máxima {change:.3e} ao dobrar os nós")
                if change > self.settings.target_tolerance * max(1.0, float(np.max(np.abs(entries)))):
                    msg = f"variação {change:.3e} ao dobrar os nós excede a tolerância {self.settings.target_tolerance}"
                    result.warnings.append(msg)
                    logger.warning("%s %s", self.tag, msg)

            result.far_field = FarFieldMatrix(k=config.k, entries=entries)
            result.success = True
        except Exception as e:
            result.errors.append(str(e))
            raise
        finally:
            result.elapsed_seconds = time.perf_counter() - start

        self._log(f"Matriz {n}×{n} gerada em {result.elapsed_seconds:.3f} s")
        return result

    def _far_field(self, config: ScattererConfig, n: int, node_scale: int) -> tuple[np.ndarray, NystromSystem]:
        system = NystromSystem(config, self.settings, node_scale=node_scale)
        dirs = directions(n)
        density = system.densities(dirs)
        return system.far_field_kernel(dirs) @ density, system


def assemble_far_field_matrix(
    config: ScattererConfig,
    settings: Optional[SolverSettings] = None,
    n_dirs: int = 64,
) -> FarFieldMatrix:
    """Matriz [m][l] = u∞(x̂_m, θ̂_l) pelo método de Nyström."""
    return NystromSolver(settings).solve(config, n_dirs).far_field


def scattered_field_at(
    config: ScattererConfig,
    settings: Optional[SolverSettings],
    inc: Sequence[float],
    points: ArrayLike,
) -> np.ndarray:
    """u^s nos pontos exteriores, a mais de um painel de distância da fronteira."""
    settings = settings or SolverSettings()
    d = np.asarray(inc, dtype=float)
    if d.shape != (2,) or abs(math.hypot(d[0], d[1]) - 1.0) > 1e-10:
        raise ValidationError(f"direção de incidência deve ser unitária: {inc!r}")
    pts = np.atleast_2d(np.asarray(points, dtype=float))

    system = NystromSystem(config, settings)
    for index, (comp, panel) in enumerate(zip(config.components, system.panels), start=1):
        if np.any(comp.curve.contains(pts)):
            raise ValidationError(f"ponto no interior da componente {index}")
        if np.any(np.atleast_1d(comp.curve.distance_to_boundary(pts)) <= panel.disc.panel_length()):
            raise ValidationError(f"ponto a menos de um painel da fronteira da componente {index}")

    density = system.densities(d[None, :])[:, 0]
    values = np.empty(pts.shape[0], dtype=np.complex128)
    for start in range(0, pts.shape[0], _CHUNK):
        block = pts[start : start + _CHUNK]
        values[start : start + _CHUNK] = system.near_field_kernel(block) @ density
    return values

