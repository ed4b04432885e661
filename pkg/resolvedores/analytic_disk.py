"""
Campo distante de um disco por separação de variáveis (expansão de
Jacobi–Anger), para condições de Dirichlet, Neumann, impedância e meio
penetrável de contraste constante.

Com u^s = Σ a_n i^n H(1)_n(k|x|) e^{in(φ-φ_d)} e a normalização
u∞ = √(8kπ) e^{-iπ/4} lim √r e^{-ikr} u^s, obtém-se

    u∞(x̂, d) = -4i [a_0 + 2 Σ_{n>=1} a_n cos(n(φ_x - φ_d))]

onde a_n = a_{-n} é a razão de coeficientes do modo n. Discos fora da origem
usam a identidade de translação u∞_c = e^{ik(d - x̂)·c} u∞_0.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy import special

from utils import specfun
from utils.errors import NumericalError, ValidationError
from utils.farfield import FarFieldMatrix, _check_direction_count, directions
from utils.geometry import CurveKind

from .base import (
    BaseForwardSolver,
    BoundaryCondition,
    ConditionKind,
    ForwardResult,
    ScattererConfig,
)


MAX_KR = 100.0  # orçamento de truncamento da série
EXTRA_MODES = 20
_DEGENERATE = 1e-300


@dataclass(frozen=True)
class DiskScatterer:
    """Disco de centro c e raio r com uma condição de contorno (ou contraste)."""

    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0
    condition: BoundaryCondition = field(default_factory=BoundaryCondition.dirichlet)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValidationError(f"raio do disco deve ser > 0: {self.radius}")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))


def truncation_order(disk: DiskScatterer, k: float) -> int:
    """n_max = ⌈k·r⌉ + 20."""
    kr = k * disk.radius
    if not k > 0:
        raise ValidationError(f"número de onda deve ser > 0: {k}")
    if kr > MAX_KR:
        raise ValidationError(f"orçamento de truncamento excedido: k·r = {kr} > {MAX_KR}")
    return math.ceil(kr) + EXTRA_MODES


def disk_coefficients(disk: DiskScatterer, k: float, n_max: Optional[int] = None) -> np.ndarray:
    """Razões a_n, n = 0..n_max, do campo espalhado em relação à onda incidente."""
    if n_max is None:
        n_max = truncation_order(disk, k)
    else:
        truncation_order(disk, k)
    n = np.arange(n_max + 1)
    kr = k * disk.radius
    cond = disk.condition

    if cond.kind is ConditionKind.PENETRABLE and cond.contrast == 0:
        return np.zeros(n_max + 1, dtype=np.complex128)
    if cond.kind is ConditionKind.IMPEDANCE and cond.impedance == 0:
        cond = BoundaryCondition.neumann()

    with np.errstate(all="ignore"):
        if cond.kind is ConditionKind.DIRICHLET:
            num = specfun.bessel_j(n, kr) + 0j
            den = specfun.hankel1(n, kr)
        elif cond.kind is ConditionKind.NEUMANN:
            num = specfun.bessel_j_prime(n, kr) + 0j
            den = specfun.hankel1_prime(n, kr)
        elif cond.kind is ConditionKind.IMPEDANCE:
            lam = cond.impedance
            num = k * specfun.bessel_j_prime(n, kr) + lam * specfun.bessel_j(n, kr)
            den = k * specfun.hankel1_prime(n, kr) + lam * specfun.hankel1(n, kr)
        elif cond.kind is ConditionKind.PENETRABLE:
            # Ramo principal: Im k1 >= 0. Argumento complexo direto em scipy.special.
            k1 = k * np.sqrt(1.0 + cond.contrast + 0j)
            j_in = special.jv(n, k1 * disk.radius)
            dj_in = special.jvp(n, k1 * disk.radius)
            j_out = specfun.bessel_j(n, kr)
            dj_out = specfun.bessel_j_prime(n, kr)
            num = k1 * dj_in * j_out - k * j_in * dj_out
            den = k1 * dj_in * specfun.hankel1(n, kr) - k * j_in * specfun.hankel1_prime(n, kr)
        else:  # pragma: no cover
            raise ValidationError(f"condição desconhecida: {cond.kind}")

        coeffs = -num / den

    # Y_n transborda para n >> kr: o modo é desprezível.
    overflow = ~np.isfinite(den)
    coeffs[overflow] = 0.0
    if np.any(np.abs(den[~overflow]) < _DEGENERATE):
        raise NumericalError(f"denominador degenerado na série do disco (k={k}, r={disk.radius})")
    if not np.all(np.isfinite(coeffs)):
        raise NumericalError(f"coeficientes não finitos na série do disco (k={k}, r={disk.radius})")
    return coeffs


def _angular_sum(coeffs: np.ndarray, delta: np.ndarray) -> np.ndarray:
    n = np.arange(1, coeffs.shape[0])
    series = coeffs[0] + 2.0 * np.cos(np.multiply.outer(delta, n)) @ coeffs[1:]
    return -4j * series


def _unit(v: Sequence[float], name: str) -> np.ndarray:
    vec = np.asarray(v, dtype=float)
    if vec.shape != (2,) or abs(math.hypot(vec[0], vec[1]) - 1.0) > 1e-10:
        raise ValidationError(f"{name} deve ser um vetor unitário 2D: {v!r}")
    return vec


def disk_far_field(disk: DiskScatterer, k: float, obs: Sequence[float], inc: Sequence[float]) -> complex:
    """u∞(obs, inc) do disco."""
    x = _unit(obs, "obs")
    d = _unit(inc, "inc")
    coeffs = disk_coefficients(disk, k)
    # Δ por produto escalar/vetorial: a troca (obs, inc) -> (-inc, -obs) só inverte o sinal.
    delta = math.atan2(x[0] * d[1] - x[1] * d[0], x[0] * d[0] + x[1] * d[1])
    value = complex(_angular_sum(coeffs, np.array([delta]))[0])
    c = np.asarray(disk.center)
    if np.any(c != 0):
        value *= complex(np.exp(1j * k * float((d - x) @ c)))
    return value


def disk_far_field_matrix(disk: DiskScatterer, k: float, n_dirs: int) -> FarFieldMatrix:
    """Matriz [m][l] = u∞(x̂_m, θ̂_l) nas N direções equiespaçadas."""
    n = _check_direction_count(n_dirs)
    coeffs = disk_coefficients(disk, k)

    # Ângulo pelo menor representante de (m-l) mod N: circulante e recíproca bit a bit.
    d = np.arange(n)
    values = _angular_sum(coeffs, 2.0 * math.pi * np.minimum(d, n - d) / n)
    idx = (d[:, None] - d[None, :]) % n
    entries = values[idx]

    c = np.asarray(disk.center)
    if np.any(c != 0):
        proj = directions(n) @ c
        entries = entries * np.exp(1j * k * (proj[None, :] - proj[:, None]))
    return FarFieldMatrix(k=k, entries=entries)


def disk_scattered_field(
    disk: DiskScatterer,
    k: float,
    inc: Sequence[float],
    points: ArrayLike,
) -> np.ndarray:
    """Campo espalhado u^s nos pontos exteriores ao disco (série de Hankel)."""
    d = _unit(inc, "inc")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    c = np.asarray(disk.center)
    rel = pts - c
    rho = np.hypot(rel[:, 0], rel[:, 1])
    if np.any(rho < disk.radius):
        raise ValidationError("pontos no interior do disco")

    coeffs = disk_coefficients(disk, k)
    n = np.arange(coeffs.shape[0])
    phi = np.arctan2(rel[:, 1], rel[:, 0]) - math.atan2(d[1], d[0])
    hank = specfun.hankel1(n[None, :], k * rho[:, None])
    weights = np.where(n == 0, 1.0, 2.0) * coeffs * (1j**n)
    field_values = np.sum(weights[None, :] * hank * np.cos(np.outer(phi, n)), axis=1)
    return np.exp(1j * k * float(c @ d)) * field_values


class AnalyticDiskSolver(BaseForwardSolver):
    """Resolvedor por série para um único disco."""

    name = "analytic"
    tag = "[DISCO]"

    def solve(self, config: ScattererConfig, n_dirs: int) -> ForwardResult:
        result = ForwardResult(success=False, engine=self.name)
        start = time.perf_counter()
        try:
            disk = disk_from_config(config)
            self._log(f"Série do disco: r={disk.radius}, k={config.k}, n_max={truncation_order(disk, config.k)}")
            result.far_field = disk_far_field_matrix(disk, config.k, n_dirs)
            result.success = True
        except Exception as e:
            result.errors.append(str(e))
            raise
        finally:
            result.elapsed_seconds = time.perf_counter() - start
        self._log(f"Matriz {n_dirs}×{n_dirs} em {result.elapsed_seconds:.3f} s")
        return result


def disk_from_config(config: ScattererConfig) -> DiskScatterer:
    if len(config.components) != 1:
        raise ValidationError("o motor analítico aceita um único disco")
    comp = config.components[0]
    if comp.curve.kind is not CurveKind.CIRCLE:
        raise ValidationError(f"o motor analítico exige um círculo, recebido {comp.curve.kind.value}")
    return DiskScatterer(center=comp.curve.center, radius=float(comp.curve.radius), condition=comp.condition)
