"""
Indicadores de amostragem a partir da matriz de campo distante.

Com φ_z[j] = exp(-ik θ_j·z), w = 2π/N e ⟨u, v⟩_w = w Σ u_j conj(v_j):

- New:  I(z) = |⟨F φ_z, φ_z⟩_w| = w² |φ_z^H A φ_z|
- RTM:  Im ⟨F φ_z, φ_z⟩_w (com sinal)
- OSM:  w Σ_l |w Σ_m A[m][l] exp(ik x_m·z)|^ρ
- FM:   [Σ_{σ_j > ε σ_1} |⟨φ_z, u_j⟩_w|² / σ_j]^{-1}, decomposição em valores
  singulares de F_d = wA com vetores singulares normalizados em L².

As varreduras avaliam blocos de pontos de uma vez (matriz de fases) e podem
distribuir os blocos entre threads; a ordem da saída não depende disso.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg

from utils.errors import NumericalError, ValidationError
from utils.farfield import FarFieldMatrix, make_test_vector, phase_matrix, stability_bound
from utils.geometry import BoundaryCurve, distance_to_curves


logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-4
LOWER_CONSTANT = 1.0 / (8.0 * math.pi)
UPPER_CONSTANT = math.sqrt(2.0 * math.pi)
_CHUNK = 512


class Method(Enum):
    """Indicadores disponíveis."""

    NEW = "new"
    OSM = "osm"
    RTM = "rtm"
    FM = "fm"


def method_from_name(name: str) -> Method:
    try:
        return Method(name.strip().lower())
    except ValueError:
        valid = ", ".join(m.value for m in Method)
        raise ValidationError(f"método desconhecido: {name!r} (válidos: {valid})") from None


# ----------------------------------------------------------------------
# Grade e mapa
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SamplingGrid:
    """Grade M×M equiespaçada em center + [-c, c]²."""

    extent: float
    points_per_side: int
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.extent) and self.extent > 0):
            raise ValidationError(f"extensão da grade deve ser > 0: {self.extent}")
        m = self.points_per_side
        if isinstance(m, bool) or int(m) != m or m < 2:
            raise ValidationError(f"a grade precisa de ao menos 2 pontos por lado: {m}")
        object.__setattr__(self, "points_per_side", int(m))
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.points_per_side, self.points_per_side)

    def axis(self) -> np.ndarray:
        """Coordenadas -c + 2cp/(M-1), sem o deslocamento do centro."""
        m = self.points_per_side
        return -self.extent + 2.0 * self.extent * np.arange(m) / (m - 1)

    def points(self) -> np.ndarray:
        """z_pq em ordem row-major (p = índice em x, externo), shape (M², 2)."""
        a = self.axis()
        px, qy = np.meshgrid(a, a, indexing="ij")
        return np.stack([px.ravel() + self.center[0], qy.ravel() + self.center[1]], axis=-1)

    def point(self, p: int, q: int) -> tuple[float, float]:
        a = self.axis()
        return (float(a[p] + self.center[0]), float(a[q] + self.center[1]))


@dataclass
class IndicatorMap:
    """Valores values[p][q] do indicador na grade, com metadados."""

    grid: SamplingGrid
    values: np.ndarray
    method: Method
    rho: float
    k: float
    n: int
    delta: float = 0.0

    def argmax(self) -> tuple[int, int]:
        """(p, q) do máximo; empates ficam com o menor índice row-major."""
        flat = int(np.argmax(self.values))
        p, q = divmod(flat, self.grid.points_per_side)
        return p, q

    def argmax_point(self) -> tuple[float, float]:
        return self.grid.point(*self.argmax())

    def image(self) -> np.ndarray:
        """Linhas de cima para baixo = y decrescente (convenção de imagem)."""
        return self.values.T[::-1]

    def normalized(self) -> np.ndarray:
        peak = float(np.max(np.abs(self.values)))
        return self.values / peak if peak > 0 else np.zeros_like(self.values)


# ----------------------------------------------------------------------
# Indicadores pontuais
# ----------------------------------------------------------------------


def _quadratic_form(F: FarFieldMatrix, phases: np.ndarray) -> np.ndarray:
    """w² φ^H A φ para cada linha de `phases`."""
    return F.weight**2 * np.sum(phases.conj() * (phases @ F.entries.T), axis=1)


def _osm_sum(F: FarFieldMatrix, phases: np.ndarray, rho: float) -> np.ndarray:
    small = np.abs(F.weight * (phases.conj() @ F.entries))
    return F.weight * np.sum(small**rho, axis=1)


def _check_rho(rho: float) -> float:
    if not (math.isfinite(rho) and rho >= 1.0):
        raise ValidationError(f"potência ρ deve ser >= 1: {rho}")
    return float(rho)


def i_new(F: FarFieldMatrix, z: Sequence[float]) -> float:
    phi = make_test_vector(z, F.k, F.n).values
    return float(abs(_quadratic_form(F, phi[None, :])[0]))


def i_rtm(F: FarFieldMatrix, z: Sequence[float]) -> float:
    phi = make_test_vector(z, F.k, F.n).values
    return float(_quadratic_form(F, phi[None, :])[0].imag)


def i_small(F: FarFieldMatrix, z: Sequence[float], l: int) -> float:
    """|⟨u∞(·, θ_l), exp(-ik ·z)⟩| para uma única incidência."""
    if not 0 <= l < F.n:
        raise ValidationError(f"índice de incidência fora do intervalo: {l}")
    phi = make_test_vector(z, F.k, F.n).values
    return float(abs(F.weight * (phi.conj() @ F.entries[:, l])))


def i_osm(F: FarFieldMatrix, z: Sequence[float], rho: float = 2.0) -> float:
    rho = _check_rho(rho)
    phi = make_test_vector(z, F.k, F.n).values
    return float(_osm_sum(F, phi[None, :], rho)[0])


@dataclass
class PicardSystem:
    """Parte retida da decomposição em valores singulares de wA."""

    vectors: np.ndarray  # colunas u_j (norma euclidiana 1)
    singular_values: np.ndarray
    weight: float

    @classmethod
    def from_matrix(cls, F: FarFieldMatrix, epsilon: float = DEFAULT_EPSILON) -> "PicardSystem":
        if not 0.0 < epsilon < 1.0:
            raise ValidationError(f"regularização ε deve estar em (0, 1): {epsilon}")
        u, s, _ = linalg.svd(F.weight * F.entries)
        if s[0] == 0.0:
            raise NumericalError("matriz de campo distante de posto zero: indicador FM indefinido")
        keep = s > epsilon * s[0]
        logger.info("FM: %d de %d valores singulares retidos (ε = %s)", int(keep.sum()), s.shape[0], epsilon)
        return cls(vectors=u[:, keep], singular_values=s[keep], weight=F.weight)

    def evaluate(self, phases: np.ndarray) -> np.ndarray:
        coeffs = math.sqrt(self.weight) * (phases @ self.vectors.conj())
        series = np.sum(np.abs(coeffs) ** 2 / self.singular_values, axis=1)
        return 1.0 / np.maximum(series, np.finfo(float).tiny)


def i_fm(F: FarFieldMatrix, z: Sequence[float], epsilon: float = DEFAULT_EPSILON) -> float:
    phi = make_test_vector(z, F.k, F.n).values
    return float(PicardSystem.from_matrix(F, epsilon).evaluate(phi[None, :])[0])


# ----------------------------------------------------------------------
# Varreduras
# ----------------------------------------------------------------------


def _evaluate(
    F: FarFieldMatrix,
    points: np.ndarray,
    method: Method,
    rho: float,
    picard: Optional[PicardSystem],
) -> np.ndarray:
    phases = phase_matrix(points, F.k, F.n)
    if method is Method.OSM:
        return _osm_sum(F, phases, rho)
    if method is Method.FM:
        return picard.evaluate(phases) ** rho
    quad = _quadratic_form(F, phases)
    if method is Method.NEW:
        return np.abs(quad) ** rho
    return np.sign(quad.imag) * np.abs(quad.imag) ** rho


def evaluate_points(
    F: FarFieldMatrix,
    points: ArrayLike,
    method: Method = Method.NEW,
    rho: float = 1.0,
    epsilon: float = DEFAULT_EPSILON,
    workers: int = 1,
) -> np.ndarray:
    """Indicador (já com a potência ρ) numa lista de pontos, em blocos."""
    rho = _check_rho(rho)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    picard = PicardSystem.from_matrix(F, epsilon) if method is Method.FM else None

    starts = range(0, pts.shape[0], _CHUNK)
    task = lambda s: _evaluate(F, pts[s : s + _CHUNK], method, rho, picard)  # noqa: E731
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(task, starts))
    else:
        parts = [task(s) for s in starts]
    return np.concatenate(parts) if parts else np.empty(0)


def sweep(
    F: FarFieldMatrix,
    grid: SamplingGrid,
    method: Method = Method.NEW,
    rho: float = 1.0,
    epsilon: float = DEFAULT_EPSILON,
    workers: int = 1,
    delta: float = 0.0,
) -> IndicatorMap:
    """Mapa do indicador na grade.

    New, RTM e FM recebem ρ como potência externa (RTM como sign·|·|^ρ);
    no OSM, ρ é o expoente interno da soma sobre as incidências.
    """
    start = time.perf_counter()
    values = evaluate_points(F, grid.points(), method, rho, epsilon, workers).reshape(grid.shape)
    logger.info(
        "Varredura %s (ρ=%s) em %d pontos: %.3f s",
        method.value,
        rho,
        values.size,
        time.perf_counter() - start,
    )
    return IndicatorMap(grid=grid, values=values, method=method, rho=float(rho), k=F.k, n=F.n, delta=float(delta))


def line_profile(
    F: FarFieldMatrix,
    a: Sequence[float],
    b: Sequence[float],
    samples: int = 201,
    method: Method = Method.NEW,
    rho: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Indicador ao longo do segmento [a, b]; devolve (pontos, valores)."""
    if samples < 2:
        raise ValidationError(f"o perfil precisa de ao menos 2 amostras: {samples}")
    s = np.linspace(0.0, 1.0, samples)[:, None]
    pts = (1.0 - s) * np.asarray(a, dtype=float) + s * np.asarray(b, dtype=float)
    return pts, evaluate_points(F, pts, method, rho)


# ----------------------------------------------------------------------
# Relações entre indicadores e estabilidade
# ----------------------------------------------------------------------


@dataclass
class ChainReport:
    """Folgas mínimas de  c·I_OSM ≤ I_RTM ≤ I_New ≤ C·√I_OSM  (ρ = 2) na grade."""

    lower: float
    middle: float
    upper: float
    scale: float

    def passed(self, tolerance: float = 1e-8) -> bool:
        floor = -tolerance * self.scale
        return min(self.lower, self.middle, self.upper) >= floor

    def as_dict(self) -> dict[str, float]:
        return {"lower": self.lower, "middle": self.middle, "upper": self.upper, "scale": self.scale}


def chain_report(F: FarFieldMatrix, grid: SamplingGrid) -> ChainReport:
    pts = grid.points()
    lower = middle = upper = math.inf
    scale = 1.0
    for s in range(0, pts.shape[0], _CHUNK):
        phases = phase_matrix(pts[s : s + _CHUNK], F.k, F.n)
        quad = _quadratic_form(F, phases)
        osm = _osm_sum(F, phases, 2.0)
        new = np.abs(quad)
        rtm = quad.imag
        lower = min(lower, float(np.min(rtm - LOWER_CONSTANT * osm)))
        middle = min(middle, float(np.min(new - rtm)))
        upper = min(upper, float(np.min(UPPER_CONSTANT * np.sqrt(osm) - new)))
        scale = max(scale, float(np.max(new)), float(np.max(UPPER_CONSTANT * np.sqrt(osm))))
    report = ChainReport(lower=lower, middle=middle, upper=upper, scale=scale)
    logger.info("Cadeia de desigualdades: %s", report.as_dict())
    return report


@dataclass
class StabilityReport:
    max_deviation: float
    bound: float
    violations: int = 0
    details: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0


def stability_report(F: FarFieldMatrix, noisy: FarFieldMatrix, grid: SamplingGrid, slack: float = 1e-12) -> StabilityReport:
    """max_z |I_New(F, z) − I_New(F^δ, z)| contra a cota w²N‖ΔA‖₂."""
    bound = stability_bound(F, noisy)
    pts = grid.points()
    clean = evaluate_points(F, pts, Method.NEW)
    perturbed = evaluate_points(noisy, pts, Method.NEW)
    deviation = np.abs(clean - perturbed)
    # arredondamento relativo à escala dos valores
    tolerance = bound + slack * max(1.0, float(np.max(clean)), float(np.max(perturbed)))
    violations = int(np.count_nonzero(deviation > tolerance))
    return StabilityReport(max_deviation=float(np.max(deviation)), bound=bound, violations=violations)


# ----------------------------------------------------------------------
# Métricas de localização
# ----------------------------------------------------------------------


def _distance_to_obstacle(curves: Sequence[BoundaryCurve], points: np.ndarray) -> np.ndarray:
    dist = distance_to_curves(curves, points)
    for curve in curves:
        dist[np.atleast_1d(curve.contains(points))] = 0.0
    return dist


def top_fraction_near_boundary(
    indicator: IndicatorMap,
    curves: Sequence[BoundaryCurve],
    fraction: float = 0.02,
    distance: Optional[float] = None,
) -> float:
    """Fração dos maiores valores (top `fraction`) a até `distance` do obstáculo.

    Pontos interiores contam com distância zero. Sem `distance`, usa meio
    comprimento de onda π/k.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValidationError(f"fração deve estar em (0, 1]: {fraction}")
    if distance is None:
        distance = math.pi / indicator.k
    flat = indicator.values.ravel()
    count = max(1, math.ceil(fraction * flat.size))
    top = np.argsort(-flat, kind="stable")[:count]
    dist = _distance_to_obstacle(curves, indicator.grid.points()[top])
    return float(np.mean(dist <= distance))


def argmax_distance(indicator: IndicatorMap, curves: Sequence[BoundaryCurve]) -> float:
    """Distância do argmax do mapa até o obstáculo (zero no interior)."""
    return float(_distance_to_obstacle(curves, np.asarray([indicator.argmax_point()]))[0])
