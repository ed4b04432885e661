"""
Curvas de fronteira parametrizadas (círculo, amendoim, pera e pipa) com
derivadas analíticas, normais exteriores e jacobianos para a discretização
de Nyström.

Todas as curvas são 2π-periódicas e percorridas no sentido anti-horário;
a normal exterior é a tangente girada de -π/2 e normalizada.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterator, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy.spatial.distance import pdist

from utils.errors import ValidationError


TWO_PI = 2.0 * math.pi
CONTAINS_NODES = 256  # m usado no teste de número de voltas
DISTANCE_NODES = 512  # m usado na distância até a fronteira
_CHUNK = 2048


class CurveKind(Enum):
    """Formas disponíveis."""

    CIRCLE = "circle"
    PEANUT = "peanut"  # sqrt(3 cos^2 t + 1) (cos t, sin t)
    PEAR = "pear"  # (2 + 0.3 cos 3t) (cos t, sin t)
    KITE = "kite"  # (cos t + 0.65 cos 2t - 0.65, 1.5 sin t)


@dataclass(frozen=True)
class BoundaryPoint:
    """Ponto da fronteira com as grandezas usadas pelos núcleos integrais."""

    position: np.ndarray
    tangent: np.ndarray  # dx/dt
    second: np.ndarray  # d2x/dt2
    normal: np.ndarray  # unitária, exterior
    jacobian: float  # |dx/dt|


@dataclass(frozen=True)
class CurveSamples:
    """Amostras vetorizadas de uma curva em parâmetros t (arrays de shape (M,) ou (M, 2))."""

    t: np.ndarray
    position: np.ndarray
    tangent: np.ndarray
    second: np.ndarray
    normal: np.ndarray
    jacobian: np.ndarray

    def __len__(self) -> int:
        return int(self.t.shape[0])

    def __getitem__(self, j: int) -> BoundaryPoint:
        return BoundaryPoint(
            position=self.position[j],
            tangent=self.tangent[j],
            second=self.second[j],
            normal=self.normal[j],
            jacobian=float(self.jacobian[j]),
        )

    def __iter__(self) -> Iterator[BoundaryPoint]:
        for j in range(len(self)):
            yield self[j]

    @property
    def unnormalized_normal(self) -> np.ndarray:
        """(x2', -x1') = normal * jacobiano."""
        return self.normal * self.jacobian[:, None]


@dataclass(frozen=True)
class Discretization(CurveSamples):
    """Nós de Nyström t_j = πj/m, j = 0..2m-1."""

    m: int = 0

    @property
    def spacing(self) -> float:
        return math.pi / self.m

    def arc_length(self) -> float:
        return float(np.sum(self.jacobian) * self.spacing)

    def panel_length(self) -> float:
        """Maior distância entre nós consecutivos (em comprimento de arco)."""
        return float(np.max(self.jacobian) * self.spacing)


@dataclass(frozen=True)
class BoundaryCurve:
    """Curva de fronteira: forma + deslocamento (a, b) + raio (apenas círculo)."""

    kind: CurveKind
    center: tuple[float, float] = (0.0, 0.0)
    radius: Optional[float] = None

    def __post_init__(self) -> None:
        if not isinstance(self.kind, CurveKind):
            raise ValidationError(f"tipo de curva desconhecido: {self.kind!r}")
        if len(self.center) != 2 or not all(math.isfinite(float(c)) for c in self.center):
            raise ValidationError(f"centro inválido: {self.center!r}")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if self.kind is CurveKind.CIRCLE:
            if self.radius is None or not (float(self.radius) > 0.0) or not math.isfinite(self.radius):
                raise ValidationError("círculo exige raio > 0")
            object.__setattr__(self, "radius", float(self.radius))
        elif self.radius is not None:
            raise ValidationError(f"raio só se aplica ao círculo (recebido para {self.kind.value})")

    # ------------------------------------------------------------------
    # Parametrizações
    # ------------------------------------------------------------------

    def _derivatives(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        c, s = np.cos(t), np.sin(t)

        if self.kind is CurveKind.KITE:
            x = np.stack([c + 0.65 * np.cos(2 * t) - 0.65, 1.5 * s], axis=-1)
            dx = np.stack([-s - 1.3 * np.sin(2 * t), 1.5 * c], axis=-1)
            ddx = np.stack([-c - 2.6 * np.cos(2 * t), -1.5 * s], axis=-1)
        else:
            rho, drho, ddrho = self._radial(t)
            e = np.stack([c, s], axis=-1)
            e_perp = np.stack([-s, c], axis=-1)
            x = rho[..., None] * e
            dx = drho[..., None] * e + rho[..., None] * e_perp
            ddx = (ddrho - rho)[..., None] * e + 2.0 * drho[..., None] * e_perp

        x = x + np.asarray(self.center)
        return x, dx, ddx

    def _radial(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Raio polar rho(t) e suas duas derivadas."""
        if self.kind is CurveKind.CIRCLE:
            r = np.full_like(t, self.radius)
            return r, np.zeros_like(t), np.zeros_like(t)
        if self.kind is CurveKind.PEANUT:
            g = 3.0 * np.cos(t) ** 2 + 1.0
            dg = -3.0 * np.sin(2 * t)
            ddg = -6.0 * np.cos(2 * t)
            rho = np.sqrt(g)
            return rho, dg / (2 * rho), ddg / (2 * rho) - dg**2 / (4 * rho**3)
        if self.kind is CurveKind.PEAR:
            return 2.0 + 0.3 * np.cos(3 * t), -0.9 * np.sin(3 * t), -2.7 * np.cos(3 * t)
        raise ValidationError(f"tipo de curva desconhecido: {self.kind!r}")

    @cached_property
    def _orientation(self) -> float:
        # Sinal da área (fórmula do laço); +1 para sentido anti-horário.
        t = np.arange(512) * (TWO_PI / 512)
        x, _, _ = self._derivatives(t)
        x_next = np.roll(x, -1, axis=0)
        area = 0.5 * np.sum(x[:, 0] * x_next[:, 1] - x_next[:, 0] * x[:, 1])
        return 1.0 if area > 0 else -1.0

    # ------------------------------------------------------------------
    # API pública
    # ------------------------------------------------------------------

    def sample(self, t: ArrayLike) -> CurveSamples:
        """Avalia a curva nos parâmetros t (vetorizado)."""
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        if not np.all(np.isfinite(tt)):
            raise ValidationError("parâmetro t não finito")
        x, dx, ddx = self._derivatives(tt)
        jac = np.hypot(dx[:, 0], dx[:, 1])
        normal = self._orientation * np.stack([dx[:, 1], -dx[:, 0]], axis=-1) / jac[:, None]
        return CurveSamples(t=tt, position=x, tangent=dx, second=ddx, normal=normal, jacobian=jac)

    def eval(self, t: float) -> BoundaryPoint:
        """Posição, derivadas, normal exterior e jacobiano em um parâmetro."""
        return self.sample([t])[0]

    def discretize(self, m: int) -> Discretization:
        """2m nós equiespaçados no parâmetro, t_j = πj/m."""
        if isinstance(m, bool) or int(m) != m:
            raise ValidationError(f"m deve ser inteiro: {m!r}")
        m = int(m)
        if m % 2:
            raise ValidationError(f"m deve ser par: {m}")
        if m < 8:
            raise ValidationError(f"m pequeno demais (mínimo 8): {m}")
        s = self.sample(np.arange(2 * m) * (math.pi / m))
        return Discretization(
            t=s.t,
            position=s.position,
            tangent=s.tangent,
            second=s.second,
            normal=s.normal,
            jacobian=s.jacobian,
            m=m,
        )

    def diameter(self) -> float:
        return float(pdist(self.discretize(64).position).max())

    def contains(self, z: ArrayLike) -> bool | np.ndarray:
        """Teste do número de voltas contra o polígono com m = 256.

        Pontos a menos de ~1e-9 da fronteira podem cair de qualquer lado.
        """
        pts = np.asarray(z, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)

        nodes = self.discretize(CONTAINS_NODES).position
        zv = nodes[:, 0] + 1j * nodes[:, 1]
        zv_next = np.roll(zv, -1)
        zp = pts[:, 0] + 1j * pts[:, 1]

        inside = np.empty(zp.shape[0], dtype=bool)
        for start in range(0, zp.shape[0], _CHUNK):
            block = zp[start : start + _CHUNK, None]
            with np.errstate(divide="ignore", invalid="ignore"):
                winding = np.sum(np.angle((zv_next[None, :] - block) / (zv[None, :] - block)), axis=1)
            inside[start : start + _CHUNK] = np.abs(winding) > math.pi
        return bool(inside[0]) if single else inside

    def distance_to_boundary(self, z: ArrayLike) -> float | np.ndarray:
        """Distância euclidiana até os nós da curva discretizada com m = 512."""
        pts = np.asarray(z, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        nodes = self.discretize(DISTANCE_NODES).position

        dist = np.empty(pts.shape[0])
        for start in range(0, pts.shape[0], _CHUNK):
            block = pts[start : start + _CHUNK]
            diff = block[:, None, :] - nodes[None, :, :]
            dist[start : start + _CHUNK] = np.sqrt(np.min(np.sum(diff**2, axis=-1), axis=1))
        return float(dist[0]) if single else dist


def curve_from_name(
    kind: str,
    center: Sequence[float] = (0.0, 0.0),
    radius: Optional[float] = None,
) -> BoundaryCurve:
    """Constrói uma curva a partir do nome usado nos arquivos de configuração."""
    try:
        curve_kind = CurveKind(kind.strip().lower())
    except ValueError:
        valid = ", ".join(k.value for k in CurveKind)
        raise ValidationError(f"tipo de curva desconhecido: {kind!r} (válidos: {valid})") from None
    return BoundaryCurve(kind=curve_kind, center=(center[0], center[1]), radius=radius)


def distance_to_curves(curves: Sequence[BoundaryCurve], z: ArrayLike) -> np.ndarray:
    """Menor distância de cada ponto até a união das curvas."""
    pts = np.atleast_2d(np.asarray(z, dtype=float))
    return np.min(np.stack([np.atleast_1d(c.distance_to_boundary(pts)) for c in curves]), axis=0)
