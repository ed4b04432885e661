"""
Funções especiais de ordem inteira usadas pelo núcleo fundamental, pela série
analítica do disco e pelas quadraturas de Funk–Hecke.

Os valores vêm de ``scipy.special`` (rotinas AMOS/Cephes: série de potências
para argumento pequeno, recorrência e expansões assintóticas para argumento
grande). Este módulo fixa o domínio aceito, o limite de ordem e as mensagens
de erro. Todas as funções aceitam escalares ou arrays (com broadcast) e
devolvem escalares Python quando as entradas são escalares.
"""

from __future__ import annotations

from typing import Union

import numpy as np
from numpy.typing import ArrayLike
from scipy import special

from utils.errors import ValidationError


MAX_ORDER = 200  # limite de truncamento das séries

RealResult = Union[float, np.ndarray]
ComplexResult = Union[complex, np.ndarray]


# ----------------------------------------------------------------------
# Validação
# ----------------------------------------------------------------------


def _check_order(order: ArrayLike, max_order: int = MAX_ORDER) -> np.ndarray:
    n = np.asarray(order)
    if n.dtype == bool or not np.issubdtype(n.dtype, np.number):
        raise ValidationError(f"ordem inválida: {order!r}")
    if not np.issubdtype(n.dtype, np.integer):
        if not np.all(np.isfinite(n)) or np.any(n != np.round(n)):
            raise ValidationError(f"a ordem deve ser inteira: {order!r}")
        n = n.astype(np.int64)
    if np.any(n < 0):
        raise ValidationError(f"a ordem deve ser não negativa: {order!r}")
    if np.any(n > max_order):
        raise ValidationError(f"ordem acima do limite {max_order}: {order!r}")
    return n


def _check_argument(t: ArrayLike, strictly_positive: bool) -> np.ndarray:
    x = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValidationError("argumento não finito")
    if strictly_positive and np.any(x <= 0.0):
        raise ValidationError("argumento deve ser > 0 (singularidade logarítmica em t = 0)")
    if np.any(x < 0.0):
        raise ValidationError("argumento deve ser >= 0")
    return x


def _unwrap(value: np.ndarray):
    return value.item() if np.ndim(value) == 0 else value


# ----------------------------------------------------------------------
# Funções cilíndricas
# ----------------------------------------------------------------------


def bessel_j(order: ArrayLike, t: ArrayLike) -> RealResult:
    """J_n(t) para n inteiro em [0, 200] e t >= 0."""
    n = _check_order(order)
    x = _check_argument(t, strictly_positive=False)
    return _unwrap(special.jv(n, x))


def bessel_y(order: ArrayLike, t: ArrayLike) -> RealResult:
    """Y_n(t) (função de Neumann) para t > 0."""
    n = _check_order(order)
    x = _check_argument(t, strictly_positive=True)
    return _unwrap(special.yv(n, x))


def hankel1(order: ArrayLike, t: ArrayLike) -> ComplexResult:
    """H(1)_n(t) = J_n(t) + i Y_n(t) para t > 0."""
    n = _check_order(order)
    x = _check_argument(t, strictly_positive=True)
    return _unwrap(special.hankel1(n, x))


def bessel_j_prime(order: ArrayLike, t: ArrayLike) -> RealResult:
    """Derivada J'_n(t) = (J_{n-1}(t) - J_{n+1}(t)) / 2."""
    n = _check_order(order, MAX_ORDER - 1)
    x = _check_argument(t, strictly_positive=False)
    return _unwrap(special.jvp(n, x))


def hankel1_prime(order: ArrayLike, t: ArrayLike) -> ComplexResult:
    """Derivada de H(1)_n em t > 0."""
    n = _check_order(order, MAX_ORDER - 1)
    x = _check_argument(t, strictly_positive=True)
    return _unwrap(special.h1vp(n, x))


def spherical_j(order: ArrayLike, t: ArrayLike) -> RealResult:
    """Bessel esférica j_0 ou j_1; a singularidade removível em t = 0 é tratada."""
    n = _check_order(order, max_order=1)
    x = _check_argument(t, strictly_positive=False)
    return _unwrap(special.spherical_jn(n, x))
