"""
Matriz de campo distante e o operador discreto associado.

Convenções
----------
- Direções de observação e de incidência coincidem:
  x_j = theta_j = (cos 2πj/N, sin 2πj/N), j = 0..N-1, N par.
- entries[m][l] = u∞(x_m, theta_l) (linha = observação, coluna = incidência).
- Peso de quadratura w = 2π/N; o operador discreto é F_d = w·A, e o produto
  interno ponderado é <u, v>_w = w·Σ u_j conj(v_j).
- Ruído: F^δ = F + δ‖F‖₂ (R1 + iR2)/‖R1 + iR2‖₂ com R1, R2 gaussianas padrão
  geradas por ``numpy.random.default_rng(seed)`` (PCG64, ziggurat).

Formato de arquivo (UTF-8, uma linha por registro)::

    FARFIELD 1
    k <decimal>
    n <inteiro>
    norm spectral
    <re> <im>        # N·N linhas, m externo, l interno, 17 dígitos significativos
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg

from utils.errors import FarFieldFormatError, ValidationError


logger = logging.getLogger(__name__)

FORMAT_MAGIC = "FARFIELD 1"
NORM_LINE = "norm spectral"

_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_K_LINE = re.compile(rf"^k ({_NUMBER})$")
_N_LINE = re.compile(r"^n (\d+)$")
_ENTRY_LINE = re.compile(rf"^({_NUMBER}) ({_NUMBER})$")


# ----------------------------------------------------------------------
# Tipos
# ----------------------------------------------------------------------


@dataclass
class FarFieldMatrix:
    """Dados de campo distante N×N com número de onda k."""

    k: float
    entries: np.ndarray

    def __post_init__(self) -> None:
        self.k = float(self.k)
        if not math.isfinite(self.k) or self.k <= 0.0:
            raise ValidationError(f"número de onda deve ser finito e > 0: {self.k}")
        self.entries = np.asarray(self.entries, dtype=np.complex128)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise ValidationError(f"matriz de campo distante deve ser quadrada: {self.entries.shape}")
        if self.entries.shape[0] < 4 or self.entries.shape[0] % 2:
            raise ValidationError(f"número de direções deve ser par e >= 4: {self.entries.shape[0]}")
        if not np.all(np.isfinite(self.entries)):
            raise ValidationError("matriz de campo distante com entradas não finitas")

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])

    @property
    def weight(self) -> float:
        return 2.0 * math.pi / self.n

    @property
    def directions(self) -> np.ndarray:
        return directions(self.n)

    def spectral_norm(self) -> float:
        return float(np.linalg.norm(self.entries, 2))


@dataclass(frozen=True)
class NoiseSpec:
    """Nível relativo de ruído δ e semente do gerador."""

    delta: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not math.isfinite(self.delta) or self.delta < 0.0:
            raise ValidationError(f"nível de ruído deve ser >= 0: {self.delta}")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not 0 <= int(self.seed) < 2**64:
            raise ValidationError(f"semente deve ser inteiro de 64 bits sem sinal: {self.seed}")


@dataclass
class TestVector:
    """Função teste φ_z[j] = exp(-ik theta_j·z) amostrada nas direções."""

    __test__ = False  # não é uma classe de teste do pytest

    values: np.ndarray
    z: tuple[float, float]
    k: float
    n: int = field(init=False)

    def __post_init__(self) -> None:
        self.n = int(self.values.shape[0])

    @property
    def weighted_norm2(self) -> float:
        return float(2.0 * math.pi / self.n * np.sum(np.abs(self.values) ** 2))


# ----------------------------------------------------------------------
# Direções e funções teste
# ----------------------------------------------------------------------


def directions(n: int) -> np.ndarray:
    """Direções equiespaçadas (cos 2πj/n, sin 2πj/n), shape (n, 2)."""
    angles = 2.0 * math.pi * np.arange(n) / n
    return np.stack([np.cos(angles), np.sin(angles)], axis=-1)


def _check_direction_count(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 4 or n % 2:
        raise ValidationError(f"número de direções deve ser par e >= 4: {n}")
    return int(n)


def make_test_vector(z: Sequence[float], k: float, n: int) -> TestVector:
    n = _check_direction_count(n)
    zz = np.asarray(z, dtype=float)
    values = np.exp(-1j * k * (directions(n) @ zz))
    return TestVector(values=values, z=(float(zz[0]), float(zz[1])), k=float(k))


def phase_matrix(points: np.ndarray, k: float, n: int) -> np.ndarray:
    """Funções teste para vários pontos de uma vez: linha p = φ_{z_p}."""
    return np.exp(-1j * k * (np.asarray(points, dtype=float) @ directions(n).T))


def apply(F: FarFieldMatrix, g: Union[TestVector, ArrayLike]) -> np.ndarray:
    """(F g)_m = w Σ_l A[m][l] g[l]."""
    values = g.values if isinstance(g, TestVector) else np.asarray(g, dtype=np.complex128)
    if values.shape != (F.n,):
        raise ValidationError(f"dimensões incompatíveis: matriz {F.n}×{F.n}, vetor {values.shape}")
    return F.weight * (F.entries @ values)


def weighted_norm2(F: FarFieldMatrix, values: ArrayLike) -> float:
    """‖v‖²_w = w Σ |v_j|²."""
    return float(F.weight * np.sum(np.abs(np.asarray(values)) ** 2))


# ----------------------------------------------------------------------
# Ruído
# ----------------------------------------------------------------------


def perturb(F: FarFieldMatrix, noise: NoiseSpec) -> FarFieldMatrix:
    """Devolve F^δ com erro relativo espectral exatamente δ."""
    if noise.delta == 0.0:
        return FarFieldMatrix(k=F.k, entries=F.entries.copy())

    norm_f = F.spectral_norm()
    if norm_f == 0.0:
        logger.warning("Perturbação de matriz nula: resultado permanece nulo")
        return FarFieldMatrix(k=F.k, entries=F.entries.copy())
    if noise.delta > 1.0:
        logger.warning("Nível de ruído acima de 100%%: δ = %s", noise.delta)

    rng = np.random.default_rng(int(noise.seed))
    r1 = rng.standard_normal((F.n, F.n))
    r2 = rng.standard_normal((F.n, F.n))
    e = r1 + 1j * r2
    noisy = F.entries + (noise.delta * norm_f / np.linalg.norm(e, 2)) * e
    logger.info("Ruído aplicado: δ = %s, semente = %s", noise.delta, noise.seed)
    return FarFieldMatrix(k=F.k, entries=noisy)


def relative_error(F: FarFieldMatrix, G: FarFieldMatrix) -> float:
    """‖G − F‖₂ / ‖F‖₂."""
    _check_compatible(F, G)
    norm_f = F.spectral_norm()
    diff = float(np.linalg.norm(G.entries - F.entries, 2))
    return diff / norm_f if norm_f > 0 else diff


def stability_bound(F: FarFieldMatrix, G: FarFieldMatrix) -> float:
    """Cota w²·N·‖ΔA‖₂ para |I_new(F, z) − I_new(G, z)| em qualquer z."""
    _check_compatible(F, G)
    return F.weight**2 * F.n * float(np.linalg.norm(G.entries - F.entries, 2))


def _check_compatible(F: FarFieldMatrix, G: FarFieldMatrix) -> None:
    if F.n != G.n:
        raise ValidationError(f"dimensões incompatíveis: {F.n} e {G.n}")


# ----------------------------------------------------------------------
# Identidades do operador
# ----------------------------------------------------------------------


def reciprocity_permutation(F: FarFieldMatrix) -> np.ndarray:
    """P[m][l] = A[(l+N/2) mod N][(m+N/2) mod N]; reciprocidade exige P = A."""
    idx = (np.arange(F.n) + F.n // 2) % F.n
    return F.entries[np.ix_(idx, idx)].T


def reciprocity_residual(F: FarFieldMatrix) -> float:
    norm_a = np.linalg.norm(F.entries)
    if norm_a == 0.0:
        return 0.0
    return float(np.linalg.norm(F.entries - reciprocity_permutation(F)) / norm_a)


def _identity_defect(F: FarFieldMatrix) -> np.ndarray:
    a = F.entries
    ah = a.conj().T
    return (a - ah) - (1j / (2 * F.n)) * (ah @ a)


def unitarity_residual(F: FarFieldMatrix) -> float:
    """‖(A − A*) − (i/2N) A*A‖_F / ‖A‖_F (zero para dados Dirichlet/Neumann)."""
    norm_a = np.linalg.norm(F.entries)
    if norm_a == 0.0:
        return 0.0
    return float(np.linalg.norm(_identity_defect(F)) / norm_a)


def r_form(F: FarFieldMatrix) -> np.ndarray:
    """Matriz hermitiana (1/2i)[(A − A*) − (i/2N) A*A]."""
    r = _identity_defect(F) / 2j
    return 0.5 * (r + r.conj().T)


def r_form_min_eigenvalue(F: FarFieldMatrix) -> float:
    """Menor autovalor da forma R, normalizado por ‖A‖₂."""
    norm_a = F.spectral_norm()
    if norm_a == 0.0:
        return 0.0
    return float(linalg.eigvalsh(r_form(F))[0] / norm_a)


# ----------------------------------------------------------------------
# Funk–Hecke (2D)
# ----------------------------------------------------------------------


def funk_hecke_scalar(k: float, p: Sequence[float], n: int) -> complex:
    """w Σ_j exp(-ik x_j·p), que aproxima 2π J_0(k|p|)."""
    d = directions(n)
    return complex(2.0 * math.pi / n * np.sum(np.exp(-1j * k * (d @ np.asarray(p, dtype=float)))))


def funk_hecke_vector(k: float, p: Sequence[float], n: int) -> np.ndarray:
    """w Σ_j x_j exp(-ik x_j·p), que aproxima (2π/i) p̂ J_1(k|p|)."""
    d = directions(n)
    phase = np.exp(-1j * k * (d @ np.asarray(p, dtype=float)))
    return 2.0 * math.pi / n * (d.T @ phase)


# ----------------------------------------------------------------------
# Arquivo
# ----------------------------------------------------------------------


def write_far_field(path: Union[str, Path], F: FarFieldMatrix) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = [FORMAT_MAGIC, f"k {F.k!r}", f"n {F.n}", NORM_LINE]
    flat = F.entries.reshape(-1)
    lines.extend(f"{v.real:.16e} {v.imag:.16e}" for v in flat)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    logger.info("Campo distante gravado: %s (N=%d, k=%s)", out, F.n, F.k)
    return out


def _parse_number(text: str, line_no: int) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise FarFieldFormatError("valor não finito", line_no)
    return value


def read_far_field(path: Union[str, Path]) -> FarFieldMatrix:
    in_path = Path(path)
    if not in_path.is_file():
        raise FileNotFoundError(f"Arquivo não encontrado: {in_path}")

    text = in_path.read_text(encoding="utf-8")
    if not text.endswith("\n"):
        raise FarFieldFormatError("arquivo deve terminar com quebra de linha")
    lines = text[:-1].split("\n")

    if len(lines) < 4:
        raise FarFieldFormatError("cabeçalho incompleto")
    if lines[0] != FORMAT_MAGIC:
        raise FarFieldFormatError(f"esperado '{FORMAT_MAGIC}'", 1)

    match = _K_LINE.match(lines[1])
    if not match:
        raise FarFieldFormatError("esperado 'k <decimal>'", 2)
    k = _parse_number(match.group(1), 2)
    if k <= 0.0:
        raise FarFieldFormatError(f"número de onda deve ser > 0: {k}", 2)

    match = _N_LINE.match(lines[2])
    if not match:
        raise FarFieldFormatError("esperado 'n <inteiro>'", 3)
    n = int(match.group(1))
    if n % 2:
        raise FarFieldFormatError(f"paridade: N deve ser par, recebido {n}", 3)
    if n < 4:
        raise FarFieldFormatError(f"N deve ser >= 4, recebido {n}", 3)

    if lines[3] != NORM_LINE:
        raise FarFieldFormatError(f"esperado '{NORM_LINE}'", 4)

    body = lines[4:]
    if len(body) != n * n:
        raise FarFieldFormatError(f"esperadas {n * n} entradas, encontradas {len(body)}")

    entries = np.empty(n * n, dtype=np.complex128)
    for i, line in enumerate(body):
        line_no = i + 5
        match = _ENTRY_LINE.match(line)
        if not match:
            raise FarFieldFormatError("esperado '<re> <im>'", line_no)
        entries[i] = complex(_parse_number(match.group(1), line_no), _parse_number(match.group(2), line_no))

    logger.info("Campo distante lido: %s (N=%d, k=%s)", in_path, n, k)
    return FarFieldMatrix(k=k, entries=entries.reshape(n, n))
