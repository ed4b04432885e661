"""
Testes da solução por série para o disco.
Execute com: pytest tests/test_analytic_disk.py -v
"""
from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import special

from resolvedores.analytic_disk import (
    AnalyticDiskSolver,
    DiskScatterer,
    disk_coefficients,
    disk_far_field,
    disk_far_field_matrix,
    disk_scattered_field,
)
from resolvedores.base import BoundaryCondition, Component, ScattererConfig
from utils.errors import ValidationError
from utils.farfield import directions, r_form_min_eigenvalue, reciprocity_residual, unitarity_residual
from utils.geometry import BoundaryCurve, CurveKind


def _brute_force_dirichlet(radius: float, k: float, delta: float) -> complex:
    """Série em n = -200..200 escrita diretamente com scipy.special."""
    total = 0j
    for n in range(-200, 201):
        m = abs(n)
        a_n = -special.jv(m, k * radius) / special.hankel1(m, k * radius)
        if np.isfinite(a_n):
            total += a_n * np.exp(1j * n * delta)
    return -4j * total


# ==============================================================================
# COEFICIENTES
# ==============================================================================


class TestCoefficients:
    """Razões a_n por condição de contorno."""

    def test_penetrable_zero_contrast(self):
        """q = 0 não espalha."""
        disk = DiskScatterer(radius=2.0, condition=BoundaryCondition.penetrable(0))
        assert np.all(disk_coefficients(disk, 5.0) == 0)
        F = disk_far_field_matrix(disk, 5.0, 16)
        assert np.all(F.entries == 0)

    def test_impedance_zero_is_neumann(self):
        """λ = 0 coincide bit a bit com Neumann."""
        robin = disk_far_field_matrix(DiskScatterer(radius=2.0, condition=BoundaryCondition.robin(0)), 5.0, 32)
        neumann = disk_far_field_matrix(DiskScatterer(radius=2.0, condition=BoundaryCondition.neumann()), 5.0, 32)
        assert np.array_equal(robin.entries, neumann.entries)

    def test_truncation_budget(self):
        """k·r > 100 é rejeitado."""
        with pytest.raises(ValidationError):
            disk_coefficients(DiskScatterer(radius=30.0), 5.0)

    def test_doubling_n_max(self):
        """Dobrar n_max muda as entradas em no máximo 1e-12."""
        disk = DiskScatterer(radius=2.0)
        base = disk_coefficients(disk, 5.0)
        more = disk_coefficients(disk, 5.0, n_max=2 * base.shape[0])
        assert np.max(np.abs(more[: base.shape[0]] - base)) == 0.0
        assert np.max(np.abs(more[base.shape[0] :])) <= 1e-12

    def test_invalid_parameters(self):
        """Sinais de λ e q são verificados."""
        with pytest.raises(ValidationError):
            BoundaryCondition.robin(-1j)
        with pytest.raises(ValidationError):
            BoundaryCondition.penetrable(-1.0)
        with pytest.raises(ValidationError):
            DiskScatterer(radius=0.0)


# ==============================================================================
# CAMPO DISTANTE
# ==============================================================================


class TestFarField:
    """Valores pontuais e matriz N×N."""

    def test_matches_brute_force(self):
        """obs = inc = (1, 0), r=2, k=5 contra a série independente."""
        value = disk_far_field(DiskScatterer(radius=2.0), 5.0, (1.0, 0.0), (1.0, 0.0))
        assert abs(value - _brute_force_dirichlet(2.0, 5.0, 0.0)) <= 1e-12 * abs(value)

    def test_matches_brute_force_off_axis(self):
        """Ângulo genérico entre observação e incidência."""
        obs = (math.cos(1.3), math.sin(1.3))
        value = disk_far_field(DiskScatterer(radius=2.0), 5.0, obs, (1.0, 0.0))
        expected = _brute_force_dirichlet(2.0, 5.0, 1.3)
        assert abs(value - expected) <= 1e-12 * max(1.0, abs(expected))

    def test_pointwise_reciprocity(self):
        """u∞(x, d) = u∞(-d, -x)."""
        disk = DiskScatterer(center=(0.4, -0.7), radius=1.5, condition=BoundaryCondition.robin(1 + 1j))
        x = np.array([math.cos(0.9), math.sin(0.9)])
        d = np.array([math.cos(2.2), math.sin(2.2)])
        a = disk_far_field(disk, 4.0, x, d)
        b = disk_far_field(disk, 4.0, -d, -x)
        assert abs(a - b) <= 1e-13 * abs(a)

    def test_rejects_non_unit_direction(self):
        """Direções devem ser unitárias."""
        with pytest.raises(ValidationError):
            disk_far_field(DiskScatterer(), 1.0, (1.0, 1.0), (1.0, 0.0))

    def test_matrix_matches_pointwise(self):
        """Matriz e avaliação pontual concordam."""
        disk = DiskScatterer(radius=2.0, condition=BoundaryCondition.neumann())
        F = disk_far_field_matrix(disk, 5.0, 16)
        d = directions(16)
        assert F.entries[3, 11] == pytest.approx(disk_far_field(disk, 5.0, d[3], d[11]), rel=1e-12)

    def test_circulant_and_reciprocal(self, disk_dirichlet):
        """Disco centrado: circulante e recíproco."""
        A = disk_dirichlet.entries
        assert np.max(np.abs(np.roll(np.roll(A, 1, axis=0), 1, axis=1) - A)) <= 1e-13 * np.max(np.abs(A))
        assert reciprocity_residual(disk_dirichlet) <= 1e-13

    def test_translation(self, disk_dirichlet):
        """Centro (1, 1): fatores de fase e^{ik(θ_l - x_m)·c}."""
        shifted = disk_far_field_matrix(DiskScatterer(center=(1.0, 1.0), radius=2.0), 5.0, 64)
        proj = directions(64) @ np.array([1.0, 1.0])
        expected = disk_dirichlet.entries * np.exp(1j * 5.0 * (proj[None, :] - proj[:, None]))
        assert np.max(np.abs(shifted.entries - expected)) <= 1e-13 * np.max(np.abs(expected))

    def test_rejects_odd_direction_count(self):
        """N ímpar é rejeitado."""
        with pytest.raises(ValidationError):
            disk_far_field_matrix(DiskScatterer(), 5.0, 63)


# ==============================================================================
# IDENTIDADES DO OPERADOR
# ==============================================================================


class TestOperatorIdentities:
    """A − A* = (i/2N) A*A e positividade de R."""

    def test_dirichlet_unitarity(self, disk_dirichlet):
        """Dirichlet: resíduo relativo <= 1e-10."""
        assert unitarity_residual(disk_dirichlet) <= 1e-10

    def test_neumann_unitarity(self):
        """Neumann: resíduo relativo <= 1e-10."""
        F = disk_far_field_matrix(DiskScatterer(radius=2.0, condition=BoundaryCondition.neumann()), 5.0, 64)
        assert unitarity_residual(F) <= 1e-10

    def test_impedance_r_form(self, disk_impedance):
        """Im λ > 0: forma R semidefinida positiva e não nula."""
        assert r_form_min_eigenvalue(disk_impedance) >= -1e-10
        assert unitarity_residual(disk_impedance) > 1e-6

    def test_penetrable_lossy_r_form(self):
        """Im q > 0: forma R semidefinida positiva."""
        disk = DiskScatterer(radius=2.0, condition=BoundaryCondition.penetrable(0.5 + 0.5j))
        assert r_form_min_eigenvalue(disk_far_field_matrix(disk, 5.0, 64)) >= -1e-10

    def test_penetrable_lossless_unitarity(self):
        """q real: sem absorção, identidade exata."""
        disk = DiskScatterer(radius=2.0, condition=BoundaryCondition.penetrable(0.5))
        assert unitarity_residual(disk_far_field_matrix(disk, 5.0, 64)) <= 1e-10


# ==============================================================================
# CAMPO PRÓXIMO E RESOLVEDOR
# ==============================================================================


class TestNearFieldAndSolver:
    """Campo espalhado por série e a interface de resolvedor."""

    def test_dirichlet_boundary_trace(self):
        """u^i + u^s = 0 sobre o círculo."""
        disk = DiskScatterer(radius=2.0)
        angles = np.linspace(0.0, 2 * math.pi, 12, endpoint=False)
        pts = (2.0 + 1e-12) * np.stack([np.cos(angles), np.sin(angles)], axis=-1)
        us = disk_scattered_field(disk, 5.0, (1.0, 0.0), pts)
        ui = np.exp(1j * 5.0 * pts[:, 0])
        assert np.max(np.abs(ui + us)) <= 1e-10

    def test_far_field_limit(self):
        """√(8kπ) e^{-iπ/4} √r e^{-ikr} u^s → u∞ para r grande."""
        disk = DiskScatterer(radius=2.0)
        k, r = 5.0, 1e5
        x = np.array([math.cos(0.6), math.sin(0.6)])
        us = disk_scattered_field(disk, k, (1.0, 0.0), r * x[None, :])[0]
        scaled = math.sqrt(8 * k * math.pi) * np.exp(-1j * math.pi / 4) * math.sqrt(r) * np.exp(-1j * k * r) * us
        expected = disk_far_field(disk, k, x, (1.0, 0.0))
        assert abs(scaled - expected) <= 1e-3 * abs(expected)

    def test_rejects_interior_points(self):
        """Pontos dentro do disco são rejeitados."""
        with pytest.raises(ValidationError):
            disk_scattered_field(DiskScatterer(radius=2.0), 5.0, (1.0, 0.0), [[0.5, 0.5]])

    def test_solver_interface(self, disk_dirichlet):
        """AnalyticDiskSolver reproduz a matriz da série."""
        config = ScattererConfig([Component(BoundaryCurve(CurveKind.CIRCLE, radius=2.0))], k=5.0)
        result = AnalyticDiskSolver().solve(config, 64)
        assert result.success
        assert result.engine == "analytic"
        assert np.array_equal(result.far_field.entries, disk_dirichlet.entries)

    def test_solver_rejects_non_disk(self):
        """O motor analítico só aceita um círculo."""
        config = ScattererConfig([Component(BoundaryCurve(CurveKind.KITE))], k=5.0)
        with pytest.raises(ValidationError):
            AnalyticDiskSolver().solve(config, 16)
