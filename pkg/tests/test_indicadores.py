"""
Testes dos indicadores de amostragem (New, OSM, RTM e FM), da cadeia de
desigualdades, da estabilidade e das métricas de localização.
Execute com: pytest tests/test_indicadores.py -v
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from indicadores.sampling import (
    IndicatorMap,
    Method,
    PicardSystem,
    SamplingGrid,
    argmax_distance,
    chain_report,
    evaluate_points,
    i_fm,
    i_new,
    i_osm,
    i_rtm,
    i_small,
    line_profile,
    method_from_name,
    stability_report,
    sweep,
    top_fraction_near_boundary,
)
from resolvedores.analytic_disk import DiskScatterer, disk_coefficients, disk_far_field_matrix
from resolvedores.base import Component, ScattererConfig, SolverSettings
from resolvedores.nystrom import assemble_far_field_matrix
from utils.errors import NumericalError, ValidationError
from utils.farfield import FarFieldMatrix, NoiseSpec, perturb
from utils.geometry import BoundaryCurve, CurveKind


SMALL_GRID = SamplingGrid(4.0, 21)
FULL_GRID = SamplingGrid(4.0, 151)


# ==============================================================================
# GRADE E MAPA
# ==============================================================================


class TestGrid:
    """Grade de amostragem e convenções do mapa."""

    def test_points_row_major(self):
        """p (índice em x) é o índice externo."""
        grid = SamplingGrid(1.0, 3)
        pts = grid.points()
        assert pts.shape == (9, 2)
        assert np.allclose(pts[0], [-1.0, -1.0])
        assert np.allclose(pts[1], [-1.0, 0.0])
        assert np.allclose(pts[3], [0.0, -1.0])
        assert grid.point(2, 0) == (1.0, -1.0)

    def test_center_offset(self):
        """O centro desloca todos os pontos."""
        grid = SamplingGrid(2.0, 5, center=(3.0, -1.0))
        assert grid.point(2, 2) == (3.0, -1.0)

    @pytest.mark.parametrize("extent, points", [(0.0, 10), (-1.0, 10), (1.0, 1), (1.0, 2.5)])
    def test_invalid(self, extent, points):
        """Extensão positiva e ao menos 2 pontos inteiros por lado."""
        with pytest.raises(ValidationError):
            SamplingGrid(extent, points)

    def test_argmax_tie_break(self):
        """Empate: vence o menor índice row-major."""
        values = np.zeros((3, 3))
        values[1, 2] = values[2, 0] = 5.0
        ind = IndicatorMap(SamplingGrid(1.0, 3), values, Method.NEW, 1.0, 1.0, 4)
        assert ind.argmax() == (1, 2)
        flat = IndicatorMap(SamplingGrid(1.0, 3), np.zeros((3, 3)), Method.NEW, 1.0, 1.0, 4)
        assert flat.argmax() == (0, 0)

    def test_image_orientation(self):
        """Primeira linha da imagem = maior y, primeira coluna = menor x."""
        values = np.arange(9.0).reshape(3, 3)
        image = IndicatorMap(SamplingGrid(1.0, 3), values, Method.NEW, 1.0, 1.0, 4).image()
        assert image[0, 0] == values[0, 2]
        assert image[2, 2] == values[2, 0]

    def test_method_from_name(self):
        """Nomes em qualquer caixa; desconhecidos são rejeitados."""
        assert method_from_name(" OSM ") is Method.OSM
        with pytest.raises(ValidationError):
            method_from_name("music")


# ==============================================================================
# INDICADORES PONTUAIS
# ==============================================================================


class TestPointIndicators:
    """Valores exatos em matrizes simples e no disco centrado."""

    def test_zero_matrix(self):
        """Matriz nula anula New, RTM e OSM."""
        F = FarFieldMatrix(3.0, np.zeros((16, 16)))
        assert i_new(F, (0.3, 0.1)) == 0.0
        assert i_rtm(F, (0.3, 0.1)) == 0.0
        assert i_osm(F, (0.3, 0.1), 1.0) == 0.0

    def test_identity_matrix(self):
        """A = I: I_New = w²N = 4π²/N para todo z."""
        n = 16
        F = FarFieldMatrix(3.0, np.eye(n))
        for z in [(0.0, 0.0), (1.0, -2.0)]:
            assert i_new(F, z) == pytest.approx(4 * math.pi**2 / n, rel=1e-13)

    def test_new_at_center_of_disk(self, disk_dirichlet):
        """Disco centrado: I_New(0) = 16π²|a_0|."""
        a0 = disk_coefficients(DiskScatterer(radius=2.0), 5.0)[0]
        assert i_new(disk_dirichlet, (0.0, 0.0)) == pytest.approx(16 * math.pi**2 * abs(a0), rel=1e-10)

    def test_fm_at_center_of_disk(self, disk_dirichlet):
        """Disco centrado: I_FM(0) = 4|a_0|."""
        a0 = disk_coefficients(DiskScatterer(radius=2.0), 5.0)[0]
        assert i_fm(disk_dirichlet, (0.0, 0.0)) == pytest.approx(4 * abs(a0), rel=1e-8)

    def test_rtm_bounded_by_new_and_nonnegative(self, disk_dirichlet):
        """0 <= I_RTM <= I_New para dados Dirichlet."""
        pts = SMALL_GRID.points()
        new = evaluate_points(disk_dirichlet, pts, Method.NEW)
        rtm = evaluate_points(disk_dirichlet, pts, Method.RTM)
        assert np.all(rtm <= new + 1e-12 * np.max(new))
        assert np.min(rtm) >= -1e-9 * np.max(new)

    def test_small_indicator(self, disk_dirichlet):
        """OSM com ρ = 1 é w vezes a soma dos indicadores de uma incidência."""
        z = (0.7, -1.1)
        total = sum(i_small(disk_dirichlet, z, l) for l in range(disk_dirichlet.n))
        assert i_osm(disk_dirichlet, z, 1.0) == pytest.approx(disk_dirichlet.weight * total, rel=1e-12)
        with pytest.raises(ValidationError):
            i_small(disk_dirichlet, z, disk_dirichlet.n)

    def test_rejects_small_rho(self, disk_dirichlet):
        """ρ < 1 é rejeitado."""
        with pytest.raises(ValidationError):
            i_osm(disk_dirichlet, (0.0, 0.0), 0.5)
        with pytest.raises(ValidationError):
            evaluate_points(disk_dirichlet, [[0.0, 0.0]], Method.NEW, rho=0.0)


class TestFactorizationMethod:
    """Série de Picard truncada."""

    def test_zero_matrix_is_error(self):
        """Posto zero: indicador indefinido."""
        with pytest.raises(NumericalError):
            PicardSystem.from_matrix(FarFieldMatrix(1.0, np.zeros((8, 8))))

    @pytest.mark.parametrize("epsilon", [0.0, 1.0, -0.1])
    def test_invalid_epsilon(self, disk_dirichlet, epsilon):
        """ε deve estar em (0, 1)."""
        with pytest.raises(ValidationError):
            PicardSystem.from_matrix(disk_dirichlet, epsilon)

    def test_single_term(self):
        """ε próximo de 1 retém só o maior valor singular."""
        A = np.diag([4.0, 2.0, 1.0, 0.5]).astype(complex)
        picard = PicardSystem.from_matrix(FarFieldMatrix(1.0, A), 1.0 - 1e-9)
        assert picard.singular_values.shape == (1,)

    def test_inside_versus_far_point(self, disk_dirichlet):
        """Centro do disco contra (20, 0): razão >= 10."""
        center = i_fm(disk_dirichlet, (0.0, 0.0), epsilon=1e-8)
        far = i_fm(disk_dirichlet, (20.0, 0.0), epsilon=1e-8)
        assert center >= 10 * far


# ==============================================================================
# MAPAS
# ==============================================================================


class TestSweep:
    """Varreduras na grade."""

    def test_rho_is_outer_power_for_new(self, disk_dirichlet):
        """Mapa com ρ = 2 é o quadrado do mapa com ρ = 1."""
        one = sweep(disk_dirichlet, SMALL_GRID, Method.NEW, 1.0).values
        two = sweep(disk_dirichlet, SMALL_GRID, Method.NEW, 2.0).values
        assert np.allclose(two, one**2, rtol=1e-13, atol=0)

    def test_larger_rho_sharpens(self, disk_dirichlet):
        """Média do mapa normalizado cai com ρ."""
        two = sweep(disk_dirichlet, SMALL_GRID, Method.NEW, 2.0).normalized()
        eight = sweep(disk_dirichlet, SMALL_GRID, Method.NEW, 8.0).normalized()
        assert eight.mean() < two.mean()

    def test_workers_match_serial(self, disk_dirichlet):
        """Blocos em paralelo produzem os mesmos valores."""
        grid = SamplingGrid(4.0, 41)
        serial = sweep(disk_dirichlet, grid, Method.OSM, 2.0).values
        threaded = sweep(disk_dirichlet, grid, Method.OSM, 2.0, workers=3).values
        assert np.array_equal(serial, threaded)

    def test_translation_covariance(self, disk_dirichlet):
        """Transladar o disco por c translada o mapa New por c."""
        c = (1.0, 1.0)
        shifted = disk_far_field_matrix(DiskScatterer(center=c, radius=2.0), 5.0, 64)
        base = sweep(disk_dirichlet, SMALL_GRID, Method.NEW).values
        moved = sweep(shifted, SamplingGrid(4.0, 21, center=c), Method.NEW).values
        assert np.max(np.abs(moved - base)) <= 1e-10 * np.max(base)

    def test_decay_far_from_obstacle(self, kite_dirichlet):
        """Pipa, mapa New com ρ = 2: no anel |z| = 16, abaixo de 20% do máximo da grade."""
        angles = np.linspace(0.0, 2 * math.pi, 360, endpoint=False)
        ring = 16.0 * np.stack([np.cos(angles), np.sin(angles)], axis=-1)
        ring_max = np.max(evaluate_points(kite_dirichlet, ring, Method.NEW, 2.0))
        grid_max = np.max(sweep(kite_dirichlet, FULL_GRID, Method.NEW, 2.0).values)
        assert ring_max <= 0.2 * grid_max

    @pytest.mark.parametrize("k, n", [(5.0, 64), (10.0, 160)])
    def test_larger_rho_sharpens_kite(self, k, n):
        """Pipa em k = 5 e k = 10: média do mapa normalizado cai de ρ = 2 para ρ = 8."""
        config = ScattererConfig([Component(BoundaryCurve(CurveKind.KITE))], k=k)
        F = assemble_far_field_matrix(config, SolverSettings(), n)
        two = sweep(F, SamplingGrid(4.0, 101), Method.NEW, 2.0).normalized()
        eight = sweep(F, SamplingGrid(4.0, 101), Method.NEW, 8.0).normalized()
        assert eight.mean() < two.mean()

    def test_metadata(self, disk_dirichlet):
        """O mapa carrega método, ρ, k, N e δ."""
        ind = sweep(disk_dirichlet, SMALL_GRID, Method.RTM, 2.0, delta=0.3)
        assert (ind.method, ind.rho, ind.k, ind.n, ind.delta) == (Method.RTM, 2.0, 5.0, 64, 0.3)
        assert ind.values.shape == (21, 21)

    def test_line_profile(self, disk_dirichlet):
        """Perfil entre dois pontos com as extremidades incluídas."""
        pts, values = line_profile(disk_dirichlet, (-3.0, 0.0), (3.0, 0.0), samples=7)
        assert pts.shape == (7, 2)
        assert np.allclose(pts[[0, -1]], [[-3.0, 0.0], [3.0, 0.0]])
        assert values[3] == pytest.approx(i_new(disk_dirichlet, (0.0, 0.0)), rel=1e-12)
        with pytest.raises(ValidationError):
            line_profile(disk_dirichlet, (0, 0), (1, 0), samples=1)


# ==============================================================================
# CADEIA E ESTABILIDADE
# ==============================================================================


class TestChainAndStability:
    """c·I_OSM <= I_RTM <= I_New <= C·√I_OSM e cota de estabilidade."""

    def test_chain_on_disk(self, disk_dirichlet):
        """Disco Dirichlet: cadeia válida na grade."""
        report = chain_report(disk_dirichlet, SMALL_GRID)
        assert report.passed()
        assert set(report.as_dict()) == {"lower", "middle", "upper", "scale"}

    @pytest.mark.parametrize("data", ["disk_dirichlet", "kite_dirichlet"])
    def test_chain_on_full_grid(self, data, request):
        """Disco e pipa sem ruído: margens >= -1e-8·escala em toda a grade 151²."""
        assert chain_report(request.getfixturevalue(data), FULL_GRID).passed(1e-8)

    def test_chain_detects_violation(self):
        """A = -iI tem parte imaginária negativa: a cadeia falha."""
        F = FarFieldMatrix(1.0, -1j * np.eye(8))
        assert not chain_report(F, SamplingGrid(1.0, 3)).passed()

    @pytest.mark.parametrize("seed", range(10))
    def test_stability_bound(self, disk_dirichlet, seed):
        """|I_New(F) - I_New(F^δ)| <= w²N‖ΔA‖₂ em toda a grade."""
        noisy = perturb(disk_dirichlet, NoiseSpec(0.3, seed))
        report = stability_report(disk_dirichlet, noisy, SMALL_GRID)
        assert report.passed


# ==============================================================================
# LOCALIZAÇÃO
# ==============================================================================


class TestLocalization:
    """Localização da pipa com ruído e resolução de duas componentes."""

    KITE = BoundaryCurve(CurveKind.KITE)

    def test_kite_with_30_percent_noise(self, kite_dirichlet):
        """δ = 0.3, ρ = 2: >= 80% do top 2% a até π/k do obstáculo."""
        noisy = perturb(kite_dirichlet, NoiseSpec(0.3, 2024))
        ind = sweep(noisy, SamplingGrid(4.0, 151), Method.NEW, 2.0, delta=0.3)
        assert top_fraction_near_boundary(ind, [self.KITE]) >= 0.8
        assert argmax_distance(ind, [self.KITE]) <= math.pi / 5.0

    def test_kite_with_90_percent_noise(self, kite_dirichlet):
        """δ = 0.9: o máximo continua a até um comprimento de onda."""
        noisy = perturb(kite_dirichlet, NoiseSpec(0.9, 2024))
        ind = sweep(noisy, SamplingGrid(4.0, 101), Method.NEW, 2.0, delta=0.9)
        assert argmax_distance(ind, [self.KITE]) <= 2 * math.pi / 5.0

    def test_interior_counts_as_zero_distance(self):
        """Máximo dentro da pipa: distância zero."""
        values = np.zeros((5, 5))
        values[2, 2] = 1.0
        ind = IndicatorMap(SamplingGrid(4.0, 5), values, Method.NEW, 1.0, 5.0, 16)
        assert argmax_distance(ind, [self.KITE]) == 0.0

    def test_invalid_fraction(self, disk_dirichlet):
        """Fração em (0, 1]."""
        ind = sweep(disk_dirichlet, SamplingGrid(1.0, 3))
        with pytest.raises(ValidationError):
            top_fraction_near_boundary(ind, [self.KITE], fraction=0.0)

    def test_resolves_gap_between_disks(self):
        """Dois discos r=1 em (±1.4, 0), k=8, N=360: vale entre as componentes."""
        config = ScattererConfig(
            [
                Component(BoundaryCurve(CurveKind.CIRCLE, center=(-1.4, 0.0), radius=1.0)),
                Component(BoundaryCurve(CurveKind.CIRCLE, center=(1.4, 0.0), radius=1.0)),
            ],
            k=8.0,
        )
        F = assemble_far_field_matrix(config, n_dirs=360)
        pts, values = line_profile(F, (-2.4, 0.0), (2.4, 0.0), samples=241)
        x = pts[:, 0]
        gap = values[np.abs(x) <= 0.2].min()
        left = values[x <= -0.4].max()
        right = values[x >= 0.4].max()
        assert gap <= 0.7 * min(left, right)
