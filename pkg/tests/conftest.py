"""
Fixtures compartilhadas: diretório temporário e matrizes de campo distante
caras de calcular (uma vez por sessão).
"""
from __future__ import annotations

import shutil
import sys
import tempfile
from pathlib import Path

import pytest

# Adiciona o diretório raiz ao path para importar os módulos
sys.path.insert(0, str(Path(__file__).parent.parent))

from resolvedores.analytic_disk import DiskScatterer, disk_far_field_matrix
from resolvedores.base import BoundaryCondition, Component, ScattererConfig, SolverSettings
from resolvedores.nystrom import assemble_far_field_matrix
from utils.geometry import BoundaryCurve, CurveKind


# ==============================================================================
# FIXTURES
# ==============================================================================


@pytest.fixture
def temp_dir():
    """Cria diretório temporário para os testes."""
    temp_path = tempfile.mkdtemp()
    yield temp_path
    shutil.rmtree(temp_path, ignore_errors=True)


@pytest.fixture(scope="session")
def disk_dirichlet():
    """Disco Dirichlet r=2, k=5, N=64 pela série."""
    return disk_far_field_matrix(DiskScatterer(radius=2.0), 5.0, 64)


@pytest.fixture(scope="session")
def disk_impedance():
    """Disco com impedância λ = i (Im λ = 1), r=2, k=5, N=64."""
    disk = DiskScatterer(radius=2.0, condition=BoundaryCondition.robin(1j))
    return disk_far_field_matrix(disk, 5.0, 64)


@pytest.fixture(scope="session")
def kite_config():
    return ScattererConfig(components=[Component(BoundaryCurve(CurveKind.KITE))], k=5.0)


@pytest.fixture(scope="session")
def kite_dirichlet(kite_config):
    """Pipa Dirichlet k=5, N=64 pelo método de Nyström (2m = 128)."""
    return assemble_far_field_matrix(kite_config, SolverSettings(nodes_per_component=128), 64)
