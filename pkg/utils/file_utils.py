from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Optional, Union

import numpy as np
from PIL import Image


def build_output_path(
    name: str,
    output: Optional[str],
    target_ext: str,
    default_dir: Union[str, Path] = "resultados",
) -> Path:
    """
    Calcula o caminho de saída de um artefato.

    - Se `output` for um diretório existente (ou terminar em separador), grava `name` + extensão dentro dele.
    - Se `output` for um caminho de arquivo, usa esse caminho (ajustando a extensão).
    - Se `output` for None, usa `default_dir`/`name` + extensão.
    """
    if not target_ext.startswith("."):
        target_ext = "." + target_ext

    if output:
        out_path = Path(output)
        if out_path.is_dir() or output.endswith(("/", "\\")):
            return out_path / (name + target_ext)
        if out_path.suffix.lower() != target_ext.lower():
            out_path = out_path.with_suffix(target_ext)
        return out_path

    return Path(default_dir) / (name + target_ext)


def write_csv(path: Union[str, Path], image: np.ndarray, header: str) -> Path:
    """Grava a matriz (já na orientação de imagem) com 17 dígitos significativos."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(out, np.asarray(image, dtype=float), fmt="%.17g", delimiter=",", header=header, encoding="utf-8")
    return out


def write_pgm(path: Union[str, Path], image: np.ndarray) -> Path:
    """Mapa de cinza P5 (8 bits), normalizado por mínimo e máximo do próprio mapa."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    data = np.asarray(image, dtype=float)
    lo, hi = float(np.min(data)), float(np.max(data))
    if hi > lo:
        scaled = np.round(255.0 * (data - lo) / (hi - lo))
    else:
        scaled = np.zeros_like(data)
    Image.fromarray(scaled.astype(np.uint8)).save(out, format="PPM")
    return out


def sha256_file(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()
