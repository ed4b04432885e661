"""
Relatórios de execução em JSON local.

- Onde: `<saída>/<nome>_<comando>_report.json`, ao lado dos arquivos gerados.
- O que é salvo: id, data/hora, comando, parâmetros, resíduos, tempos, argmax,
  margens, notas e o manifesto de todos os arquivos emitidos com SHA-256.
- Determinismo: `content_hash` cobre apenas o manifesto e os resultados
  numéricos (sem id, data/hora e tempos), então execuções idênticas dão o
  mesmo hash.
"""

from __future__ import annotations

import hashlib
import json
import uuid
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Union

from utils.file_utils import sha256_file


@dataclass
class RunReport:
    command: str
    name: str
    parameters: dict[str, Any] = field(default_factory=dict)
    results: dict[str, Any] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    manifest: list[dict[str, str]] = field(default_factory=list)
    id: str = field(default_factory=lambda: str(uuid.uuid4()))
    timestamp: str = field(default_factory=lambda: datetime.now().isoformat(timespec="seconds"))

    def add_file(self, path: Union[str, Path], role: str) -> None:
        self.manifest.append({"path": str(path), "role": role, "sha256": sha256_file(path)})

    def content_hash(self) -> str:
        stable = {"manifest": [(m["role"], m["sha256"]) for m in self.manifest], "results": self.results}
        payload = json.dumps(stable, ensure_ascii=False, sort_keys=True, default=str)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "timestamp": self.timestamp,
            "command": self.command,
            "name": self.name,
            "parameters": self.parameters,
            "results": self.results,
            "timings": self.timings,
            "notes": self.notes,
            "manifest": self.manifest,
            "content_hash": self.content_hash(),
        }


def save_report(report: RunReport, directory: Union[str, Path]) -> Path:
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{report.name}_{report.command}_report.json"
    path.write_text(json.dumps(report.to_dict(), ensure_ascii=False, indent=2, default=str), encoding="utf-8")
    return path


def load_report(path: Union[str, Path]) -> dict[str, Any]:
    return json.loads(Path(path).read_text(encoding="utf-8"))
