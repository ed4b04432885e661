"""
Hierarquia de exceções do reconstrutor.

A CLI traduz cada família em um código de saída: ValidationError -> 2,
NumericalError -> 3.
"""

from __future__ import annotations

from typing import Optional


class ReconstrutorError(Exception):
    """Base de todos os erros do projeto."""


class ValidationError(ReconstrutorError, ValueError):
    """Entrada inválida: parâmetro fora do domínio, arquivo ou configuração malformados."""


class ConfigError(ValidationError):
    """Violação do esquema de configuração de um experimento."""

    def __init__(self, message: str, key: Optional[str] = None) -> None:
        self.key = key
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)


class FarFieldFormatError(ValidationError):
    """Arquivo FARFIELD fora da gramática esperada."""

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        if line is not None:
            message = f"linha {line}: {message}"
        super().__init__(message)


class NumericalError(ReconstrutorError, ArithmeticError):
    """Falha numérica: sistema mal condicionado, denominador degenerado, posto zero."""
