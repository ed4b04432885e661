"""Pacote de testes do reconstrutor."""
