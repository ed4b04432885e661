"""
Resolvedores do problema direto de espalhamento.

Cada módulo expõe uma classe concreta que herda de BaseForwardSolver e devolve
a matriz de campo distante N×N de um obstáculo.
"""
