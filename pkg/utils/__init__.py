"""
Utilitários compartilhados: funções especiais, curvas, dados de campo distante,
arquivos de saída e exceções.
"""
