"""
Experimentos: configuração, relatórios e os comandos da linha de comando.
"""
