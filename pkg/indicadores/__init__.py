"""
Indicadores de amostragem (New, OSM, RTM, FM) e varreduras em grade.
"""
