# src/__init__.py
# theta-Kirchhoff edge and vertex centrality toolkit

__version__ = "1.0.0"
