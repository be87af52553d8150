"""Thin-coating asymptotics of the Fisher-KPP equation on a ball."""
__version__ = "0.1.0"
