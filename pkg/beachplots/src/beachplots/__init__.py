"""Figure regeneration for wave-tank simulation artifacts.

Consumes the CSV and JSON files written by the simulation CLI and renders
publication figures from them. Every plotted number originates in a file
field; nothing is recomputed from model equations.
"""

__version__ = "0.1.0"
