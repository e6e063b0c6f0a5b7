"""Ultimate pitch control and the USO space-evaluation metric."""

__version__ = "0.1.0"
