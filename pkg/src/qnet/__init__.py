"""Verification toolkit for quantum network coding and LOCC machinery."""

__version__ = "0.1.0"
