"""Symbolic engine for GL(2,R) structures of 7th-order ODEs and the
Fernandez-Gray torsion type of the induced split-G2 conformal geometry."""

__version__ = "0.1.0"
