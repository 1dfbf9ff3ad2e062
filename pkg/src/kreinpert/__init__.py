"""Off-diagonal J-self-adjoint perturbations of block matrices."""
__version__ = "0.1.0"
