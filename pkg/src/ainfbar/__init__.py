"""A-infinity structures on mod-p cohomology of finite torus approximations.

The pipeline: a graded group algebra (groups) feeds a reduced bar cochain
complex (bar), blockwise linear algebra over F_p (linalg) produces its
cohomology and a strong deformation retract, homotopy transfer (transfer)
yields the higher operations, and the internal-grading doubling argument
(formality) certifies when they all vanish.
"""

__version__ = "0.1.0"
