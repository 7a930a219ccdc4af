"""Numerical verification engine for curvature and transgression calculus.

The package computes Riemannian curvature data of user-specified metrics
through exact truncated-Taylor (jet) arithmetic, builds the algebra of
endomorphism-valued differential forms with its characteristic power series,
and certifies pointwise, boundary, and global (Stokes) identities relating
characteristic forms of a metric to those of an associated product-type
reference metric.  A consequences layer evaluates eta-invariant tables for
model 3-manifolds and the induced mod-2 integrality obstruction for bounding
conformally flat metrics.
"""

__version__ = "0.1.0"
