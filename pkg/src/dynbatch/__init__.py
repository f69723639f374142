"""Dynamic mini-batch stochastic approximation under multiplicative noise.

Accelerated stochastic FISTA for smooth convex composite problems and a
stochastic proximal gradient method for strongly convex ones, both with
growing batch sizes, plus the schedule/bound calculators and a small
experiment harness for checking rates and oracle complexity.
"""

__version__ = "0.1.0"
