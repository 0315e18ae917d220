"""Multi-objective sustainable supply chain design: model builder, instance
generator, epsilon-constraint grid with exact and Lagrangian mono-solvers,
and front quality metrics."""

__version__ = "0.1.0"
