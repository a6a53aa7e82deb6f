"""Two-sided bounds for the first Dirichlet eigenvalue of domains with
self-similar boundary, via inner/outer polygons, conformal transplantation and
a pollution-free quadratic projection method."""

__version__ = "0.1.0"
