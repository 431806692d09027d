"""Pop-stacked permutations: enumeration, exact counting, fitting and asymptotics."""

__version__ = "0.1.0"
