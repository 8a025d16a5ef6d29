"""moimpute: joint missing-value imputation and SVM model selection with
a bi-objective evolutionary algorithm."""

__version__ = "0.1.0"
