"""ftsbench: synthetic multivariate return benchmark toolkit.

Generates increasingly complex synthetic return panels, fits classical
GARCH/DCC baselines and conditional deep generative models on them, and
scores everything with distribution-distance and trading-task metrics.
"""

__version__ = "0.1.0"
