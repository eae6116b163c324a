"""natex: stratified treatment-effect estimation for natural experiments.

Clusters observational rows by their covariate profiles (2-D embedding +
hierarchical clustering), fits outcome-on-treatment regressions per
cluster, and reports the size-weighted average treatment effect, with an
interactive session model for re-clustering, cluster selection, and
outlier exclusion.
"""

__version__ = "0.1.0"

from .data import Dataset, DataError, RowMask, assign_roles, load_csv, save_csv  # noqa: F401
from .session import Session, SessionError  # noqa: F401
