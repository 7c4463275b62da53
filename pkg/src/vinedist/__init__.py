"""Distances between vine copulas.

Pair copulas and their h-functions live in :mod:`vinedist.bicop`, vine
specifications and their recursions in :mod:`vinedist.vine`, the distance
measures in :mod:`vinedist.distance` and reproducible studies in
:mod:`vinedist.experiments`.
"""

from __future__ import annotations

from .bicop import Family, PairCopula, Side, pair_cdf, pair_from_tau, pair_hfun, pair_hinv, pair_logpdf, pair_pdf, pair_tau
from .distance import (
    Diagonal,
    DistanceReport,
    EvaluationGrid,
    GridSpec,
    akl,
    cubature_kl,
    dkl,
    gaussian_kl_analytic,
    gaussian_vine_corr,
    mckl,
    sdkl,
)
from .errors import (
    ContractError,
    DomainError,
    LimitError,
    NumericError,
    ParseError,
    ShapeError,
    StructureError,
    VineError,
)
from .experiments import (
    StudyResult,
    TableId,
    dimension_ladder,
    dvine_structure,
    euro_stoxx4,
    random_gaussian_vine,
    reproduce_table,
    single_family_vine,
    spearman,
    t_vine,
)
from .io import read_vine, write_vine
from .vine import (
    VineSpec,
    cond_density,
    count_same_diagonal,
    independence_vine,
    nearest_gaussian,
    relabel_canonical,
    rosenblatt_forward,
    rosenblatt_inverse,
    sample_vine,
    trim_structure,
    validate_structure,
    vine_density,
    vine_log_density,
)

__version__ = "0.1.0"

__all__ = [
    "akl",
    "cond_density",
    "ContractError",
    "count_same_diagonal",
    "cubature_kl",
    "Diagonal",
    "dimension_ladder",
    "DistanceReport",
    "dkl",
    "DomainError",
    "dvine_structure",
    "euro_stoxx4",
    "EvaluationGrid",
    "Family",
    "gaussian_kl_analytic",
    "gaussian_vine_corr",
    "GridSpec",
    "independence_vine",
    "LimitError",
    "mckl",
    "nearest_gaussian",
    "NumericError",
    "pair_cdf",
    "pair_from_tau",
    "pair_hfun",
    "pair_hinv",
    "pair_logpdf",
    "pair_pdf",
    "pair_tau",
    "PairCopula",
    "ParseError",
    "random_gaussian_vine",
    "read_vine",
    "relabel_canonical",
    "reproduce_table",
    "rosenblatt_forward",
    "rosenblatt_inverse",
    "sample_vine",
    "sdkl",
    "ShapeError",
    "Side",
    "single_family_vine",
    "spearman",
    "StructureError",
    "StudyResult",
    "t_vine",
    "TableId",
    "trim_structure",
    "validate_structure",
    "vine_density",
    "vine_log_density",
    "VineError",
    "VineSpec",
    "write_vine",
]
