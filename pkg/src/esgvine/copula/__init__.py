"""Bivariate copula families, rotations, estimation and selection."""
from .families import FAMILIES, FAMILY_ORDER
from .fitting import (CATALOGS, GAUSSIAN, ITAU, PARAMETRIC, Catalog, CopulaFitError, empirical_tau,
                      fit_family, fit_pair, get_catalog)
from .pair import (ROTATIONS, U_EPS, FamilyId, PairCopula, clamp, density, hfunc, lambda_lower_of,
                   params_from_tau, sample_pair, tau_of)

__all__ = [
    "FAMILIES", "FAMILY_ORDER", "CATALOGS", "GAUSSIAN", "ITAU", "PARAMETRIC", "Catalog",
    "CopulaFitError", "empirical_tau", "fit_family", "fit_pair", "get_catalog", "ROTATIONS", "U_EPS",
    "FamilyId", "PairCopula", "clamp", "density", "hfunc", "lambda_lower_of", "params_from_tau",
    "sample_pair", "tau_of",
]
