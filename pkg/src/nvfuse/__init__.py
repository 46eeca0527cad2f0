"""Newsvendor order quantities improved with uncertain additional information."""

from .bootstrap import BootstrapCov, BootstrapSettings, bootstrap_joint
from .combine import (AdditionalSource, CombinedEstimate, Method, Problem, combine_with_lambda,
                      estimate, mmse, mvar, point_estimates, relevance_form)
from .data import Dataset, DataError, ValidationError, load_csv, resample_rows, write_csv
from .linalg import SpectralDecomposition, spectral_pseudo_inverse, sym_eigen
from .newsvendor import NewsvendorInstance, critical_fractile, expected_profit, order_quantity
from .simulate import Scenario, SourceSpec, convergence_sweep, run_scenario
from .stats import (Kind, StatisticDescriptor, eval_statistic, normal_cdf, normal_inverse_cdf,
                    sample_variance)

__version__ = "0.1.0"
