"""Asymptotic post-hoc confidence intervals, e-values and confidence sequences for a mean.

The intervals stay valid when the miscoverage level α is chosen after seeing
the data: their post-hoc risk E[sup_α 1{θ ∉ H(α)}/α] is at most one as n grows.
"""

from .errors import PosthocError
from .evalues import (IwrParams, MixParams, RegParams, RwsParams, SnSchedule, e_iwr, e_mix_iwr,
                      e_mix_reg, e_reg, e_rws, e_sn, e_to_pvalue, i_r_kernel)
from .intervals import (ConfSeqHandle, Interval, Method, anchor_lambda, anchor_ratio, ci_iwr,
                        ci_mix_iwr, ci_mix_reg, ci_reg, ci_rws, ci_wald, cs_rws, invert_evalue,
                        solve_y_star)
from .risk import (AlphaSearchConfig, RiskReport, alpha_star, empirical_risk, type1_iwr,
                   type1_mix_iwr, type1_reg, type1_rws)
from .sampling import Generator, draw
from .simulate import WidthCurve, anchor_ratio_grid, risk_experiment, width_experiment
from .summary import SampleSummary, read_values, summarize, update

__version__ = "0.1.0"
