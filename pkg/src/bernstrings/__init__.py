"""Simulation and exact verification of success-gap counts in Bernoulli
sequences with decaying success probabilities.

The package has five parts: direct sequence generators and gap counting
(``sequences``), the conditional marked Poisson process model and its Poisson
mixture shortcut (``cmpp``), closed-form reference distributions and a
brute-force enumeration oracle (``exact``), the statistical certification
machinery (``stats``), and named reproducible experiments behind the
``bernstrings`` command (``experiments``).
"""

__version__ = "0.1.0"

from .sequences import (
    BitPrefix,
    CountVector,
    PermDraw,
    add_unit,
    count_strings,
    cycle_census,
    feller_draw,
    gen_bern,
    gen_bern1,
    indicators_to_counts,
)
from .cmpp import (
    CmppSpec,
    MixtureSpec,
    PointRealization,
    assemble_bits,
    counts_from_marks,
    realize,
    sample_bern1_counts_recurrence,
    sample_mixture_counts,
    sample_points,
)
from .exact import (
    CylinderPattern,
    ExactDistribution,
    beta_fn,
    cylinder_prob_bern1,
    cylinder_prob_integral,
    cylinder_prob_product,
    enumerate_truncated,
    mixture_moments,
    mixture_pmf,
    overdispersion_z1,
    plus_model_probs,
    second_success_pmf,
    swapped_model_probs,
    truncation_bias_bound,
)
from .stats import (
    GofResult,
    MomentTest,
    chi2_gof,
    dispersion_test,
    moment_test,
    tv_distance,
    two_sample_counts,
)
from .streams import child_rng
from .experiments import ExperimentConfig, ExperimentReport, emit_report, run

__all__ = [
    "__version__",
    "BitPrefix", "CountVector", "PermDraw", "add_unit", "count_strings",
    "cycle_census", "feller_draw", "gen_bern", "gen_bern1", "indicators_to_counts",
    "CmppSpec", "MixtureSpec", "PointRealization", "assemble_bits",
    "counts_from_marks", "realize", "sample_bern1_counts_recurrence",
    "sample_mixture_counts", "sample_points",
    "CylinderPattern", "ExactDistribution", "beta_fn", "cylinder_prob_bern1",
    "cylinder_prob_integral", "cylinder_prob_product", "enumerate_truncated",
    "mixture_moments", "mixture_pmf", "overdispersion_z1", "plus_model_probs",
    "second_success_pmf", "swapped_model_probs", "truncation_bias_bound",
    "GofResult", "MomentTest", "chi2_gof", "dispersion_test", "moment_test",
    "tv_distance", "two_sample_counts",
    "child_rng",
    "ExperimentConfig", "ExperimentReport", "emit_report", "run",
]
