"""Exact measures on Cantor space, toy Kolmogorov complexity, randomness tests and entropy experiments."""

from .errors import CantorLabError
from .interval import IntervalValue
from .measures import (Bernoulli, Convex, Dirac, DyadicMeasure, EventuallyPeriodic, Localize, Markov, MeasureSpec,
                       PrefixThenPseudoRandom, Product, Pushforward, Renewal, RenewalCompanion, SigmaMixture,
                       SlowGrowth, TrivialMixture, TTReduction, Uniform, evaluate, product, pushforward, support,
                       to_table)

__all__ = [
    "Bernoulli", "CantorLabError", "Convex", "Dirac", "DyadicMeasure", "EventuallyPeriodic", "IntervalValue",
    "Localize", "Markov", "MeasureSpec", "PrefixThenPseudoRandom", "Product", "Pushforward", "Renewal",
    "RenewalCompanion", "SigmaMixture", "SlowGrowth", "TTReduction", "TrivialMixture", "Uniform", "evaluate",
    "product", "pushforward", "support", "to_table",
]
