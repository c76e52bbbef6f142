"""Text format for measure specs (JSON documents; grammar in docs/spec-format.md).

Rationals are written ``"num/den"`` (or an integer string), seeds as decimal
integers, bit strings as strings of 0/1. ``dumps(loads(text))`` is a fixed
point and ``loads(dumps(spec)) == spec`` for every spec built from named
parts.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .errors import MalformedSpec
from .interval import IntervalValue
from . import measures as M


def _rat(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _parse_rat(s) -> Fraction:
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise MalformedSpec(f"expected a rational written as 'num/den', got {s!r}")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedSpec(f"bad rational {s!r}") from exc


def seq_to_obj(seq) -> dict:
    if isinstance(seq, M.EventuallyPeriodic):
        return {"type": "periodic", "preamble": seq.preamble, "period": seq.period}
    if isinstance(seq, M.PrefixThenPseudoRandom):
        return {"type": "pseudo_random", "prefix": seq.prefix_bits, "seed": seq.seed}
    raise MalformedSpec(f"unknown sequence {seq!r}")


def seq_from_obj(obj: dict):
    t = obj.get("type")
    if t == "periodic":
        return M.EventuallyPeriodic(obj.get("preamble", ""), obj["period"])
    if t == "pseudo_random":
        return M.PrefixThenPseudoRandom(obj.get("prefix", ""), int(obj["seed"]))
    raise MalformedSpec(f"unknown sequence type {t!r}")


def _weight_to_obj(w):
    if isinstance(w, IntervalValue):
        return {"lo": _rat(w.lo), "hi": _rat(w.hi)}
    return _rat(w)


def _weight_from_obj(o):
    if isinstance(o, dict):
        return IntervalValue(_parse_rat(o["lo"]), _parse_rat(o["hi"]))
    return _parse_rat(o)


def to_obj(spec: M.MeasureSpec) -> dict:
    if isinstance(spec, M.Uniform):
        return {"type": "uniform"}
    if isinstance(spec, M.Bernoulli):
        return {"type": "bernoulli", "p": _rat(spec.p)}
    if isinstance(spec, M.Markov):
        return {"type": "markov", "initial": [_rat(v) for v in spec.initial],
                "transition": [[_rat(v) for v in row] for row in spec.transition]}
    if isinstance(spec, M.Dirac):
        return {"type": "dirac", "seq": seq_to_obj(spec.seq)}
    if isinstance(spec, M.Convex):
        return {"type": "convex", "terms": [{"weight": _weight_to_obj(w), "measure": to_obj(m)} for w, m in spec.terms]}
    if isinstance(spec, M.Localize):
        return {"type": "localize", "at": spec.at, "child": to_obj(spec.child)}
    if isinstance(spec, M.Product):
        return {"type": "product", "left": to_obj(spec.left), "right": to_obj(spec.right)}
    if isinstance(spec, M.Pushforward):
        if spec.red.name == "table":
            raise MalformedSpec("ad hoc table reductions are not serialisable")
        return {"type": "pushforward", "reduction": {"name": spec.red.name, "params": list(spec.red.params)},
                "source": to_obj(spec.source)}
    if isinstance(spec, M.SigmaMixture):
        return {"type": "sigma_mixture"}
    if isinstance(spec, M.SlowGrowth):
        return {"type": "slow_growth", "seed": spec.seed}
    if isinstance(spec, M.TrivialMixture):
        return {"type": "trivial_mixture"}
    if isinstance(spec, M.Renewal):
        return {"type": "renewal", "truncation": spec.truncation}
    if isinstance(spec, M.RenewalCompanion):
        return {"type": "renewal_companion", "truncation": spec.truncation, "normalized": spec.normalized}
    raise MalformedSpec(f"cannot serialise {type(spec).__name__}")


def from_obj(obj) -> M.MeasureSpec:
    if not isinstance(obj, dict) or "type" not in obj:
        raise MalformedSpec("a measure is an object with a 'type' key")
    t = obj["type"]
    try:
        if t == "uniform":
            return M.Uniform()
        if t == "bernoulli":
            return M.Bernoulli(_parse_rat(obj["p"]))
        if t == "markov":
            return M.Markov(tuple(_parse_rat(v) for v in obj["initial"]),
                            tuple(tuple(_parse_rat(v) for v in row) for row in obj["transition"]))
        if t == "dirac":
            return M.Dirac(seq_from_obj(obj["seq"]))
        if t == "convex":
            return M.Convex(tuple((_weight_from_obj(term["weight"]), from_obj(term["measure"])) for term in obj["terms"]))
        if t == "localize":
            return M.Localize(from_obj(obj["child"]), obj["at"])
        if t == "product":
            return M.Product(from_obj(obj["left"]), from_obj(obj["right"]))
        if t == "pushforward":
            red = obj["reduction"]
            return M.Pushforward(M.TTReduction(red["name"], tuple(int(v) for v in red.get("params", []))),
                                 from_obj(obj["source"]))
        if t == "sigma_mixture":
            return M.SigmaMixture()
        if t == "slow_growth":
            return M.SlowGrowth(int(obj.get("seed", 0)))
        if t == "trivial_mixture":
            return M.TrivialMixture()
        if t == "renewal":
            return M.Renewal(int(obj.get("truncation", 4)))
        if t == "renewal_companion":
            return M.RenewalCompanion(int(obj.get("truncation", 4)), bool(obj.get("normalized", False)))
    except KeyError as exc:
        raise MalformedSpec(f"{t}: missing field {exc}") from exc
    raise MalformedSpec(f"unknown measure type {t!r}")


def dumps(spec: M.MeasureSpec) -> str:
    return json.dumps(to_obj(spec), indent=2, sort_keys=True)


def loads(text: str) -> M.MeasureSpec:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedSpec(f"not a JSON document: {exc}") from exc
    return from_obj(obj)
