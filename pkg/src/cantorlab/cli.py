"""Command-line runner for named, reproducible experiments.

    cantorlab --experiment measure-eval --param spec=uniform --param depth=3 --out results/
    cantorlab --manifest runs/sampler.json --threads 8

Every output starts with a schema line (CSV) or carries a "schema" key (JSON),
and every claim that depends on a finite truncation carries a "resolution" stamp.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

from . import specfile
from .errors import CantorLabError, InvalidManifest, UnknownExperiment
from .interval import IntervalValue, as_interval

SCHEMA = "cantorlab-output/v1"


@dataclass
class ExperimentManifest:
    name: str
    parameters: dict = field(default_factory=dict)
    seed: int | None = None
    outputs: dict = field(default_factory=dict)  # logical output -> file name

    def to_json(self) -> str:
        obj = {"experiment": self.name, "parameters": self.parameters, "seed": self.seed, "outputs": self.outputs}
        return json.dumps(obj, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentManifest":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidManifest(f"manifest is not JSON: {exc}") from exc
        if not isinstance(obj, dict) or not isinstance(obj.get("experiment"), str):
            raise InvalidManifest("manifest needs a string 'experiment' field")
        unknown = set(obj) - {"experiment", "parameters", "seed", "outputs"}
        if unknown:
            raise InvalidManifest(f"unknown manifest fields: {sorted(unknown)}")
        params = obj.get("parameters", {})
        outputs = obj.get("outputs", {})
        seed = obj.get("seed")
        if not isinstance(params, dict) or not isinstance(outputs, dict):
            raise InvalidManifest("'parameters' and 'outputs' must be objects")
        if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
            raise InvalidManifest("'seed' must be an integer")
        return cls(obj["experiment"], params, seed, outputs)


# ---------------------------------------------------------------------------
# formatting helpers


def _q(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _lohi(x) -> tuple[str, str]:
    """Exact rationals for exact values; enclosures print as floats since their endpoints are huge."""
    iv = as_interval(x)
    if iv.is_point:
        return _q(iv.lo), _q(iv.hi)
    return _flohi(iv)


def _flohi(x) -> tuple[str, str]:
    iv = as_interval(x)
    return repr(float(iv.lo)), repr(float(iv.hi))


def _jval(x):
    if isinstance(x, IntervalValue):
        return {"lo": _q(x.lo), "hi": _q(x.hi), "approx": float(x.mid)}
    if isinstance(x, Fraction):
        return {"exact": _q(x), "approx": float(x)}
    return x


def csv_text(name: str, header: list[str], rows: list[list], resolution: dict | None = None) -> str:
    buf = io.StringIO()
    stamp = f"# cantorlab-output v1 experiment={name}"
    if resolution:
        stamp += " resolution=" + json.dumps(resolution, sort_keys=True, separators=(",", ":"))
    buf.write(stamp + "\n")
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(str(v) for v in r) + "\n")
    return buf.getvalue()


def json_text(name: str, resolution: dict, body: dict) -> str:
    obj = {"schema": SCHEMA, "experiment": name, "resolution": resolution}
    obj.update(body)
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# parameter access


class Params:
    def __init__(self, m: ExperimentManifest, base_dir: Path):
        self.m = m
        self.base = base_dir

    def get(self, key, default=None):
        return self.m.parameters.get(key, default)

    def int(self, key, default=None) -> int:
        v = self.get(key, default)
        if v is None or isinstance(v, bool):
            raise InvalidManifest(f"parameter {key!r} must be an integer")
        try:
            return int(v)
        except (TypeError, ValueError) as exc:
            raise InvalidManifest(f"parameter {key!r} must be an integer") from exc

    def frac(self, key, default=None) -> Fraction:
        v = self.get(key, default)
        try:
            return Fraction(str(v))
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise InvalidManifest(f"parameter {key!r} must be a rational") from exc

    def strings(self, key, default=()) -> list[str]:
        v = self.get(key, list(default))
        if isinstance(v, str):
            v = [s for s in v.split(",")] if v else []
        if not isinstance(v, list) or any(not isinstance(s, str) or set(s) - {"0", "1"} for s in v):
            raise InvalidManifest(f"parameter {key!r} must be a list of bit strings")
        return v

    def spec(self, key="spec", default="uniform"):
        v = self.get(key, default)
        if isinstance(v, dict):
            return specfile.from_obj(v)
        if isinstance(v, str):
            path = self.base / v
            if path.is_file():
                return specfile.loads(path.read_text())
            return specfile.from_obj({"type": v})
        raise InvalidManifest(f"parameter {key!r} must be a measure object, a spec file or a type name")

    def seed(self) -> int:
        if self.m.seed is None:
            raise InvalidManifest(f"experiment {self.m.name!r} is stochastic and needs a seed")
        return self.m.seed


Outputs = list  # of (logical name, default file name, text)


def _lab(p: Params, conditions: bool = True):
    from .machine import Budget, build_lab

    budget = Budget(p.int("max_length", 18), p.int("max_steps", 512))
    return build_lab(budget, p.int("cond_max_n", 8), with_conditions=conditions)


# ---------------------------------------------------------------------------
# experiments


def exp_measure_eval(p: Params, threads: int) -> Outputs:
    spec = p.spec()
    depth = p.int("depth", 3)
    from .measures import to_table

    table = to_table(spec, depth, p.frac("tail_tolerance", "1/18446744073709551616"))
    rows = []
    for s in sorted(table.table, key=lambda x: (len(x), x)):
        lo, hi = _lohi(table.table[s])
        rows.append([len(s), s, lo, hi])
    res = {"depth": depth, "spec": specfile.to_obj(spec)}
    return [("csv", "measure-eval.csv", csv_text("measure-eval", ["length", "sigma", "mass_lo", "mass_hi"], rows, res))]


def exp_complexity_table(p: Params, threads: int) -> Outputs:
    from .machine import Budget, enumerate_table, tsv_text

    kind = p.get("kind", "prefix")
    budget = Budget(p.int("max_length", 18), p.int("max_steps", 512))
    conds = p.get("conditions", [])
    table = enumerate_table(kind, budget, conds, p.int("cond_max_n", 8))
    out = [("tsv", f"complexity-{table.kind.value}.tsv", tsv_text(table))]
    if conds:
        rows = []
        for tag in conds:
            for n, key in sorted(table.tags[tag].items()):
                for x, (v, w) in sorted(table.cond[key].items(), key=lambda kv: (len(kv[0]), kv[0])):
                    if len(x) <= n:
                        rows.append([tag.replace(",", ";"), n, x, v, w])
        res = {"kind": table.kind.value, "max_length": budget.max_program_length, "max_steps": budget.max_steps}
        out.append(("conditional", f"complexity-{table.kind.value}-conditional.csv",
                    csv_text("complexity-table", ["condition", "n", "string", "value", "witness"], rows, res)))
    return out


def exp_inseg_profile(p: Params, threads: int) -> Outputs:
    from .inseg import dimension_profile, growth_and_triviality_profile

    spec = p.spec()
    max_n = p.int("max_n", 8)
    lab = _lab(p, conditions=False)
    prof = growth_and_triviality_profile(spec, max_n, lab)
    dims = {r.n: r for r in dimension_profile(spec, max_n, lab)}
    rows = []
    for r in prof.rows:
        d = dims.get(r.n)
        rows.append([r.n, *_flohi(r.k_mu), *_flohi(r.c_mu), r.k_n, r.c_n,
                     *_flohi(r.k_triviality), *_flohi(r.c_triviality), *_flohi(r.k_growth), *_flohi(r.c_growth),
                     *(_flohi(d.c_rate) if d else ("", "")), *(_flohi(d.k_rate) if d else ("", ""))])
    header = ["n", "K_mu_lo", "K_mu_hi", "C_mu_lo", "C_mu_hi", "K_n", "C_n", "K_triv_lo", "K_triv_hi",
              "C_triv_lo", "C_triv_hi", "K_growth_lo", "K_growth_hi", "C_growth_lo", "C_growth_hi",
              "C_rate_lo", "C_rate_hi", "K_rate_lo", "K_rate_hi"]
    res = {"max_n": max_n, "max_length": lab.prefix.budget.max_program_length, "max_steps": lab.prefix.budget.max_steps}
    flags = {"triviality_trend": prof.triviality_trend, "maximal_growth_trend": prof.maximal_growth_trend,
             "max_K_triviality": _jval(prof.max_k_triviality()), "max_K_growth": _jval(prof.max_k_growth())}
    return [("csv", "inseg-profile.csv", csv_text("inseg-profile", header, rows, res)),
            ("json", "inseg-profile.json", json_text("inseg-profile", res, {"spec": specfile.to_obj(spec), "flags": flags}))]


def exp_inequality_suite(p: Params, threads: int) -> Outputs:
    from .inseg import inequality_suite

    names = p.get("specs", ["uniform", {"type": "bernoulli", "p": "1/3"},
                            {"type": "dirac", "seq": {"type": "periodic", "period": "0"}}])
    specs = [(json.dumps(s, sort_keys=True) if isinstance(s, dict) else s, Params(
        ExperimentManifest("", {"spec": s}), p.base).spec()) for s in names]
    max_n = p.int("max_n", 8)
    lab = _lab(p)
    rep = inequality_suite(specs, max_n, lab)
    res = {"max_n": max_n, "max_length": lab.prefix.budget.max_program_length}
    return [("json", "inequality-suite.json", json_text("inequality-suite", res, {
        "compare_constant": _jval(rep.compare_constant), "upgrade_constant": rep.upgrade_constant,
        "compare_rows": [[lab_, n, _jval(l), _jval(r)] for lab_, n, l, r in rep.compare_rows]}))]


def _test_family(p: Params, lab_needed=None):
    from .randomness import levin_schnorr_family, lln_test, zeros_test

    name = p.get("test", "zeros")
    if name == "zeros":
        return zeros_test()
    if name == "lln":
        return lln_test(p.int("lln_den", 8))
    if name == "levin-schnorr":
        return levin_schnorr_family(_lab(p, conditions=False))
    raise InvalidManifest(f"unknown test family {name!r}")


def exp_test_diagnostic(p: Params, threads: int) -> Outputs:
    from .randomness import pass_diagnostic

    spec = p.spec()
    test = _test_family(p)
    v = pass_diagnostic(spec, test, p.int("max_level", 20), p.int("cutoff", 20), p.frac("delta", "1/2"))
    body = v.to_json()
    res = body.pop("resolution")
    body["spec"] = specfile.to_obj(spec)
    return [("json", "test-diagnostic.json", json_text("test-diagnostic", res, body))]


def _sampler_cfg(p: Params):
    from .sampler import SamplerConfig

    return SamplerConfig(p.seed(), p.int("depth", 4), p.int("samples", 100000))


def exp_sampler_mc(p: Params, threads: int) -> Outputs:
    from .sampler import mean_and_se, set_masses

    cfg = _sampler_cfg(p)
    G = p.strings("set", ["0"])
    masses = set_masses(cfg, G, threads)
    est, se = mean_and_se(masses)
    res = {"seed": cfg.seed, "depth": cfg.depth, "samples": cfg.sample_count}
    out = [("json", "sampler-mc.json", json_text("sampler-mc", res, {"set": G, "estimate": est, "standard_error": se}))]
    if p.get("per_sample", False):
        rows = [[i, repr(float(v))] for i, v in enumerate(masses.tolist())]
        out.append(("csv", "sampler-mc.csv", csv_text("sampler-mc", ["index", "mass"], rows, res)))
    return out


def exp_failing_fraction(p: Params, threads: int) -> Outputs:
    from .randomness import zeros_test
    from .sampler import failing_fraction

    cfg = _sampler_cfg(p)
    rows = []
    for m in p.get("levels", [2, 3, 4]):
        for d in p.get("deltas", ["1/2", "1"]):
            r = failing_fraction(cfg, zeros_test(), int(m), p.int("cutoff", cfg.depth), Fraction(d), threads)
            rows.append([m, d, repr(r.fraction), repr(r.bound), repr(r.se), r.violated])
    res = {"seed": cfg.seed, "depth": cfg.depth, "samples": cfg.sample_count, "test": "zeros"}
    return [("csv", "failing-fraction.csv",
             csv_text("failing-fraction", ["m", "delta", "fraction", "bound", "se", "violated"], rows, res))]


def exp_v_recursion(p: Params, threads: int) -> Outputs:
    from .sampler import v_recursion_detail

    rows = []
    for n in p.get("ns", [1, 2, 3]):
        for x in p.get("xs", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]):
            v = v_recursion_detail(int(n), float(x), p.int("panels", 64))
            rows.append([n, repr(float(x)), repr(v.value), repr(v.error), v.panels])
    return [("csv", "v-recursion.csv", csv_text("v-recursion", ["n", "x", "v", "refinement_diff", "panels"], rows))]


def exp_entropy_series(p: Params, threads: int) -> Outputs:
    from .entropy import block_entropy, expected_empirical

    rho = p.spec()
    mu = p.spec("mu", p.get("spec", "uniform"))
    max_n = p.int("max_n", 8)
    hs = [block_entropy(rho, n) for n in range(1, max_n + 1)]
    s = min(hs)
    rows = []
    for n in range(1, max_n + 1):
        e, d = expected_empirical(mu, rho, n, s)
        rows.append([n, repr(hs[n - 1]), *_flohi(e), *_flohi(d)])
    res = {"max_n": max_n, "entropy_upper_bound": repr(s)}
    return [("csv", "entropy-series.csv", csv_text("entropy-series",
                                                   ["n", "H_n", "E_h_lo", "E_h_hi", "E_abs_dev_lo", "E_abs_dev_hi"], rows, res))]


def exp_renewal_divergence(p: Params, threads: int) -> Outputs:
    from .entropy import renewal_divergence

    n_min, n_max = p.int("n_min", 4), p.int("n_max", 7)
    rep = renewal_divergence(p.int("truncation", 4), range(n_min - 2, n_max - 1))
    rows = [[r.k, r.n, *_lohi(r.expectation), repr(float(r.expectation.mid)), repr(r.lower_target)] for r in rep.rows]
    res = {"truncation": p.int("truncation", 4), "n_min": n_min, "n_max": n_max,
           "max_width": repr(float(rep.max_width))}
    return [("csv", "renewal-divergence.csv", csv_text("renewal-divergence",
                                                       ["k", "n", "E_h_lo", "E_h_hi", "E_h_approx", "k2_over_nb"], rows, res)),
            ("json", "renewal-divergence.json", json_text("renewal-divergence", res, {
                "b": rep.b, "measured_constant": rep.constant, "strictly_increasing": rep.increasing}))]


def exp_smb(p: Params, threads: int) -> Outputs:
    from .entropy import block_entropy, empirical_entropy, sample_path

    spec = p.spec("spec", {"type": "bernoulli", "p": "1/4"})
    n, paths, seed = p.int("n", 4096), p.int("paths", 200), p.seed()
    hs = [empirical_entropy(spec, sample_path(spec, n, seed, j)) for j in range(paths)]
    import math

    res = {"n": n, "paths": paths, "seed": seed}
    return [("json", "smb.json", json_text("smb", res, {
        "mean_empirical_entropy": math.fsum(hs) / paths, "block_entropy": block_entropy(spec, min(n, 12)),
        "per_path": hs}))]


def exp_ergodicity(p: Params, threads: int) -> Outputs:
    from .entropy import ergodicity_probe, shift_invariance_check

    spec = p.spec()
    u, v, N = p.get("u", "1"), p.get("v", "1"), p.int("N", 64)
    avg, target = ergodicity_probe(spec, u, v, N)
    sh = shift_invariance_check(spec, p.int("depth", 8))
    res = {"N": N, "depth": sh.depth}
    return [("json", "ergodicity.json", json_text("ergodicity", res, {
        "average": _jval(avg), "target": _jval(target), "shift_invariance_ok": sh.ok,
        "shift_max_residual": _jval(sh.max_residual), "shift_max_width": _jval(sh.max_width)}))]


def exp_dip_report(p: Params, threads: int) -> Outputs:
    from .randomness import dip_fixture, dip_report

    mu, sst = dip_fixture()
    lab = _lab(p)
    rep = dip_report(mu, sst, lab, p.frac("delta", "1/2"))
    rows = [[r.n, _q(r.mass), r.f, *_lohi(r.c_cond), _q(r.bound), _q(r.excess)] for r in rep.rows]
    res = {"delta": _q(rep.delta), "max_length": lab.plain.budget.max_program_length,
           "blocks": [n for n, _ in sst.blocks]}
    return [("csv", "dip-report.csv", csv_text("dip-report", ["n", "mass", "f", "C_cond_lo", "C_cond_hi", "bound", "excess"], rows, res)),
            ("json", "dip-report.json", json_text("dip-report", res, {
                "constant": _jval(rep.constant), "fails_at_delta": rep.fails_at_delta,
                "f_series_partial_sum": _jval(rep.f_series_sum)}))]


def exp_triple_probe(p: Params, threads: int) -> Outputs:
    from .machine import probe_triple_condition

    lab = _lab(p)
    rows = [list(r) for r in probe_triple_condition(lab, p.int("max_n", 8))]
    res = {"max_n": p.int("max_n", 8), "max_length": lab.prefix.budget.max_program_length}
    return [("csv", "triple-probe.csv", csv_text("triple-probe", ["n", "C_n", "K_n", "K_Cn_given_n_Kn"], rows, res))]


def exp_counting(p: Params, threads: int) -> Outputs:
    from .machine import counting_check

    lab = _lab(p, conditions=False)
    rep = counting_check(lab, p.int("n", 8), p.int("max_deficit", 6), p.int("max_r", 12))
    res = {"n": p.int("n", 8), "max_deficit": p.int("max_deficit", 6), "max_length": lab.prefix.budget.max_program_length}
    return [("json", "counting.json", json_text("counting", res, {
        "plain_counts": {str(r): c for r, c in rep.plain_counts.items()}, "plain_ok": rep.plain_ok,
        "prefix_constant": rep.prefix_constant,
        "prefix_counts": {f"{n},{d}": c for (n, d), c in rep.prefix_counts.items()}}))]


def exp_envelope(p: Params, threads: int) -> Outputs:
    from .inseg import first_envelope_checkpoint, slow_growth_envelope

    rows = [[r.k, r.n, _q(r.weight), repr(r.bound), repr(r.target), r.holds] for r in slow_growth_envelope(p.int("max_k", 8))]
    res = {"max_k": p.int("max_k", 8), "first_holding_k": first_envelope_checkpoint()}
    return [("csv", "envelope.csv", csv_text("envelope", ["k", "n_k", "c_k1", "bound", "n_minus_sqrt_n", "holds"], rows, res))]


EXPERIMENTS: dict[str, tuple[Callable, bool]] = {
    # name -> (runner, needs a seed)
    "measure-eval": (exp_measure_eval, False),
    "complexity-table": (exp_complexity_table, False),
    "inseg-profile": (exp_inseg_profile, False),
    "inequality-suite": (exp_inequality_suite, False),
    "test-diagnostic": (exp_test_diagnostic, False),
    "sampler-mc": (exp_sampler_mc, True),
    "failing-fraction": (exp_failing_fraction, True),
    "v-recursion": (exp_v_recursion, False),
    "entropy-series": (exp_entropy_series, False),
    "renewal-divergence": (exp_renewal_divergence, False),
    "smb": (exp_smb, True),
    "ergodicity": (exp_ergodicity, False),
    "dip-report": (exp_dip_report, False),
    "triple-probe": (exp_triple_probe, False),
    "counting": (exp_counting, False),
    "envelope": (exp_envelope, False),
}

STOCHASTIC = sorted(name for name, (_, seeded) in EXPERIMENTS.items() if seeded)


def run(manifest: ExperimentManifest, out_dir: Path | str, threads: int = 1, base_dir: Path | None = None) -> list[Path]:
    """Run one experiment and write its outputs; returns the written paths."""
    if manifest.name not in EXPERIMENTS:
        raise UnknownExperiment(f"unknown experiment {manifest.name!r}; known: {', '.join(sorted(EXPERIMENTS))}")
    runner, seeded = EXPERIMENTS[manifest.name]
    if seeded and manifest.seed is None:
        raise InvalidManifest(f"experiment {manifest.name!r} is stochastic and needs a seed")
    outputs = runner(Params(manifest, base_dir or Path.cwd()), max(1, threads))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for logical, default_name, text in outputs:
        path = out / manifest.outputs.get(logical, default_name)
        path.write_text(text, encoding="utf-8", newline="\n")
        written.append(path)
    return written


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cantorlab", description="Run reproducible measure/complexity experiments.")
    ap.add_argument("--experiment", "-e", help="registered experiment name")
    ap.add_argument("--manifest", "-m", type=Path, help="JSON manifest file")
    ap.add_argument("--out", "-o", type=Path, default=Path("."), help="output directory")
    ap.add_argument("--seed", type=int, help="seed for stochastic experiments (overrides the manifest)")
    ap.add_argument("--threads", type=int, default=1, help="worker threads; outputs do not depend on this")
    ap.add_argument("--param", "-p", action="append", default=[], metavar="KEY=VALUE",
                    help="set a parameter; VALUE is parsed as JSON when possible")
    ap.add_argument("--depth", type=int, help="shorthand for --param depth=N")
    ap.add_argument("--samples", type=int, help="shorthand for --param samples=N")
    ap.add_argument("--set", help="comma-separated bit strings; shorthand for --param set=...")
    ap.add_argument("--kind", choices=["plain", "prefix"], help="machine kind for complexity-table")
    ap.add_argument("--max-length", type=int, help="program length bound")
    ap.add_argument("--max-steps", type=int, help="step bound")
    ap.add_argument("--conditions", help="condition tags separated by ';', e.g. 'n;(n, K(n))'")
    ap.add_argument("--list", action="store_true", help="list experiments and exit")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.list:
        for name in sorted(EXPERIMENTS):
            print(name + ("  (seeded)" if EXPERIMENTS[name][1] else ""))
        return 0
    try:
        base = Path.cwd()
        if args.manifest is not None:
            try:
                text = args.manifest.read_text()
            except OSError as exc:
                raise InvalidManifest(f"cannot read manifest: {exc}") from exc
            manifest = ExperimentManifest.from_json(text)
            base = args.manifest.parent
            if args.experiment and args.experiment != manifest.name:
                raise InvalidManifest("--experiment disagrees with the manifest")
        elif args.experiment:
            manifest = ExperimentManifest(args.experiment)
        else:
            raise InvalidManifest("give --experiment or --manifest")
        for item in args.param:
            if "=" not in item:
                raise InvalidManifest(f"--param expects KEY=VALUE, got {item!r}")
            k, v = item.split("=", 1)
            manifest.parameters[k] = _parse_value(v)
        for key, val in (("depth", args.depth), ("samples", args.samples), ("kind", args.kind),
                         ("max_length", args.max_length), ("max_steps", args.max_steps)):
            if val is not None:
                manifest.parameters[key] = val
        if args.set is not None:
            manifest.parameters["set"] = [s for s in args.set.split(",") if s] if args.set else [""]
        if args.conditions:
            manifest.parameters["conditions"] = [c.strip() for c in args.conditions.split(";") if c.strip()]
        if args.seed is not None:
            manifest.seed = args.seed
        for path in run(manifest, args.out, args.threads, base):
            print(path)
        return 0
    except CantorLabError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
