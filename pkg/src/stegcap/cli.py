"""Command-line front end.

    stegcap capacity --steganalyzer sum --n-max 20
    stegcap capacity --awgn c=3,se2=1,sa2=1
    stegcap enumerate --steganalyzer sum --n 4
    stegcap spectrum --source 0.5,0.5 --channel bsc:0.1 --n 8
    stegcap simulate --awgn c=3,se2=1,sa2=1 --rate 0.35,0.65 --n 512 --draws 2000 --seed 1
    stegcap demo two-noise --n 5

Every flag can also come from ``--config FILE`` (flat ``key = value``, keys
named like the flags with dashes as underscores); flags win.  Exit codes:
2 bad input or config, 3 budget exceeded, 4 numeric domain error.
"""

import argparse
import io
import math
import sys

from . import capacity as cap
from .channel import BlockKernel, kernel_from_spec
from .coding import awgn_experiment, feinstein_code, sphere_packing_count, two_noise_demo, write_sim_csv
from .config import load_config, parse_kv_list, parse_letters, parse_number
from .exceptions import BudgetExceededError, DomainError, StegcapError, ValidationError
from .spectrum import IIDSource, UniformSource, entropy_spectrum, information_spectrum
from .steganalyzer import MemorylessSteganalyzer, enumerate_permissible, from_config, from_spec
from .validation import DEFAULT_BUDGET, unit_name

DEFAULTS = {
    "n_max": 20,
    "n": None,
    "draws": 10_000,
    "seed": 0,
    "base": "2",
    "budget": DEFAULT_BUDGET,
    "margin": 0.15,
    "mode": "exact",
    "tail_fraction": cap.TAIL_FRACTION,
}


def build_parser():
    p = argparse.ArgumentParser(prog="stegcap", description="Steganographic capacity toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat key=value file supplying defaults for any flag")
        sp.add_argument("--steganalyzer", help="e.g. sum, variance:c=3, memoryless:alphabet=0 1 2,permissible=0 1")
        sp.add_argument("--channel", help="bsc:P, identity:K, gaussian:VAR, negation, file:PATH or none")
        sp.add_argument("--awgn", help="c=..,se2=..,sa2=..")
        sp.add_argument("--source", help="letter probabilities, e.g. 0.5,0.3,0.2")
        sp.add_argument("--rate", help="rate(s) in bits, comma separated")
        sp.add_argument("--n", help="block length(s), comma separated")
        sp.add_argument("--n-max", type=int, dest="n_max")
        sp.add_argument("--draws", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--base", choices=["2", "e"])
        sp.add_argument("--budget", type=int)
        sp.add_argument("--out", help="write CSV here instead of stdout")
        return sp

    common(sub.add_parser("capacity", help="secure capacity estimates and per-n rates"))
    common(sub.add_parser("enumerate", help="list the permissible set at one block length"))
    sp = common(sub.add_parser("spectrum", help="entropy or information spectrum"))
    sp.add_argument("--mode", choices=["exact", "sampled"])
    sp = common(sub.add_parser("simulate", help="random-coding or Feinstein experiments"))
    sp.add_argument("--margin", type=float, help="power back-off as a fraction of c")
    sp.add_argument("--gamma", type=float, help="Feinstein slack in nats per letter")
    sp.add_argument("--M", type=int, dest="M", help="Feinstein target code size")
    sp = common(sub.add_parser("demo", help="worked examples"))
    sp.add_argument("name", choices=["two-noise", "sphere-packing"])
    return p


class Settings:
    """Flag values layered over config-file values layered over defaults."""

    def __init__(self, args):
        self.args = vars(args)
        self.cfg = load_config(args.config) if args.config else {}

    def raw(self, key):
        value = self.args.get(key)
        if value is None:
            value = self.cfg.get(key)
        if value is None:
            value = DEFAULTS.get(key)
        return value

    def number(self, key):
        value = self.raw(key)
        return value if value is None or not isinstance(value, str) else parse_number(value)

    def positive_int(self, key):
        value = self.number(key)
        if value is None:
            return None
        if not isinstance(value, int) or value < 1:
            raise ValidationError(f"{key} must be a positive integer, got {value!r}")
        return value

    def ints(self, key):
        value = self.raw(key)
        if value is None:
            return None
        values = parse_letters(str(value))
        if not values or any(not isinstance(v, int) or v < 1 for v in values):
            raise ValidationError(f"{key} must list positive integers")
        return values

    @property
    def base(self):
        b = str(self.raw("base"))
        if b not in ("2", "e"):
            raise ValidationError(f"base must be 2 or e, got {b!r}")
        return 2 if b == "2" else "e"

    def steganalyzer(self):
        if self.args.get("steganalyzer"):
            return from_spec(self.args["steganalyzer"])
        if "steganalyzer" in self.cfg:
            return from_spec(self.cfg["steganalyzer"])
        if "steganalyzer.variant" in self.cfg:
            return from_config(self.cfg, "steganalyzer.")
        return None

    def awgn(self):
        text = self.raw("awgn")
        kv = parse_kv_list(text) if text else {k: self.cfg[k] for k in ("c", "se2", "sa2") if k in self.cfg}
        if not kv:
            return None
        missing = {"c", "se2", "sa2"} - set(kv)
        if missing:
            raise ValidationError(f"awgn needs c, se2 and sa2; missing {sorted(missing)}")
        return {k: float(parse_number(kv[k])) for k in ("c", "se2", "sa2")}

    def channel(self):
        text = self.raw("channel")
        return kernel_from_spec(text) if text else None

    def source(self):
        text = self.raw("source")
        return [float(v) for v in parse_letters(text)] if text else None

    def metadata(self, **extra):
        meta = {"command": self.args["command"]}
        for key in ("steganalyzer", "channel", "awgn", "source", "rate", "n", "n_max", "draws", "seed", "margin",
                    "gamma", "M", "mode"):
            value = self.raw(key) if key in self.args else None
            if value is not None:
                meta[key] = value
        meta["base"] = self.raw("base")
        meta["budget"] = self.raw("budget")
        meta.update(extra)
        return meta


def _emit(settings, text, summary=None):
    out = settings.raw("out")
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
        if summary:
            print(summary)
    else:
        sys.stdout.write(text)
        if summary:
            sys.stdout.write(summary + "\n")


def _comment(meta):
    return "".join(f"# {k}={v}\n" for k, v in meta.items())


def _fmt(v):
    return repr(float(v)) if isinstance(v, float) else str(v)


def _csv(meta, header, rows):
    lines = [",".join(header)] + [",".join(_fmt(v) for v in row) for row in rows]
    return _comment(meta) + "\n".join(lines) + "\n"


def cmd_capacity(s):
    base = s.base
    unit = unit_name(base)
    awgn = s.awgn()
    if awgn:
        res = cap.awgn_secure_capacity(awgn["c"], awgn["se2"], awgn["sa2"], base)
        text = _csv(s.metadata(method=res.method), ["c", "se2", "sa2", f"capacity_{unit}"],
                    [(awgn["c"], awgn["se2"], awgn["sa2"], res.value)])
        _emit(s, text if s.raw("out") else "", f"{res.value!r} {unit}")
        return 0
    g = s.steganalyzer()
    w = s.channel()
    if w is not None:
        if not isinstance(g, MemorylessSteganalyzer):
            raise ValidationError("capacity with --channel needs a memoryless steganalyzer")
        res = cap.dmsc_secure_capacity(w, g, base)
        text = _csv(s.metadata(method=res.method), [f"capacity_{unit}"], [(res.value,)])
        _emit(s, text if s.raw("out") else "", f"{res.value!r} {unit}")
        return 0
    n_max = s.positive_int("n_max")
    budget = s.positive_int("budget")
    p_s = s.source()
    if p_s is not None:
        res = cap.empirical_dist_capacity(p_s, n_max, base=base)
        limit = cap.cachin_capacity(p_s, base).value
        meta = s.metadata(estimate=repr(res.value), entropy=repr(limit), tail_fraction=cap.TAIL_FRACTION)
    else:
        if g is None:
            raise ValidationError("capacity needs --steganalyzer, --awgn, --source or --channel")
        res = cap.noiseless_secure_capacity(g, n_max, base, budget=budget)
        upper = cap.permissible_set_upper_bound(g, n_max, base, budget=budget)
        meta = s.metadata(estimate=repr(res.value), limsup_estimate=repr(float(upper)),
                          tail_fraction=cap.TAIL_FRACTION)
    buf = io.StringIO()
    res.write_csv(buf, meta)
    _emit(s, buf.getvalue())
    return 0


def cmd_enumerate(s):
    g = s.steganalyzer()
    if g is None:
        raise ValidationError("enumerate needs --steganalyzer")
    ns = s.ints("n") or (s.positive_int("n_max"),)
    budget = s.positive_int("budget")
    parts = [_comment(s.metadata())]
    for n in ns:
        ps = enumerate_permissible(g, n, budget=budget)
        parts.append(f"# n={n} count={ps.count}\n")
        parts.append(ps.to_text())
    _emit(s, "".join(parts))
    return 0


def cmd_spectrum(s):
    ns = s.ints("n")
    if not ns or len(ns) != 1:
        raise ValidationError("spectrum needs a single --n")
    n = ns[0]
    base, mode, budget = s.base, s.raw("mode"), s.positive_int("budget")
    draws = s.positive_int("draws") if mode == "sampled" else None
    seed = s.number("seed")
    p = s.source()
    w = s.channel()
    g = s.steganalyzer()
    if p is not None and w is not None:
        spec = information_spectrum(IIDSource(p, getattr(w, "input_alphabet", None)), BlockKernel(w, n), n,
                                    mode, draws, seed, base, budget)
        kind = "information"
    elif p is not None:
        spec = entropy_spectrum(IIDSource(p), n, mode, draws, seed, base, budget)
        kind = "entropy"
    elif g is not None:
        members = enumerate_permissible(g, n, budget=budget).sorted_members()
        if not members:
            raise DomainError(f"permissible set is empty at n={n}; no uniform law on it")
        spec = entropy_spectrum(UniformSource(members, g.letters), n, mode, draws, seed, base, budget)
        kind = "uniform_permissible"
    else:
        raise ValidationError("spectrum needs --source (with optional --channel) or --steganalyzer")
    buf = io.StringIO()
    buf.write(_comment(s.metadata(spectrum=kind, mean=repr(spec.mean()))))
    spec.write_csv(buf)
    _emit(s, buf.getvalue())
    return 0


def cmd_simulate(s):
    awgn = s.awgn()
    seed = s.number("seed")
    if awgn:
        rates = [float(r) for r in parse_letters(str(s.raw("rate") or ""))]
        ns = s.ints("n")
        if not rates or not ns:
            raise ValidationError("simulate --awgn needs --rate and --n")
        draws = s.positive_int("draws")
        margin = float(s.number("margin"))
        rows = []
        for n in ns:
            for r in rates:
                rows.append((n, r, awgn_experiment(awgn["c"], awgn["se2"], awgn["sa2"], r, n, draws, seed, margin)))
        c = cap.awgn_secure_capacity(awgn["c"], awgn["se2"], awgn["sa2"]).value
        buf = io.StringIO()
        write_sim_csv(buf, rows, s.metadata(capacity_bits=repr(c), margin=margin, ci="95%"))
        _emit(s, buf.getvalue())
        return 0
    w, p = s.channel(), s.source()
    if w is None or p is None:
        raise ValidationError("simulate needs --awgn, or --channel with --source for a Feinstein code")
    ns = s.ints("n")
    gamma, M = s.number("gamma"), s.positive_int("M")
    if not ns or gamma is None or M is None:
        raise ValidationError("Feinstein simulation needs --n, --gamma and --M")
    rows = []
    for n in ns:
        r = feinstein_code(BlockKernel(w, n), p, float(gamma), M, budget=s.positive_int("budget"))
        size = r.code.M if r.code else 0
        rate = math.log2(size) / n if size else 0.0
        rows.append((n, size, rate, r.epsilon, r.max_epsilon, r.bound, int(r.reached)))
    text = _csv(s.metadata(), ["n", "M", "rate_bits", "epsilon", "max_epsilon", "bound", "reached"], rows)
    _emit(s, text)
    return 0


def cmd_demo(s):
    if s.args["name"] == "two-noise":
        ns = s.ints("n") or (5,)
        rows = []
        for n in ns:
            r = two_noise_demo(n)
            rows.append((n, r.composite_permissible, r.best_series_delta, r.M, r.rate_bits, r.epsilon, r.delta))
        header = ["n", "series_permissible", "series_delta", "M", "rate_bits", "epsilon", "delta"]
        _emit(s, _csv(s.metadata(), header, rows))
        return 0
    awgn = s.awgn()
    if not awgn:
        raise ValidationError("sphere-packing demo needs --awgn")
    noise = awgn["se2"] + awgn["sa2"]
    base = s.base
    rows = []
    for n in s.ints("n") or (s.positive_int("n_max"),):
        sp = sphere_packing_count(awgn["c"] + awgn["sa2"], noise, n, base)
        rows.append((n, sp.log_count, sp.rate))
    unit = unit_name(base)
    _emit(s, _csv(s.metadata(), ["n", f"log_count_{unit}", f"rate_{unit}"], rows))
    return 0


COMMANDS = {
    "capacity": cmd_capacity,
    "enumerate": cmd_enumerate,
    "spectrum": cmd_spectrum,
    "simulate": cmd_simulate,
    "demo": cmd_demo,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        settings = Settings(args)
        return COMMANDS[args.command](settings)
    except BudgetExceededError as e:
        print(f"stegcap: {e}", file=sys.stderr)
        return 3
    except DomainError as e:
        print(f"stegcap: {e}", file=sys.stderr)
        return 4
    except (ValidationError, StegcapError, OSError) as e:
        print(f"stegcap: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
