"""Command line front-end: parameter sweeps, figure data and oracle cross-checks.

Precedence of settings: command line, then ``--config`` file, then defaults.
Data go to ``--output`` (or stdout); progress goes to stderr.
"""

import argparse
import dataclasses
import io
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import density, engine, entanglement, meanfield, oracle
from ._validation import InvalidParameterError, check_alpha, check_positive_int, check_renyi_index, check_seed
from .density import FitWindowError, write_rows
from .markov import build_transfer_matrix, initial_support, light_cone_edges

log = logging.getLogger("dualmc")

COMMANDS = ("density", "entanglement", "meanfield", "bounds", "oracle-check", "coefficients")
EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    alpha: list = field(default_factory=lambda: [0.5])
    t: list = field(default_factory=list)
    samples: int = 100000
    seed: int = 0
    initial: object = "z1"
    case: int = None
    l_A: list = field(default_factory=list)
    output_format: str = "csv"
    output_path: str = None
    threads: int = 1
    chunk_size: int = engine.DEFAULT_CHUNK_SIZE
    # density
    light_cone_depth: int = 0
    relaxation_x0: int = None
    relaxation_window: list = None
    layers_per_step: int = 2
    # entanglement
    l_window: list = None
    max_stderr: float = None
    # meanfield / bounds / coefficients
    renyi_n: list = field(default_factory=lambda: [2.0])
    superposed: bool = False
    k: list = field(default_factory=lambda: [0, 1, 2, 3])
    # oracle-check
    L: int = 10
    corrupt_transfer: bool = False

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def validate(self):
        """Check every numeric range before any work starts."""
        if self.command not in COMMANDS:
            raise InvalidParameterError(f"unknown command {self.command!r}")
        self.alpha = [check_alpha(a) for a in _as_list(self.alpha)]
        if not self.alpha:
            raise InvalidParameterError("no alpha given")
        self.t = [check_positive_int(t, "t", minimum=0) for t in _as_list(self.t)]
        self.samples = check_positive_int(self.samples, "samples")
        self.seed = check_seed(self.seed)
        self.threads = check_positive_int(self.threads, "threads")
        self.chunk_size = check_positive_int(self.chunk_size, "chunk_size")
        self.l_A = [check_positive_int(l, "l_A", minimum=0) for l in _as_list(self.l_A)]
        self.renyi_n = [check_renyi_index(n) for n in _as_list(self.renyi_n)]
        self.k = [check_positive_int(k, "k", minimum=0) for k in _as_list(self.k)]
        self.L = check_positive_int(self.L, "L", minimum=2)
        self.light_cone_depth = check_positive_int(self.light_cone_depth, "light_cone_depth", minimum=0)
        self.layers_per_step = check_positive_int(self.layers_per_step, "layers_per_step")
        if self.output_format not in ("csv", "json"):
            raise InvalidParameterError(f"output format must be csv or json, got {self.output_format!r}")
        if isinstance(self.initial, str) and self.initial.lower() in ("z1", "z0z1"):
            self.initial = self.initial.lower()
        initial_support(_initial_kind(self.initial))
        if self.case is not None and self.case not in (1, 2, 3):
            raise InvalidParameterError(f"case must be 1, 2 or 3, got {self.case!r}")
        for name in ("relaxation_window", "l_window"):
            win = getattr(self, name)
            if win is not None:
                if len(win) != 2 or win[0] > win[1]:
                    raise InvalidParameterError(f"{name} must be [lo, hi] with lo <= hi")
                setattr(self, name, [int(win[0]), int(win[1])])
        if self.max_stderr is not None and not self.max_stderr > 0:
            raise InvalidParameterError("max_stderr must be positive")
        getattr(self, "_validate_" + self.command.replace("-", "_"))()
        _check_writable(self.output_path)
        return self

    def _validate_density(self):
        if not self.t:
            raise InvalidParameterError("density needs at least one time")
        if (self.light_cone_depth or self.relaxation_x0 is not None) and self.output_path is None:
            raise InvalidParameterError("light-cone and relaxation outputs need --output")

    def _validate_entanglement(self):
        if self.case is None:
            raise InvalidParameterError("entanglement needs --case")
        if not self.t or min(self.t) < 1:
            raise InvalidParameterError("entanglement needs times t >= 1")
        if not self.l_A:
            raise InvalidParameterError("entanglement needs a non-empty l_A list")
        if self.samples < entanglement.DEFAULT_BLOCKS:
            raise InvalidParameterError(f"need at least {entanglement.DEFAULT_BLOCKS} pairs")
        kind = _initial_kind(self.initial)
        for t in self.t:
            room = entanglement.Region.capacity(self.case, t, kind)
            if max(self.l_A) > room:
                raise InvalidParameterError(f"case {self.case} at t={t} has room for {room} sites, got l_A={max(self.l_A)}")

    def _validate_meanfield(self):
        if self.case is None and not self.t:
            raise InvalidParameterError("meanfield needs --t (density) or --case with --lA (entropy)")
        if self.case is not None and not self.l_A:
            raise InvalidParameterError("meanfield entropy needs a non-empty l_A list")
        if self.superposed and self.initial != "z1":
            raise InvalidParameterError("the superposed profile is defined for the z1 initial operator")

    def _validate_bounds(self):
        if self.initial not in ("z1", "z0z1"):
            raise InvalidParameterError("bounds are tabulated for z1 and z0z1 only")

    def _validate_coefficients(self):
        if self.case is None:
            raise InvalidParameterError("coefficients needs --case")

    def _validate_oracle_check(self):
        if self.L > oracle.MAX_SITES:
            raise InvalidParameterError(f"L={self.L} exceeds {oracle.MAX_SITES}")
        if len(self.t) > 1:
            raise InvalidParameterError("oracle-check takes a single time")
        t = self.t[0] if self.t else 5
        support = initial_support(_initial_kind(self.initial))
        left, right = _oracle_window(support, t, self.L)
        edges = light_cone_edges(support, t) if t > 0 else (min(support), max(support))
        if edges[0] < left or edges[1] > right:
            raise InvalidParameterError(f"light cone at t={t} needs {edges[1] - edges[0] + 1} sites, L={self.L}")


def _as_list(value):
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def _initial_kind(initial):
    if isinstance(initial, str):
        return {"z1": "Z1", "z0z1": "Z0Z1"}.get(initial.lower(), initial)
    return tuple(initial)


def _check_writable(path):
    if path is None:
        return
    parent = os.path.dirname(os.path.abspath(path)) or "."
    if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
        raise InvalidParameterError(f"cannot write to {path}")
    if os.path.isdir(path):
        raise InvalidParameterError(f"{path} is a directory")


# ---------------------------------------------------------------- parsing


def parse_int_list(text):
    """'4,8,16', '4..16' or '0..60:2' (inclusive ranges)."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            rng, _, step = part.partition(":")
            lo, hi = rng.split("..")
            out.extend(range(int(lo), int(hi) + 1, int(step) if step else 1))
        else:
            out.append(_parse_count(part))
    return out


def parse_float_list(text):
    return [float(p) for p in str(text).split(",") if p.strip()]


def _parse_count(text):
    """Integer, also in float notation such as 1e6."""
    try:
        return int(text)
    except ValueError:
        value = float(text)
        if not value.is_integer():
            raise InvalidParameterError(f"{text!r} is not an integer") from None
        return int(value)


def _parse_initial(text):
    if text.lower() in ("z1", "z0z1"):
        return text.lower()
    try:
        return parse_int_list(text)
    except ValueError:
        raise InvalidParameterError(f"initial must be z1, z0z1 or a site list, got {text!r}") from None


def _parse_window(text):
    values = parse_int_list(text.replace(":", ","))
    if ".." in text:
        values = [values[0], values[-1]]
    if len(values) != 2:
        raise InvalidParameterError(f"window must look like 'lo..hi', got {text!r}")
    return values


def build_parser():
    p = argparse.ArgumentParser(prog="dualmc", description="Operator spreading in random dual-unitary circuits.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--save-config", help="write the resolved config as JSON")
        sp.add_argument("--alpha", type=parse_float_list)
        sp.add_argument("--t", type=parse_int_list)
        sp.add_argument("--samples", type=_parse_count)
        sp.add_argument("--seed", type=_parse_count)
        sp.add_argument("--initial", type=_parse_initial)
        sp.add_argument("--format", dest="output_format", choices=("csv", "json"))
        sp.add_argument("--output", "-o", dest="output_path")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--chunk-size", dest="chunk_size", type=int)

    sp = sub.add_parser("density", help="Monte Carlo operator density")
    common(sp)
    sp.add_argument("--light-cone", dest="light_cone_depth", type=int, help="also write profiles this deep")
    sp.add_argument("--relaxation", dest="relaxation_x0", type=int, metavar="X0", help="also fit relaxation at X0")
    sp.add_argument("--fit-window", dest="relaxation_window", type=_parse_window)
    sp.add_argument("--layers-per-step", dest="layers_per_step", type=int)

    sp = sub.add_parser("entanglement", help="Monte Carlo second Renyi operator entanglement")
    common(sp)
    sp.add_argument("--case", type=int, choices=(1, 2, 3))
    sp.add_argument("--lA", dest="l_A", type=parse_int_list)
    sp.add_argument("--fit-window", dest="l_window", type=_parse_window)
    sp.add_argument("--max-stderr", dest="max_stderr", type=float, help="end the fit before errors exceed this")

    sp = sub.add_parser("meanfield", help="mean-field densities or entropies")
    common(sp)
    sp.add_argument("--case", type=int, choices=(1, 2, 3))
    sp.add_argument("--lA", dest="l_A", type=parse_int_list)
    sp.add_argument("--n", dest="renyi_n", type=parse_float_list)
    sp.add_argument("--superposed", action="store_true", default=None)

    sp = sub.add_parser("bounds", help="mean-field light-cone densities")
    common(sp)
    sp.add_argument("--k", type=parse_int_list)

    sp = sub.add_parser("oracle-check", help="sampler and estimators against exact evolution")
    common(sp)
    sp.add_argument("--L", type=int)
    sp.add_argument("--lA", dest="l_A", type=parse_int_list)
    sp.add_argument("--corrupt-transfer", dest="corrupt_transfer", action="store_true", default=None,
                    help=argparse.SUPPRESS)

    sp = sub.add_parser("coefficients", help="volume-law coefficients")
    common(sp)
    sp.add_argument("--case", type=int, choices=(1, 2, 3))
    sp.add_argument("--n", dest="renyi_n", type=parse_float_list)
    return p


def resolve_config(args) -> RunConfig:
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidParameterError(f"cannot read config {args.config}: {exc}") from None
        if data.get("command", args.command) != args.command:
            raise InvalidParameterError(f"config is for {data['command']!r}, not {args.command!r}")
    data["command"] = args.command
    skip = {"command", "config", "save_config", "verbose"}
    for key, value in vars(args).items():
        if key not in skip and value is not None:
            data[key] = value
    return RunConfig.from_dict(data).validate()


# ---------------------------------------------------------------- output


class Sink:
    """Main data stream plus optional side files named after ``output_path``."""

    def __init__(self, output_path):
        self.path = output_path

    def side_path(self, suffix):
        stem, ext = os.path.splitext(self.path)
        return f"{stem}_{suffix}"

    def write(self, text, path=None):
        path = path or self.path
        if path is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        with open(path, "w", newline="") as fh:
            fh.write(text)
        log.info("wrote %s", path)


def _csv_text(header, rows):
    buf = io.StringIO()
    write_rows(buf, header, rows)
    return buf.getvalue()


def _json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(type(obj).__name__)


def _emit_table(cfg, sink, header, rows, extra=None):
    if cfg.output_format == "csv":
        sink.write(_csv_text(header, rows))
    else:
        obj = {"rows": [dict(zip(header, r)) for r in rows]}
        if extra:
            obj.update(extra)
        sink.write(_json_text(obj))


# ---------------------------------------------------------------- commands


def run_density(cfg: RunConfig, sink: Sink):
    kind = _initial_kind(cfg.initial)
    multi = len(cfg.alpha) > 1
    header = (("alpha",) if multi else ()) + ("x", "t", "rho", "stderr")
    rows, lc_rows, fits, accs = [], [], [], []
    need_all = cfg.relaxation_x0 is not None
    record = sorted(set(cfg.t) | (set(range(max(cfg.t) + 1)) if need_all else set()))
    for a in cfg.alpha:
        t0 = time.time()
        acc = density.simulate_density(kind, a, record, cfg.samples, cfg.seed, cfg.threads, cfg.chunk_size)
        log.info("density alpha=%g: %d samples in %.1fs", a, cfg.samples, time.time() - t0)
        for t in sorted(set(cfg.t)):
            sites, rho, err = acc.profile(t)
            nz = np.flatnonzero(acc.counts[t])
            if nz.size:
                for i in range(nz[0], nz[-1] + 1):
                    rows.append(((a,) if multi else ()) + (int(sites[i]), t, float(rho[i]), float(err[i])))
        if cfg.light_cone_depth:
            for t in sorted(set(cfg.t)):
                if t == 0:
                    continue
                for side in ("left", "right"):
                    prof = density.extract_light_cone(acc, side, t, kind, cfg.light_cone_depth)
                    for d in range(cfg.light_cone_depth):
                        lc_rows.append((a, side, t, d, float(prof.values[d]), float(prof.stderr[d])))
        if need_all:
            accs.append((a, acc))
    _emit_table(cfg, sink, header, rows)
    if lc_rows:
        sink.write(_csv_text(("alpha", "side", "t", "d", "rho", "stderr"), lc_rows), sink.side_path("lightcone.csv"))
    for a, acc in accs:
        fit = density.fit_relaxation(acc, cfg.relaxation_x0, cfg.relaxation_window, cfg.layers_per_step)
        fits.append({
            "alpha": a, "x0": cfg.relaxation_x0, "rate": fit.rate, "amplitude": fit.amplitude,
            "window": list(fit.fit_window), "residual": fit.residual,
            "layers_per_step": fit.layers_per_step, "reference": meanfield.relaxation_rate(a),
        })
    if fits:
        sink.write(_json_text(fits), sink.side_path("relaxation.json"))


def run_entanglement(cfg: RunConfig, sink: Sink):
    kind = _initial_kind(cfg.initial)
    rows, fits = [], []
    sizes = sorted(set(cfg.l_A))
    for a in cfg.alpha:
        for t in sorted(set(cfg.t)):
            t0 = time.time()
            positive = [l for l in sizes if l > 0]
            S = dict.fromkeys(sizes, 0.0)
            err = dict.fromkeys(sizes, 0.0)
            est = None
            if positive:
                regions = [entanglement.Region(cfg.case, l, t, kind) for l in positive]
                est = entanglement.estimate_entropies(
                    kind, a, regions, cfg.samples, cfg.seed, threads=cfg.threads, chunk_size=cfg.chunk_size
                )
                s_pos, e_pos = est.resummed.entropy()
                S.update(zip(positive, s_pos.tolist()))
                err.update(zip(positive, e_pos.tolist()))
            log.info("entanglement case=%d alpha=%g t=%d: %d pairs in %.1fs", cfg.case, a, t, cfg.samples, time.time() - t0)
            rows.extend((cfg.case, a, t, l, S[l], err[l]) for l in sizes)
            if est is not None and len(positive) >= 3:
                window = cfg.l_window
                if window is None and cfg.max_stderr is not None:
                    window = entanglement.reliable_window(est.l_A, est.stderr, max_stderr=cfg.max_stderr)
                try:
                    fit = entanglement.fit_volume_law_jackknife(est, window)
                except InvalidParameterError as exc:
                    log.warning("no volume-law fit at alpha=%g t=%d: %s", a, t, exc)
                    continue
                fits.append({"alpha": a, "t": t, "case": cfg.case, **fit.as_dict()})
    header = ("case", "alpha", "t", "l_A", "S", "stderr")
    if cfg.output_format == "csv":
        sink.write(_csv_text(header, rows))
        if fits:
            fit_path = sink.side_path("fits.json") if sink.path else None
            sink.write(_json_text(fits), fit_path)
    else:
        _emit_table(cfg, sink, header, rows, {"fits": fits})


def run_meanfield(cfg: RunConfig, sink: Sink):
    if cfg.case is not None:
        rows = []
        t_label = cfg.t[0] if cfg.t else "inf"
        for a in cfg.alpha:
            for n in cfg.renyi_n:
                for l in sorted(set(cfg.l_A)):
                    rows.append((cfg.case, a, t_label, l, _mf_entropy(cfg.case, a, l, n, cfg), 0.0))
        header = ("case", "alpha", "t", "l_A", "S", "stderr")
        if len(cfg.renyi_n) > 1:
            rows = [r[:4] + (n,) + r[4:] for r, n in zip(rows, _repeat_n(cfg))]
            header = ("case", "alpha", "t", "l_A", "n", "S", "stderr")
        _emit_table(cfg, sink, header, rows)
        return
    kind = _initial_kind(cfg.initial)
    multi = len(cfg.alpha) > 1
    header = (("alpha",) if multi else ()) + ("x", "t", "rho", "stderr")
    rows = []
    for a in cfg.alpha:
        if cfg.superposed:
            fields = {t: meanfield.superposed_profile(a, t) for t in cfg.t}
        else:
            evolved = meanfield.mf_evolve(kind, a, max(cfg.t))
            fields = {t: evolved[t] for t in cfg.t}
        for t in sorted(fields):
            f = fields[t]
            nz = np.flatnonzero(f.values)
            if nz.size:
                for i in range(nz[0], nz[-1] + 1):
                    rows.append(((a,) if multi else ()) + (int(f.origin + i), t, float(f.values[i]), 0.0))
    _emit_table(cfg, sink, header, rows)


def _repeat_n(cfg):
    for _ in cfg.alpha:
        for n in cfg.renyi_n:
            for _ in sorted(set(cfg.l_A)):
                yield n


def _mf_entropy(case, alpha, l_A, n, cfg):
    if l_A == 0:
        return 0.0
    if case == 1:
        # Factorised sites at the right edge of a long-time single-site profile.
        t = cfg.t[0] if cfg.t else max(2 * l_A, 32)
        field_ = meanfield.superposed_profile(alpha, t)
        region = entanglement.Region(1, l_A, t, "Z1")
        return meanfield.mf_entropy_case1(field_, region, n)
    if case == 2:
        return meanfield.mf_entropy_case2(alpha, l_A, n)
    return meanfield.mf_entropy_case3(alpha, l_A, n)


def run_bounds(cfg: RunConfig, sink: Sink):
    rows = []
    for a in cfg.alpha:
        for k in cfg.k:
            if cfg.initial == "z0z1":
                even, odd = meanfield.lc_bounds_two_site(a, k)
            else:
                even, odd = meanfield.lc_bounds_single_site(a, k)
            rows.append((cfg.initial, a, k, 2 * k, even))
            rows.append((cfg.initial, a, k, 2 * k + 1, odd))
    _emit_table(cfg, sink, ("initial", "alpha", "k", "d", "rho"), rows)


def run_coefficients(cfg: RunConfig, sink: Sink):
    rows = []
    for n in cfg.renyi_n:
        for a in cfg.alpha:
            rows.append((cfg.case, n, a, meanfield.coefficient(cfg.case, n, a), meanfield.critical_alpha(cfg.case, n)))
    window = meanfield.transition_window(cfg.case)
    extra = {"transition_window": list(window) if window else None}
    _emit_table(cfg, sink, ("case", "n", "alpha", "coefficient", "alpha_c"), rows, extra)


# ---------------------------------------------------------------- oracle check


def _oracle_window(support, t, L):
    centre = (min(support) + max(support)) // 2
    origin = centre - (L - 1) // 2
    return origin, origin + L - 1


def corrupted_transfer(alpha):
    """Transfer matrix with the hopping of single particles biased; still column stochastic."""
    T = build_transfer_matrix(alpha).copy()
    shift = min(0.05, T[1, 2])
    T[1, 2] -= shift
    T[2, 2] += shift
    return T


def oracle_check(alpha=0.3, t=5, L=10, initial="Z1", samples=10**6, seed=0, l_A=(1, 2, 3),
                 transfer=None, threads=1, chunk_size=engine.DEFAULT_CHUNK_SIZE, tv_tol=0.01, n_sigma=3.0):
    """Sampler-vs-exact report for one parameter point.

    The sampler (optionally with a substituted ``transfer``) is compared with
    exact evolution under the true transfer matrix.
    """
    support = initial_support(initial)
    origin, _ = _oracle_window(support, t, L)
    exact = oracle.exact_evolve(oracle.ExactDistribution.point_mass(support, L, origin), alpha, t)
    geom, configs = engine.sample_final_configs(initial, alpha, t, samples, seed, threads, chunk_size, transfer)
    lo = origin - geom.origin
    inside = configs[:, lo : lo + L]
    leaked = int(configs.sum() - inside.sum())
    checks = []

    p_exact = np.clip(oracle.exact_density_profile(exact), 0.0, 1.0)
    p_mc = inside.mean(axis=0)
    sigma = np.sqrt(p_exact * (1 - p_exact) / samples)
    dev = np.abs(p_mc - p_exact)
    z = np.where(sigma > 1e-12, dev / np.maximum(sigma, 1e-12), np.where(dev < 1e-12, 0.0, np.inf))
    checks.append({"name": "density", "value": float(z.max()), "tolerance": n_sigma,
                   "passed": bool(z.max() <= n_sigma and leaked == 0)})

    codes = inside.astype(np.int64) @ (1 << np.arange(L - 1, -1, -1, dtype=np.int64))
    emp = np.bincount(codes, minlength=2**L) / samples
    tv = 0.5 * float(np.abs(emp - exact.flat()).sum())
    checks.append({"name": "tv_distance", "value": tv, "tolerance": tv_tol, "passed": bool(tv <= tv_tol)})

    for case in (1, 2, 3):
        sizes = [l for l in l_A if 0 < l <= entanglement.Region.capacity(case, t, initial)]
        if not sizes:
            continue
        regions = [entanglement.Region(case, l, t, initial) for l in sizes]
        est = entanglement.estimate_entropies(initial, alpha, regions, max(samples // 10, 1000), seed + 1,
                                              threads=threads, chunk_size=chunk_size, transfer=transfer)
        for i, region in enumerate(regions):
            purity = oracle.exact_purity(exact, region.sites)
            for name, acc in (("resummed", est.resummed), ("naive", est.naive)):
                err = float(acc.mean_stderr()[i])
                dev = abs(float(acc.mean()[i]) - purity)
                zval = dev / err if err > 0 else (0.0 if dev < 1e-12 else math.inf)
                checks.append({"name": f"purity_case{case}_lA{region.l_A}_{name}", "value": zval,
                               "tolerance": n_sigma, "passed": bool(zval <= n_sigma)})
    return {
        "alpha": alpha, "t": t, "L": L, "samples": samples, "seed": seed,
        "passed": all(c["passed"] for c in checks), "checks": checks,
    }


def run_oracle_check(cfg: RunConfig, sink: Sink):
    kind = _initial_kind(cfg.initial)
    t = cfg.t[0] if cfg.t else 5
    reports = []
    for a in cfg.alpha:
        transfer = corrupted_transfer(a) if cfg.corrupt_transfer else None
        reports.append(oracle_check(a, t, cfg.L, kind, cfg.samples, cfg.seed, cfg.l_A or (1, 2, 3),
                                    transfer, cfg.threads, cfg.chunk_size))
    report = {"passed": all(r["passed"] for r in reports), "reports": reports}
    sink.write(_json_text(report))
    return EXIT_OK if report["passed"] else EXIT_RUNTIME


RUNNERS = {
    "density": run_density,
    "entanglement": run_entanglement,
    "meanfield": run_meanfield,
    "bounds": run_bounds,
    "oracle-check": run_oracle_check,
    "coefficients": run_coefficients,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except InvalidParameterError as exc:
        print(f"dualmc: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SystemExit as exc:
        return exc.code
    logging.basicConfig(
        level=(logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)],
        format="%(levelname)s %(message)s", stream=sys.stderr,
    )
    try:
        cfg = resolve_config(args)
        if args.save_config:
            _check_writable(args.save_config)
            with open(args.save_config, "w") as fh:
                fh.write(_json_text(cfg.to_dict()))
    except InvalidParameterError as exc:
        print(f"dualmc: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        status = RUNNERS[cfg.command](cfg, Sink(cfg.output_path))
    except InvalidParameterError as exc:
        print(f"dualmc: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (FitWindowError, OSError, RuntimeError) as exc:
        print(f"dualmc: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return status or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
