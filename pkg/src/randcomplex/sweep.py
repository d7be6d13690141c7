"""Monte Carlo sweeps over (n, c) with a theory column, and their CSV/JSON output.

Normalizations: f_{d-1}, f_d and beta_d of the core are divided by C(n, d);
shadow sizes by C(n, d+1).  Each trial draws its complex from its own
Philox stream keyed by (seed, n, c, trial), so results do not depend on
scheduling or on the thread count.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .collapse import RootedCollapser, c_shadow, collapse_to_core
from .homology import betti_d, r_shadow
from .linalg import FieldChoice
from .sampling import SampleConfig, make_rng, sample_binomial, substream_seed
from .thresholds import gamma_d, regime_densities, t_sequence

STATISTICS = ("core_f1", "core_f2", "betti", "c_shadow", "r_shadow",
              "collapsible_fraction", "gravel_fraction", "delta_k")
CSV_HEADER = ("d", "n", "c", "stat", "mean", "stderr", "theory", "trials")


@dataclass
class SweepConfig:
    d: int = 2
    n: list = field(default_factory=lambda: [100])
    c_min: float = 1.0
    c_max: float = 3.0
    c_step: float = 0.5
    trials: int = 5
    seed: int = 0
    stats: list = field(default_factory=lambda: ["core_f1", "core_f2"])
    field_kind: str = "prime"
    q: int = 4194301
    out: str | None = None
    format: str = "csv"
    k: int = 6
    roots: int = 200
    r_shadow_cap: int = 300
    force: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.c_step <= 0 or self.c_max < self.c_min:
            raise ValueError("c-grid must be nonempty with a positive step")
        bad = [s for s in self.stats if s not in STATISTICS]
        if bad:
            raise ValueError(f"unknown statistics {bad}; choose from {STATISTICS}")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        if not self.n:
            raise ValueError("n-list must be nonempty")
        if self.field_kind not in ("prime", "rational"):
            raise ValueError("field_kind must be prime or rational")

    @property
    def c_grid(self) -> list[float]:
        steps = int(math.floor((self.c_max - self.c_min) / self.c_step + 1e-9))
        return [round(self.c_min + i * self.c_step, 10) for i in range(steps + 1)]

    @property
    def field_choice(self) -> FieldChoice:
        return FieldChoice("prime", self.q) if self.field_kind == "prime" else FieldChoice("rational")

    @classmethod
    def from_mapping(cls, values: dict) -> "SweepConfig":
        """Build from string values, as read from a key=value file or the command line."""
        types = {f.name: f.type for f in fields(cls)}
        kw = {}
        for key, raw in values.items():
            if key not in types:
                raise ValueError(f"unknown config key {key!r}")
            if raw is None:
                continue
            ty = types[key]
            if not isinstance(raw, str):
                kw[key] = raw
            elif key == "n":
                kw[key] = [int(x) for x in raw.split(",") if x.strip()]
            elif key == "stats":
                kw[key] = [x.strip() for x in raw.split(",") if x.strip()]
            elif ty in ("int",):
                kw[key] = int(raw)
            elif ty == "float":
                kw[key] = float(raw)
            elif ty == "bool":
                kw[key] = raw.strip().lower() in ("1", "true", "yes", "on")
            else:
                kw[key] = raw
        return cls(**kw)


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{ln}: expected key = value")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


@dataclass(frozen=True)
class SweepRow:
    d: int
    n: int
    c: float
    stat: str
    mean: float
    stderr: float
    theory: float
    trials: int


def theory_value(stat: str, c: float, d: int, k: int = 6) -> float:
    if stat == "delta_k":
        if c == 0:
            return 0.0
        tk = t_sequence(c, d, max(k - 1, 0))[-1] if k >= 1 else 0.0
        return c * (1.0 - tk) ** d
    if stat in ("collapsible_fraction", "gravel_fraction"):
        if c >= gamma_d(d):
            return 0.0
        # number of boundary-of-simplex copies is asymptotically Poisson
        return math.exp(-c ** (d + 2) / math.factorial(d + 2)) if stat == "collapsible_fraction" else 1.0
    r = regime_densities(c, d)
    return {
        "core_f1": r.core_dminus1_density,
        "core_f2": r.core_d_density,
        "betti": r.betti_density,
        "c_shadow": r.shadow_density if c > gamma_d(d) else 0.0,
        "r_shadow": r.r_shadow_density,
    }[stat]


def trial_statistics(cfg: SweepConfig, n: int, c: float, trial: int) -> dict:
    d = cfg.d
    seed = substream_seed(cfg.seed, n, int(round(c * 1e6)))
    Y = sample_binomial(SampleConfig(n=n, d=d, c=c, seed=seed, trial=trial))
    res = collapse_to_core(Y)
    ridges, top = math.comb(n, d), math.comb(n, d + 1)
    out = {}
    for s in cfg.stats:
        if s == "core_f1":
            out[s] = res.core_dminus1_count / ridges
        elif s == "core_f2":
            out[s] = res.core.f_d / ridges
        elif s == "betti":
            out[s] = (betti_d(res.core, cfg.field_choice) if res.core.f_d else 0) / ridges
        elif s == "c_shadow":
            out[s] = c_shadow(Y).size / top
        elif s == "r_shadow":
            out[s] = r_shadow(Y, cfg.field_choice, seed=trial).size / top
        elif s == "collapsible_fraction":
            out[s] = float(res.is_collapsible)
        elif s == "gravel_fraction":
            out[s] = float(res.is_gravel)
        elif s == "delta_k":
            rng = make_rng(seed, trial, 1)
            taus = rng.choice(ridges, size=min(cfg.roots, ridges), replace=False)
            rc = RootedCollapser(Y)
            out[s] = float(np.mean([rc.degree(int(t), cfg.k) for t in taus]))
    return out


def run_sweep(cfg: SweepConfig) -> list[SweepRow]:
    if "r_shadow" in cfg.stats and max(cfg.n) > cfg.r_shadow_cap and not cfg.force:
        raise RuntimeError(
            f"r_shadow tests all C(n,{cfg.d + 1}) candidate faces; n={max(cfg.n)} exceeds "
            f"the cap {cfg.r_shadow_cap}. Pass force to run anyway.")
    rows = []
    for n in cfg.n:
        for c in cfg.c_grid:
            jobs = range(cfg.trials)
            if cfg.threads > 1:
                with ThreadPoolExecutor(cfg.threads) as ex:
                    per = list(ex.map(lambda t: trial_statistics(cfg, n, c, t), jobs))
            else:
                per = [trial_statistics(cfg, n, c, t) for t in jobs]
            for s in cfg.stats:
                vals = [p[s] for p in per]
                mean = math.fsum(vals) / len(vals)
                if len(vals) > 1:
                    var = math.fsum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
                    se = math.sqrt(var / len(vals))
                else:
                    se = 0.0
                rows.append(SweepRow(cfg.d, n, c, s, mean, se, theory_value(s, c, cfg.d, cfg.k), cfg.trials))
    return rows


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def emit(rows: list[SweepRow], fmt: str = "csv", path: str | None = None) -> str:
    """Serialize rows; also write them to ``path`` when given."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([_fmt(getattr(r, h)) for h in CSV_HEADER])
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps([asdict(r) for r in rows], indent=1) + "\n"
    else:
        raise ValueError("format must be csv or json")
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def read_rows(text: str, fmt: str = "csv") -> list[SweepRow]:
    if fmt == "json":
        return [SweepRow(**r) for r in json.loads(text)]
    reader = csv.DictReader(io.StringIO(text))
    out = []
    for r in reader:
        out.append(SweepRow(int(r["d"]), int(r["n"]), float(r["c"]), r["stat"], float(r["mean"]),
                            float(r["stderr"]), float(r["theory"]), int(r["trials"])))
    return out

