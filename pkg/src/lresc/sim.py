"""Monte Carlo logical-failure experiments.

Every trial draws its randomness from ``numpy.random.default_rng([seed, trial])``,
so results do not depend on how trials are split across worker processes, and
the same trial sees the same uniform draws at every grid point (higher p gives
a superset of the lower-p error events).

Code-capacity trials decode each sector once.  Phenomenological trials run
``cycles`` noisy syndrome rounds through a sliding-window decoder; after every
committed cycle the true syndrome of the residual error is decoded noiselessly
and the trial fails at the first cycle where that flags a logical error.
Windows near the end of a trial use look-ahead rounds drawn from the same
noise process, so every cycle is decoded with a full window.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gf2
from . import hgp as hg
from .bundle import code_fingerprint, content_hash
from .decoders.bp_osd import DEFAULT_ALPHA, DEFAULT_MAX_ITERS, DEFAULT_OSD_ORDER, BpOsdDecoder
from .decoders.matching import MatchingDecoder
from .decoders.window import SlidingWindowDecoder
from .noise import CODE_CAPACITY, PHENOMENOLOGICAL, NoiseModel, sample_error, sector_priors

__all__ = [
    "DecoderConfig",
    "Experiment",
    "GridPoint",
    "SimReport",
    "DecoderFault",
    "run_code_capacity",
    "run_phenomenological",
    "run",
    "break_even",
    "break_even_bracket",
    "CSV_FIELDS",
]

SECTORS = ("X", "Z")


class DecoderFault(RuntimeError):
    """A decoder raised while processing a specific trial."""


@dataclass(frozen=True)
class DecoderConfig:
    variant: str = "bp_osd"  # "bp_osd" | "mwpm"
    alpha: float = DEFAULT_ALPHA
    max_iters: int = DEFAULT_MAX_ITERS
    osd_order: int = DEFAULT_OSD_ORDER
    prior_mode: str = "model"

    def __post_init__(self):
        if self.variant not in ("bp_osd", "mwpm"):
            raise ValueError(f"unknown decoder variant {self.variant!r}")
        if self.prior_mode != "model":
            raise ValueError("only model-derived priors are supported")

    def options(self) -> dict:
        if self.variant == "mwpm":
            return {}
        return {"alpha": self.alpha, "max_iters": self.max_iters, "osd_order": self.osd_order}

    def to_dict(self) -> dict:
        d = {"variant": self.variant, "prior_mode": self.prior_mode}
        if self.variant == "bp_osd":
            d.update({"alpha": self.alpha, "max_iters": self.max_iters, "lambda": self.osd_order})
        return d


@dataclass(frozen=True, eq=False)
class Experiment:
    code: hg.CssCode
    noise_kind: str
    p_grid: tuple[float, ...]
    trials: int
    seed: int = 0
    cycles: int = 1
    window: int = 1
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    degree_mode: str = "total"
    code_ref: str = ""

    def __post_init__(self):
        object.__setattr__(self, "p_grid", tuple(float(p) for p in self.p_grid))
        if self.noise_kind not in (CODE_CAPACITY, PHENOMENOLOGICAL):
            raise ValueError(f"unknown noise kind {self.noise_kind!r}")
        if self.trials < 1 or self.cycles < 1 or self.window < 1:
            raise ValueError("trials, cycles and window must all be >= 1")
        if not self.p_grid or any(b <= a for a, b in zip(self.p_grid, self.p_grid[1:])):
            raise ValueError("p grid must be nonempty and strictly increasing")
        if any(not 0.0 <= p <= 1.0 for p in self.p_grid):
            raise ValueError("p grid values must lie in [0, 1]")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    @property
    def code_name(self) -> str:
        return self.code_ref or self.code.describe()

    def model(self, p: float) -> NoiseModel:
        return NoiseModel(self.noise_kind, p, self.degree_mode)

    def config_dict(self) -> dict:
        return {
            "code": {"ref": self.code_name, "fingerprint": code_fingerprint(self.code), "N": self.code.n_qubits, "K": self.code.K},
            "noise": {"kind": self.noise_kind, "degree_mode": self.degree_mode},
            "decoder": {**self.decoder.to_dict(), "window": self.window},
            "p_grid": list(self.p_grid),
            "trials": self.trials,
            "cycles": self.cycles,
            "seed": self.seed,
        }

    @property
    def config_hash(self) -> str:
        return content_hash(self.config_dict())


@dataclass(frozen=True)
class GridPoint:
    p: float
    trials: int
    failures: int
    failures_x: int
    failures_z: int
    cycles_run: int
    wall_time: float

    @property
    def rate(self) -> float:
        return self.failures / self.trials

    @property
    def std_error(self) -> float:
        f = self.rate
        return math.sqrt(f * (1 - f) / self.trials)

    @property
    def per_cycle_rate(self) -> float:
        return self.failures / self.cycles_run if self.cycles_run else 0.0

    @property
    def per_cycle_std_error(self) -> float:
        f = self.per_cycle_rate
        return math.sqrt(f * (1 - f) / self.cycles_run) if self.cycles_run else 0.0


CSV_FIELDS = [
    "code", "model", "decoder", "p", "w", "cycles", "trials", "failures", "failures_x", "failures_z",
    "failure_rate", "std_error", "cycles_run", "per_cycle_rate", "per_cycle_std_error", "seed", "config_hash",
]


@dataclass
class SimReport:
    experiment: Experiment
    points: list[GridPoint]

    @property
    def config_hash(self) -> str:
        return self.experiment.config_hash

    def rows(self) -> list[dict]:
        exp = self.experiment
        out = []
        for pt in self.points:
            out.append({
                "code": exp.code_name,
                "model": exp.noise_kind,
                "decoder": exp.decoder.variant,
                "p": repr(pt.p),
                "w": exp.window,
                "cycles": exp.cycles,
                "trials": pt.trials,
                "failures": pt.failures,
                "failures_x": pt.failures_x,
                "failures_z": pt.failures_z,
                "failure_rate": repr(pt.rate),
                "std_error": repr(pt.std_error),
                "cycles_run": pt.cycles_run,
                "per_cycle_rate": repr(pt.per_cycle_rate),
                "per_cycle_std_error": repr(pt.per_cycle_std_error),
                "seed": exp.seed,
                "config_hash": self.config_hash,
            })
        return out

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        if header:
            writer.writeheader()
        writer.writerows(self.rows())
        return buf.getvalue()

    def to_dict(self) -> dict:
        exp = self.experiment
        return {
            "config": exp.config_dict(),
            "config_hash": self.config_hash,
            "code_parameters": {"N": exp.code.n_qubits, "K": exp.code.K},
            "points": [
                {**row, "wall_time": pt.wall_time} for row, pt in zip(self.rows(), self.points)
            ],
        }

    def write(self, out_dir, stem: str | None = None) -> tuple[Path, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = stem or f"sim_{self.config_hash[:12]}"
        csv_path, json_path = out_dir / f"{stem}.csv", out_dir / f"{stem}.json"
        csv_path.write_text(self.to_csv())
        json_path.write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True))
        return csv_path, json_path


# ---------------------------------------------------------------- decoders per sector


def _sector_decoder(code, H, priors, cfg: DecoderConfig):
    if cfg.variant == "mwpm":
        return MatchingDecoder(H, priors)
    return BpOsdDecoder(H, priors, **cfg.options())


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def _fails(opposite: np.ndarray, residual: np.ndarray) -> bool:
    return bool(gf2.matmul(opposite, residual).any())


# ---------------------------------------------------------------- code capacity


def _code_capacity_chunk(exp: Experiment, p: float, start: int, stop: int) -> tuple[int, int, int]:
    code, model = exp.code, exp.model(p)
    fx = fz = both = 0
    errors = [sample_error(code, model, _trial_rng(exp.seed, t)) for t in range(start, stop)]
    res = {}
    for sector in SECTORS:
        H = code.check_matrix(sector)
        opposite = code.logical_ops("Z" if sector == "X" else "X")
        E = np.array([e.part(sector) for e in errors], dtype=np.uint8).reshape(len(errors), -1)
        dec = _sector_decoder(code, H, sector_priors(code, model, sector), exp.decoder)
        S = gf2.matmul(E, H.T)
        if isinstance(dec, MatchingDecoder):
            corr = dec.decode_batch(S)
        else:
            corr = np.zeros_like(E)
            for i, s in enumerate(S):
                if not s.any():
                    continue
                try:
                    corr[i] = dec.decode(s).correction
                except Exception as exc:  # noqa: BLE001
                    raise DecoderFault(f"trial {start + i} (p={p}, sector {sector}): {exc}") from exc
        res[sector] = gf2.matmul(E ^ corr, opposite.T).any(axis=1)
    fx, fz = int(res["X"].sum()), int(res["Z"].sum())
    both = int((res["X"] | res["Z"]).sum())
    return both, fx, fz


# ---------------------------------------------------------------- phenomenological


class _PhenomContext:
    def __init__(self, exp: Experiment, p: float):
        code, model = exp.code, exp.model(p)
        self.exp, self.code, self.model = exp, code, model
        self.H = {s: code.check_matrix(s) for s in SECTORS}
        self.opposite = {s: code.logical_ops("Z" if s == "X" else "X") for s in SECTORS}
        self.window = {}
        self.flag = {}
        for s in SECTORS:
            data = sector_priors(code, model, s)
            meas = model.check_rates(code, s)
            self.window[s] = SlidingWindowDecoder(self.H[s], exp.window, data, meas, exp.decoder.variant, **exp.decoder.options())
            self.flag[s] = _sector_decoder(code, self.H[s], data, exp.decoder)

    def trial(self, index: int) -> tuple[int, bool, bool]:
        """(cycles run, failed in X, failed in Z)."""
        exp, code = self.exp, self.code
        rng = _trial_rng(exp.seed, index)
        n = code.n_qubits
        acc = {s: np.zeros(n, dtype=np.uint8) for s in SECTORS}
        history = {s: [] for s in SECTORS}
        synd = {s: [] for s in SECTORS}
        committed = {s: np.zeros(n, dtype=np.uint8) for s in SECTORS}

        def next_round():
            e = sample_error(code, self.model, rng)
            for s in SECTORS:
                acc[s] = acc[s] ^ e.part(s)
                history[s].append(acc[s])
                synd[s].append(gf2.matmul(self.H[s], acc[s]) ^ e.flips(s))

        for t in range(exp.cycles):
            while len(synd["X"]) < t + exp.window:
                next_round()
            flags = {}
            for s in SECTORS:
                H = self.H[s]
                rounds = synd[s]
                det = [rounds[t] ^ gf2.matmul(H, committed[s])]
                det += [rounds[r] ^ rounds[r - 1] for r in range(t + 1, t + exp.window)]
                try:
                    committed[s] = committed[s] ^ self.window[s].commit(det, final=False)
                    residual = history[s][t] ^ committed[s]
                    check = gf2.matmul(H, residual)
                    if check.any():
                        residual = residual ^ self.flag[s].decode(check).correction
                except Exception as exc:  # noqa: BLE001
                    raise DecoderFault(f"trial {index} cycle {t} (p={self.model.p}, sector {s}): {exc}") from exc
                flags[s] = _fails(self.opposite[s], residual)
            if flags["X"] or flags["Z"]:
                return t + 1, flags["X"], flags["Z"]
        return exp.cycles, False, False


def _phenom_chunk(exp: Experiment, p: float, start: int, stop: int) -> tuple[int, int, int, int]:
    ctx = _PhenomContext(exp, p)
    fails = fx = fz = cycles = 0
    for t in range(start, stop):
        ran, x, z = ctx.trial(t)
        cycles += ran
        fx += x
        fz += z
        fails += x or z
    return fails, fx, fz, cycles


# ---------------------------------------------------------------- drivers


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, math.ceil(trials / max(1, workers * 4)))
    return [(a, min(trials, a + size)) for a in range(0, trials, size)]


def _run(exp: Experiment, chunk_fn, workers: int) -> SimReport:
    points = []
    for p in exp.p_grid:
        t0 = time.perf_counter()
        if workers > 1:
            spans = _chunks(exp.trials, workers)
            with ProcessPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(chunk_fn, [exp] * len(spans), [p] * len(spans), *zip(*spans)))
        else:
            parts = [chunk_fn(exp, p, 0, exp.trials)]
        total = np.sum(np.array(parts, dtype=np.int64), axis=0)
        fails, fx, fz = int(total[0]), int(total[1]), int(total[2])
        cycles_run = int(total[3]) if total.size > 3 else exp.trials
        points.append(GridPoint(p, exp.trials, fails, fx, fz, cycles_run, time.perf_counter() - t0))
    return SimReport(exp, points)


def run_code_capacity(exp: Experiment, workers: int = 1) -> SimReport:
    if exp.noise_kind != CODE_CAPACITY:
        raise ValueError("experiment is not a code-capacity experiment")
    return _run(exp, _code_capacity_chunk, workers)


def run_phenomenological(exp: Experiment, workers: int = 1) -> SimReport:
    if exp.noise_kind != PHENOMENOLOGICAL:
        raise ValueError("experiment is not a phenomenological experiment")
    return _run(exp, _phenom_chunk, workers)


def run(exp: Experiment, workers: int = 1) -> SimReport:
    fn = run_code_capacity if exp.noise_kind == CODE_CAPACITY else run_phenomenological
    return fn(exp, workers)


# ---------------------------------------------------------------- break-even


def break_even(report: SimReport, per_cycle: bool | None = None) -> list[tuple[float, float, bool]]:
    """(p, p_L, p_L < p) per grid point; phenomenological runs use the per-cycle rate."""
    if per_cycle is None:
        per_cycle = report.experiment.noise_kind == PHENOMENOLOGICAL
    out = []
    for pt in report.points:
        pl = pt.per_cycle_rate if per_cycle else pt.rate
        out.append((pt.p, pl, pl < pt.p))
    return out


def break_even_bracket(triplets) -> tuple[float, float] | None:
    """Adjacent grid points between which p_L crosses from below p to not below."""
    for (p0, _, below0), (p1, _, below1) in zip(triplets, triplets[1:]):
        if below0 and not below1:
            return p0, p1
    return None


def report_summary(report: SimReport) -> str:
    lines = [f"config {report.config_hash}  seed {report.experiment.seed}"]
    for pt in report.points:
        lines.append(
            f"  p={pt.p:g}  failures={pt.failures}/{pt.trials}  rate={pt.rate:.3e} +- {pt.std_error:.1e}"
            f"  per-cycle={pt.per_cycle_rate:.3e}  ({pt.wall_time:.1f}s)"
        )
    return "\n".join(lines)


def experiment_from_config(code, config: dict, code_ref: str = "") -> Experiment:
    """Build an Experiment from a plain JSON-style config dict."""
    dec = dict(config.get("decoder", {}))
    window = int(dec.pop("window", config.get("window", 1)))
    if "lambda" in dec:
        dec["osd_order"] = dec.pop("lambda")
    kind = config.get("noise", CODE_CAPACITY)
    return Experiment(
        code=code,
        noise_kind=kind,
        p_grid=tuple(config["p_grid"]),
        trials=int(config.get("trials", 10_000)),
        seed=int(config.get("seed", 0)),
        cycles=int(config.get("cycles", 20 if kind == PHENOMENOLOGICAL else 1)),
        window=window,
        decoder=DecoderConfig(**dec),
        degree_mode=config.get("degree_mode", "total"),
        code_ref=code_ref,
    )
