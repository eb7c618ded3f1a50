"""Reproducible experiments: specs in, CSV data series and JSON reports out."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import classical, machine, stats
from .album import AlbumConfig, AlbumError, Display, display_from_stickers, get_preset, load_config
from .mixing import MixingStrategy

# Pairwise duplicates between ten Amici displays (last three serial digits),
# upper triangle row by row.
TABLE1_SERIALS = ["216", "217", "218", "219", "220", "221", "526", "530", "531", "533"]
_TABLE1_UPPER = [
    [136, 166, 140, 127, 24, 148, 96, 141, 143],
    [146, 173, 151, 156, 135, 149, 121, 168],
    [169, 148, 141, 144, 136, 158, 175],
    [152, 170, 144, 155, 171, 162],
    [157, 130, 149, 193, 210],
    [156, 210, 159, 155],
    [143, 24, 90],
    [170, 122],
    [229],
]


def _table1_matrix() -> List[List[int]]:
    k = len(TABLE1_SERIALS)
    out = [[0] * k for _ in range(k)]
    for a, row in enumerate(_TABLE1_UPPER):
        for offset, value in enumerate(row):
            b = a + 1 + offset
            out[a][b] = out[b][a] = value
    return out


TABLE1_MATRIX = _table1_matrix()

# Duplicates counted in three purchased displays (two WM 2014 displays
# and one east-European one of the same series).
OWN_DISPLAY_DUPLICATES = [73, 98, 111]

EXIT_OK, EXIT_EXPECTATION, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class IngestError(ValueError):
    """Malformed or out-of-range row in an ingested display file."""


def data_path(name: str) -> Path:
    return Path(str(resources.files("stickerpack") / "data" / name))


def resolve_config(preset: Optional[str] = None, config: Optional[str] = None) -> AlbumConfig:
    if config:
        return load_config(config)
    return get_preset(preset or "amici")


# ---------------------------------------------------------------- file formats

def ingest_displays(path, cfg: Optional[AlbumConfig] = None, packet_size: Optional[int] = None) -> List[Display]:
    """Read displays from CSV rows ``display_serial,position,sticker_id``.

    Displays keep their order of first appearance; stickers are ordered by
    position. With ``cfg`` every id is checked against [1, B].
    """
    path = Path(path)
    if packet_size is None:
        packet_size = cfg.packet_size if cfg else 1
    streams = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return []
        if [h.strip() for h in header] != ["display_serial", "position", "sticker_id"]:
            raise IngestError(f"{path}:1: expected header display_serial,position,sticker_id")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise IngestError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            serial = row[0].strip()
            try:
                position, sticker = int(row[1]), int(row[2])
            except ValueError:
                raise IngestError(f"{path}:{lineno}: position and sticker_id must be integers") from None
            if not serial:
                raise IngestError(f"{path}:{lineno}: empty display_serial")
            if sticker < 1 or (cfg is not None and sticker > cfg.total_stickers):
                upper = cfg.total_stickers if cfg else "B"
                raise IngestError(f"{path}:{lineno}: sticker_id {sticker} outside [1, {upper}]")
            slots = streams.setdefault(serial, {})
            if position in slots:
                raise IngestError(f"{path}:{lineno}: position {position} repeated in display {serial}")
            slots[position] = sticker
    return [
        display_from_stickers([slots[p] for p in sorted(slots)], packet_size, serial)
        for serial, slots in streams.items()
    ]


def write_displays_csv(displays, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["display_serial", "position", "sticker_id"])
        for index, display in enumerate(displays, start=1):
            serial = display.serial if display.serial is not None else str(index)
            for pos, x in enumerate(display.stickers, start=1):
                writer.writerow([serial, pos, x])


def write_packets_csv(packets, path) -> None:
    """One row per packet: tick, belt, then the sticker ids."""
    width = max((len(p) for p in packets), default=0)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tick", "belt"] + [f"sticker_{i + 1}" for i in range(width)])
        for p in packets:
            writer.writerow([p.tick, p.belt, *p.stickers])


def read_packets_csv(path):
    from .album import Packet

    packets = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return packets
        if header[:2] != ["tick", "belt"]:
            raise IngestError(f"{path}:1: expected header starting with tick,belt")
        for lineno, row in enumerate(reader, start=2):
            try:
                tick, belt, *ids = (int(v) for v in row)
            except ValueError:
                raise IngestError(f"{path}:{lineno}: non-integer field") from None
            packets.append(Packet(tuple(ids), source="machine", belt=belt, tick=tick))
    return packets


def write_series_csv(path, columns: dict) -> None:
    names = list(columns)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in zip(*columns.values()):
            writer.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(round(v, 10))
    return v


# ---------------------------------------------------------------- specs and reports

@dataclass
class ExperimentSpec:
    name: str
    kind: str
    preset: Optional[str] = "amici"
    config: Optional[str] = None
    model: str = "classical"
    mix: str = "iid"
    orientation: str = "descending"
    policy: str = "round-robin"
    replicates: int = 100_000
    seed: int = 0
    params: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    expectations: List[dict] = field(default_factory=list)
    note: str = ""

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentSpec":
        unknown = set(raw) - set(cls.__dataclass_fields__)
        if unknown:
            raise AlbumError(f"unknown experiment spec keys {sorted(unknown)}")
        return cls(**raw)

    @classmethod
    def load(cls, name_or_path: str) -> "ExperimentSpec":
        path = Path(name_or_path)
        if not path.suffix:
            path = data_path(f"specs/{name_or_path}.json")
            if not path.exists():
                raise AlbumError(f"no bundled spec named {name_or_path!r}; try one of {bundled_specs()}")
        with path.open() as fh:
            return cls.from_dict(json.load(fh))

    def album(self) -> AlbumConfig:
        return resolve_config(self.preset, self.config)

    def to_dict(self) -> dict:
        return asdict(self)


def bundled_specs() -> List[str]:
    return sorted(p.stem for p in data_path("specs").glob("*.json"))


@dataclass
class ExperimentReport:
    spec: dict
    statistics: dict = field(default_factory=dict)
    checks: List[dict] = field(default_factory=list)
    outputs: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def check(self, statistic: str, value, lo=None, hi=None, criterion: str = "") -> bool:
        ok = (lo is None or value >= lo) and (hi is None or value <= hi)
        self.checks.append(
            {"statistic": statistic, "value": value, "min": lo, "max": hi,
             "passed": bool(ok), "criterion": criterion}
        )
        return ok

    def to_dict(self) -> dict:
        return {"spec": self.spec, "statistics": self.statistics, "checks": self.checks,
                "outputs": self.outputs, "passed": self.passed}

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        if math.isinf(obj) or math.isnan(obj):
            return str(obj)
        return round(obj, 10)
    return obj


def _lookup(statistics: dict, dotted: str):
    value = statistics
    for part in dotted.split("."):
        value = value[int(part)] if isinstance(value, list) else value[part]
    return value


def _describe(values: np.ndarray) -> dict:
    values = np.asarray(values, dtype=np.float64)
    out = {
        "count": int(values.size),
        "mean": float(values.mean()),
        "std": float(values.std(ddof=1)) if values.size > 1 else 0.0,
        "min": float(values.min()),
        "max": float(values.max()),
    }
    for q in (0.025, 0.5, 0.975):
        out[f"q{q:g}"] = float(np.quantile(values, q, method="inverted_cdf"))
    return out


# ---------------------------------------------------------------- experiment kinds

def _collection_curve(spec, cfg, report, outdir):
    rng = np.random.default_rng(spec.seed)
    target = spec.params.get("target", cfg.buyback_target)
    run = classical.simulate_until_target(cfg, target, rng)
    window = spec.params.get("window", 10)
    dups = run.duplicates_per_packet
    avg = stats.moving_average(dups, window)
    padded = [float("nan")] * (len(dups) - len(avg)) + avg
    packets = [p for p, _ in run.distinct_curve[1:]]
    report.statistics.update(
        target=target,
        completion_card_count=run.completion_card_count,
        packets_opened=len(dups),
        expected_cards_to_target=classical.expected_cards_to_target(cfg.total_stickers, target),
        mean_duplicates_per_packet=float(np.mean(dups)) if dups else 0.0,
    )
    if "curve" in spec.outputs:
        path = Path(outdir) / spec.outputs["curve"]
        write_series_csv(path, {
            "packet": packets,
            "cards": [p * cfg.packet_size for p in packets],
            "distinct": [d for _, d in run.distinct_curve[1:]],
            "duplicates_in_packet": dups,
            f"moving_average_{window}": padded,
        })
        report.outputs["curve"] = str(path)


def _completion_histogram(spec, cfg, report, outdir):
    rng = np.random.default_rng(spec.seed)
    target = spec.params.get("target", cfg.buyback_target)
    counts = classical.completion_card_counts(cfg, target, spec.replicates, rng)
    summary = _describe(counts)
    summary["skewness"] = stats.sample_skewness(counts)
    summary["analytic_mean"] = classical.expected_cards_to_target(cfg.total_stickers, target)
    summary["analytic_std"] = classical.std_cards_to_target(cfg.total_stickers, target)
    report.statistics["completion"] = summary
    report.statistics["target"] = target
    if "histogram" in spec.outputs:
        values, freq = np.unique(counts, return_counts=True)
        path = Path(outdir) / spec.outputs["histogram"]
        write_series_csv(path, {"cards": values.tolist(), "runs": freq.tolist()})
        report.outputs["histogram"] = str(path)


def display_interval(cfg: AlbumConfig, model: str, replicates: int, seed: int, displays: int = 1):
    """Random-model interval for duplicates in one display (or a pair of them)."""
    D = cfg.display_size
    if model == "classical":
        sampler = classical.classical_display_sampler(cfg.total_stickers, cfg.packet_size,
                                                      cfg.display_packets * displays)
    elif model == "duplicate-free":
        sampler = classical.duplicate_free_display_sampler(cfg.total_stickers, D, displays)
    else:
        raise AlbumError(f"unknown random model {model!r}")
    name = f"duplicates in {displays} x {D} stickers ({model})"
    return stats.monte_carlo_interval(stats.duplicates_per_row, sampler, replicates, 0.95, seed, name)


def _display_intervals(spec, cfg, report, outdir):
    cases = spec.params.get("cases", [])
    for case in cases:
        case_cfg = get_preset(case["preset"])
        interval = display_interval(case_cfg, case.get("model", spec.model), spec.replicates,
                                    case.get("seed", spec.seed), case.get("displays", 1))
        report.statistics[case["label"]] = interval.to_dict()


def _machine_displays(spec, cfg, report, outdir):
    strategy = MixingStrategy.parse(spec.mix, spec.seed)
    n_displays = spec.params.get("displays", 1000)
    batch = machine.produce_batch(cfg, strategy, n_displays * cfg.display_packets, spec.orientation)
    dups = stats.duplicates_per_row(machine.display_arrays(batch, cfg, spec.policy))
    report.statistics["display_duplicates"] = _describe(dups)
    report.statistics["displays_with_duplicates"] = int((dups > 0).sum())


def mixing_sweep(cfg, swap_counts, displays, seed, orientation="descending", policy="round-robin"):
    """Mean duplicates per display under LocalSwap mixing at each swap count.

    The swap window spans the whole feed, so large swap counts approach a
    uniformly shuffled feed.
    """
    packets = displays * cfg.display_packets
    length = machine.ticks_for_packets(cfg, packets)
    rows = []
    for count in swap_counts:
        strategy = MixingStrategy("swap", seed, swap_count=int(count), window=length - 1)
        batch = machine.produce_batch(cfg, strategy, packets, orientation)
        dups = stats.duplicates_per_row(machine.display_arrays(batch, cfg, policy))
        rows.append({"swap_count": int(count), "mean": float(dups.mean()),
                     "std": float(dups.std(ddof=1)), "displays": int(dups.size)})
    return rows


def _mixing_sweep(spec, cfg, report, outdir):
    displays = spec.params.get("displays", 10_000)
    length = machine.ticks_for_packets(cfg, displays * cfg.display_packets)
    swap_counts = spec.params.get("swap_counts")
    if swap_counts is None:
        swap_counts = [round(f * length) for f in spec.params.get("swap_fractions", [0, 0.01, 0.1, 1, 10])]
    rows = mixing_sweep(cfg, swap_counts, displays, spec.seed, spec.orientation, spec.policy)
    means = [r["mean"] for r in rows]
    report.statistics["sweep"] = rows
    report.statistics["monotone"] = int(all(b >= a for a, b in zip(means, means[1:])))
    report.statistics["final_mean"] = means[-1]
    report.statistics["classical_expected_duplicates"] = classical.expected_duplicates_in_display(
        cfg.total_stickers, cfg.display_size)
    report.statistics["machine_iid_expected_duplicates"] = machine.expected_iid_display_duplicates(cfg, spec.policy)
    if "sweep" in spec.outputs:
        path = Path(outdir) / spec.outputs["sweep"]
        write_series_csv(path, {k: [r[k] for r in rows] for k in rows[0]})
        report.outputs["sweep"] = str(path)


def analyze_displays(displays, cfg: AlbumConfig, replicates: int, seed: int, closed: bool = True) -> dict:
    """Duplicate, run and pairwise statistics of observed displays against random models."""
    out = {"displays": []}
    for d in displays:
        summary = stats.count_duplicates(d.stickers)
        out["displays"].append({
            "serial": d.serial,
            "stickers": summary.total,
            "distinct": summary.distinct,
            "duplicates": summary.duplicates,
            "longest_run": stats.longest_consecutive_run(d.stickers),
            "longest_run_either_direction": stats.longest_consecutive_run(d.stickers, both_directions=True),
        })
    single = display_interval(cfg, "classical", replicates, seed)
    out["single_display_interval"] = single.to_dict()
    out["single_display_significant"] = [
        not single.contains(d["duplicates"], closed) for d in out["displays"]
    ]
    if len(displays) >= 2:
        pair = display_interval(cfg, "duplicate-free", replicates, seed + 1, displays=2)
        matrix = stats.pairwise_duplicate_matrix(displays)
        mask = stats.significant_cells(matrix, pair, closed)
        off = matrix[np.triu_indices(len(displays), k=1)]
        out.update(
            pair_interval=pair.to_dict(),
            serials=[d.serial for d in displays],
            pairwise_matrix=matrix,
            significance_matrix=mask.astype(int),
            significance_count=int(mask.sum()),
            pairs=int(off.size),
            pairwise_min=int(off.min()),
            pairwise_max=int(off.max()),
        )
    return out


def _display_analysis(spec, cfg, report, outdir):
    source = spec.params.get("displays", "table1_displays.csv")
    path = Path(source) if Path(source).exists() else data_path(source)
    displays = ingest_displays(path, cfg)
    closed = spec.params.get("closed", True)
    report.statistics.update(analyze_displays(displays, cfg, spec.replicates, spec.seed, closed))
    if spec.params.get("published_table1", False):
        published = np.array(TABLE1_MATRIX)
        pair = stats.MonteCarloInterval(**report.statistics["pair_interval"])
        off = published[np.triu_indices(len(published), k=1)]
        report.statistics["published_table1"] = {
            "significance_count": stats.significance_count(published, pair, closed),
            "significance_count_reference_interval": stats.significance_count(
                published, stats.MonteCarloInterval(144, 168), closed),
            "min": int(off.min()),
            "max": int(off.max()),
        }
        ingested = report.statistics.get("pairwise_matrix")
        if ingested is not None:
            report.statistics["published_table1"]["cells_matching_ingested"] = int(
                (np.asarray(ingested)[np.triu_indices(len(published), k=1)] == off).sum())


def _own_displays(spec, cfg, report, outdir):
    observed = spec.params.get("observed", OWN_DISPLAY_DUPLICATES)
    interval = display_interval(cfg, spec.model, spec.replicates, spec.seed)
    report.statistics.update(
        observed=observed,
        observed_mean=float(np.mean(observed)),
        expected=classical.expected_duplicates_in_display(cfg.total_stickers, cfg.display_size),
        interval=interval.to_dict(),
        outside_interval=sum(not interval.contains(v) for v in observed),
    )


def _run_lengths(spec, cfg, report, outdir):
    rng = np.random.default_rng(spec.seed)
    size = spec.params.get("stream_length", cfg.display_size)
    batch = spec.params.get("batch", 10_000)
    runs = []
    for start in range(0, spec.replicates, batch):
        k = min(batch, spec.replicates - start)
        if spec.model == "permutation":
            streams = np.argsort(rng.random((k, cfg.total_stickers)), axis=1)[:, :size] + 1
        else:
            streams = classical.draw_packets_bulk(
                cfg.total_stickers, cfg.packet_size, k * (size // cfg.packet_size), rng).reshape(k, -1)
        runs.append(stats.longest_runs_per_row(streams))
    runs = np.concatenate(runs)
    report.statistics["longest_run"] = _describe(runs)
    report.statistics["longest_run_q0.95"] = float(np.quantile(runs, 0.95, method="inverted_cdf"))


KINDS = {
    "collection-curve": _collection_curve,
    "completion-histogram": _completion_histogram,
    "display-intervals": _display_intervals,
    "machine-displays": _machine_displays,
    "mixing-sweep": _mixing_sweep,
    "display-analysis": _display_analysis,
    "own-displays": _own_displays,
    "run-lengths": _run_lengths,
}


def run(spec: ExperimentSpec, outdir=".") -> ExperimentReport:
    """Execute a spec, write its data outputs under ``outdir`` and evaluate its expectations."""
    if spec.kind not in KINDS:
        raise AlbumError(f"unknown experiment kind {spec.kind!r}; choose from {sorted(KINDS)}")
    cfg = spec.album()
    Path(outdir).mkdir(parents=True, exist_ok=True)
    report = ExperimentReport(spec=spec.to_dict())
    KINDS[spec.kind](spec, cfg, report, outdir)
    for exp in spec.expectations:
        value = _lookup(report.statistics, exp["statistic"])
        report.check(exp["statistic"], value, exp.get("min"), exp.get("max"), exp.get("criterion", ""))
    if "report" in spec.outputs:
        path = Path(outdir) / spec.outputs["report"]
        report.outputs["report"] = str(path)
        path.write_text(report.to_json() + "\n")
    return report
