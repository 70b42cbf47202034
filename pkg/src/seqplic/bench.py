"""Sample grids, sweeps over both positioners, aggregation and CSV output."""

from __future__ import annotations

import csv
import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cube import baseline_position_secondary
from .errors import NoConvergence
from .geometry import DEFAULT_ZERO_TOL, Polyhedron
from .oracle import oracle_truncated_volume
from .planes import DEFAULT_GAMMA_TOL, DegeneracyClass, degeneracy_class
from .positioning import DEFAULT_VOF_TOL, TopologyClass, fractions_admissible, position_sequential, primary_stage
from .shapes import shape_by_name

LINEAR_START = 1e-4
TOPOLOGIES = tuple(t.value for t in TopologyClass)
GENERAL_TOPOLOGIES = (TopologyClass.TRIPLE.value, TopologyClass.FULLY_WETTED.value, TopologyClass.NON_WETTED.value)
_TOPO_CODE = {name: i for i, name in enumerate(TOPOLOGIES)}

RECORD_DTYPE = np.dtype(
    [
        ("n1", np.int32),
        ("n2", np.int32),
        ("a1", np.int32),
        ("a2", np.int32),
        ("s_star", np.float64),
        ("t_star", np.float64),
        ("count_primary", np.int32),
        ("count", np.int32),
        ("topology", np.int8),
        ("residual_primary", np.float64),
        ("residual_secondary", np.float64),
        ("baseline_t", np.float64),
        ("baseline_count", np.int32),
        ("baseline_topology", np.int8),
        ("audited", np.bool_),
        ("audit_error", np.float64),
    ]
)


@dataclass(frozen=True)
class SampleGrid:
    normals: np.ndarray
    fractions: np.ndarray
    pairs: tuple[tuple[float, float], ...]
    eps1: float
    eps2: float

    @property
    def n_instances(self) -> int:
        return len(self.pairs) * len(self.normals) ** 2


def normal_set(m_normal: int) -> np.ndarray:
    """Unit normals on a (phi, theta) lattice over the whole sphere, poles counted once."""
    out = [(0.0, 0.0, 1.0)]
    for j in range(1, m_normal):
        theta = math.pi * j / m_normal
        for i in range(1, 2 * m_normal + 1):
            phi = math.pi * i / m_normal
            out.append((math.cos(phi) * math.sin(theta), math.sin(phi) * math.sin(theta), math.cos(theta)))
    out.append((0.0, 0.0, -1.0))
    return np.array(out)


def fraction_set(m_alpha: int, eps1: float = 1e-9, eps2: float = 1e-5) -> np.ndarray:
    """Linear fractions from 1e-4 to 1 - 1e-4 plus decade tails between eps1 and eps2 at both ends."""
    linear = LINEAR_START + np.arange(m_alpha) / (m_alpha - 1) * (1.0 - 2.0 * LINEAR_START)
    decades = range(round(math.log10(eps1)), round(math.log10(eps2)) + 1)
    low = [10.0**k for k in decades]
    high = [1.0 - 10.0**k for k in decades]
    high[0] = 1.0 - 2.0 * eps1
    return np.array(sorted(set(linear.tolist()) | set(low) | set(high)))


def generate_grid(m_normal: int = 6, m_alpha: int = 10, eps1: float = 1e-9, eps2: float = 1e-5) -> SampleGrid:
    if m_normal < 2 or m_alpha < 2:
        raise ValueError("grid resolutions must be at least 2")
    fr = fraction_set(m_alpha, eps1, eps2)
    pairs = tuple((float(x), float(y)) for x in fr for y in fr if fractions_admissible(x, y, eps1))
    return SampleGrid(normal_set(m_normal), fr, pairs, eps1, eps2)


@dataclass(frozen=True)
class RunConfig:
    shape: str
    method: str
    zero_tol: float = DEFAULT_ZERO_TOL
    vof_tol: float = DEFAULT_VOF_TOL
    gamma_tol: float = DEFAULT_GAMMA_TOL
    audit_fraction: float = 0.01
    seed: int = 0


@dataclass
class AggregateReport:
    grid: SampleGrid
    config: RunConfig
    records: np.ndarray
    defects: list[str] = field(default_factory=list)

    @property
    def methods(self) -> tuple[str, ...]:
        return ("proposed", "baseline") if self.config.method == "both" else (self.config.method,)

    def _cell_index(self) -> np.ndarray:
        return self.records["a1"].astype(np.int64) * len(self.grid.fractions) + self.records["a2"]

    def cells(self) -> list[tuple[int, int]]:
        fr = {v: i for i, v in enumerate(self.grid.fractions.tolist())}
        return [(fr[a], fr[b]) for a, b in self.grid.pairs]

    def _method_fields(self, method: str) -> tuple[str, str]:
        return ("count", "topology") if method == "proposed" else ("baseline_count", "baseline_topology")

    def _rows_for(self, method: str) -> np.ndarray:
        rec = self.records
        if method == "baseline":
            return rec[rec["baseline_topology"] >= 0]
        return rec[rec["topology"] >= 0]

    def table(self, method: str, topology: str) -> list[tuple[float, float, float | None, float, int]]:
        """Rows (alpha1, alpha2, N_av or None, incidence %, count) per fraction pair."""
        cf, tf = self._method_fields(method)
        rows = self._rows_for(method)
        code = _TOPO_CODE[topology]
        n_fr = len(self.grid.fractions)
        cell = rows["a1"].astype(np.int64) * n_fr + rows["a2"]
        total = np.bincount(cell, minlength=n_fr * n_fr)
        hit = rows[tf] == code
        n_hit = np.bincount(cell[hit], minlength=n_fr * n_fr)
        s_hit = np.bincount(cell[hit], weights=rows[cf][hit], minlength=n_fr * n_fr)
        out = []
        for i, j in self.cells():
            c = i * n_fr + j
            if total[c] == 0:
                continue
            nav = s_hit[c] / n_hit[c] if n_hit[c] else None
            out.append((float(self.grid.fractions[i]), float(self.grid.fractions[j]), nav, 100.0 * n_hit[c] / total[c], int(n_hit[c])))
        return out

    def class_average(self, method: str, topology: str | None = None) -> tuple[float | None, int]:
        cf, tf = self._method_fields(method)
        rows = self._rows_for(method)
        if topology is not None:
            rows = rows[rows[tf] == _TOPO_CODE[topology]]
        if len(rows) == 0:
            return None, 0
        return float(rows[cf].mean()), len(rows)

    def incidence(self, method: str = "proposed") -> dict[str, float]:
        _, tf = self._method_fields(method)
        rows = self._rows_for(method)
        counts = Counter(rows[tf].tolist())
        return {name: 100.0 * counts.get(code, 0) / len(rows) for name, code in _TOPO_CODE.items()}

    def general_both(self) -> np.ndarray:
        rec = self.records
        return rec[(rec["baseline_topology"] >= 0) & (rec["topology"] >= 0)]

    def mismatch_matrix(self) -> dict[tuple[str, str], int]:
        rows = self.general_both()
        counts = Counter(zip(rows["topology"].tolist(), rows["baseline_topology"].tolist()))
        return {(p, b): counts.get((_TOPO_CODE[p], _TOPO_CODE[b]), 0) for p in GENERAL_TOPOLOGIES for b in GENERAL_TOPOLOGIES}

    def mismatch_quota(self) -> float:
        rows = self.general_both()
        if len(rows) == 0:
            return 0.0
        return float(np.mean(rows["topology"] != rows["baseline_topology"]))

    def triple_comparison(self) -> list[tuple[float, float, float, float, int]]:
        """Per cell: mean counts of both methods over instances both call triple."""
        rows = self.general_both()
        code = _TOPO_CODE[TopologyClass.TRIPLE.value]
        rows = rows[(rows["topology"] == code) & (rows["baseline_topology"] == code)]
        n_fr = len(self.grid.fractions)
        cell = rows["a1"].astype(np.int64) * n_fr + rows["a2"]
        n = np.bincount(cell, minlength=n_fr * n_fr)
        sp = np.bincount(cell, weights=rows["count"], minlength=n_fr * n_fr)
        sb = np.bincount(cell, weights=rows["baseline_count"], minlength=n_fr * n_fr)
        out = []
        for i, j in self.cells():
            c = i * n_fr + j
            if n[c]:
                out.append((float(self.grid.fractions[i]), float(self.grid.fractions[j]), sp[c] / n[c], sb[c] / n[c], int(n[c])))
        return out

    def summary(self) -> dict[str, object]:
        rec = self.records
        out: dict[str, object] = {
            "shape": self.config.shape,
            "method": self.config.method,
            "normals": len(self.grid.normals),
            "fraction_pairs": len(self.grid.pairs),
            "instances": len(rec),
            "defects": len(self.defects),
        }
        for method in self.methods:
            avg, n = self.class_average(method)
            out[f"{method}_n_av"] = avg
            out[f"{method}_instances"] = n
            for topo in TOPOLOGIES:
                avg, n = self.class_average(method, topo)
                out[f"{method}_{topo}_n_av"] = avg
                out[f"{method}_{topo}_count"] = n
            counts = self._rows_for(method)[self._method_fields(method)[0]]
            out[f"{method}_max_count"] = int(counts.max()) if len(counts) else 0
        if "proposed" in self.methods:
            out["max_residual_primary"] = float(rec["residual_primary"].max()) if len(rec) else 0.0
            out["max_residual_secondary"] = float(rec["residual_secondary"].max()) if len(rec) else 0.0
            audited = rec[rec["audited"]]
            out["audited"] = len(audited)
            out["max_audit_error"] = float(audited["audit_error"].max()) if len(audited) else 0.0
        if self.config.method == "both":
            out["mismatch_quota"] = self.mismatch_quota()
            comp = self.triple_comparison()
            ratios = [b / p for _, _, p, b, _ in comp if p > 0]
            out["triple_worst_cell_ratio"] = max(ratios) if ratios else None
            out["triple_cells_proposed_exceeds_baseline"] = sum(1 for _, _, p, b, _ in comp if p > b)
        return out


def _audit_mask(seed: int, n1: int, size: int, fraction: float) -> np.ndarray:
    rng = np.random.default_rng([seed, n1])
    return rng.random(size) < fraction


def _sweep_primary_normal(args) -> tuple[np.ndarray, list[str]]:
    """All instances sharing one primary normal; caches truncations per fraction."""
    grid, config, P, i1 = args
    normals, fractions = grid.normals, grid.fractions
    fr_index = {v: k for k, v in enumerate(fractions.tolist())}
    n1 = normals[i1]
    by_a1: dict[float, list[float]] = {}
    for a1, a2 in grid.pairs:
        by_a1.setdefault(a1, []).append(a2)
    n_rows = len(grid.pairs) * len(normals)
    rec = np.zeros(n_rows, dtype=RECORD_DTYPE)
    rec["topology"] = -1
    rec["baseline_topology"] = -1
    audit = _audit_mask(config.seed, i1, n_rows, config.audit_fraction) if config.method != "baseline" else np.zeros(n_rows, bool)
    defects: list[str] = []
    row = 0
    for a1 in sorted(by_a1):
        primary = None
        if config.method != "baseline":
            try:
                primary = primary_stage(P, n1, a1, config.zero_tol, config.vof_tol)
            except NoConvergence as exc:
                defects.append(f"primary n1={n1.tolist()!r} alpha1={a1!r}: {exc}")
        for i2, n2 in enumerate(normals):
            general = degeneracy_class(n1, n2, config.gamma_tol) is DegeneracyClass.GENERAL
            for a2 in by_a1[a1]:
                r = rec[row]
                r["n1"], r["n2"], r["a1"], r["a2"] = i1, i2, fr_index[a1], fr_index[a2]
                if config.method != "baseline" and (primary is not None or not general):
                    try:
                        res = position_sequential(
                            P, n1, a1, n2, a2, config.zero_tol, config.vof_tol, grid.eps1, config.gamma_tol,
                            primary=primary if general else None,
                        )
                        r["s_star"], r["t_star"] = res.s_star, res.t_star
                        r["count_primary"], r["count"] = res.truncations_primary, res.truncations_secondary
                        r["topology"] = _TOPO_CODE[res.topology.value]
                        r["residual_primary"], r["residual_secondary"] = res.residual_primary, res.residual_secondary
                        if audit[row]:
                            vol = oracle_truncated_volume(P, [(-n1, -res.s_star), (n2, res.t_star)], config.zero_tol)
                            r["audited"] = True
                            r["audit_error"] = abs(vol / P.volume - a2)
                    except NoConvergence as exc:
                        defects.append(f"proposed n1={n1.tolist()!r} alpha1={a1!r} n2={n2.tolist()!r} alpha2={a2!r}: {exc}")
                if config.method != "proposed" and general:
                    try:
                        t, c, topo = baseline_position_secondary(n1, a1, n2, a2, eps=config.vof_tol, zero_tol=config.zero_tol)
                        r["baseline_t"], r["baseline_count"], r["baseline_topology"] = t, c, _TOPO_CODE[topo]
                    except NoConvergence as exc:
                        defects.append(f"baseline n1={n1.tolist()!r} alpha1={a1!r} n2={n2.tolist()!r} alpha2={a2!r}: {exc}")
                row += 1
    return rec, defects


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("PLICBENCH_THREADS", "1"))
    return max(1, threads)


def run_experiment(
    grid: SampleGrid,
    shape: str | Polyhedron = "cube",
    method: str = "proposed",
    threads: int | None = None,
    zero_tol: float = DEFAULT_ZERO_TOL,
    vof_tol: float = DEFAULT_VOF_TOL,
    audit_fraction: float = 0.01,
    seed: int = 0,
) -> AggregateReport:
    """Position every instance of the grid and collect per-instance records.

    Work is split by primary normal; results are concatenated in normal
    order, so the report does not depend on the number of workers.
    """
    if method not in ("proposed", "baseline", "both"):
        raise ValueError(f"unknown method {method!r}")
    if isinstance(shape, Polyhedron):
        P, name = shape, "custom"
    else:
        P, name = shape_by_name(shape), shape
    if method != "proposed" and name != "cube":
        raise ValueError("the baseline supports the cube only")
    config = RunConfig(name, method, zero_tol, vof_tol, DEFAULT_GAMMA_TOL, audit_fraction, seed)
    jobs = [(grid, config, P, i) for i in range(len(grid.normals))]
    workers = resolve_threads(threads)
    if workers == 1:
        parts = [_sweep_primary_normal(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_sweep_primary_normal, jobs))
    records = np.concatenate([p[0] for p in parts]) if parts else np.zeros(0, RECORD_DTYPE)
    defects = [d for p in parts for d in p[1]]
    return AggregateReport(grid, config, records, defects)


def _fmt(x) -> str:
    if x is None:
        return "x"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, np.integer):
        return str(int(x))
    return str(x)


TABLE_HEADER = ("alpha1", "alpha2", "n_av", "incidence_pct", "count")


def emit_report(report: AggregateReport, path: str | Path) -> list[Path]:
    """Write the CSV tables into directory `path` and return the file paths.

    Files: <method>_<topology>.csv with columns alpha1, alpha2, n_av,
    incidence_pct, count (n_av is "x" where the class never occurs);
    summary.csv (key, value); and, when both methods ran,
    mismatch_matrix.csv, mismatch_cells.csv and triple_comparison.csv.
    """
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create report directory {out}: {exc}") from exc
    written: list[Path] = []

    def write(name: str, header, rows) -> None:
        target = out / name
        try:
            with target.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                for r in rows:
                    w.writerow([_fmt(v) for v in r])
        except OSError as exc:
            raise OSError(f"cannot write {target}: {exc}") from exc
        written.append(target)

    for method in report.methods:
        topos = TOPOLOGIES if method == "proposed" else GENERAL_TOPOLOGIES
        for topo in topos:
            write(f"{method}_{topo}.csv", TABLE_HEADER, report.table(method, topo))
    if report.config.method == "both":
        mm = report.mismatch_matrix()
        write("mismatch_matrix.csv", ("proposed\\baseline",) + GENERAL_TOPOLOGIES,
              [(p,) + tuple(mm[(p, b)] for b in GENERAL_TOPOLOGIES) for p in GENERAL_TOPOLOGIES])
        rows = report.general_both()
        n_fr = len(report.grid.fractions)
        cell = rows["a1"].astype(np.int64) * n_fr + rows["a2"]
        tot = np.bincount(cell, minlength=n_fr * n_fr)
        bad = np.bincount(cell[rows["topology"] != rows["baseline_topology"]], minlength=n_fr * n_fr)
        cells = []
        for i, j in report.cells():
            c = i * n_fr + j
            if tot[c]:
                pct = 100.0 * bad[c] / tot[c] if bad[c] else None
                cells.append((float(report.grid.fractions[i]), float(report.grid.fractions[j]), int(bad[c]), int(tot[c]), pct))
        write("mismatch_cells.csv", ("alpha1", "alpha2", "mismatches", "instances", "mismatch_pct"), cells)
        write("triple_comparison.csv", ("alpha1", "alpha2", "proposed_n_av", "baseline_n_av", "count"),
              report.triple_comparison())
    write("summary.csv", ("key", "value"), list(report.summary().items()))
    if report.defects:
        write("defects.csv", ("defect",), [(d,) for d in report.defects])
    return written
