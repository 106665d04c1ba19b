"""Path-length anomaly scoring.

Each point is pushed by the mean shift iteration to convergence under one
fixed KDE; the total distance traveled is its anomaly score.  Points far
from the bulk travel a long way to reach a mode, points inside the bulk
barely move.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import DensityModel, PointCloud, fit, select_bandwidth_scv
from .shift import ShiftOperator, ShiftTrace, _default_tol


@dataclass(frozen=True)
class AnomalyReport:
    """Scores, descending ranking, convergence flags, optional paths."""

    scores: np.ndarray
    ranking: np.ndarray
    converged: np.ndarray
    traces: list[ShiftTrace] | None = None

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        ranking = np.asarray(self.ranking, dtype=np.int64)
        conv = np.asarray(self.converged, dtype=bool)
        if scores.ndim != 1 or scores.size == 0:
            raise ValueError("scores must be a nonempty vector")
        if scores.min() < 0.0:
            raise ValueError("scores are path lengths and cannot be negative")
        if ranking.shape != scores.shape or conv.shape != scores.shape:
            raise ValueError("scores, ranking, converged must be congruent")
        if not np.array_equal(np.sort(ranking), np.arange(scores.size)):
            raise ValueError("ranking must be a permutation of point indices")
        if self.traces is not None and len(self.traces) != scores.size:
            raise ValueError("need one trace per point")
        for name, arr in (("scores", scores), ("ranking", ranking), ("converged", conv)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __len__(self):
        return self.scores.size

    def to_dict(self) -> dict:
        return {
            "n_points": int(self.scores.size),
            "scores": self.scores.tolist(),
            "ranking": self.ranking.tolist(),
            "converged": self.converged.tolist(),
            "n_nonconverged": int((~self.converged).sum()),
        }

    def traces_to_csv(self, path) -> None:
        """Write retained paths as rows of (point, step, coordinates)."""
        if self.traces is None:
            raise ValueError("report was built without traces")
        dim = self.traces[0].path.shape[1]
        cols = ",".join(f"x{j}" for j in range(dim))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"point,step,{cols}\n")
            for i, trace in enumerate(self.traces):
                for s, row in enumerate(trace.path):
                    coords = ",".join("%.17g" % v for v in row)
                    fh.write(f"{i},{s},{coords}\n")


def anomaly_scores(data, model: DensityModel | None = None, tol=None,
                   max_iter: int = 500, keep_traces: bool = False) -> AnomalyReport:
    """Score every point by its total mean shift path length.

    The iteration per point matches shift_until_converged against the fixed
    `model` (default: KDE on `data` itself with an SCV bandwidth); points are
    advanced together, each dropping out once its step length falls under
    tol.  Points still moving after max_iter steps are flagged unconverged
    and keep their partial-path score: a long wandering path is itself
    evidence of anomaly.
    """
    pts = data.points if isinstance(data, PointCloud) else PointCloud(data).points
    if model is None:
        model = fit(pts, select_bandwidth_scv(pts))
    op = ShiftOperator(model)
    if pts.shape[1] != op.dim:
        raise ValueError(f"data dimension {pts.shape[1]} != model dimension {op.dim}")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if tol is None:
        tol = _default_tol(op)
    tol = float(tol)
    if tol <= 0.0:
        raise ValueError("tol must be positive")

    n = pts.shape[0]
    cur = pts.copy()
    converged = np.zeros(n, dtype=bool)
    end_step = np.zeros(n, dtype=np.int64)
    history = [cur.copy()] if keep_traces else None
    step_records = []
    active = np.arange(n)
    for it in range(1, max_iter + 1):
        nxt = op.step(cur[active])
        lengths = np.linalg.norm(nxt - cur[active], axis=1)
        record = np.zeros(n)
        record[active] = lengths
        step_records.append(record)
        cur[active] = nxt
        end_step[active] = it
        if keep_traces:
            history.append(cur.copy())
        done = lengths < tol
        converged[active[done]] = True
        active = active[~done]
        if active.size == 0:
            break

    # sum each point's own step-length vector, matching the reduction a
    # per-point trace would apply
    length_matrix = np.stack(step_records)
    scores = np.array([
        float(np.ascontiguousarray(length_matrix[: end_step[i], i]).sum())
        for i in range(n)
    ])

    traces = None
    if keep_traces:
        stack = np.stack(history)  # (steps+1, n, d)
        traces = [
            ShiftTrace(path=stack[: end_step[i] + 1, i, :], converged=bool(converged[i]))
            for i in range(n)
        ]
    ranking = np.argsort(-scores, kind="stable")
    return AnomalyReport(scores, ranking, converged, traces)


def top_k(report: AnomalyReport, k: int) -> np.ndarray:
    """Indices of the k highest scores, ties broken by lower index."""
    k = int(k)
    if not 0 <= k <= len(report):
        raise ValueError(f"k must be in 0..{len(report)}")
    return report.ranking[:k].copy()
