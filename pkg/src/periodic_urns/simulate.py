"""Seeded Monte Carlo of periodic Polya urns.

Reproducibility contract: replication j consumes exactly the uniform stream of
a Philox generator keyed by (seed, j), one variate per step, compared as
``u * total_balls < black_count``.  Because every replication owns its
counter-based stream, the result of an experiment depends only on
(spec, n, reps, seed); the worker count and the chunked vectorized execution
cannot change a single bit of it.

Replications are embarrassingly parallel: chunks of replication indices are
evolved in numpy lockstep and merged in index order, optionally across
processes.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidParams
from .urn import UrnSpec, YoungPolyaFamily

__all__ = [
    "Trajectory",
    "EmpiricalSample",
    "replication_stream",
    "simulate_urn",
    "run_experiment",
    "normalize",
]

_CHUNK_TARGET_ELEMS = 8_000_000  # uniforms held in memory per chunk (~64 MB)


def replication_stream(seed: int, rep: int) -> np.random.Generator:
    """The RNG stream owned by replication ``rep`` of a run seeded ``seed``."""
    if not 0 <= seed < 2**64:
        raise InvalidParams(f"seed must fit in an unsigned 64-bit integer, got {seed}")
    if rep < 0:
        raise InvalidParams(f"replication index must be >= 0, got {rep}")
    return np.random.Generator(np.random.Philox(key=np.array([seed, rep], dtype=np.uint64)))


@dataclass(frozen=True)
class Trajectory:
    """One simulated run; the full path is kept only on request."""

    spec: UrnSpec
    n: int
    final_black: int
    black_counts: tuple[int, ...] | None = None


def simulate_urn(
    spec: UrnSpec, n: int, rng: np.random.Generator, record_path: bool = False
) -> Trajectory:
    """Simulate n steps: at step i draw black with probability B/total."""
    if n < 0:
        raise InvalidParams(f"n must be >= 0, got {n}")
    k = spec.b0
    total = spec.b0 + spec.w0
    path = [k] if record_path else None
    for i in range(n):
        m = spec.matrix_at(i + 1)
        k += m.a if rng.random() * total < k else m.c
        total += m.increment
        if record_path:
            path.append(k)
    return Trajectory(spec, n, k, tuple(path) if record_path else None)


def _chunk_final_blacks(spec: UrnSpec, n: int, seed: int, start: int, stop: int) -> np.ndarray:
    count = stop - start
    k = np.full(count, spec.b0, dtype=np.int64)
    if n == 0:
        return k
    uniforms = np.empty((count, n))
    for j in range(count):
        uniforms[j] = replication_stream(seed, start + j).random(n)
    uniforms = np.ascontiguousarray(uniforms.T)  # step-major for the loop below
    total = spec.b0 + spec.w0
    for i in range(n):
        m = spec.matrix_at(i + 1)
        black = uniforms[i] * total < k
        if m.a == m.c:
            k += m.a
        else:
            k += np.where(black, np.int64(m.a), np.int64(m.c))
        total += m.increment
    return k


@dataclass(frozen=True, eq=False)  # identity comparison; the array field has no scalar ==
class EmpiricalSample:
    """Final black counts of ``reps`` independent replications."""

    spec: UrnSpec
    n: int
    reps: int
    seed: int
    final_black: np.ndarray

    def normalized(self, family: YoungPolyaFamily) -> np.ndarray:
        return normalize(self.final_black, self.n, family)

    def metadata_dict(self) -> dict:
        return {
            "spec": self.spec.to_json_dict(),
            "n": self.n,
            "reps": self.reps,
            "seed": self.seed,
        }

    def save_metadata(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.metadata_dict(), indent=2) + "\n")

    def to_csv(self, path: str | Path, family: YoungPolyaFamily | None = None) -> None:
        """Rows ``rep,final_black,normalized``; the last column is blank when
        no family (hence no normalization) applies."""
        norm = self.normalized(family) if family is not None else None
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rep", "final_black", "normalized"])
            for j, k in enumerate(self.final_black):
                writer.writerow([j, int(k), repr(float(norm[j])) if norm is not None else ""])


def run_experiment(
    spec: UrnSpec,
    n: int,
    reps: int,
    seed: int,
    workers: int = 1,
    chunk_size: int | None = None,
) -> EmpiricalSample:
    """Run ``reps`` independent replications of ``n`` steps.

    The sample is identical for every ``workers`` and ``chunk_size`` choice;
    see the module docstring for why.
    """
    if reps < 1:
        raise InvalidParams(f"reps must be >= 1, got {reps}")
    if workers < 1:
        raise InvalidParams(f"workers must be >= 1, got {workers}")
    if chunk_size is None:
        chunk_size = max(256, _CHUNK_TARGET_ELEMS // max(n, 1))
    chunk_size = max(1, min(chunk_size, reps))
    bounds = [(s, min(s + chunk_size, reps)) for s in range(0, reps, chunk_size)]
    if workers == 1 or len(bounds) == 1:
        parts = [_chunk_final_blacks(spec, n, seed, a, b) for a, b in bounds]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(
                pool.map(
                    _chunk_final_blacks,
                    *zip(*((spec, n, seed, a, b) for a, b in bounds)),
                )
            )
    return EmpiricalSample(spec, n, reps, seed, np.concatenate(parts))


def normalize(final_black, n: int, family: YoungPolyaFamily):
    """Rescale a black count onto the limit-law scale:
    p^delta / (p + l) * B / n^delta with delta = p / (p + l)."""
    if n < 1:
        raise InvalidParams(f"n must be >= 1, got {n}")
    delta = float(family.delta)
    coeff = family.p**delta / (family.p + family.ell)
    result = coeff * np.asarray(final_black, dtype=np.float64) / float(n) ** delta
    return float(result) if np.isscalar(final_black) else result
