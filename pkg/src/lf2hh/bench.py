"""Timing and step-count measurements over the bundled corpus.

Three problem families, each parameterized by an instance size n:

  append   concatenation of two halves of the list [0 .. n-1]
  reverse  accumulator reversal of an all-zero list of length n
  miniml   evaluation of (plus n 10) down to a numeral

Rows report the engine's backchain and unification counters plus wall
time.  A search that hits the step budget is reported as an overflow row;
the counters measured up to that point are kept.  Verification of the
found witness is deliberately not part of the measured work.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from importlib import resources
from typing import Optional, TextIO

from . import pipeline
from .engine import default_budget
from .translate import TranslateOptions

CSV_HEADER = "name,n,mode,backchain_steps,unify_calls,wall_ms"
DEFAULT_SIZES = (8, 16, 32, 64, 128)

BENCHES = ("append", "reverse", "miniml")


def corpus_text(name: str) -> str:
    return resources.files("lf2hh").joinpath(f"corpus/{name}.elf").read_text()


def load_corpus(name: str) -> pipeline.LoadedSignature:
    loaded = pipeline.load_signature(corpus_text(name), f"{name}.elf")
    if not loaded.ok:
        raise RuntimeError(f"bundled signature {name}.elf fails its own check")
    return loaded


def _nat(k: int) -> str:
    out = "z"
    for _ in range(k):
        out = f"(s {out})"
    return out


def _nat_list(items: list[str]) -> str:
    out = "nil"
    for it in reversed(items):
        out = f"(cons {it} {out})"
    return out


def _tm_num(k: int) -> str:
    out = "zz"
    for _ in range(k):
        out = f"(ss {out})"
    return out


def bench_query(name: str, n: int) -> str:
    if n < 1:
        raise ValueError("instance size must be positive")
    if name == "append":
        xs = [_nat(i) for i in range(n)]
        h = n // 2
        return f"append {_nat_list(xs[:h])} {_nat_list(xs[h:])} {_nat_list(xs)}"
    if name == "reverse":
        l = _nat_list(["z"] * n)
        return f"reverse {l} {l}"
    if name == "miniml":
        return f"eval (plus {_tm_num(n)} {_tm_num(10)}) {_tm_num(n + 10)}"
    raise ValueError(f"unknown benchmark {name!r}; choose from {', '.join(BENCHES)}")


@dataclass(frozen=True)
class BenchRow:
    name: str
    n: int
    mode: str
    backchain_steps: int
    unify_calls: int
    wall_ms: float
    overflow: bool

    def csv(self) -> str:
        steps = "overflow" if self.overflow else str(self.backchain_steps)
        unify = "overflow" if self.overflow else str(self.unify_calls)
        return f"{self.name},{self.n},{self.mode},{steps},{unify},{self.wall_ms:.1f}"


def run_case(
    loaded: pipeline.LoadedSignature,
    name: str,
    n: int,
    mode: str,
    budget: Optional[int] = None,
) -> BenchRow:
    query = pipeline.prepare_query(loaded, bench_query(name, n))
    t0 = time.perf_counter()
    out = pipeline.solve_query(
        loaded,
        query,
        TranslateOptions(mode=mode),
        budget=budget if budget is not None else default_budget(),
        verify=False,
    )
    wall_ms = (time.perf_counter() - t0) * 1000.0
    if out.status not in ("proved", "budget"):
        raise RuntimeError(f"{name}({n}) in {mode} mode: unexpected {out.status}")
    return BenchRow(
        name,
        n,
        mode,
        out.stats.backchain_steps,
        out.stats.unify_calls,
        wall_ms,
        overflow=out.status == "budget",
    )


def run_bench(
    name: str,
    sizes: tuple[int, ...] = DEFAULT_SIZES,
    mode: str = "optimized",
    budget: Optional[int] = None,
) -> list[BenchRow]:
    loaded = load_corpus(name)
    return [run_case(loaded, name, n, mode, budget) for n in sizes]


def write_csv(rows: list[BenchRow], fh: TextIO) -> None:
    fh.write(CSV_HEADER + "\n")
    for row in rows:
        fh.write(row.csv() + "\n")
