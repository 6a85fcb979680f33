from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional


class SolveTimeout(Exception):
    """Raised cooperatively when a solve runs past its deadline."""


def check_deadline(deadline: Optional[float]) -> None:
    if deadline is not None and time.monotonic() > deadline:
        raise SolveTimeout()


@dataclass
class RunMetrics:
    """Per-solve counters. Wall time is excluded from equality."""

    expansion_actions: int = 0
    expansion_per_layer: list[int] = field(default_factory=list)
    mutex_pairs: int = 0
    dfs_nodes: int = 0
    memo_hits: int = 0
    advisor_calls: int = 0
    skipped_response_lines: int = 0
    empty_keep_coercions: int = 0
    advisor_failures: int = 0
    wall_time: float = field(default=0.0, compare=False)

    def record_layer(self, layer: int, n_actions: int) -> None:
        while len(self.expansion_per_layer) < layer:
            self.expansion_per_layer.append(0)
        self.expansion_per_layer[layer - 1] += n_actions
        self.expansion_actions += n_actions

    def absorb(self, other: "RunMetrics") -> None:
        for i, n in enumerate(other.expansion_per_layer, start=1):
            self.record_layer(i, n)
        self.mutex_pairs += other.mutex_pairs
        self.dfs_nodes += other.dfs_nodes
        self.memo_hits += other.memo_hits
        self.advisor_calls += other.advisor_calls
        self.skipped_response_lines += other.skipped_response_lines
        self.empty_keep_coercions += other.empty_keep_coercions
        self.advisor_failures += other.advisor_failures

    def to_json(self) -> dict:
        return {
            "expansion_actions": self.expansion_actions,
            "expansion_per_layer": list(self.expansion_per_layer),
            "mutex_pairs": self.mutex_pairs,
            "dfs_nodes": self.dfs_nodes,
            "memo_hits": self.memo_hits,
            "advisor_calls": self.advisor_calls,
            "skipped_response_lines": self.skipped_response_lines,
            "empty_keep_coercions": self.empty_keep_coercions,
            "advisor_failures": self.advisor_failures,
            "wall_time": round(self.wall_time, 6),
        }
