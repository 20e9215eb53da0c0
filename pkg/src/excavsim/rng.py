"""Named, counter-based random streams.

Every stream is a Philox generator keyed by ``SeedSequence(seed,
spawn_key=(robot, purpose))``, so the draws a robot sees never depend on how
many draws any other stream consumed.  Uniforms are the standard 53-bit
doubles of ``Generator.random``; the compiled kernel reads the same bit
generators through numpy's C interface and reproduces them exactly.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

WORLD_KEY = 1 << 20


class Purpose(IntEnum):
    ENTER = 0
    REVERSE = 1
    NOISE = 2


class Streams:
    """All random streams for one run, with per-stream draw counters."""

    def __init__(self, seed: int, robots: int):
        self.seed = seed
        self.robots = robots
        self.bitgens: list[np.random.Philox] = []
        for r in range(robots):
            for purpose in Purpose:
                ss = np.random.SeedSequence(seed, spawn_key=(r, int(purpose)))
                self.bitgens.append(np.random.Philox(ss))
        self.bitgens.append(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(WORLD_KEY,))))
        self._gens = [np.random.Generator(bg) for bg in self.bitgens]
        self.counts = np.zeros(len(self.bitgens), dtype=np.int64)

    def index(self, robot: int, purpose: Purpose) -> int:
        return robot * len(Purpose) + int(purpose)

    @property
    def world_index(self) -> int:
        return len(self.bitgens) - 1

    def draw(self, robot: int, purpose: Purpose) -> float:
        i = self.index(robot, purpose)
        self.counts[i] += 1
        return self._gens[i].random()

    def world(self) -> float:
        i = self.world_index
        self.counts[i] += 1
        return self._gens[i].random()

    def count(self, robot: int, purpose: Purpose) -> int:
        return int(self.counts[self.index(robot, purpose)])

    def permutation(self, n: int) -> list[int]:
        """Fisher-Yates shuffle of ``range(n)`` driven by the world stream."""
        order = list(range(n))
        for i in range(n - 1, 0, -1):
            j = int(self.world() * (i + 1))
            order[i], order[j] = order[j], order[i]
        return order
