"""Seeded streams, path configuration and sample batches."""

import zlib
from dataclasses import dataclass, field, asdict

import numpy as np

DEFAULT_SEED = 1729
REPLICA_SIZE = 10_000


@dataclass(frozen=True)
class RngState:
    """A 64-bit seed plus a key path naming an independent stream.

    Streams are derived with :class:`numpy.random.SeedSequence`: the key path
    and the replica index form its ``spawn_key``, so ``(seed, key, replica)``
    always yields the same PCG64 stream and distinct triples yield
    statistically independent ones.
    """

    seed: int = DEFAULT_SEED
    key: tuple = ()

    def __post_init__(self):
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")

    def child(self, label):
        """Sub-stream tagged by a string label."""
        return RngState(self.seed, self.key + (zlib.crc32(label.encode()),))

    def generator(self, replica=0):
        ss = np.random.SeedSequence(int(self.seed), spawn_key=self.key + (int(replica),))
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng):
    """Accept an RngState, a Generator or an int seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngState):
        return rng.generator(0)
    return RngState(int(rng)).generator(0)


def as_state(rng):
    if isinstance(rng, RngState):
        return rng
    if rng is None:
        return RngState()
    if isinstance(rng, (int, np.integer)):
        return RngState(int(rng))
    raise TypeError("path samplers need an RngState (or an integer seed)")


def replicas(n, size=REPLICA_SIZE):
    """Split `n` draws into fixed-size replicas: yields ``(index, count)``."""
    k = 0
    while n > 0:
        c = min(size, n)
        yield k, c
        n -= c
        k += 1


@dataclass(frozen=True)
class PathConfig:
    """Discretization settings for path simulation.

    Attributes
    ----------
    eps : float
        Jump-size cutoff; smaller jumps are replaced by a drift (subordinators)
        or a Gaussian term (SN processes).  Finite-activity measures ignore it
        and simulate every jump.
    dt : float
        Euler step for SN paths.
    tail_tol : float
        Relative size of the neglected remainder of the functional.
    max_time : float
        Horizon cap; paths reaching it are flagged.
    x0 : float
        Start point for entrance-law draws.
    """

    eps: float = 1e-3
    dt: float = 1e-3
    tail_tol: float = 1e-6
    max_time: float = 1e4
    x0: float = 1e-3

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not (isinstance(v, (int, float)) and np.isfinite(v) and v > 0):
                raise ValueError(f"PathConfig.{k} must be a positive number, got {v!r}")

    def halved(self):
        """Same settings with `dt` and `eps` halved."""
        return PathConfig(self.eps / 2, self.dt / 2, self.tail_tol, self.max_time, self.x0)

    def as_dict(self):
        return asdict(self)


@dataclass
class SampleBatch:
    """Draws of a positive random variable plus how they were produced.

    ``diagnostics`` holds at least ``truncated_fraction`` (paths that hit
    ``max_time``) and, for Euler paths, ``step_warning_fraction``.
    """

    values: np.ndarray
    meta: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.diagnostics.setdefault("truncated_fraction", 0.0)

    def __len__(self):
        return self.values.size

    @property
    def valid(self):
        return bool(np.all(np.isfinite(self.values)) and np.all(self.values > 0))

    @property
    def truncated_fraction(self):
        return self.diagnostics["truncated_fraction"]

    def map(self, fn, label):
        """New batch of ``fn(values)`` sharing metadata."""
        return SampleBatch(fn(self.values), {**self.meta, "transform": label}, dict(self.diagnostics))
