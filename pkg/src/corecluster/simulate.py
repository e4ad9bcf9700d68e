"""Synthetic expression data with planted community structure.

Each community is built around one leader (hub) profile drawn from a standard
normal; follower j is the leader plus scaled Gaussian noise so its population
correlation with the leader is exactly

    r_j = r_min + (r_max - r_min) * (1 - j / n_C),      j = 2..n_C

Six benchmark scenarios vary community density, leader correlation, additive
noise and irrelevant variables. All randomness flows from one 64-bit seed via
numpy SeedSequence spawning, so every dataset is reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expression import ExpressionMatrix, standardize_columns
from .ioutils import write_text_atomic

__all__ = [
    "ScenarioConfig",
    "LabeledDataset",
    "SCENARIOS",
    "gen_community",
    "gen_scenario",
    "replicate_suite",
    "write_labels",
]

SCENARIOS = ("S1", "S2", "S3", "S4", "S5", "S6")

_DENSE = (0.5, 1.0)
_SPARSE = (0.4, 0.7)


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    seed: int
    n_samples: int = 100
    n_communities: int = 5
    size_choices: tuple[int, ...] = (50, 100)
    replicate_count: int = 1

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ValueError(
                f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}"
            )
        if self.n_samples < 2:
            raise ValueError("n_samples must be >= 2")
        if self.n_communities < 1:
            raise ValueError("n_communities must be >= 1")
        if any(s < 2 for s in self.size_choices) or not self.size_choices:
            raise ValueError("community sizes must all be >= 2")
        if self.replicate_count < 1:
            raise ValueError("replicate_count must be >= 1")


@dataclass(frozen=True)
class LabeledDataset:
    """Simulated expression matrix with ground-truth community labels.

    ``labels[j]`` is the community of variable j (0 marks an irrelevant
    variable); ``hubs`` holds the leader variable index of each community.
    """

    x: ExpressionMatrix
    labels: np.ndarray
    hubs: tuple[int, ...]

    def __post_init__(self) -> None:
        a = np.array(self.labels, dtype=np.int64)
        if a.size != self.x.p:
            raise ValueError("one label per variable required")
        k = int(a.max())
        for c in range(1, k + 1):
            if not (a == c).any():
                raise ValueError(f"community {c} is empty")
        if len(self.hubs) != k:
            raise ValueError("one hub per community required")
        for c, h in enumerate(self.hubs, start=1):
            if a[h] != c:
                raise ValueError(f"hub {h} does not belong to community {c}")
        a.setflags(write=False)
        object.__setattr__(self, "labels", a)
        object.__setattr__(self, "hubs", tuple(int(h) for h in self.hubs))

    @property
    def k(self) -> int:
        return len(self.hubs)


def gen_community(
    n_samples: int,
    size: int,
    r_min: float,
    r_max: float,
    rng: np.random.Generator,
    leader: np.ndarray | None = None,
) -> tuple[np.ndarray, int]:
    """Profiles of one community (columns), leader first.

    Returns (n_samples x size matrix, leader column index). The population
    correlation of column j (1-based) with the leader is exactly r_j. A
    pre-built leader profile may be supplied (used when two communities share
    correlated leaders).
    """
    if not 0.0 < r_min <= r_max <= 1.0:
        raise ValueError(
            f"need 0 < r_min <= r_max <= 1, got r_min={r_min}, r_max={r_max}"
        )
    if size < 2:
        raise ValueError("community size must be >= 2")
    if leader is None:
        leader = rng.standard_normal(n_samples)
    profiles = np.empty((n_samples, size))
    profiles[:, 0] = leader
    delta = r_max - r_min
    for j in range(2, size + 1):
        r_j = r_min + delta * (1.0 - j / size)
        scale = np.sqrt(1.0 / r_j**2 - 1.0)
        profiles[:, j - 1] = leader + scale * rng.standard_normal(n_samples)
    return profiles, 0


def _correlated_leader(
    leader: np.ndarray, r: float, rng: np.random.Generator
) -> np.ndarray:
    scale = np.sqrt(1.0 / r**2 - 1.0)
    return leader + scale * rng.standard_normal(leader.size)


def _build(cfg: ScenarioConfig, replicate: int) -> LabeledDataset:
    k = cfg.n_communities
    ss = np.random.SeedSequence([cfg.seed, replicate])
    children = ss.spawn(k + 2)
    scen_rng = np.random.default_rng(children[0])
    comm_rngs = [np.random.default_rng(children[1 + c]) for c in range(k)]
    aux_rng = np.random.default_rng(children[k + 1])
    scenario = cfg.scenario

    sizes = [int(s) for s in scen_rng.choice(sorted(cfg.size_choices), size=k)]
    if scenario in ("S2", "S6"):
        configs = [
            _DENSE if scen_rng.integers(2) == 0 else _SPARSE for _ in range(k)
        ]
    else:
        configs = [_DENSE] * k
    leader_pair_r: float | None = None
    if scenario == "S3":
        leader_pair_r = 0.8
    elif scenario == "S6":
        leader_pair_r = float(scen_rng.choice([0.2, 0.4, 0.6]))
    noise_sd: float | None = None
    if scenario == "S4":
        noise_sd = 1.0
    elif scenario == "S6":
        noise_sd = float(scen_rng.choice([0.1, 0.5, 1.0]))

    blocks = []
    hubs = []
    labels = []
    offset = 0
    first_leader: np.ndarray | None = None
    for c in range(k):
        rng = comm_rngs[c]
        r_min, r_max = configs[c]
        leader = None
        if c == 1 and leader_pair_r is not None:
            leader = _correlated_leader(first_leader, leader_pair_r, rng)
        block, _ = gen_community(cfg.n_samples, sizes[c], r_min, r_max, rng, leader)
        if c == 0:
            first_leader = block[:, 0]
        blocks.append(block)
        hubs.append(offset)
        labels.extend([c + 1] * sizes[c])
        offset += sizes[c]

    values = np.hstack(blocks)
    if noise_sd is not None:
        values = standardize_columns(values)
        values = values + noise_sd * aux_rng.standard_normal(values.shape)
    if scenario in ("S5", "S6"):
        p_rel = values.shape[1]
        irrelevant = aux_rng.standard_normal((cfg.n_samples, p_rel))
        values = np.hstack([values, irrelevant])
        labels.extend([0] * p_rel)

    p = values.shape[1]
    vw = len(str(p))
    sw = len(str(cfg.n_samples))
    variable_ids = tuple(f"v{i + 1:0{vw}d}" for i in range(p))
    sample_ids = tuple(f"s{i + 1:0{sw}d}" for i in range(cfg.n_samples))
    x = ExpressionMatrix(values, np.zeros(values.shape, dtype=bool), variable_ids, sample_ids)
    return LabeledDataset(x, np.array(labels, dtype=np.int64), tuple(hubs))


def gen_scenario(cfg: ScenarioConfig) -> LabeledDataset:
    """Generate one dataset (replicate 0) for the configured scenario."""
    return _build(cfg, 0)


def replicate_suite(cfg: ScenarioConfig) -> list[LabeledDataset]:
    """All replicates, each from its own generator derived from (seed, index)."""
    return [_build(cfg, rep) for rep in range(cfg.replicate_count)]


def write_labels(ds: LabeledDataset, path) -> None:
    """Truth TSV: variable_id, community_id (0 = irrelevant), is_hub."""
    hubset = set(ds.hubs)
    lines = ["variable_id\tcommunity_id\tis_hub"]
    for j, vid in enumerate(ds.x.variable_ids):
        lines.append(f"{vid}\t{ds.labels[j]}\t{1 if j in hubset else 0}")
    write_text_atomic(path, "\n".join(lines) + "\n")
