"""Per-sample fuzzy weights from class geometry: distance, density, and their mix.

Distance membership decays with a sample's distance to its own class center:

    mu(x) = exp(-d_cen(x) / (d_max + theta))

where d_cen and d_max are the sample's distance to the class center and the
largest such distance in the class. The raw exponential form with a leading
constant would exceed 1, so the constant is dropped, which keeps the exact
ordering and pins the range to (0, 1] with mu = 1 at the center.

Density membership sums exp(-d_ij) over a neighborhood of same-class points:
the k nearest same-class neighbors in FIXED_K mode, or the same-class members
of the sample's discovered cluster in CLUSTER_ADAPTIVE mode. Raw sums are
unbounded, so each class is rescaled by its maximum, again giving (0, 1].
Samples with an empty neighborhood get the neutral weight 1.

The hybrid weight is the convex mix alpha * mu + (1 - alpha) * omega.

All statistics (centers, d_max, neighborhoods, normalization) stay within a
sample's own class: these weights express how typical a sample is for the
class it is labeled with, so pooling across classes would be meaningless.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import Dataset
from .errors import (
    AlignmentError,
    ConfigError,
    EmptyClassError,
    MembershipRangeError,
    NumericError,
)
from .qho_cluster import ClusterResult

DEFAULT_THETA = 0.001
DEFAULT_ALPHA = 0.7
DEFAULT_K = 5


class DensityMode(enum.Enum):
    FIXED_K = "fixed-k"
    CLUSTER_ADAPTIVE = "cluster-adaptive"


@dataclass(frozen=True)
class MembershipConfig:
    theta: float = DEFAULT_THETA
    alpha: float = DEFAULT_ALPHA
    k: int = DEFAULT_K
    density_mode: DensityMode = DensityMode.FIXED_K

    def __post_init__(self):
        if self.theta <= 0:
            raise ConfigError(f"theta must be > 0, got {self.theta}")
        if not (0.0 <= self.alpha <= 1.0):
            raise ConfigError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class MembershipVector:
    """Weights aligned with dataset sample indices, each in (0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.shape[0] < 1:
            raise MembershipRangeError(f"expected a 1-D value vector, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise MembershipRangeError("membership values must be finite")
        if vals.min() <= 0.0 or vals.max() > 1.0:
            raise MembershipRangeError(
                f"membership values must lie in (0, 1], got range "
                f"[{vals.min()}, {vals.max()}]")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.shape[0]


def class_center(ds: Dataset, c: int) -> np.ndarray:
    """Component-wise mean of class c's feature vectors."""
    idx = ds.class_indices(c)
    if len(idx) == 0:
        raise EmptyClassError(f"class {c} has no samples")
    return ds.features[idx].mean(axis=0)


def distance_membership(ds: Dataset, cfg: MembershipConfig) -> MembershipVector:
    """Distance-to-center weight per sample, computed within each class."""
    values = np.empty(ds.n, dtype=np.float64)
    for c in range(ds.m):
        idx = ds.class_indices(c)
        if len(idx) == 0:
            raise EmptyClassError(f"class {c} has no samples")
        center = ds.features[idx].mean(axis=0)
        dist = np.linalg.norm(ds.features[idx] - center, axis=1)
        if not np.all(np.isfinite(dist)):
            raise NumericError(f"non-finite center distance in class {c}")
        values[idx] = np.exp(-dist / (dist.max() + cfg.theta))
    return MembershipVector(values)


def _pairwise_distances(points: np.ndarray) -> np.ndarray:
    sq = np.sum(points ** 2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * points @ points.T
    np.maximum(d2, 0.0, out=d2)
    return np.sqrt(d2)


def density_membership(ds: Dataset, cfg: MembershipConfig,
                       clusters: Optional[ClusterResult] = None) -> MembershipVector:
    """Neighborhood-density weight per sample, rescaled within each class.

    FIXED_K sums over the k nearest same-class neighbors and requires every
    class to have more than k samples. CLUSTER_ADAPTIVE sums over the other
    same-class members of the sample's cluster; samples alone in their
    cluster-class group get the neutral weight 1.
    """
    raw = np.zeros(ds.n, dtype=np.float64)
    neutral = np.zeros(ds.n, dtype=bool)

    if cfg.density_mode is DensityMode.FIXED_K:
        for c in range(ds.m):
            idx = ds.class_indices(c)
            if len(idx) == 0:
                raise EmptyClassError(f"class {c} has no samples")
            if len(idx) <= cfg.k:
                raise ConfigError(
                    f"class {ds.label_name(c)} has {len(idx)} samples; "
                    f"fixed-k density needs more than k={cfg.k}")
            dists = _pairwise_distances(ds.features[idx])
            np.fill_diagonal(dists, np.inf)
            nearest = np.partition(dists, cfg.k - 1, axis=1)[:, : cfg.k]
            raw[idx] = np.exp(-nearest).sum(axis=1)
    else:
        if clusters is None:
            raise ConfigError("cluster-adaptive density requires a clustering result")
        assignment = np.asarray(clusters.assignment)
        if assignment.shape != (ds.n,):
            raise AlignmentError(
                f"cluster assignment covers {assignment.shape[0]} samples, dataset has {ds.n}")
        for c in range(ds.m):
            class_idx = ds.class_indices(c)
            if len(class_idx) == 0:
                raise EmptyClassError(f"class {c} has no samples")
            for k in np.unique(assignment[class_idx]):
                group = class_idx[assignment[class_idx] == k]
                if len(group) == 1:
                    neutral[group] = True
                    continue
                dists = _pairwise_distances(ds.features[group])
                np.fill_diagonal(dists, 0.0)
                raw[group] = np.exp(-dists).sum(axis=1) - 1.0  # drop the self term

    values = np.ones(ds.n, dtype=np.float64)
    for c in range(ds.m):
        idx = ds.class_indices(c)
        live = idx[~neutral[idx]]
        if len(live) == 0:
            continue
        values[live] = raw[live] / raw[live].max()
    return MembershipVector(values)


def hybrid_membership(mu: MembershipVector, omega: MembershipVector,
                      cfg: MembershipConfig) -> MembershipVector:
    """Convex mix alpha * mu + (1 - alpha) * omega, element-wise."""
    if len(mu) != len(omega):
        raise AlignmentError(f"membership lengths differ: {len(mu)} vs {len(omega)}")
    mixed = cfg.alpha * mu.values + (1.0 - cfg.alpha) * omega.values
    # The exact mix never exceeds max(mu, omega) <= 1; trim float dust.
    np.minimum(mixed, 1.0, out=mixed)
    return MembershipVector(mixed)


class ExperimentVariant(enum.Enum):
    """The five trainable methods compared by the benchmark commands."""

    ELM = "ELM"
    RELM = "RELM"
    DI_FELM = "DI-FELM"
    DE_FELM = "DE-FELM"
    HA_FELM = "HA-FELM"

    @classmethod
    def parse(cls, name: str) -> "ExperimentVariant":
        for v in cls:
            if v.value == name.upper():
                return v
        raise ConfigError(f"unknown variant {name!r}; expected one of "
                          f"{[v.value for v in cls]}")

    @property
    def needs_memberships(self) -> bool:
        return self in (ExperimentVariant.DI_FELM, ExperimentVariant.DE_FELM,
                        ExperimentVariant.HA_FELM)

    @property
    def needs_clusters(self) -> bool:
        return self is ExperimentVariant.HA_FELM


def variant_memberships(ds: Dataset, variant: ExperimentVariant, cfg: MembershipConfig,
                        clusters: Optional[ClusterResult] = None
                        ) -> Optional[MembershipVector]:
    """Membership vector for a method variant, or None for the unweighted ones.

    DI-FELM uses the distance weight alone (alpha forced to 1), DE-FELM the
    density weight alone (alpha forced to 0, density mode as configured),
    HA-FELM the hybrid mix with cluster-adaptive density.
    """
    if variant is ExperimentVariant.ELM or variant is ExperimentVariant.RELM:
        return None
    if variant is ExperimentVariant.DI_FELM:
        return distance_membership(ds, cfg)
    if variant is ExperimentVariant.DE_FELM:
        return density_membership(ds, cfg, clusters)
    if clusters is None:
        raise ConfigError("HA-FELM needs a clustering result for its density term")
    adaptive = MembershipConfig(theta=cfg.theta, alpha=cfg.alpha, k=cfg.k,
                                density_mode=DensityMode.CLUSTER_ADAPTIVE)
    mu = distance_membership(ds, adaptive)
    omega = density_membership(ds, adaptive, clusters)
    return hybrid_membership(mu, omega, adaptive)
