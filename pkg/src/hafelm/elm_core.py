"""Random-hidden-layer classifiers solved in closed form.

The hidden layer is drawn once from a seeded generator and never trained;
only the output weights beta are fit. With per-sample weights s_i in (0, 1]
the fit minimizes

    ||beta||^2 / 2  +  (C / 2) * sum_i s_i ||h(x_i) beta - t_i||^2

which admits two algebraically equivalent closed forms:

    dual   (N x N solve):  beta = H^T (S / C + H H^T)^{-1} T,  S = diag(1 / s_i)
    primal (L x L solve):  beta = (I / C + H^T W H)^{-1} H^T W T,  W = diag(s_i)

Both system matrices are symmetric positive definite for valid inputs, so a
Cholesky factorization applies; the auto mode picks the smaller system. The
dual/primal agreement is exercised by tests rather than assumed. All-ones
weights give the plain ridge-regularized variant; the unregularized variant
drops the penalty and takes the minimum-norm least-squares solution by SVD.

Target rows encode class y_i as +1 in column y_i and -1 elsewhere; argmax
prediction is insensitive to that choice, and ties resolve to the lowest
class index.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np
import scipy.linalg

from .dataset import Dataset
from .errors import ConfigError, MembershipRangeError, NumericError, ShapeError
from .membership import MembershipVector

MODEL_FORMAT_VERSION = 1


class ActivationKind(enum.Enum):
    RBF = "rbf"
    SIGMOID = "sigmoid"


class ModelVariant(enum.Enum):
    ELM = "elm"
    RELM = "relm"
    FELM = "felm"


@dataclass(frozen=True)
class HiddenLayer:
    """Fixed random hidden parameters: RBF centers with positive impact
    factors, or sigmoid weight rows with biases."""

    kind: ActivationKind
    centers_or_weights: np.ndarray  # (L, d)
    scales_or_biases: np.ndarray    # (L,)
    seed: int

    def __post_init__(self):
        cw = np.asarray(self.centers_or_weights, dtype=np.float64)
        sb = np.asarray(self.scales_or_biases, dtype=np.float64)
        if cw.ndim != 2 or cw.shape[0] < 1:
            raise ConfigError(f"hidden parameters must be (L, d), got {cw.shape}")
        if sb.shape != (cw.shape[0],):
            raise ConfigError(f"scales/biases shape {sb.shape} does not match L={cw.shape[0]}")
        if self.kind is ActivationKind.RBF and sb.min() <= 0:
            raise ConfigError("RBF impact factors must be strictly positive")
        cw.flags.writeable = False
        sb.flags.writeable = False
        object.__setattr__(self, "centers_or_weights", cw)
        object.__setattr__(self, "scales_or_biases", sb)

    @property
    def L(self) -> int:
        return self.centers_or_weights.shape[0]

    @property
    def d(self) -> int:
        return self.centers_or_weights.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    L: int
    C: float = 1.0
    kind: ActivationKind = ActivationKind.RBF
    variant: ModelVariant = ModelVariant.FELM
    seed: int = 0

    def __post_init__(self):
        if self.L < 1:
            raise ConfigError(f"hidden node count must be >= 1, got {self.L}")
        if self.C <= 0:
            raise ConfigError(f"regularization trade-off must be > 0, got {self.C}")


@dataclass(frozen=True)
class FelmModel:
    hidden: HiddenLayer
    beta: np.ndarray  # (L, m)
    m: int
    class_names: Optional[tuple[str, ...]] = None
    residual_norm: Optional[float] = None
    norm_lo: Optional[np.ndarray] = None  # min-max scaling bounds, if trained scaled
    norm_hi: Optional[np.ndarray] = None

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=np.float64)
        if beta.shape != (self.hidden.L, self.m):
            raise ShapeError(f"beta shape {beta.shape} != ({self.hidden.L}, {self.m})")
        if not np.all(np.isfinite(beta)):
            raise NumericError("output weights contain non-finite values")
        beta.flags.writeable = False
        object.__setattr__(self, "beta", beta)

    @property
    def d(self) -> int:
        return self.hidden.d


def init_hidden_layer(d: int, cfg: TrainConfig,
                      feature_bounds: tuple[np.ndarray, np.ndarray]) -> HiddenLayer:
    """Draw hidden parameters from the config seed.

    RBF centers fall uniformly inside the given per-dimension bounds with
    impact factors uniform in (0, 1]; sigmoid weights and biases are uniform
    in [-1, 1]. Identical inputs reproduce the layer bit for bit.
    """
    if d < 1:
        raise ConfigError(f"feature dimension must be >= 1, got {d}")
    lo = np.asarray(feature_bounds[0], dtype=np.float64)
    hi = np.asarray(feature_bounds[1], dtype=np.float64)
    if lo.shape != (d,) or hi.shape != (d,) or not (np.all(np.isfinite(lo))
                                                    and np.all(np.isfinite(hi))):
        raise ConfigError("feature bounds must be finite vectors of length d")
    rng = np.random.default_rng(cfg.seed)
    if cfg.kind is ActivationKind.RBF:
        centers = rng.uniform(lo, hi, size=(cfg.L, d))
        scales = 1.0 - rng.random(cfg.L)  # uniform in (0, 1]
        return HiddenLayer(ActivationKind.RBF, centers, scales, cfg.seed)
    weights = rng.uniform(-1.0, 1.0, size=(cfg.L, d))
    biases = rng.uniform(-1.0, 1.0, size=cfg.L)
    return HiddenLayer(ActivationKind.SIGMOID, weights, biases, cfg.seed)


def hidden_matrix(layer: HiddenLayer, features: np.ndarray) -> np.ndarray:
    """Activation matrix: row i holds node outputs for sample i.

    RBF: exp(-b_l * ||x_i - a_l||^2). Sigmoid: logistic of w_l . x_i + b_l,
    with the argument clipped to +-500 to avoid overflow.
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != layer.d:
        raise ShapeError(f"features shape {X.shape} does not match layer dimension {layer.d}")
    if layer.kind is ActivationKind.RBF:
        centers = layer.centers_or_weights
        sq = (np.sum(X ** 2, axis=1)[:, None] + np.sum(centers ** 2, axis=1)[None, :]
              - 2.0 * X @ centers.T)
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-layer.scales_or_biases[None, :] * sq)
    z = X @ layer.centers_or_weights.T + layer.scales_or_biases[None, :]
    np.clip(z, -500.0, 500.0, out=z)
    return 1.0 / (1.0 + np.exp(-z))


def encode_targets(ds: Dataset) -> np.ndarray:
    """(N, m) target matrix: +1 at the sample's class column, -1 elsewhere."""
    if ds.m < 2:
        raise ConfigError(f"target encoding needs m >= 2 classes, got {ds.m}")
    T = np.full((ds.n, ds.m), -1.0)
    T[np.arange(ds.n), ds.labels] = 1.0
    return T


def _as_weights(s: Union[MembershipVector, np.ndarray, None], n: int) -> np.ndarray:
    if s is None:
        return np.ones(n)
    vals = s.values if isinstance(s, MembershipVector) else np.asarray(s, dtype=np.float64)
    if vals.shape != (n,):
        raise ShapeError(f"membership vector length {vals.shape} does not match N={n}")
    if not np.all(np.isfinite(vals)) or vals.min() <= 0.0 or vals.max() > 1.0:
        raise MembershipRangeError("sample weights must lie in (0, 1]")
    return vals


def solve_output_weights(H: np.ndarray, T: np.ndarray,
                         s: Union[MembershipVector, np.ndarray, None] = None,
                         C: float = 1.0, mode: str = "auto") -> np.ndarray:
    """Closed-form weighted ridge solve for the output weights.

    mode selects the dual (N x N) or primal (L x L) system; auto takes the
    smaller one. The two agree to rounding error, which tests enforce.
    """
    H = np.asarray(H, dtype=np.float64)
    T = np.asarray(T, dtype=np.float64)
    if H.ndim != 2 or T.ndim != 2 or H.shape[0] != T.shape[0]:
        raise ShapeError(f"incompatible shapes H{H.shape}, T{T.shape}")
    if C <= 0:
        raise ConfigError(f"regularization trade-off must be > 0, got {C}")
    if mode not in ("auto", "dual", "primal"):
        raise ConfigError(f"unknown solve mode {mode!r}")
    n, L = H.shape
    w = _as_weights(s, n)

    try:
        if mode == "dual" or (mode == "auto" and n <= L):
            A = H @ H.T
            A[np.diag_indices_from(A)] += 1.0 / (C * w)
            beta = H.T @ scipy.linalg.cho_solve(scipy.linalg.cho_factor(A), T)
        else:
            B = (H.T * w) @ H
            B[np.diag_indices_from(B)] += 1.0 / C
            rhs = H.T @ (w[:, None] * T)
            beta = scipy.linalg.cho_solve(scipy.linalg.cho_factor(B), rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"weighted ridge solve failed: {exc}") from exc
    if not np.all(np.isfinite(beta)):
        raise NumericError("weighted ridge solve produced non-finite output weights")
    return beta


def _assemble(ds: Dataset, cfg: TrainConfig, hidden: Optional[HiddenLayer]):
    layer = hidden if hidden is not None else init_hidden_layer(ds.d, cfg, ds.feature_bounds())
    if layer.d != ds.d:
        raise ShapeError(f"hidden layer dimension {layer.d} does not match data {ds.d}")
    H = hidden_matrix(layer, ds.features)
    T = encode_targets(ds)
    return layer, H, T


def _finish(layer: HiddenLayer, beta: np.ndarray, H: np.ndarray, T: np.ndarray,
            ds: Dataset) -> FelmModel:
    residual = float(np.linalg.norm(T - H @ beta))
    return FelmModel(hidden=layer, beta=beta, m=ds.m, class_names=ds.class_names,
                     residual_norm=residual)


def train_felm(ds: Dataset, s: Union[MembershipVector, np.ndarray], cfg: TrainConfig,
               hidden: Optional[HiddenLayer] = None, mode: str = "auto") -> FelmModel:
    """Fit output weights with per-sample fuzzy weights s."""
    layer, H, T = _assemble(ds, cfg, hidden)
    beta = solve_output_weights(H, T, s, cfg.C, mode=mode)
    return _finish(layer, beta, H, T, ds)


def train_relm(ds: Dataset, cfg: TrainConfig,
               hidden: Optional[HiddenLayer] = None) -> FelmModel:
    """Ridge-regularized fit; identical to train_felm with unit weights."""
    return train_felm(ds, np.ones(ds.n), cfg, hidden=hidden)


def train_elm(ds: Dataset, cfg: TrainConfig,
              hidden: Optional[HiddenLayer] = None) -> FelmModel:
    """Unregularized fit: minimum-norm least squares via SVD."""
    layer, H, T = _assemble(ds, cfg, hidden)
    try:
        beta = np.linalg.lstsq(H, T, rcond=None)[0]
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"least-squares solve failed: {exc}") from exc
    if not np.all(np.isfinite(beta)):
        raise NumericError("least-squares solve produced non-finite output weights")
    return _finish(layer, beta, H, T, ds)


def train(ds: Dataset, cfg: TrainConfig,
          s: Union[MembershipVector, np.ndarray, None] = None,
          hidden: Optional[HiddenLayer] = None) -> FelmModel:
    """Dispatch on cfg.variant; FELM requires a membership vector."""
    if cfg.variant is ModelVariant.ELM:
        return train_elm(ds, cfg, hidden=hidden)
    if cfg.variant is ModelVariant.RELM:
        return train_relm(ds, cfg, hidden=hidden)
    if s is None:
        raise ConfigError("fuzzy training requires a membership vector")
    return train_felm(ds, s, cfg, hidden=hidden)


def decision_scores(model: FelmModel, features: np.ndarray) -> np.ndarray:
    """(n, m) score matrix h(x) beta for a batch of feature rows."""
    return hidden_matrix(model.hidden, features) @ model.beta


def predict(model: FelmModel, x: np.ndarray) -> tuple[int, np.ndarray]:
    """Label and score vector for one sample; ties take the lowest class index."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.d,):
        raise ShapeError(f"sample shape {x.shape} does not match model dimension {model.d}")
    scores = decision_scores(model, x[None, :])[0]
    return int(np.argmax(scores)), scores


def predict_batch(model: FelmModel, features: np.ndarray) -> np.ndarray:
    """Predicted labels for a batch of feature rows."""
    return np.argmax(decision_scores(model, features), axis=1).astype(np.int64)


def save_model(model: FelmModel, path) -> None:
    """Write a model to a self-describing binary file (npz archive)."""
    payload = {
        "format_version": np.int64(MODEL_FORMAT_VERSION),
        "kind": model.hidden.kind.value,
        "L": np.int64(model.hidden.L),
        "d": np.int64(model.d),
        "m": np.int64(model.m),
        "seed": np.int64(model.hidden.seed),
        "centers_or_weights": model.hidden.centers_or_weights,
        "scales_or_biases": model.hidden.scales_or_biases,
        "beta": model.beta,
        "residual_norm": np.float64(np.nan if model.residual_norm is None
                                    else model.residual_norm),
    }
    if model.class_names is not None:
        payload["class_names"] = np.array(model.class_names)
    if model.norm_lo is not None:
        payload["norm_lo"] = np.asarray(model.norm_lo, dtype=np.float64)
        payload["norm_hi"] = np.asarray(model.norm_hi, dtype=np.float64)
    with open(path, "wb") as fh:
        np.savez(fh, **payload)


def load_model(path) -> FelmModel:
    """Read a model written by save_model; predictions reproduce bit-exactly."""
    with np.load(path, allow_pickle=False) as data:
        version = int(data["format_version"])
        if version != MODEL_FORMAT_VERSION:
            raise ConfigError(f"unsupported model format version {version}")
        layer = HiddenLayer(
            kind=ActivationKind(str(data["kind"])),
            centers_or_weights=data["centers_or_weights"],
            scales_or_biases=data["scales_or_biases"],
            seed=int(data["seed"]),
        )
        residual = float(data["residual_norm"])
        return FelmModel(
            hidden=layer,
            beta=data["beta"],
            m=int(data["m"]),
            class_names=tuple(str(c) for c in data["class_names"])
            if "class_names" in data else None,
            residual_norm=None if np.isnan(residual) else residual,
            norm_lo=data["norm_lo"] if "norm_lo" in data else None,
            norm_hi=data["norm_hi"] if "norm_hi" in data else None,
        )


def with_normalization(model: FelmModel, lo: np.ndarray, hi: np.ndarray) -> FelmModel:
    """Attach the min-max bounds the model's features were scaled with."""
    return replace(model, norm_lo=np.asarray(lo, dtype=np.float64),
                   norm_hi=np.asarray(hi, dtype=np.float64))
