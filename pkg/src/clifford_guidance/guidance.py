"""Learned guidance function: a small MLP trained with a Pearson-correlation loss.

The network maps flattened tableau entries to a strictly positive score that
should rank tableaus by their distance to the identity.  Hidden layers use the
logistic sigmoid; the output layer is affine followed by ``exp``.  Training
minimises the negative Pearson correlation between the scores and the
random-walk cost of each tableau, one fresh batch per Adam step.
"""

from __future__ import annotations

import json
import logging
import math
import os
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .moves import MoveSet
from .tableau import PhaseMode, Tableau
from .walker import WalkConfig, WalkSample, sample_batch

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
FEATURE_LAYOUT_VERSION = 1
DEFAULT_LAYERS = (32, 16, 4, 1)
EXP_CLAMP = 30.0


class ZeroVarianceError(ValueError):
    """Pearson correlation is undefined because one input is constant."""


class ModelFormatError(ValueError):
    pass


class TrainingError(RuntimeError):
    pass


def feature_dim(n: int, phase_mode: PhaseMode | str) -> int:
    dim = 2 * n
    return dim * (dim + 1) if PhaseMode.parse(phase_mode) is PhaseMode.WITH_PHASES else dim * dim


def featurize_batch(tableaus: Sequence[Tableau], n: int, phase_mode: PhaseMode | str) -> np.ndarray:
    """Row-major flattening of ``[S | p]`` (or just ``S``) as float64 rows."""
    mode = PhaseMode.parse(phase_mode)
    dim = 2 * n
    if n > 32:
        raise ValueError("featurize supports n <= 32")
    for t in tableaus:
        if t.n != n:
            raise ValueError(f"tableau has n={t.n}, model expects n={n}")
    cols = np.array([t.cols for t in tableaus], dtype=np.uint64).reshape(len(tableaus), dim)
    shifts = np.arange(dim, dtype=np.uint64)
    # bits[b, r, c] = S[r][c]
    bits = (cols[:, None, :] >> shifts[None, :, None]) & np.uint64(1)
    if mode is PhaseMode.WITH_PHASES:
        phases = np.array([t.phases or 0 for t in tableaus], dtype=np.uint64)
        pbits = (phases[:, None] >> shifts[None, :]) & np.uint64(1)
        bits = np.concatenate([bits, pbits[:, :, None]], axis=2)
    return bits.reshape(len(tableaus), -1).astype(np.float64)


def featurize(t: Tableau, model_or_meta) -> np.ndarray:
    n = model_or_meta.n
    mode = model_or_meta.phase_mode
    return featurize_batch([t], n, mode)[0]


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass
class GuidanceModel:
    n: int
    phase_mode: PhaseMode
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    moveset_fingerprint: str = ""
    train_config_echo: dict = field(default_factory=dict)
    feature_layout_version: int = FEATURE_LAYOUT_VERSION

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def layer_dims(self) -> list[int]:
        return [w.shape[0] for w in self.weights]

    @property
    def activations(self) -> list[str]:
        return ["sigmoid"] * (len(self.weights) - 1) + ["exp"]

    @classmethod
    def initialize(cls, n: int, phase_mode: PhaseMode | str = PhaseMode.PHASELESS,
                   layer_dims: Sequence[int] = DEFAULT_LAYERS, seed: int = 0,
                   moveset_fingerprint: str = "") -> "GuidanceModel":
        """Glorot-uniform weights, zero biases."""
        mode = PhaseMode.parse(phase_mode)
        if layer_dims[-1] != 1:
            raise ValueError("final layer must have width 1")
        rng = np.random.default_rng([seed, 0x6D6F64656C])
        dims = [feature_dim(n, mode), *layer_dims]
        weights, biases = [], []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(n, mode, weights, biases, moveset_fingerprint)

    def parameters(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def copy(self) -> "GuidanceModel":
        return GuidanceModel(self.n, self.phase_mode, [w.copy() for w in self.weights],
                             [b.copy() for b in self.biases], self.moveset_fingerprint,
                             dict(self.train_config_echo), self.feature_layout_version)

    def _forward(self, x: np.ndarray):
        acts = [x]
        a = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w.T + b
            if i < last:
                a = _sigmoid(z)
                acts.append(a)
        z = z[:, 0]
        clamped = z > EXP_CLAMP
        if clamped.any():
            log.debug("exp head clamped on %d of %d inputs", int(clamped.sum()), len(z))
        out = np.exp(np.minimum(z, EXP_CLAMP))
        return out, acts, clamped

    def forward_batch(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != self.input_dim:
            raise ValueError(f"expected features of width {self.input_dim}, got {features.shape}")
        out = self._forward(features)[0]
        if not np.all(np.isfinite(out)):
            raise FloatingPointError("non-finite guidance output; model parameters are corrupt")
        return out

    def forward(self, features) -> float:
        return float(self.forward_batch(np.atleast_2d(features))[0])

    def __call__(self, tableaus: Sequence[Tableau]) -> np.ndarray:
        return self.forward_batch(featurize_batch(tableaus, self.n, self.phase_mode))

    def backward(self, features: np.ndarray, d_out: np.ndarray):
        """Return (outputs, gradients) for the scalar ``sum(d_out * outputs)``."""
        out, acts, clamped = self._forward(features)
        delta = (d_out * out * ~clamped)[:, None]
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.weights)
        for i in range(len(self.weights) - 1, -1, -1):
            grads_w[i] = delta.T @ acts[i]
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                a = acts[i]
                delta = (delta @ self.weights[i]) * a * (1.0 - a)
        grads = []
        for gw, gb in zip(grads_w, grads_b):
            grads.extend((gw, gb))
        return out, grads


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ValueError("pearson needs two equal-length sequences of length >= 2")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx <= 0.0 or syy <= 0.0:
        raise ZeroVarianceError("correlation undefined: zero variance")
    r = float(xc @ yc) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def pearson_loss_grad(scores: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Negative Pearson correlation and its gradient with respect to ``scores``."""
    xc = targets - targets.mean()
    yc = scores - scores.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx <= 0.0 or syy <= 0.0:
        raise ZeroVarianceError("correlation undefined: zero variance")
    norm = math.sqrt(sxx * syy)
    r = float(xc @ yc) / norm
    dr = xc / norm - r * yc / syy
    return -min(1.0, max(-1.0, r)), -dr


def batch_arrays(model: GuidanceModel, batch: Sequence[WalkSample]):
    feats = featurize_batch([s.tableau for s in batch], model.n, model.phase_mode)
    targets = np.array([s.ub_distance for s in batch], dtype=np.float64)
    return feats, targets


def loss(model: GuidanceModel, batch: Sequence[WalkSample]) -> float:
    feats, targets = batch_arrays(model, batch)
    return -pearson(targets, model.forward_batch(feats))


def loss_and_grad(model: GuidanceModel, feats: np.ndarray, targets: np.ndarray):
    out = model._forward(feats)[0]
    value, d_scores = pearson_loss_grad(out, targets)
    _, grads = model.backward(feats, d_scores)
    return value, grads


def gradient_check(model: GuidanceModel, feats: np.ndarray, targets: np.ndarray, probes: int,
                   rng: np.random.Generator, step: float = 1e-4, floor: float = 1e-8) -> list[dict]:
    """Compare analytic loss gradients with central differences on random parameters.

    Relative error is ``|a - f| / max(|a|, |f|, floor)``; the floor keeps
    parameters with a vanishing gradient from producing 0/0.
    """
    _, grads = loss_and_grad(model, feats, targets)
    params = model.parameters()
    sizes = np.array([p.size for p in params])
    out = []
    for flat in rng.choice(int(sizes.sum()), size=probes, replace=False):
        which = int(np.searchsorted(np.cumsum(sizes), flat, side="right"))
        offset = int(flat - (sizes[:which].sum() if which else 0))
        p = params[which].reshape(-1)
        saved = p[offset]
        p[offset] = saved + step
        up = pearson_loss_grad(model._forward(feats)[0], targets)[0]
        p[offset] = saved - step
        down = pearson_loss_grad(model._forward(feats)[0], targets)[0]
        p[offset] = saved
        numeric = (up - down) / (2 * step)
        analytic = float(grads[which].reshape(-1)[offset])
        rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)
        out.append({"param": which, "index": offset, "analytic": analytic,
                    "numeric": numeric, "rel_error": rel})
    return out


@dataclass
class TrainConfig:
    walk: WalkConfig
    batch_size: int = 2000
    num_batches: int = 1000
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    layer_dims: tuple[int, ...] = DEFAULT_LAYERS
    seed: int = 0
    checkpoint_interval: int = 0

    def __post_init__(self):
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2")
        if self.num_batches < 1:
            raise ValueError("num_batches must be >= 1")
        for name in ("learning_rate", "adam_epsilon"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1):
            raise ValueError("Adam betas must lie in [0, 1)")

    def echo(self) -> dict:
        d = asdict(self)
        d["walk"] = {**d["walk"], "scaling": self.walk.scaling.value,
                     "phase_mode": self.walk.phase_mode.value, "l_max": self.walk.l_max}
        d["layer_dims"] = list(self.layer_dims)
        return d


@dataclass
class TrainReport:
    losses: list[float]
    final_loss: float
    wall_time: float
    config: dict


class Adam:
    def __init__(self, params: list[np.ndarray], lr: float, beta1: float, beta2: float, eps: float):
        self.params = params
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: list[np.ndarray]) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def train(cfg: TrainConfig, ms: MoveSet, checkpoint_dir: str | Path | None = None,
          progress=None, batch_source=None) -> tuple[GuidanceModel, TrainReport]:
    """Run ``num_batches`` Adam steps, each on a fresh batch of random walks.

    ``batch_source(step)`` may replace the walk sampler, e.g. to replay a
    stored dataset.
    """
    if cfg.walk.n != ms.n:
        raise ValueError(f"walk config n={cfg.walk.n} but move set n={ms.n}")
    model = GuidanceModel.initialize(ms.n, cfg.walk.phase_mode, cfg.layer_dims, cfg.seed,
                                     ms.fingerprint)
    model.train_config_echo = cfg.echo()
    opt = Adam(model.parameters(), cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2,
               cfg.adam_epsilon)
    losses: list[float] = []
    start = time.perf_counter()
    for step in range(cfg.num_batches):
        if batch_source is None:
            batch = sample_batch(cfg.walk, ms, cfg.batch_size, batch_index=step)
        else:
            batch = batch_source(step)
        feats, targets = batch_arrays(model, batch)
        try:
            value, grads = loss_and_grad(model, feats, targets)
        except ZeroVarianceError as exc:
            raise TrainingError(f"step {step}: constant guidance output on batch ({exc})") from exc
        if not math.isfinite(value) or not all(np.all(np.isfinite(g)) for g in grads):
            norms = [float(np.linalg.norm(p)) for p in model.parameters()]
            raise TrainingError(f"non-finite loss/gradient at step {step}: loss={value}, "
                                f"parameter norms={norms}")
        losses.append(value)
        opt.step(grads)
        if progress is not None:
            progress(step, value)
        if checkpoint_dir is not None and cfg.checkpoint_interval > 0 \
                and (step + 1) % cfg.checkpoint_interval == 0:
            save_model(model, Path(checkpoint_dir) / f"checkpoint_{step + 1:06d}.json")
    wall = time.perf_counter() - start
    if checkpoint_dir is not None and cfg.checkpoint_interval > 0:
        save_model(model, Path(checkpoint_dir) / "checkpoint_final.json")
    return model, TrainReport(losses, losses[-1], wall, cfg.echo())


# -- persistence ---------------------------------------------------------------


def model_to_dict(model: GuidanceModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "n": model.n,
        "phase_mode": model.phase_mode.value,
        "input_dim": model.input_dim,
        "feature_layout_version": model.feature_layout_version,
        "layer_dims": model.layer_dims,
        "activations": model.activations,
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "moveset_fingerprint": model.moveset_fingerprint,
        "train_config_echo": model.train_config_echo,
    }


def model_from_dict(d: dict, n: int | None = None,
                    phase_mode: PhaseMode | str | None = None) -> GuidanceModel:
    try:
        if d["format_version"] != FORMAT_VERSION:
            raise ModelFormatError(f"unsupported model format_version {d['format_version']}")
        mode = PhaseMode.parse(d["phase_mode"])
        model_n = int(d["n"])
        weights = [np.array(w, dtype=np.float64) for w in d["weights"]]
        biases = [np.array(b, dtype=np.float64) for b in d["biases"]]
        layer_dims = list(d["layer_dims"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"malformed model record: {exc}") from exc
    expected_in = feature_dim(model_n, mode)
    if int(d.get("input_dim", expected_in)) != expected_in:
        raise ModelFormatError(f"input_dim {d['input_dim']} does not match n={model_n}")
    if len(weights) != len(biases) or len(weights) != len(layer_dims) or not weights:
        raise ModelFormatError("layer count mismatch")
    prev = expected_in
    for w, b, width in zip(weights, biases, layer_dims):
        if w.ndim != 2 or w.shape != (width, prev) or b.shape != (width,):
            raise ModelFormatError(f"layer shape mismatch: weight {w.shape}, bias {b.shape}")
        prev = width
    if prev != 1:
        raise ModelFormatError("final layer must have width 1")
    if not all(np.all(np.isfinite(p)) for p in weights + biases):
        raise ModelFormatError("non-finite parameters")
    if n is not None and n != model_n:
        raise ModelFormatError(f"model was trained for n={model_n}, requested n={n}")
    if phase_mode is not None and PhaseMode.parse(phase_mode) is not mode:
        raise ModelFormatError(f"model phase mode {mode.value} does not match request")
    return GuidanceModel(model_n, mode, weights, biases, d.get("moveset_fingerprint", ""),
                         d.get("train_config_echo", {}),
                         int(d.get("feature_layout_version", FEATURE_LAYOUT_VERSION)))


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_model(model: GuidanceModel, path: str | Path) -> None:
    atomic_write_text(path, json.dumps(model_to_dict(model), indent=1) + "\n")


def load_model(path: str | Path, n: int | None = None,
               phase_mode: PhaseMode | str | None = None) -> GuidanceModel:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: corrupt model file ({exc})") from exc
    return model_from_dict(d, n, phase_mode)


def loss_csv(losses: Sequence[float]) -> str:
    return "step,loss\n" + "".join(f"{i},{v!r}\n" for i, v in enumerate(losses))
