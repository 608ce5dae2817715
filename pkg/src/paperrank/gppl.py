"""Gaussian-process preference learning over paper feature vectors.

A GP prior with a Matérn kernel sits on a latent per-paper utility; each
preference pair contributes a probit likelihood on the utility difference,

    p(x beats y | f) = Phi((f(x) - f(y)) / (sqrt(2) * noise_scale)),

and a tie contributes the two opposing observations at half weight.  The
posterior is approximated sparsely: a free-form Gaussian q(u) = N(m, S) over
the utilities at inducing inputs (k-means++ seeded from the feature vectors)
is optimized by stochastic gradient ascent on the evidence lower bound, with
Gauss-Hermite quadrature for the expected log-likelihood.  Utilities of any
paper, trained on or not, are posterior means read out through the kernel.
"""

from __future__ import annotations

import io
import json
import logging
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.special import log_ndtr
from sklearn.base import BaseEstimator
from sklearn.cluster import kmeans_plusplus

from .errors import ConfigError, CoverageError, SchemaError, TrainingError
from .features import FeatureLayout, FeatureVector, feature_matrix
from .kernels import KERNELS, gram, jittered_cholesky, rowwise
from .preferences import PreferencePair, STRICT, TIE
from .ranking import RankingResult

logger = logging.getLogger(__name__)

_QUAD_POINTS = 20
_SQRT2 = np.sqrt(2.0)
_LOG_2PI = np.log(2.0 * np.pi)

FeatureInput = Union[Mapping[str, FeatureVector], tuple[Sequence[str], np.ndarray]]


@dataclass(frozen=True)
class GpplConfig:
    kernel: str = "matern32"
    length_scale: float = 1.0
    inducing_count: int = 500
    batch_size: int = 512
    max_iterations: int = 1000
    convergence_tol: float = 1e-4
    noise_scale: float = 1.0
    learning_rate: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ConfigError(f"unknown kernel {self.kernel!r}; expected one of {KERNELS}")
        positive = {
            "length_scale": self.length_scale,
            "inducing_count": self.inducing_count,
            "batch_size": self.batch_size,
            "max_iterations": self.max_iterations,
            "convergence_tol": self.convergence_tol,
            "noise_scale": self.noise_scale,
            "learning_rate": self.learning_rate,
        }
        bad = [k for k, v in positive.items() if v <= 0]
        if bad:
            raise ConfigError(f"GPPL config fields must be positive: {bad}")


def _as_ids_matrix(features: FeatureInput) -> tuple[list[str], np.ndarray, Optional[FeatureLayout]]:
    if isinstance(features, Mapping):
        ids, X = feature_matrix(features)
        return ids, X, features[ids[0]].layout
    ids, X = features
    return list(ids), np.asarray(X, dtype=float), None


class GpplRanker(BaseEstimator):
    """Sparse variational GP preference learner with a fit/predict face.

    Parameters mirror :class:`GpplConfig`.  ``fit`` takes a mapping
    paper_id -> FeatureVector (or an ``(ids, matrix)`` tuple) plus the
    preference-pair multiset; ``predict_utilities`` ranks any papers with
    compatible features, including papers never seen in a pair.
    """

    def __init__(
        self,
        kernel: str = "matern32",
        length_scale: float = 1.0,
        inducing_count: int = 500,
        batch_size: int = 512,
        max_iterations: int = 1000,
        convergence_tol: float = 1e-4,
        noise_scale: float = 1.0,
        learning_rate: float = 0.05,
        seed: int = 0,
    ):
        self.kernel = kernel
        self.length_scale = length_scale
        self.inducing_count = inducing_count
        self.batch_size = batch_size
        self.max_iterations = max_iterations
        self.convergence_tol = convergence_tol
        self.noise_scale = noise_scale
        self.learning_rate = learning_rate
        self.seed = seed

    @classmethod
    def from_config(cls, config: GpplConfig) -> "GpplRanker":
        return cls(**asdict(config))

    def config_snapshot(self) -> dict:
        return {k: getattr(self, k) for k in GpplConfig.__dataclass_fields__}

    # ----- training ----------------------------------------------------

    def fit(self, features: FeatureInput, pairs: Sequence[PreferencePair]) -> "GpplRanker":
        GpplConfig(**self.config_snapshot())  # validate parameters
        self._prepare(features, pairs)
        self._optimize()
        return self

    def _prepare(self, features: FeatureInput, pairs: Sequence[PreferencePair]) -> None:
        ids, X, layout = _as_ids_matrix(features)
        if not pairs:
            raise TrainingError("no preference pairs to train on")
        index = {pid: i for i, pid in enumerate(ids)}
        missing = sorted(
            {pid for p in pairs for pid in (p.better, p.worse) if pid not in index}
        )
        if missing:
            raise CoverageError(f"pairs reference papers without features: {missing[:5]}")
        if not any(p.relation == STRICT for p in pairs):
            warnings.warn("training on tie pairs only: utilities are identified up to symmetry")

        rows: list[tuple[int, int, float]] = []
        for p in pairs:
            if p.relation == STRICT:
                rows.append((index[p.better], index[p.worse], 1.0))
            elif p.relation == TIE:
                rows.append((index[p.better], index[p.worse], 0.5))
                rows.append((index[p.worse], index[p.better], 0.5))
            else:
                raise ConfigError(f"unknown pair relation {p.relation!r}")
        vu = np.array([(v, u) for v, u, _ in rows], dtype=np.intp)
        wts = np.array([w for _, _, w in rows], dtype=float)
        agg, inverse = np.unique(vu, axis=0, return_inverse=True)
        weights = np.zeros(len(agg))
        np.add.at(weights, inverse, wts)

        self.paper_ids_ = ids
        self.layout_ = layout
        self.X_ = X
        self.pair_v_ = agg[:, 0]
        self.pair_u_ = agg[:, 1]
        self.pair_w_ = weights

        rng = np.random.default_rng(self.seed)
        X_unique = np.unique(X, axis=0)
        m_count = min(self.inducing_count, X_unique.shape[0])
        if m_count < X_unique.shape[0]:
            centers, _ = kmeans_plusplus(
                X_unique, n_clusters=m_count, random_state=int(rng.integers(2**31 - 1))
            )
            self.Z_ = np.unique(centers, axis=0)
        else:
            self.Z_ = X_unique
        self._factorize()

        # variational state: q(u) = N(m, L L^T), diagonal of L stored in log
        M = self.Z_.shape[0]
        self._m = np.zeros(M)
        self._theta = np.tril(self.L_mm_, -1) + np.diag(np.log(np.diag(self.L_mm_)))
        self._rng = rng

    def _factorize(self) -> None:
        K_mm = gram(self.kernel, self.Z_, length_scale=self.length_scale)
        self.L_mm_, self.jitter_ = jittered_cholesky(K_mm)
        if self.jitter_ > 0:
            logger.info("kernel matrix needed jitter %g", self.jitter_)
        A = cho_solve((self.L_mm_, True), gram(self.kernel, self.X_, self.Z_, self.length_scale).T).T
        G = A[self.pair_v_] - A[self.pair_u_]
        kappa = 2.0 * (
            1.0 - rowwise(self.kernel, self.X_[self.pair_v_], self.X_[self.pair_u_], self.length_scale)
        )
        K_mm_j = self.L_mm_ @ self.L_mm_.T
        self._A = A
        self._G = G
        self._t = np.maximum(kappa - np.einsum("ij,jk,ik->i", G, K_mm_j, G), 0.0)
        nodes, quad_w = np.polynomial.hermite.hermgauss(_QUAD_POINTS)
        self._quad_nodes = nodes
        self._quad_weights = quad_w / np.sqrt(np.pi)

    @staticmethod
    def _chol_from_theta(theta: np.ndarray) -> np.ndarray:
        return np.tril(theta, -1) + np.diag(np.exp(np.diag(theta)))

    def _pair_marginals(self, m, L, batch) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        G = self._G[batch]
        mu = G @ m
        GL = G @ L
        s2 = self._t[batch] + np.einsum("ij,ij->i", GL, GL)
        return mu, np.sqrt(np.maximum(s2, 1e-300)), GL

    def _expected_loglik(self, mu, s, batch) -> tuple[float, np.ndarray, np.ndarray]:
        """Quadrature values of per-pair expected log-likelihood and its
        derivatives wrt the difference mean and variance."""
        c = _SQRT2 * self.noise_scale
        z = (mu[:, None] + _SQRT2 * s[:, None] * self._quad_nodes[None, :]) / c
        log_phi = log_ndtr(z)
        ratio = np.exp(-0.5 * z * z - 0.5 * _LOG_2PI - log_phi)
        w = self.pair_w_[batch]
        value = float(np.sum(w * (log_phi @ self._quad_weights)))
        d_mu = w * ((ratio @ self._quad_weights) / c)
        d_s = w * (((ratio * self._quad_nodes[None, :]) @ self._quad_weights) * _SQRT2 / c)
        d_s2 = np.where(s > 1e-150, d_s / (2.0 * s), 0.0)
        return value, d_mu, d_s2

    def _kl(self, m, L, with_grads: bool = True):
        """KL(q(u) || p(u)) and its gradients wrt m and L."""
        M = len(m)
        Linv_Ls = solve_triangular(self.L_mm_, L, lower=True, check_finite=False)
        alpha = solve_triangular(self.L_mm_, m, lower=True, check_finite=False)
        logdet_k = 2.0 * np.sum(np.log(np.diag(self.L_mm_)))
        logdet_s = 2.0 * np.sum(np.log(np.diag(L)))
        kl = 0.5 * (np.sum(Linv_Ls**2) + alpha @ alpha - M + logdet_k - logdet_s)
        if not with_grads:
            return float(kl), None, None
        kinv_m = cho_solve((self.L_mm_, True), m, check_finite=False)
        # d/dL of 0.5*tr(K^-1 L L^T) - 0.5*log|L L^T|, on the lower-tri manifold
        kinv_L = cho_solve((self.L_mm_, True), L, check_finite=False)
        return float(kl), kinv_m, kinv_L - np.diag(1.0 / np.diag(L))

    def elbo_value(self, m: Optional[np.ndarray] = None, theta: Optional[np.ndarray] = None) -> float:
        """Full-data evidence lower bound at the given (or current) state."""
        m = self._m if m is None else m
        L = self._chol_from_theta(self._theta if theta is None else theta)
        mu, s, _ = self._pair_marginals(m, L, slice(None))
        value, _, _ = self._expected_loglik(mu, s, slice(None))
        kl, _, _ = self._kl(m, L, with_grads=False)
        return value - kl

    def _elbo_and_grads(self, m, theta, batch=None):
        """One pass over (a batch of) pairs: ELBO value (full data only, else
        None) plus analytic gradients wrt m and the raw Cholesky."""
        L = self._chol_from_theta(theta)
        if batch is None:
            batch = slice(None)
            scale = 1.0
        else:
            scale = len(self.pair_w_) / len(batch)
        G = self._G[batch]
        mu, s, GL = self._pair_marginals(m, L, batch)
        lik, d_mu, d_s2 = self._expected_loglik(mu, s, batch)
        kl, kl_dm, kl_dL = self._kl(m, L)
        grad_m = scale * (G.T @ d_mu) - kl_dm
        grad_L = 2.0 * scale * (G.T @ (d_s2[:, None] * GL)) - kl_dL
        grad_L = np.tril(grad_L)
        diag = np.diag_indices_from(grad_L)
        grad_theta = grad_L.copy()
        grad_theta[diag] = grad_L[diag] * np.diag(L)
        value = lik - kl if scale == 1.0 else None
        return value, grad_m, grad_theta

    def elbo_gradients(
        self, m: Optional[np.ndarray] = None, theta: Optional[np.ndarray] = None, batch=None
    ) -> tuple[np.ndarray, np.ndarray]:
        """Analytic ELBO gradients wrt the variational mean and the raw
        (log-diagonal) Cholesky parametrization."""
        m = self._m if m is None else m
        theta = self._theta if theta is None else theta
        _, grad_m, grad_theta = self._elbo_and_grads(m, theta, batch)
        return grad_m, grad_theta

    def _optimize(self) -> None:
        n_pairs = len(self.pair_w_)
        full_batch = self.batch_size >= n_pairs
        m, theta = self._m, self._theta
        adam_m = [np.zeros_like(m), np.zeros_like(theta)]
        adam_v = [np.zeros_like(m), np.zeros_like(theta)]
        beta1, beta2, eps = 0.9, 0.999, 1e-8
        history = []
        window = 5
        for step in range(1, self.max_iterations + 1):
            batch = None if full_batch else self._rng.choice(n_pairs, self.batch_size, replace=False)
            value, grad_m, grad_theta = self._elbo_and_grads(m, theta, batch)
            if value is None:
                value = self.elbo_value(m, theta)
            history.append(value)
            for slot, (param, grad) in enumerate(zip((m, theta), (grad_m, grad_theta))):
                adam_m[slot] = beta1 * adam_m[slot] + (1 - beta1) * grad
                adam_v[slot] = beta2 * adam_v[slot] + (1 - beta2) * grad * grad
                m_hat = adam_m[slot] / (1 - beta1**step)
                v_hat = adam_v[slot] / (1 - beta2**step)
                param += self.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
            if len(history) > window:
                deltas = np.diff(history[-(window + 1) :])
                if np.mean(np.abs(deltas)) < self.convergence_tol * max(1.0, abs(history[-1])):
                    break
        history.append(self.elbo_value(m, theta))
        self._m, self._theta = m, theta
        self.elbo_history_ = history
        self.n_iterations_ = len(history) - 1
        self._finalize()

    def _finalize(self) -> None:
        L = self._chol_from_theta(self._theta)
        self._S_chol = L
        self._kinv_m = cho_solve((self.L_mm_, True), self._m)
        self.utilities_ = dict(zip(self.paper_ids_, self._A @ self._m))

    # ----- prediction ---------------------------------------------------

    def _check_layout(self, layout: Optional[FeatureLayout], X: np.ndarray) -> None:
        if self.layout_ is not None and layout is not None and layout != self.layout_:
            raise SchemaError("feature layout does not match the layout the model was trained on")
        if X.shape[1] != self.X_.shape[1]:
            raise SchemaError(
                f"feature dimension {X.shape[1]} does not match the trained dimension {self.X_.shape[1]}"
            )

    def predict_f(self, features: FeatureInput) -> tuple[list[str], np.ndarray, np.ndarray]:
        """Posterior mean and variance of the latent utility per paper."""
        ids, X, layout = _as_ids_matrix(features)
        self._check_layout(layout, X)
        K_star = gram(self.kernel, X, self.Z_, self.length_scale)
        mean = K_star @ self._kinv_m
        A_star = cho_solve((self.L_mm_, True), K_star.T).T
        K_mm_j = self.L_mm_ @ self.L_mm_.T
        prior_var = 1.0 - np.einsum("ij,jk,ik->i", A_star, K_mm_j, A_star)
        AL = A_star @ self._S_chol
        var = np.maximum(prior_var + np.einsum("ij,ij->i", AL, AL), 0.0)
        return ids, mean, var

    def predict_utilities(self, features: FeatureInput) -> RankingResult:
        """Rank the given papers by posterior mean utility."""
        ids, mean, _ = self.predict_f(features)
        return RankingResult.from_utilities(
            "gppl", dict(zip(ids, mean.tolist())), config=self.config_snapshot()
        )

    # ----- persistence ---------------------------------------------------

    def save(self, path: str | Path) -> None:
        """Single-file snapshot of config, inducing inputs and posterior."""
        meta = {
            "format": "paperrank-gppl",
            "version": 1,
            "config": self.config_snapshot(),
            "paper_ids": self.paper_ids_,
            "layout_blocks": list(self.layout_.blocks) if self.layout_ is not None else None,
            "layout_columns": list(self.layout_.columns) if self.layout_ is not None else None,
        }
        with open(path, "wb") as fh:
            np.savez(
                fh,
                meta=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8),
                Z=self.Z_,
                m=self._m,
                theta=self._theta,
                X=self.X_,
            )

    @classmethod
    def load(cls, path: str | Path) -> "GpplRanker":
        with open(path, "rb") as fh:
            archive = np.load(io.BytesIO(fh.read()))
        meta = json.loads(archive["meta"].tobytes().decode("utf-8"))
        if meta.get("format") != "paperrank-gppl" or meta.get("version") != 1:
            raise SchemaError(f"{path}: not a version-1 GPPL snapshot")
        model = cls(**meta["config"])
        model.paper_ids_ = meta["paper_ids"]
        if meta["layout_columns"] is not None:
            model.layout_ = FeatureLayout(
                blocks=tuple((name, dim) for name, dim in meta["layout_blocks"]),
                columns=tuple(meta["layout_columns"]),
            )
        else:
            model.layout_ = None
        model.X_ = archive["X"]
        model.Z_ = archive["Z"]
        model._m = archive["m"]
        model._theta = archive["theta"]
        K_mm = gram(model.kernel, model.Z_, length_scale=model.length_scale)
        model.L_mm_, model.jitter_ = jittered_cholesky(K_mm)
        L = model._chol_from_theta(model._theta)
        model._S_chol = L
        model._kinv_m = cho_solve((model.L_mm_, True), model._m)
        A = cho_solve(
            (model.L_mm_, True), gram(model.kernel, model.X_, model.Z_, model.length_scale).T
        ).T
        model.utilities_ = dict(zip(model.paper_ids_, A @ model._m))
        return model


def fit_gppl(
    features: FeatureInput, pairs: Sequence[PreferencePair], config: Optional[GpplConfig] = None
) -> GpplRanker:
    """Contract-level entry point: fit a model from features and pairs."""
    return GpplRanker.from_config(config or GpplConfig()).fit(features, pairs)


def predict_utilities(model: GpplRanker, features: FeatureInput) -> RankingResult:
    return model.predict_utilities(features)
