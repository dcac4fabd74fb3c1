"""Bounded, symmetric noise models with sub- and super-critical certificates.

Every model maps uniform doubles u in [0, 1) to noise values through its
inverse CDF, so a seeded uniform stream fully determines the noise sequence
whatever the model kind.
"""

from typing import Annotated, Literal

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field
from scipy import stats

# divergence is only guaranteed for eps <= 1/3
DIVERGENCE_EPSILON_LIMIT = 1.0 / 3.0


class ZeroNoise(BaseModel):
    """Degenerate noise: every draw is 0 (noise-free HK dynamics)."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["zero"] = "zero"

    @property
    def support_bound(self) -> float:
        return 0.0

    @property
    def variance(self) -> float:
        return 0.0

    def prob_at_least(self, a: float) -> float:
        return 0.0

    def prob_greater(self, a: float) -> float:
        return 0.0

    def witness_level(self) -> float:
        return 0.0

    def transform(self, u: np.ndarray) -> np.ndarray:
        return np.zeros_like(u, dtype=np.float64)


class UniformNoise(BaseModel):
    """Noise uniformly distributed on [-delta, delta]."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["uniform"] = "uniform"
    delta: float = Field(..., gt=0.0)

    @property
    def support_bound(self) -> float:
        return self.delta

    @property
    def variance(self) -> float:
        return self.delta**2 / 3.0

    def prob_at_least(self, a: float) -> float:
        """P{xi >= a} for a > 0."""
        return max(0.0, self.delta - a) / (2.0 * self.delta)

    def prob_greater(self, a: float) -> float:
        """P{xi > a} for a > 0 (equal to prob_at_least, the law is continuous)."""
        return self.prob_at_least(a)

    def witness_level(self) -> float:
        return self.delta / 2.0

    def transform(self, u: np.ndarray) -> np.ndarray:
        return self.delta * (2.0 * u - 1.0)


class TruncatedGaussianNoise(BaseModel):
    """Centered Gaussian with scale sigma, hard-truncated to [-bound, bound].

    The truncation renormalizes the density on the symmetric interval, so the
    mean stays exactly 0.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["truncated_gaussian"] = "truncated_gaussian"
    sigma: float = Field(..., gt=0.0)
    bound: float = Field(..., gt=0.0)

    def distribution(self):  # noqa: ANN201 - scipy frozen distribution
        """Return the frozen scipy distribution."""
        limit = self.bound / self.sigma
        return stats.truncnorm(-limit, limit, loc=0.0, scale=self.sigma)

    @property
    def support_bound(self) -> float:
        return self.bound

    @property
    def variance(self) -> float:
        return float(self.distribution().var())

    def prob_at_least(self, a: float) -> float:
        if a >= self.bound:
            return 0.0
        return float(self.distribution().sf(a))

    def prob_greater(self, a: float) -> float:
        return self.prob_at_least(a)

    def witness_level(self) -> float:
        return self.bound / 2.0

    def transform(self, u: np.ndarray) -> np.ndarray:
        return np.clip(self.distribution().ppf(u), -self.bound, self.bound)


class DiscreteNoise(BaseModel):
    """Three-point noise: +delta and -delta each with jump_probability/2, else 0."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["discrete"] = "discrete"
    delta: float = Field(..., gt=0.0)
    jump_probability: float = Field(default=1.0, gt=0.0, le=1.0)

    @property
    def support_bound(self) -> float:
        return self.delta

    @property
    def variance(self) -> float:
        return self.jump_probability * self.delta**2

    def prob_at_least(self, a: float) -> float:
        return self.jump_probability / 2.0 if a <= self.delta else 0.0

    def prob_greater(self, a: float) -> float:
        return self.jump_probability / 2.0 if a < self.delta else 0.0

    def witness_level(self) -> float:
        return self.delta

    def transform(self, u: np.ndarray) -> np.ndarray:
        half = self.jump_probability / 2.0
        return np.where(u < half, -self.delta, np.where(u >= 1.0 - half, self.delta, 0.0))


NoiseModel = Annotated[
    ZeroNoise | UniformNoise | TruncatedGaussianNoise | DiscreteNoise,
    Field(discriminator="kind"),
]


class Theorem2Certificate(BaseModel):
    """Witness (a, p) for the sub-critical quasi-consensus hypothesis."""

    model_config = ConfigDict(frozen=True)

    epsilon: float
    support_bound: float
    a: float = Field(..., gt=0.0, lt=1.0)
    p: float = Field(..., gt=0.0, lt=1.0)


class Theorem3Certificate(BaseModel):
    """Lower bound q on the tail masses beyond eps/2 (divergence hypothesis)."""

    model_config = ConfigDict(frozen=True)

    epsilon: float
    q: float = Field(..., gt=0.0, le=1.0)


class CertificateRefusal(BaseModel):
    """A certificate that could not be issued, with the reason."""

    model_config = ConfigDict(frozen=True)

    theorem: Literal[2, 3]
    epsilon: float
    reason: str


def sample_vector(model: NoiseModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n independent noise values.

    Args:
        model: Noise model to sample
        n: Number of draws (one per agent)
        rng: Seeded generator; exactly n uniform doubles are consumed

    Returns:
        Array of n noise values

    Raises:
        ValueError: If n < 1
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return model.transform(rng.random(n))


def certify_theorem2(model: NoiseModel, eps: float) -> Theorem2Certificate | CertificateRefusal:
    """Certify |xi| <= eps/2 surely plus P{xi >= a}, P{xi <= -a} >= p.

    Args:
        model: Noise model to check
        eps: Confidence threshold

    Returns:
        Certificate with analytic (a, p), or a refusal with the reason
    """
    half = eps / 2.0
    if model.variance <= 0.0:
        return CertificateRefusal(
            theorem=2, epsilon=eps, reason="degenerate noise: no a > 0 carries positive mass"
        )
    if model.support_bound > half:
        return CertificateRefusal(
            theorem=2,
            epsilon=eps,
            reason=f"support bound {model.support_bound:g} exceeds eps/2 = {half:g}",
        )
    a = model.witness_level()
    return Theorem2Certificate(
        epsilon=eps, support_bound=model.support_bound, a=a, p=model.prob_at_least(a)
    )


def certify_theorem3(model: NoiseModel, eps: float) -> Theorem3Certificate | CertificateRefusal:
    """Certify P{xi > eps/2} >= q and P{xi < -eps/2} >= q for some q > 0.

    Args:
        model: Noise model to check
        eps: Confidence threshold

    Returns:
        Certificate with the analytic tail mass q, or a refusal with the reason
    """
    if eps > DIVERGENCE_EPSILON_LIMIT:
        logger.warning(
            f"eps={eps:g} exceeds 1/3; the divergence guarantee is only proven for eps <= 1/3"
        )
    # symmetric laws: the lower tail equals the upper tail
    q = model.prob_greater(eps / 2.0)
    if q <= 0.0:
        return CertificateRefusal(
            theorem=3, epsilon=eps, reason=f"no probability mass beyond eps/2 = {eps / 2.0:g}"
        )
    return Theorem3Certificate(epsilon=eps, q=q)


def is_subcritical(model: NoiseModel, eps: float) -> bool:
    """Return True when the model carries a sub-critical certificate at eps."""
    return isinstance(certify_theorem2(model, eps), Theorem2Certificate)
