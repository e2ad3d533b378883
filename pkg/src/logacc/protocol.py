"""Protocol runner and the certified-bound calculators.

A protocol run compiles M trap pairs (or modified traps), executes one shot
of each under the regime's effective Pauli channels, and turns the failure
count into a certified value gamma = 2 * p_inc / (1 - beta) that upper
bounds the target's total variation distance.  The derived quantities
(expectation error, infidelity, Renyi-2 entropy density, mitigation
headroom) are all monotone functions of gamma.

The reported gamma and the estimator accuracy epsilon are kept separate;
under the strictest reading the certified TVD bound is
gamma + 2 * epsilon / (1 - beta), and the acceptance checks use gamma +
epsilon directly as the per-run certificate.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .circuits import LogicalCircuit
from .dense import DENSE_QUBIT_CAP, exact_output_distribution
from .noise import RegimeConfig
from .simulator import TrapEnsemble, run_trap_shot
from .traps import (
    Construction,
    TargetSkeleton,
    compile_trap_modified,
    trap_channels,
)

__all__ = [
    "SoundnessParams",
    "MARKOVIAN",
    "NONMARKOVIAN_GATES",
    "GENERAL",
    "AccreditationResult",
    "required_traps",
    "run_protocol",
    "expectation_error_bound",
    "infidelity_bound",
    "entropy_density_bound",
    "mitigation_efficiency_check",
    "MITIGATION_GATE_BUDGET",
    "MITIGATION_GAMMA_THRESHOLD",
]


@dataclass(frozen=True)
class SoundnessParams:
    """Cancellation allowance beta and the matching soundness bound.

    The three supported settings trade noise assumptions against bound
    tightness: negligible cancellation (Markovian noise), cancellation
    confined to entangling-layer noise, and fully general noise, the last
    requiring the modified trap construction.
    """

    beta: float
    assumption: str

    _ALLOWED = {
        0.0: ("negligible_cancellation", 0.5),
        0.5: ("entangling_dominant", 0.75),
        7 / 8: ("general", 15 / 16),
    }

    def __post_init__(self):
        if self.beta not in self._ALLOWED:
            raise ValueError(f"beta must be one of {sorted(self._ALLOWED)}")
        expected = self._ALLOWED[self.beta][0]
        if self.assumption != expected:
            raise ValueError(f"beta {self.beta} pairs with assumption {expected!r}")

    @property
    def soundness(self) -> float:
        """Upper bound on the trap false-positive rate, 1 - (1-beta)/2."""
        return self._ALLOWED[self.beta][1]

    @property
    def requires_modified(self) -> bool:
        return self.beta == 7 / 8


MARKOVIAN = SoundnessParams(0.0, "negligible_cancellation")
NONMARKOVIAN_GATES = SoundnessParams(0.5, "entangling_dominant")
GENERAL = SoundnessParams(7 / 8, "general")


def required_traps(epsilon: float, alpha: float) -> int:
    """Smallest trap count strictly exceeding (2/eps^2) ln(4/(1-alpha))."""
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    bound = (2.0 / epsilon**2) * math.log(4.0 / (1.0 - alpha))
    return int(math.floor(bound)) + 1


MITIGATION_GATE_BUDGET = 0.8503
MITIGATION_GAMMA_THRESHOLD = 1.0 - math.exp(-MITIGATION_GATE_BUDGET)


def expectation_error_bound(gamma: float, operator_norm: float) -> float:
    """Certified expectation error: |<O>_exp - <O>_id| <= 2 gamma ||O||."""
    if gamma < 0 or operator_norm < 0:
        raise ValueError("inputs must be nonnegative")
    return 2.0 * gamma * operator_norm


def infidelity_bound(gamma: float) -> float:
    """gamma also upper-bounds the output-state infidelity 1 - F."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    return gamma


def _entropy_bound(gamma: float, n: int) -> tuple[float, bool]:
    # The substitution of gamma for the true error rate in the purity bound
    # is monotone only up to the quadratic's argmin 1/(1 + 2^-n); past it
    # (or if the log argument degenerates) the bound saturates at the
    # maximal density 1.
    if gamma >= 1.0 / (1.0 + 2.0**-n):
        return 1.0, True
    arg = 1.0 - 2.0 * gamma + gamma**2 * (1.0 + 2.0**-n)
    if arg <= 0.0:
        return 1.0, True
    return -math.log2(arg) / n, False


def entropy_density_bound(gamma: float, n: int) -> float:
    """Upper bound on the Renyi-2 entropy density of the output state.

    Evaluates -(1/n) log2(1 - 2 gamma + gamma^2 (1 + 2^-n)); outside the
    formula's validity range (gamma past the quadratic's argmin, where the
    log argument would grow again) the bound saturates at the maximal
    density 1, flagged with a warning.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if n < 1:
        raise ValueError("need at least one qubit")
    value, saturated = _entropy_bound(gamma, n)
    if saturated:
        warnings.warn("entropy bound saturated at the maximal density")
    return value


def mitigation_efficiency_check(gamma: float) -> bool:
    """True when gamma certifies that error mitigation stays affordable.

    A factor-30 sampling overhead cap corresponds to a gate budget
    N_G * eps_G <= 0.8503, i.e. gamma <= 1 - exp(-0.8503) ~= 0.57268.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    return gamma <= MITIGATION_GAMMA_THRESHOLD


@dataclass(frozen=True)
class AccreditationResult:
    """Trap statistics and every certified bound derived from them."""

    m: int
    n_inc: int
    beta: float
    epsilon: float
    alpha: float
    seed: int | None = None
    regime: dict = field(default_factory=dict)
    construction: str = Construction.STANDARD.value
    target_sample: int | None = None
    target_position: int | None = None

    def __post_init__(self):
        if not 0 <= self.n_inc <= self.m:
            raise ValueError("failed-trap count outside [0, m]")

    @property
    def p_inc(self) -> float:
        return self.n_inc / self.m

    @property
    def gamma(self) -> float:
        return 2.0 * self.p_inc / (1.0 - self.beta)

    @property
    def entropy_bound(self) -> float:
        return _entropy_bound(self.gamma, self.regime.get("n", 1))[0]

    @property
    def entropy_saturated(self) -> bool:
        return _entropy_bound(self.gamma, self.regime.get("n", 1))[1]

    @property
    def infidelity_bound(self) -> float:
        return infidelity_bound(self.gamma)

    @property
    def mitigation_ok(self) -> bool:
        return mitigation_efficiency_check(self.gamma)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n_inc": self.n_inc,
            "p_inc": self.p_inc,
            "beta": self.beta,
            "gamma": self.gamma,
            "epsilon": self.epsilon,
            "alpha": self.alpha,
            "entropy_bound": self.entropy_bound,
            "entropy_saturated": self.entropy_saturated,
            "infidelity_bound": self.infidelity_bound,
            "mitigation_ok": self.mitigation_ok,
            "seed": self.seed,
            "regime": self.regime,
            "construction": self.construction,
            "target_sample": self.target_sample,
            "target_position": self.target_position,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def run_protocol(
    target: LogicalCircuit,
    regime: RegimeConfig,
    soundness: SoundnessParams,
    rng: np.random.Generator,
    m: int | None = None,
    epsilon: float = 0.05,
    alpha: float = 0.95,
    construction: Construction = Construction.STANDARD,
    purified: bool | None = None,
    seed: int | None = None,
) -> AccreditationResult:
    """One protocol run: M trap shots, a recorded target shot, and gamma.

    Standard-construction runs score a trap as failed when either of its two
    magic-state versions (sharing all other randomness) leaves the all-zero
    output; the fully general soundness setting requires (and triggers) the
    modified construction, whose traps are scored singly.  One shot is taken
    per trap with fresh randomness; the target outcome is recorded (never
    scored) when the register is small enough for the dense oracle.
    """
    if m is None:
        m = required_traps(epsilon, alpha)
    if m < 1:
        raise ValueError("need at least one trap")
    if soundness.requires_modified and construction is not Construction.MODIFIED:
        raise ValueError(
            "the general soundness setting requires the modified trap construction"
        )
    if purified is None:
        purified = regime.purified
    if purified and construction is Construction.MODIFIED:
        # the modified gadgets draw unpurified |pi/2> / |pi> states; pairing
        # them with purified-rate targets would under-charge the traps
        raise ValueError(
            "the modified construction models unpurified magic states; "
            "pass purified=False to certify a purified regime with it"
        )

    if construction is Construction.MODIFIED:
        n_inc = 0
        for _ in range(m):
            trap = compile_trap_modified(target, rng)
            chans = trap_channels(trap, regime)
            if run_trap_shot(trap, chans, rng).failed:
                n_inc += 1
    else:
        skeleton = TargetSkeleton.from_circuit(target)
        ensemble = TrapEnsemble(skeleton, m, rng, purified=purified)
        plan = ensemble.regime_channel_plan(regime)
        first = ensemble.sample_shots(plan, rng)
        second = ensemble.sample_shots(plan, rng)
        n_inc = int((first.failed | second.failed).sum())

    target_position = int(rng.integers(0, m + 1))
    target_sample = None
    if target.n <= DENSE_QUBIT_CAP:
        dist = exact_output_distribution(target, regime.channels_for(target))
        target_sample = int(rng.choice(dist.size, p=dist))

    return AccreditationResult(
        m=m,
        n_inc=n_inc,
        beta=soundness.beta,
        epsilon=epsilon,
        alpha=alpha,
        seed=seed,
        regime={"n": target.n, **regime.to_dict()},
        construction=construction.value,
        target_sample=target_sample,
        target_position=target_position,
    )
