"""Synthetic ad experiments with per-user potential outcomes and known
ground-truth incrementality.

The generating process, per experiment:

  * every user carries a latent organic conversion propensity q drawn
    from a Beta distribution whose mean is the funnel's organic rate;
  * assignment Z is Bernoulli(1 - control_share); exposure among Z=1 is
    a logistic tilt of standardized q scaled by ``selection_bias_strength``
    (zero strength makes exposure ignorable), with the intercept solved so
    the mean exposure rate matches ``exposure_rate_mean``;
  * exposed users receive >= 1 impressions at uniform times; clicking is
    another logistic tilt of q (heavier users both convert and click),
    which is what contaminates long-window last-click counts;
  * factual conversions are counterfactual (organic) conversions plus
    treatment-induced conversions among exposed users only, the latter
    split between click-driven and view-through per
    ``view_through_share``; click-driven conversions follow the user's
    click after an exponential delay;
  * costs accrue from impressions only.

Everything is deterministic given ``(config.seed, rct_index)``, so
experiments can be generated in parallel and collected in any order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.special import expit
from scipy.stats import beta as beta_dist

from pielab.core import (
    CAMPAIGN_VOCABULARIES,
    AttributionWindow,
    CampaignCharacteristics,
    FunnelLevel,
    ValidationError,
    Vertical,
    WINDOWS,
)

# Internal calibration constants (not part of the public config): the Beta
# concentration of the latent propensity, the organic click baseline tilt,
# per-vertical lift multipliers, and the RCT-level jitter scales. Frozen
# against the target normalized ICPD medians {1, 2.6, 11.69} and the
# ordering/selection-bias acceptance checks.
_PROPENSITY_CONCENTRATION = 12.0
_CLICK_TILT_BASE = 0.6
_CLICK_TILT_RETARGETING = 1.2
_ORGANIC_RATE_JITTER = 0.25
_ORGANIC_HORIZON_DAYS = 28
_LENGTH_CHOICES = (14, 21, 28, 35, 42)
_LENGTH_WEIGHTS = (0.15, 0.2, 0.4, 0.15, 0.1)
_VERTICAL_MIX = {
    Vertical.ECOMMERCE: 0.30,
    Vertical.RETAIL: 0.20,
    Vertical.FINANCIAL_SERVICES_TRAVEL: 0.15,
    Vertical.TECH_TELECOM: 0.12,
    Vertical.ENTERTAINMENT_MEDIA: 0.10,
    Vertical.CONSUMER_PACKAGED_GOODS: 0.08,
    Vertical.OTHER: 0.05,
}
_VERTICAL_LIFT_MULT = {
    Vertical.ECOMMERCE: 1.0,
    Vertical.RETAIL: 0.85,
    Vertical.FINANCIAL_SERVICES_TRAVEL: 0.7,
    Vertical.TECH_TELECOM: 1.1,
    Vertical.ENTERTAINMENT_MEDIA: 1.05,
    Vertical.CONSUMER_PACKAGED_GOODS: 1.25,
    Vertical.OTHER: 0.9,
}

#: Preset for the "strong confounding" regime used in bias demonstrations.
HIGH_SELECTION_BIAS = 5.0


@dataclass(frozen=True)
class DistributionSpec:
    """Tagged scalar distribution used in the simulation config.

    Kinds: ``constant(value)``, ``lognormal(median, sigma)``,
    ``exponential(mean)``, ``poisson_plus_one(mean)`` (1 + Poisson(mean-1)),
    ``uniform_int(low, high)`` (inclusive bounds).
    """

    kind: str
    params: dict = field(default_factory=dict)

    _KINDS = {
        "constant": ("value",),
        "lognormal": ("median", "sigma"),
        "exponential": ("mean",),
        "poisson_plus_one": ("mean",),
        "uniform_int": ("low", "high"),
    }

    def validate(self) -> "DistributionSpec":
        if self.kind not in self._KINDS:
            raise ValidationError(f"unknown distribution kind {self.kind!r}")
        missing = [p for p in self._KINDS[self.kind] if p not in self.params]
        if missing:
            raise ValidationError(f"distribution {self.kind!r} missing params {missing}")
        if self.kind == "poisson_plus_one" and self.params["mean"] < 1.0:
            raise ValidationError("poisson_plus_one mean must be >= 1")
        if self.kind == "uniform_int" and self.params["low"] > self.params["high"]:
            raise ValidationError("uniform_int low exceeds high")
        return self

    def sample(self, rng: np.random.Generator, size=None):
        p = self.params
        if self.kind == "constant":
            value = p["value"]
            return value if size is None else np.full(size, value)
        if self.kind == "lognormal":
            draw = rng.normal(size=size)
            return np.exp(math.log(p["median"]) + p["sigma"] * draw)
        if self.kind == "exponential":
            return rng.exponential(p["mean"], size=size)
        if self.kind == "poisson_plus_one":
            return 1 + rng.poisson(p["mean"] - 1.0, size=size)
        if self.kind == "uniform_int":
            return rng.integers(int(p["low"]), int(p["high"]) + 1, size=size)
        raise ValidationError(f"unknown distribution kind {self.kind!r}")

    def min_value(self) -> float:
        if self.kind == "constant":
            return self.params["value"]
        if self.kind == "uniform_int":
            return self.params["low"]
        if self.kind == "poisson_plus_one":
            return 1.0
        return 0.0

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}

    @classmethod
    def from_dict(cls, data) -> "DistributionSpec":
        if isinstance(data, (int, float)):
            return cls("constant", {"value": float(data)}).validate()
        data = dict(data)
        kind = data.pop("kind")
        return cls(kind, data).validate()


def _funnel_map(values: dict) -> dict:
    return {FunnelLevel(k) if not isinstance(k, FunnelLevel) else k: v for k, v in values.items()}


@dataclass(frozen=True)
class SimulationConfig:
    """Full experiment-generator configuration; see ``default()`` for the
    calibrated defaults."""

    n_rcts: int
    users_per_rct: DistributionSpec
    control_share: float
    exposure_rate_mean: float
    funnel_mix: tuple[float, float, float]  # (lower, mid, upper)
    organic_rate_by_funnel: dict[FunnelLevel, float]
    treatment_lift_distribution: dict[FunnelLevel, DistributionSpec]
    selection_bias_strength: float
    click_rate_given_exposure: float
    conversion_delay_distribution: dict[FunnelLevel, DistributionSpec]
    cost_per_thousand_impressions: float
    impressions_per_exposed_user: DistributionSpec
    view_through_share: float
    min_test_conversions: int
    seed: int

    @classmethod
    def default(cls, n_rcts: int = 300, seed: int = 0) -> "SimulationConfig":
        day = 86_400.0
        return cls(
            n_rcts=n_rcts,
            users_per_rct=DistributionSpec("constant", {"value": 50_000}),
            control_share=0.10,
            exposure_rate_mean=0.763,
            funnel_mix=(1 / 3, 1 / 3, 1 / 3),
            organic_rate_by_funnel={
                FunnelLevel.LOWER: 0.010,
                FunnelLevel.MID: 0.022,
                FunnelLevel.UPPER: 0.080,
            },
            treatment_lift_distribution={
                FunnelLevel.LOWER: DistributionSpec("lognormal", {"median": 0.002, "sigma": 0.55}),
                FunnelLevel.MID: DistributionSpec("lognormal", {"median": 0.0052, "sigma": 0.55}),
                FunnelLevel.UPPER: DistributionSpec("lognormal", {"median": 0.02338, "sigma": 0.55}),
            },
            selection_bias_strength=1.0,
            click_rate_given_exposure=0.10,
            conversion_delay_distribution={
                FunnelLevel.LOWER: DistributionSpec("exponential", {"mean": 1.5 * day}),
                FunnelLevel.MID: DistributionSpec("exponential", {"mean": 0.5 * day}),
                FunnelLevel.UPPER: DistributionSpec("exponential", {"mean": 0.125 * day}),
            },
            cost_per_thousand_impressions=5.0,
            impressions_per_exposed_user=DistributionSpec("poisson_plus_one", {"mean": 8.0}),
            view_through_share=0.2,
            min_test_conversions=0,
            seed=seed,
        )

    def validate(self) -> "SimulationConfig":
        if self.n_rcts < 1:
            raise ValidationError("n_rcts must be positive")
        self.users_per_rct.validate()
        if self.users_per_rct.min_value() < 1000:
            raise ValidationError("users_per_rct must be at least 1000")
        for name in ("control_share", "exposure_rate_mean", "click_rate_given_exposure", "view_through_share"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1]")
        if abs(sum(self.funnel_mix) - 1.0) > 1e-12:
            raise ValidationError("funnel_mix must sum to 1")
        if any(p < 0 for p in self.funnel_mix):
            raise ValidationError("funnel_mix entries must be nonnegative")
        for funnel in FunnelLevel:
            rate = self.organic_rate_by_funnel[funnel]
            if not 0.0 <= rate <= 1.0:
                raise ValidationError("organic rates must be in [0, 1]")
            self.treatment_lift_distribution[funnel].validate()
            self.conversion_delay_distribution[funnel].validate()
        if self.selection_bias_strength < 0:
            raise ValidationError("selection_bias_strength must be nonnegative")
        if self.cost_per_thousand_impressions <= 0:
            raise ValidationError("cost_per_thousand_impressions must be positive")
        self.impressions_per_exposed_user.validate()
        if self.impressions_per_exposed_user.min_value() < 1:
            raise ValidationError("impressions_per_exposed_user must be at least 1")
        if self.min_test_conversions < 0:
            raise ValidationError("min_test_conversions must be nonnegative")
        return self

    def to_dict(self) -> dict:
        return {
            "n_rcts": self.n_rcts,
            "users_per_rct": self.users_per_rct.to_dict(),
            "control_share": self.control_share,
            "exposure_rate_mean": self.exposure_rate_mean,
            "funnel_mix": list(self.funnel_mix),
            "organic_rate_by_funnel": {f.value: r for f, r in self.organic_rate_by_funnel.items()},
            "treatment_lift_distribution": {
                f.value: d.to_dict() for f, d in self.treatment_lift_distribution.items()
            },
            "selection_bias_strength": self.selection_bias_strength,
            "click_rate_given_exposure": self.click_rate_given_exposure,
            "conversion_delay_distribution": {
                f.value: d.to_dict() for f, d in self.conversion_delay_distribution.items()
            },
            "cost_per_thousand_impressions": self.cost_per_thousand_impressions,
            "impressions_per_exposed_user": self.impressions_per_exposed_user.to_dict(),
            "view_through_share": self.view_through_share,
            "min_test_conversions": self.min_test_conversions,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimulationConfig":
        base = cls.default()
        merged = base.to_dict()
        merged.update(data)
        return cls(
            n_rcts=int(merged["n_rcts"]),
            users_per_rct=DistributionSpec.from_dict(merged["users_per_rct"]),
            control_share=float(merged["control_share"]),
            exposure_rate_mean=float(merged["exposure_rate_mean"]),
            funnel_mix=tuple(float(x) for x in merged["funnel_mix"]),
            organic_rate_by_funnel=_funnel_map(
                {k: float(v) for k, v in merged["organic_rate_by_funnel"].items()}
            ),
            treatment_lift_distribution=_funnel_map(
                {k: DistributionSpec.from_dict(v) for k, v in merged["treatment_lift_distribution"].items()}
            ),
            selection_bias_strength=float(merged["selection_bias_strength"]),
            click_rate_given_exposure=float(merged["click_rate_given_exposure"]),
            conversion_delay_distribution=_funnel_map(
                {k: DistributionSpec.from_dict(v) for k, v in merged["conversion_delay_distribution"].items()}
            ),
            cost_per_thousand_impressions=float(merged["cost_per_thousand_impressions"]),
            impressions_per_exposed_user=DistributionSpec.from_dict(merged["impressions_per_exposed_user"]),
            view_through_share=float(merged["view_through_share"]),
            min_test_conversions=int(merged["min_test_conversions"]),
            seed=int(merged["seed"]),
        ).validate()


def load_config(path: Path | str) -> SimulationConfig:
    with open(path, encoding="utf-8") as fh:
        return SimulationConfig.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Event logs


@dataclass(frozen=True)
class Ragged:
    """Per-user variable-length float sequences in flat form."""

    values: np.ndarray  # float64, all users concatenated
    offsets: np.ndarray  # int64, len n_users + 1

    @classmethod
    def from_lists(cls, lists) -> "Ragged":
        offsets = np.zeros(len(lists) + 1, dtype=np.int64)
        np.cumsum([len(entry) for entry in lists], out=offsets[1:])
        values = np.concatenate([np.asarray(entry, dtype=np.float64) for entry in lists]) if offsets[-1] else np.empty(0)
        return cls(values=values, offsets=offsets)

    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    def for_user(self, i: int) -> np.ndarray:
        return self.values[self.offsets[i] : self.offsets[i + 1]]

    def __len__(self) -> int:
        return len(self.offsets) - 1


@dataclass(frozen=True)
class UserEvents:
    """One user's log row (convenience view for tests and export)."""

    user_id: int
    z: int
    w: int
    impression_times: tuple
    click_times: tuple
    conversion_times: tuple
    converted_counterfactual: int | None


@dataclass(frozen=True)
class EventLogs:
    """Columnar per-user event log for one experiment.

    ``converted_counterfactual`` is simulator-only ground truth (whether
    the user would have converted absent exposure); it is None for
    ingested logs that lack it.
    """

    z: np.ndarray  # uint8
    w: np.ndarray  # uint8
    impressions: Ragged
    clicks: Ragged
    conversions: Ragged  # factual conversion times
    converted_counterfactual: np.ndarray | None

    @property
    def n_users(self) -> int:
        return len(self.z)

    def validate(self) -> "EventLogs":
        control = self.z == 0
        if np.any(self.w[control] != 0):
            raise ValidationError("one-sided compliance violated: control user exposed")
        click_counts = self.clicks.counts()
        if np.any(click_counts[self.w == 0] > 0):
            raise ValidationError("click recorded for unexposed user")
        impression_counts = self.impressions.counts()
        if np.any(impression_counts[self.w == 0] > 0):
            raise ValidationError("impression recorded for unexposed user")
        if np.any(impression_counts[self.w == 1] == 0):
            raise ValidationError("exposed user with no impressions")
        return self

    def user(self, i: int) -> UserEvents:
        cf = self.converted_counterfactual
        return UserEvents(
            user_id=i,
            z=int(self.z[i]),
            w=int(self.w[i]),
            impression_times=tuple(self.impressions.for_user(i)),
            click_times=tuple(self.clicks.for_user(i)),
            conversion_times=tuple(self.conversions.for_user(i)),
            converted_counterfactual=None if cf is None else int(cf[i]),
        )

    @classmethod
    def from_users(cls, users) -> "EventLogs":
        cf_values = [u.converted_counterfactual for u in users]
        cf = None if any(v is None for v in cf_values) else np.asarray(cf_values, dtype=np.uint8)
        return cls(
            z=np.asarray([u.z for u in users], dtype=np.uint8),
            w=np.asarray([u.w for u in users], dtype=np.uint8),
            impressions=Ragged.from_lists([u.impression_times for u in users]),
            clicks=Ragged.from_lists([u.click_times for u in users]),
            conversions=Ragged.from_lists([u.conversion_times for u in users]),
            converted_counterfactual=cf,
        )


def conversion_click_delays(logs: EventLogs):
    """Per converting user: row index, exposure flag, and the delay from
    the last click at or before the (first) conversion.

    Returns ``(user_idx, exposed, delay)`` arrays over users with at
    least one factual conversion; ``delay`` is NaN when the user has no
    click at or before the conversion time.
    """
    conv_counts = logs.conversions.counts()
    converters = np.flatnonzero(conv_counts > 0)
    delays = np.full(converters.shape, np.nan)
    for out_idx, user_idx in enumerate(converters):
        conv_time = logs.conversions.for_user(user_idx).min()
        clicks = logs.clicks.for_user(user_idx)
        prior = clicks[clicks <= conv_time]
        if prior.size:
            delays[out_idx] = conv_time - prior.max()
    exposed = logs.w[converters] == 1
    return converters, exposed, delays


def last_click_counts(logs: EventLogs, window: AttributionWindow) -> dict[str, int]:
    """Partition exposed converters for one window: attributed within the
    window, clicked but outside it, and converted with no prior click."""
    _, exposed, delays = conversion_click_delays(logs)
    delays = delays[exposed]
    has_click = ~np.isnan(delays)
    within = int(np.sum(has_click & (delays <= window.seconds)))
    outside = int(np.sum(has_click & (delays > window.seconds)))
    no_click = int(np.sum(~has_click))
    return {"lc_within": within, "lc_outside": outside, "conversions_no_click": no_click}


# ---------------------------------------------------------------------------
# Ground truth


@dataclass(frozen=True)
class DecompositionTerms:
    lc_within: dict[AttributionWindow, int]
    lc_outside: dict[AttributionWindow, int]
    conversions_no_click: int
    conversions_organic_among_exposed: int


@dataclass(frozen=True)
class GroundTruth:
    rct_id: str
    true_att: float
    true_ic: float
    true_icpd: float
    decomposition: DecompositionTerms


def verify_decomposition(logs: EventLogs, truth: GroundTruth, window: AttributionWindow) -> bool:
    """Check the exact identity
    ``true_ic == LC_within + LC_outside + no_click - organic_among_exposed``
    with every term recomputed from the logs."""
    if logs.converted_counterfactual is None:
        raise ValidationError("logs lack counterfactual ground truth")
    counts = last_click_counts(logs, window)
    organic_exposed = int(np.sum((logs.converted_counterfactual == 1) & (logs.w == 1)))
    rhs = counts["lc_within"] + counts["lc_outside"] + counts["conversions_no_click"] - organic_exposed
    return float(rhs) == truth.true_ic


def naive_observational_att(logs: EventLogs) -> float:
    """Exposed-minus-unexposed mean conversion among test-group users.

    This is the biased comparison that platform selection effects
    invalidate; it is provided as the observational baseline only.
    """
    test = logs.z == 1
    exposed = test & (logs.w == 1)
    unexposed = test & (logs.w == 0)
    if not exposed.any() or not unexposed.any():
        raise ValidationError("need at least one exposed and one unexposed test user")
    converted = (logs.conversions.counts() > 0).astype(np.float64)
    return float(converted[exposed].mean() - converted[unexposed].mean())


# ---------------------------------------------------------------------------
# Generation


def _exposure_intercept(target: float, strength: float, a: float, b: float) -> float:
    """Solve c so that E[sigmoid(c + strength * (q - mu) / sd)] == target
    for q ~ Beta(a, b), via a deterministic quantile grid and bisection."""
    logit_target = math.log(target / (1.0 - target))
    if strength == 0.0:
        return logit_target
    grid = beta_dist.ppf((np.arange(512) + 0.5) / 512, a, b)
    mu = a / (a + b)
    sd = math.sqrt(a * b / ((a + b) ** 2 * (a + b + 1.0)))
    x = strength * (grid - mu) / sd

    def mean_rate(c: float) -> float:
        return float(expit(c + x).mean())

    lo, hi = logit_target - 1.0, logit_target + 1.0
    while mean_rate(lo) > target:
        lo -= 2.0
        if lo < -60:
            return lo
    while mean_rate(hi) < target:
        hi += 2.0
        if hi > 60:
            return hi
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mean_rate(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


_FUNNELS = (FunnelLevel.LOWER, FunnelLevel.MID, FunnelLevel.UPPER)


def generate_experiment(cfg: SimulationConfig, rct_index: int):
    """Generate one experiment.

    Returns ``(logs, truth, characteristics, cost)``; deterministic given
    ``(cfg.seed, rct_index)``.
    """
    cfg.validate()
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed & (2**64 - 1), rct_index)))

    n_users = int(np.asarray(cfg.users_per_rct.sample(rng)).item())
    if n_users * cfg.control_share < 10:
        raise ValidationError("degenerate design: expected control group below 10 users")

    funnel = _FUNNELS[rng.choice(3, p=np.asarray(cfg.funnel_mix))]
    verticals = list(_VERTICAL_MIX)
    vertical = verticals[rng.choice(len(verticals), p=np.asarray(list(_VERTICAL_MIX.values())))]
    codes = {
        name: vocab[rng.integers(len(vocab))]
        for name, vocab in CAMPAIGN_VOCABULARIES.items()
    }
    advertiser_experience = float(np.exp(math.log(2.0) + 0.7 * rng.normal()))
    retargeting_share = float(rng.beta(1.4, 1.8))
    length_days = int(rng.choice(_LENGTH_CHOICES, p=_LENGTH_WEIGHTS))
    length_seconds = length_days * 86_400.0

    organic_rate = cfg.organic_rate_by_funnel[funnel] * math.exp(_ORGANIC_RATE_JITTER * rng.normal())
    organic_rate = float(np.clip(organic_rate, 1e-5, 0.4))
    lift = float(cfg.treatment_lift_distribution[funnel].sample(rng)) * _VERTICAL_LIFT_MULT[vertical]

    a = organic_rate * _PROPENSITY_CONCENTRATION
    b = (1.0 - organic_rate) * _PROPENSITY_CONCENTRATION
    q = rng.beta(a, b, size=n_users)
    mu = a / (a + b)
    sd = math.sqrt(a * b / ((a + b) ** 2 * (a + b + 1.0)))
    x_latent = (q - mu) / sd

    z = (rng.random(n_users) < 1.0 - cfg.control_share).astype(np.uint8)
    strength = cfg.selection_bias_strength
    intercept = _exposure_intercept(cfg.exposure_rate_mean, strength, a, b)
    p_exposed = expit(intercept + strength * x_latent) if strength > 0 else np.full(n_users, cfg.exposure_rate_mean)
    w = ((z == 1) & (rng.random(n_users) < p_exposed)).astype(np.uint8)

    n_impressions = np.where(w == 1, cfg.impressions_per_exposed_user.sample(rng, n_users), 0).astype(np.int64)
    total_impressions = int(n_impressions.sum())
    impression_offsets = np.zeros(n_users + 1, dtype=np.int64)
    np.cumsum(n_impressions, out=impression_offsets[1:])
    impression_times = rng.uniform(0.0, length_seconds, total_impressions)
    impressions = Ragged(values=impression_times, offsets=impression_offsets)

    click_tilt = strength * (_CLICK_TILT_BASE + _CLICK_TILT_RETARGETING * retargeting_share)
    base_logit = math.log(cfg.click_rate_given_exposure / (1.0 - cfg.click_rate_given_exposure))
    p_click = expit(base_logit + click_tilt * x_latent)
    clicked_organically = (w == 1) & (rng.random(n_users) < p_click)

    converted_organically = rng.random(n_users) < q
    treated = (w == 1) & (rng.random(n_users) < lift)
    view_through = rng.random(n_users) < cfg.view_through_share
    click_driven = treated & ~view_through

    clicked = clicked_organically | click_driven
    click_time = rng.uniform(0.0, length_seconds, n_users)

    organic_conv_time = rng.uniform(0.0, (length_days + _ORGANIC_HORIZON_DAYS) * 86_400.0, n_users)
    delay = np.asarray(cfg.conversion_delay_distribution[funnel].sample(rng, n_users), dtype=np.float64)
    view_trigger = rng.uniform(0.0, length_seconds, n_users)
    treated_conv_time = np.where(click_driven, click_time, view_trigger) + delay

    incremental = treated & ~converted_organically
    converts = converted_organically | incremental
    conv_time = np.where(converted_organically, organic_conv_time, treated_conv_time)

    clicks = Ragged(
        values=click_time[clicked],
        offsets=np.concatenate(([0], np.cumsum(clicked.astype(np.int64)))),
    )
    conversions = Ragged(
        values=conv_time[converts],
        offsets=np.concatenate(([0], np.cumsum(converts.astype(np.int64)))),
    )

    logs = EventLogs(
        z=z,
        w=w,
        impressions=impressions,
        clicks=clicks,
        conversions=conversions,
        converted_counterfactual=converted_organically.astype(np.uint8),
    )

    cost = total_impressions * cfg.cost_per_thousand_impressions / 1000.0
    n_exposed = int(w.sum())
    if n_exposed == 0 or cost <= 0:
        raise ValidationError("degenerate experiment: no exposed users")

    true_ic = float(np.sum(incremental))
    truth = GroundTruth(
        rct_id=_rct_id(rct_index),
        true_att=true_ic / n_exposed,
        true_ic=true_ic,
        true_icpd=true_ic / cost,
        decomposition=_decomposition(logs),
    )

    characteristics = CampaignCharacteristics(
        vertical=vertical,
        funnel=funnel,
        targeting_descriptor=codes["targeting_descriptor"],
        bidding_strategy=codes["bidding_strategy"],
        optimization_setting=codes["optimization_setting"],
        advertiser_experience=advertiser_experience,
        campaign_objective=codes["campaign_objective"],
        audience_retargeting_share=retargeting_share,
        n_test_users=int(z.sum()),
        budget=round(cost * 1.1, 2),
        length_days=length_days,
    )
    return logs, truth, characteristics, cost


def _decomposition(logs: EventLogs) -> DecompositionTerms:
    within = {}
    outside = {}
    no_click = 0
    for window in WINDOWS:
        counts = last_click_counts(logs, window)
        within[window] = counts["lc_within"]
        outside[window] = counts["lc_outside"]
        no_click = counts["conversions_no_click"]
    organic = int(np.sum((logs.converted_counterfactual == 1) & (logs.w == 1)))
    return DecompositionTerms(
        lc_within=within,
        lc_outside=outside,
        conversions_no_click=no_click,
        conversions_organic_among_exposed=organic,
    )


def _rct_id(index: int) -> str:
    return f"rct{index:05d}"


def _experiment_id(index: int) -> str:
    return f"exp{index:05d}"


def simulate_many(cfg: SimulationConfig):
    """Yield ``(rct_id, experiment_id, logs, truth, characteristics, cost)``
    for each experiment, applying the optional minimum-test-conversions
    filter (which, like any size filter, selects on realized outcomes)."""
    cfg.validate()
    for rct_index in range(cfg.n_rcts):
        logs, truth, characteristics, cost = generate_experiment(cfg, rct_index)
        if cfg.min_test_conversions > 0:
            test_conversions = int(np.sum((logs.conversions.counts() > 0) & (logs.z == 1)))
            if test_conversions < cfg.min_test_conversions:
                continue
        yield _rct_id(rct_index), _experiment_id(rct_index), logs, truth, characteristics, cost


def with_seed(cfg: SimulationConfig, seed: int) -> SimulationConfig:
    return replace(cfg, seed=seed)
