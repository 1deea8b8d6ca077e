"""Shared domain vocabulary: funnels, verticals, attribution windows,
campaign characteristics, and the per-RCT summary record.

All types here are immutable value records and safe to share across
threads or processes. Categorical campaign fields are validated against
closed vocabularies declared in ``schemas/campaign_vocab.json`` so that
one-hot feature layouts stay stable between training and scoring.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from importlib import resources
from pathlib import Path


class ValidationError(ValueError):
    """A record violated a declared invariant; the message names it."""


class FunnelLevel(Enum):
    LOWER = "lower"
    MID = "mid"
    UPPER = "upper"

    @classmethod
    def parse(cls, text: str) -> "FunnelLevel":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValidationError(f"unknown funnel level: {text!r}") from None


class Vertical(Enum):
    ECOMMERCE = "ecommerce"
    RETAIL = "retail"
    FINANCIAL_SERVICES_TRAVEL = "financial_services_travel"
    TECH_TELECOM = "tech_telecom"
    ENTERTAINMENT_MEDIA = "entertainment_media"
    CONSUMER_PACKAGED_GOODS = "consumer_packaged_goods"
    OTHER = "other"

    @classmethod
    def parse(cls, text: str, lenient: bool = False) -> "Vertical":
        """Parse a vertical name. Unknown names map to OTHER only when
        ``lenient`` is set (mirrors the pooling of small verticals);
        otherwise they are an error."""
        try:
            return cls(text.strip().lower())
        except ValueError:
            if lenient:
                return cls.OTHER
            raise ValidationError(f"unknown vertical: {text!r}") from None


class AttributionWindow(Enum):
    H1 = ("1h", 3_600)
    D1 = ("1d", 86_400)
    D7 = ("7d", 604_800)
    D28 = ("28d", 2_419_200)

    def __init__(self, label: str, seconds: int):
        self.label = label
        self.seconds = seconds

    @classmethod
    def parse(cls, text: str) -> "AttributionWindow":
        for window in cls:
            if window.label == text.strip().lower():
                return window
        raise ValidationError(f"unknown attribution window: {text!r}")


#: All windows in increasing duration order; lcpd monotonicity and the
#: model feature layout both follow this order.
WINDOWS = (
    AttributionWindow.H1,
    AttributionWindow.D1,
    AttributionWindow.D7,
    AttributionWindow.D28,
)

with resources.files("pielab.schemas").joinpath("campaign_vocab.json").open() as _fh:
    CAMPAIGN_VOCABULARIES: dict[str, tuple[str, ...]] = {
        key: tuple(values) for key, values in json.load(_fh).items()
    }


@dataclass(frozen=True)
class CampaignCharacteristics:
    """Pre-determined advertiser/campaign features (known without an RCT)."""

    vertical: Vertical
    funnel: FunnelLevel
    targeting_descriptor: str
    bidding_strategy: str
    optimization_setting: str
    advertiser_experience: float
    campaign_objective: str
    audience_retargeting_share: float
    n_test_users: int
    budget: float
    length_days: int

    def validate(self) -> "CampaignCharacteristics":
        for field in (
            "targeting_descriptor",
            "bidding_strategy",
            "optimization_setting",
            "campaign_objective",
        ):
            code = getattr(self, field)
            if code not in CAMPAIGN_VOCABULARIES[field]:
                raise ValidationError(f"{field} code {code!r} not in declared vocabulary")
        if not self.advertiser_experience >= 0:
            raise ValidationError("advertiser_experience must be nonnegative")
        if not 0.0 <= self.audience_retargeting_share <= 1.0:
            raise ValidationError("audience_retargeting_share must be in [0, 1]")
        if self.n_test_users < 1:
            raise ValidationError("n_test_users must be at least 1")
        if not self.budget > 0:
            raise ValidationError("budget must be positive")
        if self.length_days < 1:
            raise ValidationError("length_days must be a positive count")
        return self


@dataclass(frozen=True)
class RctSummary:
    """One row per RCT: causal outcome, its uncertainty, proxy metrics,
    and campaign characteristics.

    ``icpd``/``icpd_se`` are stored redundantly with (att, n_exposed,
    cost) and cross-checked on validation, since external data may
    supply either form.
    """

    rct_id: str
    experiment_id: str
    characteristics: CampaignCharacteristics
    cost: float
    n_exposed: int
    att: float
    att_se: float
    icpd: float
    icpd_se: float
    lcpd: dict[AttributionWindow, float]
    randomization_p: float


def validate_summary(summary: RctSummary) -> RctSummary:
    """Return ``summary`` unchanged if every invariant holds.

    Raises
    ------
    ValidationError
        Naming the first violated invariant, e.g.
        ``"lcpd not monotone in window"``.
    """
    summary.characteristics.validate()
    if not summary.cost > 0:
        raise ValidationError("cost must be positive")
    if summary.n_exposed < 0:
        raise ValidationError("n_exposed must be nonnegative")
    if summary.n_exposed > summary.characteristics.n_test_users:
        raise ValidationError("n_exposed exceeds n_test_users")
    if not summary.att_se >= 0:
        raise ValidationError("att_se must be nonnegative")
    expected_icpd = summary.att * summary.n_exposed / summary.cost
    if not math.isclose(summary.icpd, expected_icpd, rel_tol=1e-9, abs_tol=1e-12):
        raise ValidationError("icpd inconsistent with att * n_exposed / cost")
    expected_se = summary.att_se * summary.n_exposed / summary.cost
    if not math.isclose(summary.icpd_se, expected_se, rel_tol=1e-9, abs_tol=1e-12):
        raise ValidationError("icpd_se inconsistent with att_se * n_exposed / cost")
    for window in WINDOWS:
        if window not in summary.lcpd:
            raise ValidationError(f"lcpd missing window {window.label}")
        if not summary.lcpd[window] >= 0:
            raise ValidationError("lcpd must be nonnegative")
    values = [summary.lcpd[window] for window in WINDOWS]
    if any(later < earlier for earlier, later in zip(values, values[1:])):
        raise ValidationError("lcpd not monotone in window")
    if not 0.0 <= summary.randomization_p <= 1.0:
        raise ValidationError("randomization_p must be in [0, 1]")
    return summary


# ---------------------------------------------------------------------------
# rct_summaries.csv schema

RCT_SUMMARY_COLUMNS = (
    "rct_id",
    "experiment_id",
    "funnel",
    "vertical",
    "targeting_descriptor",
    "bidding_strategy",
    "optimization_setting",
    "advertiser_experience",
    "campaign_objective",
    "audience_retargeting_share",
    "n_test_users",
    "budget",
    "length_days",
    "cost",
    "n_exposed",
    "att",
    "att_se",
    "lcpd_1h",
    "lcpd_1d",
    "lcpd_7d",
    "lcpd_28d",
    "randomization_p",
)


def format_value(value) -> str:
    """Deterministic text form: shortest round-trip repr for floats."""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path | str, header, rows) -> None:
    """Write a CSV with a fixed header, UTF-8, '\\n' line endings, and
    round-trip float formatting (identical inputs give identical bytes)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def summary_to_row(summary: RctSummary) -> list:
    c = summary.characteristics
    return [
        summary.rct_id,
        summary.experiment_id,
        c.funnel.value,
        c.vertical.value,
        c.targeting_descriptor,
        c.bidding_strategy,
        c.optimization_setting,
        c.advertiser_experience,
        c.campaign_objective,
        c.audience_retargeting_share,
        c.n_test_users,
        c.budget,
        c.length_days,
        summary.cost,
        summary.n_exposed,
        summary.att,
        summary.att_se,
        summary.lcpd[AttributionWindow.H1],
        summary.lcpd[AttributionWindow.D1],
        summary.lcpd[AttributionWindow.D7],
        summary.lcpd[AttributionWindow.D28],
        summary.randomization_p,
    ]


def write_summaries(path: Path | str, summaries) -> None:
    write_csv(path, RCT_SUMMARY_COLUMNS, (summary_to_row(s) for s in summaries))


def _parse_cell(row_idx: int, column: str, raw: str, kind):
    try:
        return kind(raw)
    except ValueError:
        raise ValidationError(
            f"row {row_idx}, column {column!r}: cannot parse {raw!r}"
        ) from None


def read_summaries(path: Path | str, lenient_verticals: bool = False) -> list[RctSummary]:
    """Read and validate an ``rct_summaries.csv`` file.

    Schema violations report the offending row and column. Unknown
    verticals map to ``other`` only when ``lenient_verticals`` is set.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file, header required") from None
        if tuple(header) != RCT_SUMMARY_COLUMNS:
            raise ValidationError(
                f"{path}: header mismatch: expected {list(RCT_SUMMARY_COLUMNS)}, got {header}"
            )
        summaries = []
        for row_idx, row in enumerate(reader, start=2):
            if len(row) != len(RCT_SUMMARY_COLUMNS):
                raise ValidationError(
                    f"{path}: row {row_idx}: expected {len(RCT_SUMMARY_COLUMNS)} cells, got {len(row)}"
                )
            cell = dict(zip(RCT_SUMMARY_COLUMNS, row))

            def pick(column, kind, _cell=cell, _row_idx=row_idx):
                return _parse_cell(_row_idx, column, _cell[column], kind)

            try:
                vertical = Vertical.parse(cell["vertical"], lenient=lenient_verticals)
                funnel = FunnelLevel.parse(cell["funnel"])
            except ValidationError as exc:
                raise ValidationError(f"{path}: row {row_idx}: {exc}") from None
            characteristics = CampaignCharacteristics(
                vertical=vertical,
                funnel=funnel,
                targeting_descriptor=cell["targeting_descriptor"],
                bidding_strategy=cell["bidding_strategy"],
                optimization_setting=cell["optimization_setting"],
                advertiser_experience=pick("advertiser_experience", float),
                campaign_objective=cell["campaign_objective"],
                audience_retargeting_share=pick("audience_retargeting_share", float),
                n_test_users=pick("n_test_users", int),
                budget=pick("budget", float),
                length_days=pick("length_days", int),
            )
            summary = RctSummary(
                rct_id=cell["rct_id"],
                experiment_id=cell["experiment_id"],
                characteristics=characteristics,
                cost=pick("cost", float),
                n_exposed=pick("n_exposed", int),
                att=pick("att", float),
                att_se=pick("att_se", float),
                icpd=pick("att", float) * pick("n_exposed", int) / pick("cost", float),
                icpd_se=pick("att_se", float) * pick("n_exposed", int) / pick("cost", float),
                lcpd={w: pick(f"lcpd_{w.label}", float) for w in WINDOWS},
                randomization_p=pick("randomization_p", float),
            )
            try:
                summaries.append(validate_summary(summary))
            except ValidationError as exc:
                raise ValidationError(f"{path}: row {row_idx}: {exc}") from None
    return summaries


def with_icpd(summary: RctSummary, icpd: float, icpd_se: float) -> RctSummary:
    """Copy of ``summary`` with explicit icpd fields (ingestion helper)."""
    return replace(summary, icpd=icpd, icpd_se=icpd_se)
