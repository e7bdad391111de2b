"""Wire models for certificates, reports and suite results."""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

Variant = Literal["thm12a", "thm12b", "thm12c", "thm14", "thm16"]
Ordering = Literal["weak", "strict"]

SCHEMA_VERSION = 1


class Enclosure(BaseModel):
    """A real enclosure as decimal strings; lo rounded down, hi rounded up."""

    model_config = ConfigDict(extra="forbid")

    lo: str
    hi: str


class WindowRecord(BaseModel):
    """A prime window whose edges are only known as enclosures."""

    model_config = ConfigDict(extra="forbid")

    lower: Enclosure
    upper: Optional[Enclosure] = None  # None for a widened scan
    lower_closed: bool = False
    upper_closed: bool = False
    widened: bool = False


class StepChecks(BaseModel):
    """Recomputable flags for one tower step."""

    model_config = ConfigDict(extra="forbid")

    primality: bool
    interval_member: bool
    congruence: Optional[bool] = None  # None when the variant imposes no congruence
    monogenic: bool
    prime_fresh: bool
    eisenstein: bool
    violation_notes: list[str] = Field(default_factory=list)


class StepRecord(BaseModel):
    """One (p, d) pair and the window it was drawn from."""

    model_config = ConfigDict(extra="forbid")

    p: str
    d: str
    interval: Optional[list[str]] = None  # exact rational endpoints
    window: Optional[WindowRecord] = None
    target_index: Optional[int] = None
    target: Optional[str] = None


class TowerRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ordering_mode: Ordering
    steps: list[StepRecord]


class BoundsReport(BaseModel):
    """Per-step lower-bound data and finite-prefix aggregates."""

    model_config = ConfigDict(extra="forbid")

    label: str = "finite-prefix evidence"
    eta_values: list[Enclosure]
    house_values: list[Enclosure]
    prefix_liminf_eta: Enclosure
    prefix_min_house: Enclosure
    informative: list[bool]
    claimed_limit: Optional[str] = None
    window: Optional[Literal["above", "below"]] = None
    window_flags: Optional[list[bool]] = None
    weil_heights: Optional[list[Enclosure]] = None
    weil_target_window: Optional[list[str]] = None
    weighted_heights: Optional[list[Enclosure]] = None
    weil_gap_bounds: Optional[list[Enclosure]] = None
    growth: Optional[list[Enclosure]] = None


class Toolchain(BaseModel):
    model_config = ConfigDict(extra="forbid")

    version: str
    ordering_mode: Ordering
    search_policy: str


class SkippedStep(BaseModel):
    """A degree whose window held no admissible prime."""

    model_config = ConfigDict(extra="forbid")

    d: str
    reason: str


class Certificate(BaseModel):
    """A constructed tower with every checked condition (schema v1)."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_version: Literal[1] = Field(default=SCHEMA_VERSION, alias="schema")
    variant: Variant
    params: dict[str, str]
    tower: TowerRecord
    per_step: list[StepChecks]
    report: BoundsReport
    toolchain: Toolchain
    skipped: list[SkippedStep] = Field(default_factory=list)


class Mismatch(BaseModel):
    step: Optional[int] = None  # 1-based; None for certificate-level fields
    field: str
    recorded: str
    recomputed: str


class VerificationReport(BaseModel):
    passed: bool
    steps_checked: int
    mismatches: list[Mismatch] = Field(default_factory=list)


class SuiteResult(BaseModel):
    """Outcome of one seeded property suite."""

    name: str
    seed: int
    instances: int
    violations: int  # failed bounds plus instances that raised
    errors: int = 0
    skipped: int = 0
    worst_margin: Optional[str] = None  # smallest (observed - bound) seen
    examples: list[str] = Field(default_factory=list)  # first few violating instances

    @property
    def passed(self) -> bool:
        return self.violations == 0


class RootConditionCheck(BaseModel):
    """The checkable conditions for one generator of a root tower."""

    index: int
    discrepancy_ok: bool
    s_at_least_one: bool
    ratio_near_one: bool
    degree_multiplicative: Literal["caller-asserted"] = "caller-asserted"
    discrepancy: Enclosure
    threshold: Enclosure
    house: Enclosure
    s: Enclosure
