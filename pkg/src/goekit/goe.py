"""Graph-of-effort scoring core.

Models a four-step intrusion kill chain and, for each step, a three-level
binary decision tree over the criteria AT (automation tools), TAI
(trainability of AI) and G (generability). Walking the tree yields a
per-step effort score in 0..3; the overall score for a vulnerability is
the minimum over the assessed steps, with skipped steps excluded.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from datetime import datetime
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence


class GoeError(Exception):
    """Base class for scoring-core errors."""


class InvalidSubVector(GoeError):
    """A sub-vector that does not correspond to a leaf of the tree."""


class AnswerAfterLeaf(GoeError):
    """An answer was submitted after the traversal already reached a leaf."""


class EmptyCandidateList(GoeError):
    """combine_models needs at least one candidate."""


class GoeSyntaxError(GoeError):
    """Malformed assessment string; ``offset`` is the byte position."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class InvalidLeaf(GoeSyntaxError):
    """Syntactically valid sub-vector that is not a tree leaf."""


class VersionMismatch(GoeSyntaxError):
    """Unknown assessment-string version prefix."""


class KillChainStep(enum.IntEnum):
    """The four kill-chain steps, in fixed order."""

    RECONNAISSANCE = 1
    WEAPONIZATION = 2
    DELIVERY = 3
    EXPLOITATION = 4

    @property
    def letter(self) -> str:
        """Single-letter tag used in the assessment string."""
        return "RWDE"[self.value - 1]

    @classmethod
    def from_letter(cls, letter: str) -> "KillChainStep":
        return cls("RWDE".index(letter) + 1)


class Criterion(str, enum.Enum):
    """Per-step criteria, asked in the fixed order AT, TAI, G."""

    AT = "AT"
    TAI = "TAI"
    G = "G"


CRITERION_ORDER: tuple[Criterion, ...] = (Criterion.AT, Criterion.TAI, Criterion.G)

#: Default yes/no question shipped for each criterion. Deployments may
#: present their own wording; the codes, not the prompts, are normative.
DEFAULT_PROMPTS: Mapping[Criterion, str] = MappingProxyType(
    {
        Criterion.AT: (
            "Are there ready-to-use AI models or AI-based tools available "
            "for this step?"
        ),
        Criterion.TAI: (
            "Are there datasets or complete training setups available to "
            "train a suitable model?"
        ),
        Criterion.G: (
            "Are there automatisms (APIs, tooling) available to quickly "
            "generate suitable training data?"
        ),
    }
)


class Answer(str, enum.Enum):
    """Binary answer: N = available (low effort), H = unavailable."""

    N = "N"
    H = "H"

    @property
    def numeric(self) -> int:
        return 0 if self is Answer.N else 1

    @classmethod
    def from_numeric(cls, value: int) -> "Answer":
        if value not in (0, 1):
            raise ValueError(f"answer must be 0 or 1, got {value!r}")
        return cls.N if value == 0 else cls.H


@dataclass(frozen=True)
class StepSubVector:
    """Answers (AT, TAI, G) for one step; must form a valid tree leaf.

    Leaf validity is the monotonicity constraint g=H implies tai=H and
    tai=H implies at=H, leaving four valid values out of eight.
    """

    at: Answer
    tai: Answer
    g: Answer

    def __post_init__(self) -> None:
        if (self.g is Answer.H and self.tai is not Answer.H) or (
            self.tai is Answer.H and self.at is not Answer.H
        ):
            raise InvalidSubVector(
                f"({self.at.value},{self.tai.value},{self.g.value}) is not a "
                "leaf of the decision tree"
            )

    @property
    def score(self) -> int:
        return self.at.numeric + self.tai.numeric + self.g.numeric

    def answers(self) -> tuple[Answer, Answer, Answer]:
        return (self.at, self.tai, self.g)

    def __str__(self) -> str:
        return f"AT:{self.at.value},TAI:{self.tai.value},G:{self.g.value}"


#: The four valid leaves, by ascending score.
VALID_LEAVES: tuple[StepSubVector, ...] = tuple(
    StepSubVector(*(Answer.from_numeric(1 if i < k else 0) for i in range(3)))
    for k in range(4)
)


def step_score(sub: StepSubVector) -> int:
    """Score of one step: the number of H answers (0..3)."""
    return sub.score


def combine_models(candidates: Sequence[StepSubVector]) -> StepSubVector:
    """Worst-case choice among several candidate models for one step.

    Returns the candidate with the lowest score; ties are broken by
    lexicographic order on (at, tai, g) with N < H, so the result is
    deterministic for any input order.
    """
    if not candidates:
        raise EmptyCandidateList("need at least one candidate sub-vector")
    return min(
        candidates,
        key=lambda sv: (sv.score, sv.at.numeric, sv.tai.numeric, sv.g.numeric),
    )


class TraversalStatus(enum.Enum):
    AWAITING_AT = "AwaitingAT"
    AWAITING_TAI = "AwaitingTAI"
    AWAITING_G = "AwaitingG"
    LEAF_REACHED = "LeafReached"


@dataclass(frozen=True)
class TraversalState:
    """Immutable position in one step's decision tree.

    ``answered`` records only the answers actually given; once a leaf is
    reached the remaining criteria are implicitly N.
    """

    step: KillChainStep
    answered: tuple[tuple[Criterion, Answer], ...] = ()

    @property
    def status(self) -> TraversalStatus:
        if any(value is Answer.N for _, value in self.answered):
            return TraversalStatus.LEAF_REACHED
        return (
            TraversalStatus.AWAITING_AT,
            TraversalStatus.AWAITING_TAI,
            TraversalStatus.AWAITING_G,
            TraversalStatus.LEAF_REACHED,
        )[len(self.answered)]

    @property
    def awaiting(self) -> Optional[Criterion]:
        """The criterion to be answered next, or None at a leaf."""
        if self.status is TraversalStatus.LEAF_REACHED:
            return None
        return CRITERION_ORDER[len(self.answered)]

    @property
    def leaf(self) -> Optional[StepSubVector]:
        """The reached leaf, remaining criteria filled with N."""
        if self.status is not TraversalStatus.LEAF_REACHED:
            return None
        values = {criterion: value for criterion, value in self.answered}
        return StepSubVector(
            *(values.get(criterion, Answer.N) for criterion in CRITERION_ORDER)
        )

    def answer(self, value: Answer) -> "TraversalState":
        """Answer the awaited criterion, returning the advanced state."""
        criterion = self.awaiting
        if criterion is None:
            raise AnswerAfterLeaf(
                f"step {self.step.name}: traversal already reached leaf "
                f"{self.leaf}"
            )
        return TraversalState(self.step, self.answered + ((criterion, value),))


def begin_step(step: KillChainStep) -> TraversalState:
    """Fresh traversal for one kill-chain step, awaiting AT."""
    return TraversalState(KillChainStep(step))


def traverse(step: KillChainStep, answers: Iterable[Answer]) -> TraversalState:
    """Apply a sequence of answers from the initial state."""
    state = begin_step(step)
    for value in answers:
        state = state.answer(value)
    return state


@dataclass(frozen=True)
class StepAssessment:
    """Outcome for one step: a reached leaf, or skipped.

    A skipped step carries no sub-vector and contributes nothing to the
    overall minimum (conceptually +infinity). ``rationale`` holds the
    analyst's justification per answered criterion.
    """

    step: KillChainStep
    sub_vector: Optional[StepSubVector]
    rationale: Mapping[Criterion, str] = field(default_factory=dict)

    @property
    def skipped(self) -> bool:
        return self.sub_vector is None

    @property
    def score(self) -> Optional[int]:
        """Step score, or None when skipped."""
        return None if self.sub_vector is None else self.sub_vector.score


@dataclass(frozen=True)
class GoeAssessment:
    """One analyst's complete walkthrough of all four steps for a CVE."""

    cve_id: str
    steps: tuple[StepAssessment, ...]
    analyst: str = ""
    created_at: Optional[datetime] = None
    updated_at: Optional[datetime] = None

    def __post_init__(self) -> None:
        if len(self.steps) != 4 or any(
            assessment.step != KillChainStep(i + 1)
            for i, assessment in enumerate(self.steps)
        ):
            raise GoeError("assessment needs all four steps in kill-chain order")

    @property
    def overall(self) -> Optional[int]:
        return overall_goe(self)


def overall_goe(assessment: GoeAssessment) -> Optional[int]:
    """Minimum score over answered steps; None when all four are skipped."""
    scores = [s.score for s in assessment.steps if s.score is not None]
    return min(scores) if scores else None


GRAMMAR_VERSION = "1.0"
_PREFIX = f"GOE:{GRAMMAR_VERSION}"
_SUBVECTOR_RE = re.compile(r"AT:([NH]),TAI:([NH]),G:([NH])$")


def serialize_goe(assessment: GoeAssessment) -> str:
    """Canonical, byte-deterministic assessment string.

    Format: ``GOE:1.0/R:<sv>/W:<sv>/D:<sv>/E:<sv>`` where ``<sv>`` is
    ``AT:x,TAI:x,G:x`` with x in {N, H}, or the literal ``SKIP``.
    """
    parts = [_PREFIX]
    for step_assessment in assessment.steps:
        sub = step_assessment.sub_vector
        body = "SKIP" if sub is None else str(sub)
        parts.append(f"{step_assessment.step.letter}:{body}")
    return "/".join(parts)


def parse_goe(text: str) -> GoeAssessment:
    """Parse a canonical assessment string into an assessment skeleton.

    The inverse of :func:`serialize_goe` on its image: step order, leaf
    validity and the version prefix are all enforced. The returned
    assessment has an empty cve_id, analyst and rationale.
    """
    offset = 0
    if not text.startswith("GOE:"):
        raise GoeSyntaxError(f"expected {_PREFIX!r} prefix", 0)
    version = text[4:].split("/", 1)[0]
    if version != GRAMMAR_VERSION:
        raise VersionMismatch(f"unsupported version {version!r}", 4)
    offset = len(_PREFIX)

    steps: list[StepAssessment] = []
    for step in KillChainStep:
        tag = f"/{step.letter}:"
        if not text.startswith(tag, offset):
            raise GoeSyntaxError(f"expected {tag!r}", offset)
        offset += len(tag)
        end = text.find("/", offset)
        if end < 0:
            end = len(text)
        body = text[offset:end]
        if body == "SKIP":
            steps.append(StepAssessment(step, None))
        else:
            match = _SUBVECTOR_RE.match(body)
            if match is None:
                raise GoeSyntaxError(
                    f"expected 'AT:x,TAI:x,G:x' or 'SKIP', got {body!r}", offset
                )
            try:
                sub = StepSubVector(*(Answer(group) for group in match.groups()))
            except InvalidSubVector as exc:
                raise InvalidLeaf(str(exc), offset) from None
            steps.append(StepAssessment(step, sub))
        offset = end
    if offset != len(text):
        raise GoeSyntaxError("trailing data after exploitation step", offset)
    return GoeAssessment(cve_id="", steps=tuple(steps))
