"""Assessment-string grammar: round-trip and failure offsets."""

import pytest
from hypothesis import given, strategies as st

from goekit.goe import (
    GoeSyntaxError,
    InvalidLeaf,
    KillChainStep,
    StepAssessment,
    VALID_LEAVES,
    VersionMismatch,
    parse_goe,
    serialize_goe,
)
from test_goe import make_assessment

EXAMPLE1_GOE = "GOE:1.0/R:AT:H,TAI:H,G:N/W:AT:N,TAI:N,G:N/D:AT:N,TAI:N,G:N/E:SKIP"
EXAMPLE2_GOE = "GOE:1.0/R:AT:H,TAI:H,G:H/W:SKIP/D:SKIP/E:SKIP"


def test_serialize_worked_examples():
    ex1 = make_assessment([VALID_LEAVES[2], VALID_LEAVES[0], VALID_LEAVES[0], None])
    assert serialize_goe(ex1) == EXAMPLE1_GOE
    ex2 = make_assessment([VALID_LEAVES[3], None, None, None])
    assert serialize_goe(ex2) == EXAMPLE2_GOE


def test_parse_worked_example():
    assessment = parse_goe(EXAMPLE1_GOE)
    assert [s.score for s in assessment.steps] == [2, 0, 0, None]
    assert assessment.overall == 0


@pytest.mark.parametrize(
    "text,exc",
    [
        ("", GoeSyntaxError),
        ("CVSS:3.1/AV:N", GoeSyntaxError),
        ("GOE:2.0/R:SKIP/W:SKIP/D:SKIP/E:SKIP", VersionMismatch),
        ("GOE:1.0/W:SKIP/R:SKIP/D:SKIP/E:SKIP", GoeSyntaxError),
        ("GOE:1.0/R:SKIP/W:SKIP/D:SKIP", GoeSyntaxError),
        ("GOE:1.0/R:AT:X,TAI:N,G:N/W:SKIP/D:SKIP/E:SKIP", GoeSyntaxError),
        ("GOE:1.0/R:AT:N,TAI:H,G:N/W:SKIP/D:SKIP/E:SKIP", InvalidLeaf),
        (EXAMPLE2_GOE + "/X:SKIP", GoeSyntaxError),
        (EXAMPLE2_GOE + " ", GoeSyntaxError),
    ],
)
def test_parse_failures(text, exc):
    with pytest.raises(exc):
        parse_goe(text)


def test_failure_offset_points_at_bad_segment():
    text = "GOE:1.0/R:SKIP/W:bogus/D:SKIP/E:SKIP"
    with pytest.raises(GoeSyntaxError) as excinfo:
        parse_goe(text)
    assert excinfo.value.offset == text.index("bogus")
    assert "offset" in str(excinfo.value)


@given(
    st.lists(
        st.one_of(st.none(), st.sampled_from(VALID_LEAVES)),
        min_size=4,
        max_size=4,
    )
)
def test_property_round_trip(leaves):
    assessment = make_assessment(leaves)
    text = serialize_goe(assessment)
    parsed = parse_goe(text)
    assert [s.sub_vector for s in parsed.steps] == list(leaves)
    assert serialize_goe(parsed) == text


def test_parsed_steps_keep_kill_chain_order():
    parsed = parse_goe(EXAMPLE2_GOE)
    assert [s.step for s in parsed.steps] == list(KillChainStep)
    assert all(isinstance(s, StepAssessment) for s in parsed.steps)
