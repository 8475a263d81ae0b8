import numpy as np
import pytest

from squeezebell.discrimination import (
    ExactZero,
    OutcomeTable,
    Ratio,
    apply_pnrd_cap,
    classify,
    evaluate,
    parity_loss_flag,
    parse_rule,
    success_from_probs,
)
from squeezebell.errors import InvalidInputError


def toy_table():
    per = {
        "a": {(1, 0): 0.5, (0, 1): 0.5},
        "b": {(1, 0): 0.5, (2, 0): 0.5},
        "c": {(0, 1): 0.999, (3, 0): 0.001},
    }
    return OutcomeTable.from_probabilities(per, cap=3)


def test_parse_rule():
    assert parse_rule("exact") == ExactZero()
    assert parse_rule("ratio:400") == Ratio(400)
    assert str(parse_rule("ratio:50")) == "ratio:50"
    with pytest.raises(InvalidInputError):
        parse_rule("majority")


def test_classify_toy():
    verdicts = {v.pattern: v for v in classify(toy_table())}
    assert verdicts[(1, 0)].classification == "ambiguous"
    assert verdicts[(2, 0)].state == "b"
    assert verdicts[(3, 0)].state == "c"
    assert verdicts[(0, 1)].classification == "ambiguous"


def test_ratio_rule_accepts_dominant_pattern():
    report = evaluate(toy_table(), Ratio(1.5))
    assert report.per_state["c"] == pytest.approx(1.0)
    assert report.per_state["a"] == 0.0


def test_empty_table():
    t = OutcomeTable((), (), np.zeros((0, 0)), 2, {})
    with pytest.raises(InvalidInputError):
        classify(t)


def test_success_from_probs_batched():
    probs = np.array([[[0.6, 0.4], [0.0, 1.0]], [[1.0, 0.0], [1.0, 0.0]]])
    out = success_from_probs(probs, ExactZero())
    np.testing.assert_allclose(out, [[0.6, 0.0], [0.0, 0.0]])


def test_pnrd_discard_and_merge():
    t = toy_table()
    d = apply_pnrd_cap(t, 1, "discard")
    assert (2, 0) not in d.patterns and (3, 0) not in d.patterns
    m = apply_pnrd_cap(t, 1, "merge")
    assert m.pattern_str((2, 0)) == "1+,0"
    assert m.probability("b", (2, 0)) == pytest.approx(0.5)
    assert m.probability("c", (2, 0)) == pytest.approx(0.001)
    assert apply_pnrd_cap(t, 5) is t
    with pytest.raises(InvalidInputError):
        apply_pnrd_cap(t, 0)


def test_report_serialisation():
    t = toy_table()
    rep = evaluate(t)
    assert '"overall"' in rep.to_json(t)
    lines = rep.to_csv(t).splitlines()
    assert lines[0] == "pattern,p_a,p_b,p_c,verdict"
    assert any(line.startswith('"2,0"') and line.endswith("unambiguous(b)") for line in lines)


def test_parity_flag():
    assert not parity_loss_flag((2, 0, 0, 0))
    assert parity_loss_flag((1, 0, 0, 0))
    with pytest.raises(InvalidInputError):
        parity_loss_flag((1, 1))
