import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fooddetect.errors import ShapeError, ValidationError
from fooddetect.metrics import (
    confusion,
    format_percent,
    report_csv_lines,
    weighted_merge,
)


def vectors_for(tp, fp, tn, fn):
    pred = np.array([1] * tp + [1] * fp + [-1] * tn + [-1] * fn)
    truth = np.array([1] * tp + [-1] * fp + [-1] * tn + [1] * fn)
    ids = tuple(f"s{i}" for i in range(len(pred)))
    return pred, truth, ids


def test_hand_counts():
    report = confusion(*vectors_for(tp=3, fp=1, tn=5, fn=1))
    assert report.confusion.tp == 3
    assert report.acc == pytest.approx(0.8)
    assert report.tpr == pytest.approx(0.75)
    assert report.tnr == pytest.approx(5 / 6)
    assert len(report.fp_ids) == 1
    assert len(report.fn_ids) == 1


def test_all_correct():
    report = confusion(*vectors_for(tp=4, fp=0, tn=4, fn=0))
    assert report.acc == 1.0
    assert report.fp_ids == () and report.fn_ids == ()


def test_all_positive_truth_leaves_tnr_undefined():
    pred = np.array([1, -1, 1])
    truth = np.array([1, 1, 1])
    report = confusion(pred, truth, ("a", "b", "c"))
    assert report.tnr is None
    assert report.tpr == pytest.approx(2 / 3)


def test_empty_inputs_leave_everything_undefined():
    report = confusion(np.empty(0, dtype=int), np.empty(0, dtype=int), ())
    assert report.acc is None and report.tpr is None and report.tnr is None
    assert report.confusion.total == 0


def test_fp_fn_ids_in_input_order():
    pred = np.array([1, -1, 1, -1])
    truth = np.array([-1, 1, -1, 1])
    report = confusion(pred, truth, ("w", "x", "y", "z"))
    assert report.fp_ids == ("w", "y")
    assert report.fn_ids == ("x", "z")


def test_length_mismatch():
    with pytest.raises(ShapeError):
        confusion(np.array([1]), np.array([1, -1]), ("a", "b"))


def test_non_binary_values_rejected():
    with pytest.raises(ValidationError):
        confusion(np.array([0]), np.array([1]), ("a",))


class TestWeightedMerge:
    def test_self_merge_keeps_rates(self):
        report = confusion(*vectors_for(tp=3, fp=1, tn=5, fn=1))
        merged = weighted_merge([(report, 4, 6), (report, 4, 6)])
        assert merged.acc == pytest.approx(report.acc)
        assert merged.tpr == pytest.approx(report.tpr)
        assert merged.tnr == pytest.approx(report.tnr)
        assert merged.confusion.total == 2 * report.confusion.total

    def test_two_singletons(self):
        a = confusion(np.array([1]), np.array([1]), ("p",))
        b = confusion(np.array([-1]), np.array([-1]), ("q",))
        merged = weighted_merge([(a, 1, 0), (b, 0, 1)])
        assert merged.acc == 1.0

    def test_joint_acc_identity_on_seeded_confusions(self):
        rng = np.random.default_rng(60)
        reports = []
        all_pred, all_truth = [], []
        for r in range(2):
            n = int(rng.integers(5, 40))
            pred = rng.choice([1, -1], size=n)
            truth = rng.choice([1, -1], size=n)
            ids = tuple(f"d{r}_{i}" for i in range(n))
            rep = confusion(pred, truth, ids)
            reports.append((rep, int((truth == 1).sum()), int((truth == -1).sum())))
            all_pred.append(pred)
            all_truth.append(truth)
        merged = weighted_merge(reports)
        # brute-force recount over the concatenated streams
        recount = float(np.mean(np.concatenate(all_pred) == np.concatenate(all_truth)))
        assert merged.acc == pytest.approx(recount, abs=1e-15)

    def test_mismatched_counts_rejected(self):
        report = confusion(*vectors_for(tp=1, fp=1, tn=1, fn=1))
        with pytest.raises(ValidationError):
            weighted_merge([(report, 5, 5)])

    def test_empty_list_rejected(self):
        with pytest.raises(ValidationError):
            weighted_merge([])


@given(st.data())
@settings(max_examples=100)
def test_acc_decomposition_identity(data):
    n = data.draw(st.integers(1, 60))
    pred = np.array(data.draw(st.lists(st.sampled_from([1, -1]), min_size=n, max_size=n)))
    truth = np.array(data.draw(st.lists(st.sampled_from([1, -1]), min_size=n, max_size=n)))
    report = confusion(pred, truth, tuple(f"i{k}" for k in range(n)))
    c = report.confusion
    p = c.tp + c.fn
    neg = c.tn + c.fp
    if report.tpr is not None and report.tnr is not None:
        combined = (report.tpr * p + report.tnr * neg) / (p + neg)
        assert abs(report.acc - combined) < 1e-12


@given(st.data())
@settings(max_examples=100)
def test_polarity_swap_exchanges_rates(data):
    n = data.draw(st.integers(1, 60))
    pred = np.array(data.draw(st.lists(st.sampled_from([1, -1]), min_size=n, max_size=n)))
    truth = np.array(data.draw(st.lists(st.sampled_from([1, -1]), min_size=n, max_size=n)))
    ids = tuple(f"i{k}" for k in range(n))
    a = confusion(pred, truth, ids)
    b = confusion(-pred, -truth, ids)
    assert a.tpr == b.tnr and a.tnr == b.tpr
    assert a.confusion.fp == b.confusion.fn and a.confusion.fn == b.confusion.fp
    assert a.acc == b.acc
    assert a.fp_ids == b.fn_ids and a.fn_ids == b.fp_ids


@given(st.data())
@settings(max_examples=60)
def test_joint_permutation_invariance(data):
    n = data.draw(st.integers(1, 40))
    pred = np.array(data.draw(st.lists(st.sampled_from([1, -1]), min_size=n, max_size=n)))
    truth = np.array(data.draw(st.lists(st.sampled_from([1, -1]), min_size=n, max_size=n)))
    ids = tuple(f"i{k}" for k in range(n))
    perm = np.array(data.draw(st.permutations(range(n))))
    a = confusion(pred, truth, ids)
    b = confusion(pred[perm], truth[perm], tuple(ids[i] for i in perm))
    assert a.acc == b.acc and a.tpr == b.tpr and a.tnr == b.tnr
    assert set(a.fp_ids) == set(b.fp_ids)
    assert set(a.fn_ids) == set(b.fn_ids)


def test_csv_lines_spell_out_undefined():
    report = confusion(np.array([1]), np.array([1]), ("a",))
    lines = report_csv_lines(report)
    assert lines[0] == "metric,value"
    assert "tnr,undefined" in lines


def test_format_percent():
    assert format_percent(0.9497) == "94.97%"
    assert format_percent(None) == "undefined"
