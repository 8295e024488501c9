import itertools

import pytest

from mar.criteria import (
    CompletionCriteria,
    CompletionPredicate,
    CriteriaResult,
    evaluate_criteria,
    load_criteria,
)
from mar.errors import InvalidCriteria
from mar.metrics import compute_cr


def predicate(kind, **args):
    return CompletionPredicate(kind=kind, args=args, description=kind)


def padded(items):
    """Pad with trivially-true manual items up to the 8-item shape."""
    fill = [predicate("manual") for _ in range(8 - len(items))]
    return CompletionCriteria(task_id="t", items=tuple(items + fill))


TRAJ = {
    "task": "find ramen",
    "termination": "ManagerDone",
    "steps": [
        {"step": 1, "action": 'Open_App at {"app_name": "Maps"}',
         "screen_before": "home", "screen_after": "maps_entry"},
        {"step": 2, "action": 'Tap at {"x": 1, "y": 2}',
         "screen_before": "maps_entry", "screen_after": "maps_results"},
        {"step": 3, "action": None,
         "screen_before": "maps_results", "screen_after": "maps_results"},
    ],
    "final_memory": {"notes": "RAMEN-SAN rating 4.6"},
}


class TestPredicates:
    def test_opened_app_present(self):
        result = evaluate_criteria(TRAJ, padded([predicate("opened_app", name="Maps")]))
        assert result.per_item[0] is True

    def test_opened_app_absent(self):
        result = evaluate_criteria(TRAJ, padded([predicate("opened_app", name="Notes")]))
        assert result.per_item[0] is False

    def test_executed_action_matching(self):
        item = predicate("executed_action_matching", pattern=r"Tap at .*\"y\": 2")
        assert evaluate_criteria(TRAJ, padded([item])).per_item[0] is True

    def test_visited_screen(self):
        assert evaluate_criteria(
            TRAJ, padded([predicate("visited_screen", id="maps_results")])
        ).per_item[0] is True
        assert evaluate_criteria(
            TRAJ, padded([predicate("visited_screen", id="notes_edit")])
        ).per_item[0] is False

    def test_note_contains(self):
        assert evaluate_criteria(
            TRAJ, padded([predicate("note_contains", substring="rating")])
        ).per_item[0] is True
        assert evaluate_criteria(
            TRAJ, padded([predicate("note_contains", substring="price")])
        ).per_item[0] is False

    def test_unknown_kind_rejected(self):
        with pytest.raises(InvalidCriteria):
            predicate("teleported")

    def test_missing_args_is_invalid(self):
        bad = CompletionPredicate(kind="opened_app", args={}, description="")
        with pytest.raises(InvalidCriteria):
            evaluate_criteria(TRAJ, padded([bad]))


class TestManualJudgments:
    def test_missing_judgment_counts_as_incomplete_and_flagged(self):
        criteria = padded([predicate("opened_app", name="Maps")])
        result = evaluate_criteria(TRAJ, criteria)
        assert result.per_item[0] is True
        assert all(v is False for v in result.per_item[1:])
        assert result.missing_manual == tuple(range(1, 8))

    def test_judgments_override(self):
        criteria = padded([predicate("opened_app", name="Maps")])
        judgments = {i: True for i in range(1, 8)}
        result = evaluate_criteria(TRAJ, criteria, judgments)
        assert result.completed == 8
        assert result.missing_manual == ()


class TestCriteriaShape:
    def test_item_count_must_be_8_or_10(self):
        with pytest.raises(InvalidCriteria):
            CompletionCriteria(task_id="t", items=tuple([predicate("manual")] * 5))
        CompletionCriteria(task_id="t", items=tuple([predicate("manual")] * 10))

    def test_bundled_criteria_load(self, ramen_dir):
        criteria = load_criteria(ramen_dir / "criteria.json")
        assert len(criteria.items) == 8
        assert criteria.task_id == "ramen-chicago-loop"


class TestComposition:
    def test_cr_from_item_booleans(self):
        items = [predicate("opened_app", name="Maps"),
                 predicate("opened_app", name="Notes")]
        criteria = padded(items)
        judgments = {i: (i < 7) for i in range(2, 8)}
        result = evaluate_criteria(TRAJ, criteria, judgments)
        assert result.completed == 6
        assert compute_cr(result.completed, result.total) == 75.0

    def test_cr_invariant_under_item_permutation(self):
        items = [
            predicate("opened_app", name="Maps"),
            predicate("visited_screen", id="maps_results"),
            predicate("note_contains", substring="rating"),
            predicate("opened_app", name="Notes"),
            predicate("visited_screen", id="missing"),
            predicate("note_contains", substring="price"),
            predicate("executed_action_matching", pattern="Tap"),
            predicate("executed_action_matching", pattern="Swipe"),
        ]
        baseline = None
        for permutation in itertools.islice(itertools.permutations(items), 24):
            criteria = CompletionCriteria(task_id="t", items=tuple(permutation))
            completed = evaluate_criteria(TRAJ, criteria).completed
            if baseline is None:
                baseline = completed
            assert completed == baseline

    def test_result_total(self):
        result = CriteriaResult(completed=2, per_item=(True, True, False),
                                missing_manual=())
        assert result.total == 3
