"""Exploration-tree sessions, metrics, and workspace persistence."""

import json
from decimal import Decimal

import pytest

from planwhy import planner, session
from planwhy.errors import (SessionError, StaleSuggestionError, UnknownIdError,
                            WorkspaceFormatError)
from planwhy.session import (Metric, add_metric, alternatives, ask, compare,
                             evaluate_metric, load_workspace, new_session,
                             save_workspace, workspaces_equal)

from conftest import load_plan, read


@pytest.fixture()
def grid_ws(builtin_config):
    return new_session(read("grid-domain.pddl"), read("grid-p1.pddl"),
                       builtin_config)


@pytest.fixture()
def logistics_ws(builtin_config):
    ws = new_session(read("driverlog-domain.pddl"), read("driverlog-p1.pddl"),
                     builtin_config)
    # pin the reference plan so queries are deterministic
    ws.nodes[1].plan = load_plan("plan1.txt")
    ws.nodes[1].metrics = {"makespan": Decimal("62.000"),
                           "step-count": Decimal("8")}
    return ws


def test_root_node(grid_ws):
    root = grid_ws.nodes[1]
    assert root.id == 1 and root.parent is None
    assert root.plan is not None
    assert grid_ws.current_id == 1


def test_ask_appends_child(grid_ws):
    child = ask(grid_ws, 1, 0, ("move", "n1", "n4"), "after-action")
    assert child.id == 2 and child.parent == 1
    assert child.replaced == ("move", "n1", "n2")
    assert child.suggested == ("move", "n1", "n4")
    assert child.strategy == "after-action"
    assert grid_ws.current_id == 2
    # asking again from the root grows a sibling, never mutates node 2
    sibling = ask(grid_ws, 1, 0, ("move", "n1", "n4"), "segments")
    assert sibling.id == 3 and sibling.parent == 1
    assert grid_ws.nodes[2] is child


def test_ask_from_child_node(grid_ws):
    child = ask(grid_ws, 1, 0, ("move", "n1", "n4"), "after-action")
    grand = ask(grid_ws, child.id, 0, ("move", "n1", "n2"), "after-action")
    assert grand.parent == child.id


def test_behavior_d_still_creates_node(builtin_config):
    ws = new_session(read("trap-domain.pddl"), read("trap-p1.pddl"),
                     builtin_config)
    child = ask(ws, 1, 0, ("burn",), "after-action")
    assert child.behavior == "d"
    assert child.plan is None
    assert child.id in ws.nodes
    # a planless node cannot be queried further
    with pytest.raises(SessionError):
        alternatives(ws, child.id, 0)


def test_stale_suggestion_rejected(grid_ws):
    with pytest.raises(StaleSuggestionError):
        ask(grid_ws, 1, 0, ("move", "n2", "n3"), "after-action")


def test_unknown_ids(grid_ws):
    with pytest.raises(UnknownIdError):
        alternatives(grid_ws, 99, 0)
    with pytest.raises(UnknownIdError):
        alternatives(grid_ws, 1, 99)
    with pytest.raises(SessionError):
        ask(grid_ws, 1, 0, ("move", "n1", "n4"), "wormhole")


def test_time_window_requires_window(logistics_ws):
    with pytest.raises(SessionError):
        ask(logistics_ws, 1, 3, ("load-truck", "p1", "t1", "a"), "time-window")


def test_builtin_metrics(grid_ws):
    root = grid_ws.nodes[1]
    assert evaluate_metric(grid_ws, "makespan", root) == root.metrics["makespan"]
    assert evaluate_metric(grid_ws, "step-count", root) == Decimal(2)


def test_weighted_sum_metric(logistics_ws):
    add_metric(logistics_ws, Metric("combo", "weighted-sum",
                                    (("makespan", Decimal(1)),
                                     ("step-count", Decimal(10)))))
    root = logistics_ws.nodes[1]
    assert evaluate_metric(logistics_ws, "combo", root) == Decimal("142.000")


def test_metric_cycle_rejected(logistics_ws):
    add_metric(logistics_ws, Metric("c1", "weighted-sum",
                                    (("makespan", Decimal(1)),)))
    with pytest.raises(SessionError):
        add_metric(logistics_ws, Metric("c1", "weighted-sum",
                                        (("c1", Decimal(1)),)))
    with pytest.raises(UnknownIdError):
        add_metric(logistics_ws, Metric("loop", "weighted-sum",
                                        (("dangling", Decimal(2)),)))


def test_compare(logistics_ws):
    child = ask(logistics_ws, 1, 3, ("load-truck", "p1", "t1", "a"),
                "after-action")
    out = compare(logistics_ws, [1, child.id], ["makespan", "step-count"])
    assert out["metrics"] == ["makespan", "step-count"]
    assert [row["id"] for row in out["rows"]] == [1, child.id]
    assert out["best"]["makespan"] == 1
    with pytest.raises(UnknownIdError):
        compare(logistics_ws, [1, 99], ["makespan"])
    with pytest.raises(UnknownIdError):
        compare(logistics_ws, [1], ["made-up"])


def test_save_load_round_trip(logistics_ws):
    ask(logistics_ws, 1, 3, ("load-truck", "p1", "t1", "a"), "after-action")
    ask(logistics_ws, 1, 3, ("load-truck", "p1", "t1", "a"), "segments")
    logistics_ws.annotations.append("prefer single-truck plans")
    data = save_workspace(logistics_ws)
    ws2 = load_workspace(data)
    assert workspaces_equal(logistics_ws, ws2)
    assert ws2.annotations == ["prefer single-truck plans"]
    want = compare(logistics_ws, [1, 2, 3], ["makespan", "step-count"])
    assert compare(ws2, [1, 2, 3], ["makespan", "step-count"]) == want
    # loaded sessions stay usable
    more = ask(ws2, 2, 0, ("board-truck", "d1", "t1", "a"), "after-action")
    assert more.id == 4


def test_save_is_canonical(logistics_ws):
    assert save_workspace(logistics_ws) == save_workspace(logistics_ws)


def test_load_rejects_corrupt_stream():
    with pytest.raises(WorkspaceFormatError):
        load_workspace(b"{not json")
    with pytest.raises(WorkspaceFormatError):
        load_workspace(b'{"no": "version"}')


def test_load_rejects_unknown_version(logistics_ws):
    doc = json.loads(save_workspace(logistics_ws))
    doc["version"] = 999
    with pytest.raises(WorkspaceFormatError):
        load_workspace(json.dumps(doc).encode())
