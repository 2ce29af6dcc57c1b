import json
import os

import pytest

import rb1

CORPUS = os.path.join(os.path.dirname(__file__), "..", "..", "corpus")


def corpus(name):
    return os.path.join(CORPUS, name)


@pytest.fixture(scope="module")
def ttt():
    return rb1.Program.compile_file(corpus("tictactoe.rb1"))


WIN_LINE = [(0, 0), (1, 0), (1, 1), (2, 0), (2, 2)]


def test_main_returns_one(ttt):
    assert ttt.run("main") == 1


def test_play_win_line(ttt):
    env = rb1.Environment(ttt, "play")
    assert len(env.legal_actions()) == 9
    for x, y in WIN_LINE:
        assert env.can_apply("mark", [x, y])
        env.apply("mark", [x, y])
    assert env.is_done
    assert env.score(0) == 1.0
    assert env.score(1) == -1.0
    assert env.to_text() == (
        "{resume_idx: -1, board: {cells: [1, 0, 0, 2, 1, 0, 2, 0, 1], current_player: 0}}"
    )


def test_precondition_error_kind(ttt):
    env = rb1.Environment(ttt)
    env.apply("mark", [0, 0])
    assert not env.can_apply("mark", [0, 0])
    with pytest.raises(rb1.Error) as info:
        env.apply("mark", [0, 0])
    assert info.value.kind == "precondition"


def test_round_trips(ttt):
    env = rb1.Environment(ttt)
    env.apply_index(4)
    data = env.to_binary()
    assert len(data) == 88
    assert rb1.Environment.from_binary(ttt, data) == env
    assert rb1.Environment.from_text(ttt, env.to_text()) == env
    assert len(env.observation_tensor()) == ttt.tensor_size()


def test_compile_error():
    with pytest.raises(rb1.Error) as info:
        rb1.Program.compile_file(corpus("mutual_recursion.rb1"))
    assert "game_1 -> game_2 -> game_1" in str(info.value)
    assert info.value.kind == "type"


def test_tools(ttt):
    report = json.loads(ttt.fuzz(traces=200, seed=3))
    assert report["failures"] == []
    assert sum(report["terminal_counts"].values()) == 200
    assert json.loads(ttt.bench(traces=8))["traces"] == 8
    idl = json.loads(ttt.interface_description())
    assert idl["acts"][0]["tensor_size"] == 31
    assert ttt.dot().startswith("digraph TicTacToe {")
    assert len(ttt.action_table()) == 9


def test_splitmix_matches_reference():
    g = rb1.SplitMix64(1234567)
    assert g.next() == 6457827717110365317


def test_serve_session():
    with rb1.Session(corpus("tictactoe.rb1")) as s:
        assert s.request("reset")["legal_count"] == 9
        info = s.request("info")
        before = s.request("state")
        assert s.request("step", index=99)["error"]["kind"] == "protocol"
        assert s.request("state") == before
        for x, y in WIN_LINE:
            reply = s.request("step", index=x * 3 + y)
            assert reply["ok"]
        assert reply["is_done"]
        assert len(s.request("tensor", observer=0)["tensor"]) == info["tensor_size"]
        assert s.request("step", index=0)["error"]["kind"] == "precondition"
