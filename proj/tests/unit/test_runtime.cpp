#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <functional>

#include "helpers.hpp"
#include "rb1/runtime.hpp"
#include "rb1/serialize.hpp"

using namespace rb1;

namespace {

ActionValue mark(std::int64_t x, std::int64_t y) { return {"mark", {x, y}}; }

EnvironmentInstance fresh_ttt() { return EnvironmentInstance::instantiate(testkit::corpus("tictactoe.rb1"), "play"); }

std::string runtime_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const RuntimeError& e) {
    return e.kind();
  }
  return "";
}

std::int64_t as_int(const Value& v) { return v.slots.at(0); }

}  // namespace

TEST_CASE("instantiate") {
  auto env = fresh_ttt();
  CHECK(env.resume_idx() == 0);
  CHECK(!env.is_done());
  for (int i = 0; i < 9; ++i) CHECK(as_int(env.get_field("board.cells[" + std::to_string(i) + "]")) == 0);
  CHECK(as_int(env.get_field("board.current_player")) == 0);

  auto c4 = EnvironmentInstance::instantiate(testkit::corpus("connect_four.rb1"), "play");
  CHECK(c4.resume_idx() == 0);
  Value cells = c4.get_field("board.cells");
  CHECK(cells.slots == std::vector<Slot>(42, 0));
  CHECK(as_int(c4.get_field("board.current_player")) == 0);

  auto ca = EnvironmentInstance::instantiate(testkit::corpus("catch.rb1"), "play");
  CHECK(as_int(ca.get_field("paddle")) == 2);

  CHECK_THROWS_AS(EnvironmentInstance::instantiate(testkit::corpus("tictactoe.rb1"), "nope"), PathError);
}

TEST_CASE("constructor arguments and defaults") {
  auto prog = Program::compile(
      "act count(Int start, Int<1,3> step) -> Counter:\n"
      "  frm total = start\n"
      "  frm lo : Int<1,3>\n"
      "  frm neg : Int<-5,-2>\n"
      "  frm flag : Bool\n"
      "  frm f : Float\n"
      "  act add()\n"
      "  total = total + step\n");
  auto env = EnvironmentInstance::instantiate(prog, "count", {std::int64_t{10}, std::int64_t{2}});
  CHECK(as_int(env.get_field("total")) == 10);
  CHECK(as_int(env.get_field("lo")) == 1);
  CHECK(as_int(env.get_field("neg")) == -2);
  CHECK(std::get<bool>(env.get_scalar("flag")) == false);
  CHECK(std::get<double>(env.get_scalar("f")) == 0.0);
  env.apply({"add", {}});
  CHECK(env.is_done());
  CHECK(as_int(env.get_field("total")) == 12);
  CHECK_THROWS_AS(EnvironmentInstance::instantiate(prog, "count", {std::int64_t{1}}), ArityError);
  CHECK_THROWS_AS(EnvironmentInstance::instantiate(prog, "count", {std::int64_t{1}, std::int64_t{7}}), RangeError);
}

TEST_CASE("can_apply") {
  auto env = fresh_ttt();
  CHECK(env.can_apply(mark(0, 0)));
  CHECK(!env.can_apply(mark(3, 0)));
  CHECK(!env.can_apply(mark(-1, 2)));
  CHECK_THROWS_AS(env.can_apply({"mark", {true, std::int64_t{0}}}), TypeMismatch);
  CHECK_THROWS_AS(env.can_apply({"mark", {std::int64_t{0}}}), ArityError);
  CHECK_THROWS_AS(env.can_apply({"jump", {}}), TypeMismatch);
  env.apply(mark(0, 0));
  CHECK(!env.can_apply(mark(0, 0)));
  CHECK(env.can_apply(mark(1, 1)));
}

TEST_CASE("apply plays the sample game to a win") {
  auto env = fresh_ttt();
  for (auto [x, y] : std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {1, 1}, {2, 0}, {2, 2}}) {
    CHECK(!env.is_done());
    env.apply(mark(x, y));
  }
  CHECK(env.is_done());
  CHECK(env.resume_idx() == -1);
  CHECK(as_int(env.get_field("board.cells[0]")) == 1);
  CHECK(as_int(env.get_field("board.cells[4]")) == 1);
  CHECK(as_int(env.get_field("board.cells[8]")) == 1);
  CHECK(score(env, 0) == 1.0);
  CHECK(score(env, 1) == -1.0);
  CHECK_THROWS_AS(env.apply(mark(0, 1)), PreconditionViolated);
  CHECK(env.legal_actions().empty());
  CHECK(as_int(run_function(testkit::corpus("tictactoe.rb1"), "main", {})) == 1);
}

TEST_CASE("a drawn game ends after nine marks") {
  std::vector<std::pair<int, int>> line = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 0}, {1, 2}, {2, 1}, {2, 0}, {2, 2}};
  CHECK(oracle::adjudicate_tictactoe(line) == oracle::Outcome::Draw);
  auto env = fresh_ttt();
  for (std::size_t i = 0; i < line.size(); ++i) {
    CHECK(!env.is_done());
    env.apply(mark(line[i].first, line[i].second));
  }
  CHECK(env.is_done());
  CHECK(score(env, 0) == 0.0);
  CHECK(score(env, 1) == 0.0);
}

TEST_CASE("failed apply leaves the frame untouched") {
  auto env = fresh_ttt();
  env.apply(mark(1, 1));
  auto before = env.frame();
  try {
    env.apply(mark(1, 1));
    FAIL("expected PreconditionViolated");
  } catch (const PreconditionViolated& e) {
    CHECK(e.action() == "mark");
    CHECK(e.suspension_index() == 0);
  }
  CHECK_THROWS_AS(env.apply(mark(5, 1)), PreconditionViolated);
  CHECK(env.frame() == before);
  CHECK(!env.poisoned());
}

TEST_CASE("legal actions") {
  auto env = fresh_ttt();
  auto legal = env.legal_actions();
  REQUIRE(legal.size() == 9);
  CHECK(legal[0] == mark(0, 0));
  CHECK(legal[8] == mark(2, 2));
  env.apply(mark(0, 0));
  legal = env.legal_actions();
  CHECK(legal.size() == 8);
  CHECK(std::find(legal.begin(), legal.end(), mark(0, 0)) == legal.end());

  auto c4 = EnvironmentInstance::instantiate(testkit::corpus("connect_four.rb1"), "play");
  CHECK(c4.legal_actions().size() == 7);
  auto ca = EnvironmentInstance::instantiate(testkit::corpus("catch.rb1"), "play");
  CHECK(ca.legal_actions().size() == 5);
  ca.apply({"drop", {std::int64_t{3}}});
  auto moves = ca.legal_actions();
  REQUIRE(moves.size() == 3);
  CHECK(moves[0] == ActionValue{"move", {std::int64_t{-1}}});
}

TEST_CASE("action table order") {
  auto prog = Program::compile(
      "act g() -> G:\n"
      "  act b(Bool x, Int<1,2> y)\n"
      "  act a(Int<0,1> z)\n");
  const ActionTable& t = prog->action_table(0);
  REQUIRE(t.size() == 6);
  CHECK(to_string(t.at(0)) == "b(false, 1)");
  CHECK(to_string(t.at(1)) == "b(false, 2)");
  CHECK(to_string(t.at(2)) == "b(true, 1)");
  CHECK(to_string(t.at(3)) == "b(true, 2)");
  CHECK(to_string(t.at(4)) == "a(0)");
  CHECK(to_string(t.at(5)) == "a(1)");
  CHECK(t.index_of(0, {1, 2}) == 3);
  CHECK(t.index_of(1, {1}) == 5);
  CHECK(t.index_of(1, {2}) == -1);

  const ActionTable& ttt = testkit::corpus("tictactoe.rb1")->action_table(0);
  for (int x = 0; x < 3; ++x) {
    for (int y = 0; y < 3; ++y) CHECK(ttt.at(static_cast<std::size_t>(x * 3 + y)) == mark(x, y));
  }
}

TEST_CASE("a repeated action is checkable at each of its points") {
  auto prog = Program::compile(
      "act walk() -> Walk:\n"
      "  frm pos : Int<0,5>\n"
      "  while true:\n"
      "    act step(Int<0,1> d) { pos + d < 5 }\n"
      "    pos = pos + d\n"
      "    act rest()\n"
      "    act step(Int<0,1> d) { pos - d >= 0 }\n"
      "    pos = pos - d\n");
  // brute force over every frame: can_step == (at a step point) and that point's precondition
  for (Slot ridx = -1; ridx < 3; ++ridx) {
    for (Slot pos = 0; pos <= 5; ++pos) {
      auto env = EnvironmentInstance::from_frame(prog, 0, {ridx, pos});
      for (std::int64_t d = 0; d <= 1; ++d) {
        bool want = (ridx == 0 && pos + d < 5) || (ridx == 2 && pos - d >= 0);
        CHECK(env.can_apply({"step", {d}}) == want);
      }
      CHECK(env.can_apply({"rest", {}}) == (ridx == 1));
    }
  }
}

TEST_CASE("field paths") {
  auto env = fresh_ttt();
  CHECK(as_int(env.get_field("board.cells[4]")) == 0);
  env.set_field("board.cells[0]", make_int(1));
  CHECK(as_int(env.get_field("board.cells[0]")) == 1);
  CHECK(!env.can_apply(mark(0, 0)));
  env.set_scalar("board.cells[1]", std::int64_t{2});
  CHECK(std::get<std::int64_t>(env.get_scalar("board.cells[1]")) == 2);
  CHECK_THROWS_AS(env.set_field("resume_idx", make_int(7)), RangeError);
  CHECK_THROWS_AS(env.set_field("board.cells[0]", make_int(3)), RangeError);
  CHECK_THROWS_AS(env.set_field("board.cells[0]", make_float(1.0)), TypeMismatch);
  CHECK_THROWS_AS(env.get_field("board.cells[9]"), PathError);
  CHECK_THROWS_AS(env.get_field("board.nothing"), PathError);
  CHECK_THROWS_AS(env.get_field("board..cells"), PathError);
  env.set_field("resume_idx", make_int(-1));
  CHECK(env.is_done());
  CHECK(env.legal_actions().empty());

  Value board = env.get_field("board");
  CHECK(board.slots.size() == 10);
  auto other = fresh_ttt();
  other.set_field("board", board);
  CHECK(other.get_field("board") == board);
}

TEST_CASE("run_function") {
  auto prog = Program::compile(
      "fun id(Int x) -> Int:\n  return x\n"
      "fun fact(Int n) -> Int:\n  if n <= 1:\n    return 1\n  return n * fact(n - 1)\n"
      "fun zero() -> Int:\n  return 0\n"
      "fun half(Float x) -> Float:\n  return x / 2.0\n"
      "fun arith() -> Int:\n  return -7 / 2 * 10 + -7 % 2\n");
  CHECK(as_int(run_function(prog, "id", {make_int(42)})) == 42);
  CHECK(as_int(run_function(prog, "fact", {make_int(10)})) == 3628800);
  CHECK(as_int(run_function(prog, "zero", {})) == 0);
  CHECK(std::get<double>(to_scalar(prog->module(), run_function(prog, "half", {make_float(3.0)}))) == 1.5);
  CHECK(as_int(run_function(prog, "arith", {})) == -31);
  CHECK_THROWS_AS(run_function(prog, "missing", {}), PathError);
  CHECK_THROWS_AS(run_function(prog, "id", {}), ArityError);
  CHECK_THROWS_AS(run_function(prog, "id", {make_bool(true), make_int(1)}), ArityError);
}

TEST_CASE("runtime errors") {
  auto prog = Program::compile(
      "fun div(Int a, Int b) -> Int:\n  return a / b\n"
      "fun mod(Int a, Int b) -> Int:\n  return a % b\n"
      "fun big() -> Int:\n  return 9223372036854775807 + 1\n"
      "fun neg() -> Int:\n  let m = -9223372036854775807 - 1\n  return -m\n"
      "fun fdiv(Float a) -> Float:\n  return a / 0.0\n"
      "fun idx(Int i) -> Int:\n  let xs : Int[3]\n  return xs[i]\n"
      "fun narrow(Int v) -> Int:\n  let b : Int<0,2>\n  b = v\n  return b\n"
      "fun spin() -> Int:\n  let i = 0\n  while true:\n    i = i + 0\n  return i\n"
      "fun deep(Int n) -> Int:\n  return deep(n + 1)\n"
      "fun nothing(Int n) -> Int:\n  if n > 0:\n    return 1\n");
  auto kind = [&](const char* fn, std::vector<Value> args) {
    return runtime_kind([&] { run_function(prog, fn, args); });
  };
  CHECK(kind("div", {make_int(1), make_int(0)}) == "division-by-zero");
  CHECK(kind("mod", {make_int(1), make_int(0)}) == "division-by-zero");
  CHECK(kind("div", {make_int(INT64_MIN), make_int(-1)}) == "overflow");
  CHECK(kind("big", {}) == "overflow");
  CHECK(kind("neg", {}) == "overflow");
  CHECK(kind("fdiv", {make_float(1.0)}) == "division-by-zero");
  CHECK(kind("idx", {make_int(3)}) == "index");
  CHECK(kind("idx", {make_int(-1)}) == "index");
  CHECK(kind("idx", {make_int(2)}).empty());
  CHECK(kind("narrow", {make_int(3)}) == "range");
  CHECK(kind("spin", {}) == "step-limit");
  CHECK(kind("deep", {make_int(0)}) == "call-depth");
  CHECK(kind("nothing", {make_int(0)}) == "missing-return");
  try {
    run_function(prog, "div", {make_int(1), make_int(0)});
  } catch (const RuntimeError& e) {
    CHECK(e.pos().line == 2);
  }
}

TEST_CASE("a runtime error poisons the instance") {
  auto prog = Program::compile(
      "act g() -> G:\n"
      "  frm n : Int<0,3>\n"
      "  while true:\n"
      "    act inc(Bool twice)\n"
      "    if twice:\n"
      "      n = n + 2\n"
      "    else:\n"
      "      n = n + 1\n");
  auto env = EnvironmentInstance::instantiate(prog, 0);
  env.apply({"inc", {true}});
  CHECK(runtime_kind([&] { env.apply({"inc", {true}}); }) == "range");
  CHECK(env.poisoned());
  CHECK(runtime_kind([&] { env.can_apply({"inc", {false}}); }) == "poisoned");
  CHECK(runtime_kind([&] { env.legal_actions(); }) == "poisoned");
  CHECK(runtime_kind([&] { to_binary(env); }) == "poisoned");
}

TEST_CASE("composed acts") {
  auto prog = testkit::corpus("composition.rb1");
  auto env = EnvironmentInstance::instantiate(prog, "outer");
  auto legal = env.legal_actions();
  CHECK(!legal.empty());
  for (int i = 0; i < 50 && !env.is_done(); ++i) {
    auto moves = env.legal_actions();
    REQUIRE(!moves.empty());
    env.apply(moves.back());
  }
  CHECK(env.is_done());
}

TEST_CASE("reference interpreter") {
  auto prog = testkit::corpus("tictactoe.rb1");
  std::vector<ActionValue> moves = {mark(0, 0), mark(1, 0), mark(1, 1), mark(2, 0), mark(2, 2)};
  auto snaps = reference_step(prog, "play", moves);
  REQUIRE(snaps.size() == 6);
  auto env = fresh_ttt();
  CHECK(snaps[0] == env.frame());
  for (std::size_t i = 0; i < moves.size(); ++i) {
    env.apply(moves[i]);
    CHECK(snaps[i + 1] == env.frame());
  }
  CHECK(reference_step(prog, "play", {}).size() == 1);

  std::vector<ActionValue> bad = {mark(0, 0), mark(0, 0)};
  try {
    reference_step(prog, "play", bad);
    FAIL("expected PreconditionViolated");
  } catch (const PreconditionViolated& e) {
    CHECK(e.action() == "mark");
  }
  auto replay = fresh_ttt();
  replay.apply(bad[0]);
  CHECK_THROWS_AS(replay.apply(bad[1]), PreconditionViolated);
}

TEST_CASE("instances compare by frame") {
  auto a = fresh_ttt(), b = fresh_ttt();
  CHECK(a == b);
  a.apply(mark(0, 0));
  CHECK(!(a == b));
  b.apply(mark(0, 0));
  CHECK(a == b);
}
