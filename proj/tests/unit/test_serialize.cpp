#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include "helpers.hpp"
#include "rb1/serialize.hpp"

using namespace rb1;

namespace {

ActionValue mark(std::int64_t x, std::int64_t y) { return {"mark", {x, y}}; }

EnvironmentInstance fresh_ttt() { return EnvironmentInstance::instantiate(testkit::corpus("tictactoe.rb1"), "play"); }

EnvironmentInstance sample_win() {
  auto env = fresh_ttt();
  for (auto [x, y] : std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {1, 1}, {2, 0}, {2, 2}}) env.apply(mark(x, y));
  return env;
}

std::int64_t read_i64(const std::vector<std::uint8_t>& b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b.at(at + static_cast<std::size_t>(i));
  return static_cast<std::int64_t>(v);
}

}  // namespace

TEST_CASE("binary layout of a fresh game") {
  auto env = fresh_ttt();
  auto bytes = to_binary(env);
  REQUIRE(bytes.size() == 8 + 9 * 8 + 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(bytes[i] == 0);
  CHECK(std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; }));

  env.apply(mark(1, 2));
  bytes = to_binary(env);
  CHECK(read_i64(bytes, 8 + 5 * 8) == 1);   // cells[5]
  CHECK(read_i64(bytes, 8 + 9 * 8) == 1);   // current_player
  auto done = to_binary(sample_win());
  CHECK(read_i64(done, 0) == -1);
  for (std::size_t i = 0; i < 8; ++i) CHECK(done[i] == 0xFF);
}

TEST_CASE("binary layout packs Bool as one byte and Float as IEEE bits") {
  auto prog = Program::compile(
      "act g() -> G:\n"
      "  frm flag = true\n"
      "  frm x = 2.5\n"
      "  frm n : Int<-3,3> = -2\n"
      "  act go()\n");
  auto env = EnvironmentInstance::instantiate(prog, 0);
  auto bytes = to_binary(env);
  REQUIRE(bytes.size() == 8 + 1 + 8 + 8);
  CHECK(bytes[8] == 1);
  double x;
  std::uint64_t bits = static_cast<std::uint64_t>(read_i64(bytes, 9));
  std::memcpy(&x, &bits, 8);
  CHECK(x == 2.5);
  CHECK(read_i64(bytes, 17) == -2);
  CHECK(from_binary(prog, 0, bytes) == env);
}

TEST_CASE("binary decoding validates") {
  auto prog = testkit::corpus("tictactoe.rb1");
  auto bytes = to_binary(fresh_ttt());
  CHECK(from_binary(prog, "play", bytes) == fresh_ttt());

  auto tampered = bytes;
  tampered[0] = 7;
  try {
    from_binary(prog, "play", tampered);
    FAIL("expected DecodeError");
  } catch (const DecodeError& e) {
    CHECK(e.offset() == 0);
  }
  tampered = bytes;
  tampered[8 + 3 * 8] = 3;  // cells[3] = 3, outside Int<0,2>
  try {
    from_binary(prog, "play", tampered);
    FAIL("expected DecodeError");
  } catch (const DecodeError& e) {
    CHECK(e.offset() == 8 + 3 * 8);
  }
  auto shorter = bytes;
  shorter.pop_back();
  CHECK_THROWS_AS(from_binary(prog, "play", shorter), DecodeError);
  auto longer = bytes;
  longer.push_back(0);
  CHECK_THROWS_AS(from_binary(prog, "play", longer), DecodeError);
  CHECK_THROWS_AS(from_binary(prog, "play", {}), DecodeError);

  auto flags = Program::compile("act g() -> G:\n  frm flag : Bool\n  act go()\n");
  auto fb = to_binary(EnvironmentInstance::instantiate(flags, 0));
  fb[8] = 2;
  CHECK_THROWS_AS(from_binary(flags, 0, fb), DecodeError);
}

TEST_CASE("binary output is stable across runs") {
  auto a = to_binary(sample_win()), b = to_binary(sample_win());
  CHECK(a == b);
}

TEST_CASE("text form") {
  auto env = fresh_ttt();
  std::string text = to_text(env);
  CHECK(text == "{resume_idx: 0, board: {cells: [0, 0, 0, 0, 0, 0, 0, 0, 0], current_player: 0}}");
  CHECK(from_text(testkit::corpus("tictactoe.rb1"), "play", text) == env);

  auto done = sample_win();
  std::string end = to_text(done);
  CHECK(end == "{resume_idx: -1, board: {cells: [1, 0, 0, 2, 1, 0, 2, 0, 1], current_player: 0}}");
  CHECK(from_text(testkit::corpus("tictactoe.rb1"), "play", end) == done);

  std::string spaced = "  {\n resume_idx :-1 ,board:{ cells:[1,0,0,2,1,0,2,0,1],current_player:0 } }\n";
  CHECK(from_text(testkit::corpus("tictactoe.rb1"), "play", spaced) == done);
}

TEST_CASE("text parse errors report offsets") {
  auto prog = testkit::corpus("tictactoe.rb1");
  try {
    from_text(prog, "play", "{resume_idx: 0, board: {cells: [0, 0], current_player: 0}}");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("offset") != std::string::npos);
    CHECK(e.pos().column == 37);
  }
  CHECK_THROWS_AS(from_text(prog, "play", "{resume_idx: 0}"), ParseError);
  CHECK_THROWS_AS(from_text(prog, "play", "{board: {}, resume_idx: 0}"), ParseError);
  CHECK_THROWS_AS(from_text(prog, "play", ""), ParseError);
  CHECK_THROWS_AS(
      from_text(prog, "play", "{resume_idx: 0, board: {cells: [0, 0, 0, 0, 0, 0, 0, 0, 9], current_player: 0}}"),
      ParseError);
  CHECK_THROWS_AS(
      from_text(prog, "play", "{resume_idx: 4, board: {cells: [0, 0, 0, 0, 0, 0, 0, 0, 0], current_player: 0}}"),
      ParseError);
  CHECK_THROWS_AS(
      from_text(prog, "play", "{resume_idx: 0, board: {cells: [0, 0, 0, 0, 0, 0, 0, 0, 0], current_player: 0}} x"),
      ParseError);
}

TEST_CASE("floats print shortest and round trip") {
  CHECK(format_double(0.0) == "0.0");
  CHECK(format_double(1.0) == "1.0");
  CHECK(format_double(-2.5) == "-2.5");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e300) == "1e+300");
  for (double v : {0.1, 1.0 / 3.0, 123456.789, -1e-10, 5e-324, 1.7976931348623157e308}) {
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
  auto prog = Program::compile("act g() -> G:\n  frm x = 0.1\n  frm y = -3.0\n  act go()\n");
  auto env = EnvironmentInstance::instantiate(prog, 0);
  CHECK(to_text(env) == "{resume_idx: 0, x: 0.1, y: -3.0}");
  CHECK(from_text(prog, 0, to_text(env)) == env);
  CHECK(value_to_text(prog->module(), make_bool(true)) == "true");
}

TEST_CASE("observation tensors") {
  auto prog = testkit::corpus("tictactoe.rb1");
  CHECK(tensor_size(*prog, prog->act("play")) == testkit::golden("tictactoe").tensor_size);
  auto env = fresh_ttt();
  auto t = observation_tensor(env, 0);
  REQUIRE(t.size() == 31);
  // resume one-hot: point 0 of {0, finished}
  CHECK(t[0] == 1.0);
  CHECK(t[1] == 0.0);
  // every empty cell encodes as [1, 0, 0]
  for (int c = 0; c < 9; ++c) {
    CHECK(t[2 + c * 3] == 1.0);
    CHECK(t[3 + c * 3] == 0.0);
    CHECK(t[4 + c * 3] == 0.0);
  }
  CHECK(t[29] == 1.0);
  CHECK(t[30] == 0.0);
  CHECK(observation_tensor(env, 1) == t);

  auto done = observation_tensor(sample_win(), 0);
  CHECK(done[0] == 0.0);
  CHECK(done[1] == 1.0);
  CHECK(done[2 + 3 * 3 + 2] == 1.0);  // cells[3] holds 2

  for (const char* stem : {"catch", "connect_four", "flow_graph"}) {
    auto p = testkit::corpus(std::string(stem) + ".rb1");
    CHECK_MESSAGE(tensor_size(*p, 0) == testkit::golden(stem).tensor_size, stem);
  }
}

TEST_CASE("scalar tensor encodings") {
  auto prog = Program::compile(
      "act g() -> G:\n"
      "  frm flag = true\n"
      "  frm small : Int<0,2> = 1\n"
      "  frm wide : Int = -7\n"
      "  frm real = 2.5\n"
      "  act go()\n");
  auto t = observation_tensor(EnvironmentInstance::instantiate(prog, 0), 0);
  CHECK(t == std::vector<double>{1.0, 0.0, 1.0, 0.0, 1.0, 0.0, -7.0, 2.5});
  CHECK(tensor_size_of_type(*prog, TypeTable::kBool) == 1);
}

TEST_CASE("traces print and parse") {
  auto prog = testkit::corpus("tictactoe.rb1");
  std::vector<ActionValue> moves = {mark(0, 0), mark(1, 0), mark(1, 1), mark(2, 0), mark(2, 2)};
  std::string text = print_trace("play", moves);
  CHECK(text == "# act: play\nmark(0, 0)\nmark(1, 0)\nmark(1, 1)\nmark(2, 0)\nmark(2, 2)\n");
  CHECK(parse_trace(*prog, 0, text) == moves);
  CHECK(parse_trace(*prog, 0, "").empty());
  CHECK(parse_trace(*prog, 0, "# only a comment\n\n").empty());
  CHECK(parse_trace(*prog, 0, "  mark( 2 ,1 )  # trailing\n") == std::vector<ActionValue>{mark(2, 1)});
  try {
    parse_trace(*prog, 0, "mark(0, 0)\n\nmark(9, 0)\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.pos().line == 3);
  }
  CHECK_THROWS_AS(parse_trace(*prog, 0, "mark(0)\n"), ParseError);
  CHECK_THROWS_AS(parse_trace(*prog, 0, "jump(0, 0)\n"), ParseError);
  CHECK_THROWS_AS(parse_trace(*prog, 0, "mark(true, 0)\n"), ParseError);
  CHECK_THROWS_AS(parse_trace(*prog, 0, "mark(0, 0\n"), ParseError);
  CHECK(parse_action(*prog, 0, "mark(1, 2)") == mark(1, 2));

  // preconditions are not checked while parsing
  auto twice = parse_trace(*prog, 0, "mark(0, 0)\nmark(0, 0)\n");
  CHECK(twice.size() == 2);

  auto flags = Program::compile("act g() -> G:\n  act go(Bool a, Int<-2,2> b)\n");
  std::vector<ActionValue> f = {{"go", {true, std::int64_t{-2}}}};
  CHECK(print_trace("g", f) == "# act: g\ngo(true, -2)\n");
  CHECK(parse_trace(*flags, 0, print_trace("g", f)) == f);
}

TEST_CASE("replaying a printed trace reaches the same state") {
  auto prog = testkit::corpus("connect_four.rb1");
  auto p = testkit::random_playout(prog, 0, 99);
  auto parsed = parse_trace(*prog, 0, print_trace("play", p.actions));
  auto env = EnvironmentInstance::instantiate(prog, 0);
  for (const auto& a : parsed) env.apply(a);
  CHECK(env == p.states.back());
}
