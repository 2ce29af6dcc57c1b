#include <doctest.h>

#include "helpers.hpp"
#include "rb1/serialize.hpp"

using namespace rb1;

namespace {

ActionValue drop(std::int64_t c) { return {"drop", {c}}; }
ActionValue move(std::int64_t d) { return {"move", {d}}; }

}  // namespace

TEST_CASE("every corpus program compiles without warnings") {
  for (const char* f : {"tictactoe.rb1", "catch.rb1", "connect_four.rb1", "flow_graph.rb1", "composition.rb1"}) {
    auto prog = testkit::corpus(f);
    CHECK_MESSAGE(prog->warnings().empty(), f);
  }
  CHECK_THROWS_AS(Program::compile_file(testkit::corpus_path("mutual_recursion.rb1")), TypeError);
}

TEST_CASE("corpus sizes match their goldens") {
  for (const char* stem : {"tictactoe", "catch", "connect_four", "flow_graph"}) {
    auto prog = testkit::corpus(std::string(stem) + ".rb1");
    auto g = testkit::golden(stem);
    int act = prog->act(g.act);
    CHECK_MESSAGE(tensor_size(*prog, act) == g.tensor_size, stem);
    CHECK_MESSAGE(prog->action_table(act).size() == g.action_table_size, stem);
    auto env = EnvironmentInstance::instantiate(prog, act);
    CHECK_MESSAGE(observation_tensor(env, 0).size() == g.tensor_size, stem);
  }
}

TEST_CASE("connect four: vertical win") {
  auto prog = testkit::corpus("connect_four.rb1");
  auto env = EnvironmentInstance::instantiate(prog, "play");
  for (int c : {3, 4, 3, 4, 3, 4}) env.apply(drop(c));
  CHECK(!env.is_done());
  env.apply(drop(3));
  CHECK(env.is_done());
  CHECK(score(env, 0) == 1.0);
  CHECK(score(env, 1) == -1.0);
  CHECK(oracle::adjudicate_connect4({3, 4, 3, 4, 3, 4, 3}) == oracle::Outcome::Win0);
}

TEST_CASE("connect four: column bounds and full columns") {
  auto prog = testkit::corpus("connect_four.rb1");
  auto env = EnvironmentInstance::instantiate(prog, "play");
  CHECK(!env.can_apply(drop(7)));
  CHECK(!env.can_apply(drop(-1)));
  CHECK_THROWS_AS(env.apply(drop(7)), PreconditionViolated);
  for (int i = 0; i < 6; ++i) env.apply(drop(0));
  CHECK(!env.can_apply(drop(0)));
  CHECK(env.legal_actions().size() == 6);
  oracle::ConnectFour o;
  CHECK(!o.legal(7));
}

TEST_CASE("catch: aligned paddle catches the ball") {
  auto prog = testkit::corpus("catch.rb1");
  auto env = EnvironmentInstance::instantiate(prog, "play");
  CHECK(env.legal_actions().size() == 5);
  env.apply(drop(2));
  CHECK(env.legal_actions().size() == 3);
  for (int i = 0; i < 9; ++i) {
    CHECK(!env.is_done());
    env.apply(move(0));
  }
  CHECK(env.is_done());
  CHECK(score(env, 0) == 1.0);

  auto miss = EnvironmentInstance::instantiate(prog, "play");
  miss.apply(drop(0));
  for (int i = 0; i < 9; ++i) miss.apply(move(1));
  CHECK(std::get<std::int64_t>(miss.get_scalar("paddle")) == 4);
  CHECK(score(miss, 0) == -1.0);
  CHECK(!miss.can_apply(move(0)));
}

TEST_CASE("catch: the paddle is clamped at the walls") {
  auto prog = testkit::corpus("catch.rb1");
  auto env = EnvironmentInstance::instantiate(prog, "play");
  env.apply(drop(0));
  for (int i = 0; i < 4; ++i) env.apply(move(-1));
  CHECK(std::get<std::int64_t>(env.get_scalar("paddle")) == 0);
  CHECK(!env.can_apply(move(2)));
  oracle::Catch o;
  o.drop(0);
  for (int i = 0; i < 4; ++i) o.move(-1);
  CHECK(o.paddle == 0);
}

TEST_CASE("tic-tac-toe golden draw probability") {
  auto g = testkit::golden("tictactoe");
  REQUIRE(g.draw_probability.has_value());
  CHECK(g.draw_probability->num == 8);
  CHECK(g.draw_probability->den == 63);
}

TEST_CASE("composition drives the inner act through its outer one") {
  auto prog = testkit::corpus("composition.rb1");
  CHECK(prog->act("inner") < prog->act("outer"));
  CHECK(prog->default_act() == prog->act("inner"));
  auto env = EnvironmentInstance::instantiate(prog, "outer");
  int steps = 0;
  while (!env.is_done() && steps < 1000) {
    auto legal = env.legal_actions();
    REQUIRE(!legal.empty());
    env.apply(legal.back());
    ++steps;
  }
  CHECK(env.is_done());
}
