#include "oracles.hpp"

#include <numeric>

namespace oracle {

double score_of(Outcome o, int player) {
  switch (o) {
    case Outcome::Win0: return player == 0 ? 1.0 : -1.0;
    case Outcome::Win1: return player == 1 ? 1.0 : -1.0;
    default: return 0.0;
  }
}

namespace {

constexpr int kLines[8][3] = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {0, 3, 6},
                              {1, 4, 7}, {2, 5, 8}, {0, 4, 8}, {2, 4, 6}};

bool ttt_won(const std::array<int, 9>& c, int mark) {
  for (const auto& l : kLines) {
    if (c[l[0]] == mark && c[l[1]] == mark && c[l[2]] == mark) return true;
  }
  return false;
}

}  // namespace

bool TicTacToe::legal(int x, int y) const {
  return outcome == Outcome::Ongoing && x >= 0 && x < 3 && y >= 0 && y < 3 && cells[x * 3 + y] == 0;
}

void TicTacToe::play(int x, int y) {
  if (!legal(x, y)) throw InvalidMove(0, "cell unavailable");
  int mark = to_move + 1;
  cells[x * 3 + y] = mark;
  if (ttt_won(cells, mark)) {
    outcome = to_move == 0 ? Outcome::Win0 : Outcome::Win1;
    return;
  }
  bool full = true;
  for (int v : cells) full = full && v != 0;
  if (full) {
    outcome = Outcome::Draw;
    return;
  }
  to_move = 1 - to_move;
}

std::vector<std::pair<int, int>> TicTacToe::moves() const {
  std::vector<std::pair<int, int>> out;
  for (int x = 0; x < 3; ++x) {
    for (int y = 0; y < 3; ++y) {
      if (legal(x, y)) out.emplace_back(x, y);
    }
  }
  return out;
}

Outcome adjudicate_tictactoe(const std::vector<std::pair<int, int>>& trace) {
  TicTacToe g;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (!g.legal(trace[i].first, trace[i].second)) throw InvalidMove(i, "cell unavailable");
    g.play(trace[i].first, trace[i].second);
  }
  return g.outcome;
}

bool ConnectFour::legal(int col) const {
  return outcome == Outcome::Ongoing && col >= 0 && col < kCols && heights[col] < kRows;
}

void ConnectFour::play(int col) {
  if (!legal(col)) throw InvalidMove(0, "column unavailable");
  int row = heights[col]++;
  int mark = to_move + 1;
  grid[col][row] = mark;
  ++placed;
  auto at = [&](int c, int r) { return c >= 0 && c < kCols && r >= 0 && r < kRows && grid[c][r] == mark; };
  const int dirs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  for (const auto& d : dirs) {
    int n = 1;
    for (int s = 1; at(col + s * d[0], row + s * d[1]); ++s) ++n;
    for (int s = 1; at(col - s * d[0], row - s * d[1]); ++s) ++n;
    if (n >= 4) {
      outcome = to_move == 0 ? Outcome::Win0 : Outcome::Win1;
      return;
    }
  }
  if (placed == kCols * kRows) {
    outcome = Outcome::Draw;
    return;
  }
  to_move = 1 - to_move;
}

std::vector<int> ConnectFour::moves() const {
  std::vector<int> out;
  for (int c = 0; c < kCols; ++c) {
    if (legal(c)) out.push_back(c);
  }
  return out;
}

Outcome adjudicate_connect4(const std::vector<int>& trace) {
  ConnectFour g;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (!g.legal(trace[i])) throw InvalidMove(i, "column unavailable");
    g.play(trace[i]);
  }
  return g.outcome;
}

std::vector<int> Catch::moves() const {
  if (over) return {};
  if (!dropped) return {0, 1, 2, 3, 4};
  return {-1, 0, 1};
}

void Catch::drop(int col) {
  if (dropped || col < 0 || col >= kWidth) throw InvalidMove(0, "bad drop");
  dropped = true;
  ball_col = col;
}

void Catch::move(int delta) {
  if (!dropped || over || delta < -1 || delta > 1) throw InvalidMove(0, "bad move");
  paddle += delta;
  if (paddle < 0) paddle = 0;
  if (paddle >= kWidth) paddle = kWidth - 1;
  ++ball_row;
  if (ball_row == kHeight - 1) over = true;
}

namespace {

// Weight of a playout of length k is (9-k)!, so sums are exact multiples
// of 1/9!.
struct Tally {
  std::uint64_t draw = 0, win0 = 0, win1 = 0, playouts = 0;
};

std::uint64_t factorial(int n) {
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
  return f;
}

void enumerate(TicTacToe& g, int depth, Tally& t) {
  if (g.outcome != Outcome::Ongoing) {
    std::uint64_t w = factorial(9 - depth);
    ++t.playouts;
    if (g.outcome == Outcome::Draw) t.draw += w;
    if (g.outcome == Outcome::Win0) t.win0 += w;
    if (g.outcome == Outcome::Win1) t.win1 += w;
    return;
  }
  for (auto [x, y] : g.moves()) {
    TicTacToe next = g;
    next.play(x, y);
    enumerate(next, depth + 1, t);
  }
}

Fraction reduce(std::uint64_t num, std::uint64_t den) {
  std::uint64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

}  // namespace

TicTacToeOdds tictactoe_uniform_odds() {
  TicTacToe g;
  Tally t;
  enumerate(g, 0, t);
  std::uint64_t den = factorial(9);
  return {reduce(t.draw, den), reduce(t.win0, den), reduce(t.win1, den), t.playouts};
}

}  // namespace oracle
