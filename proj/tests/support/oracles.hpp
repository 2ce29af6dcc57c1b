#pragma once

// Plain C++ rule implementations of the corpus games. Nothing here touches
// the rb1 runtime.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

struct InvalidMove : std::runtime_error {
  InvalidMove(std::size_t index, const std::string& why)
      : std::runtime_error("invalid move " + std::to_string(index) + ": " + why), index(index) {}
  std::size_t index;
};

enum class Outcome { Ongoing, Win0, Win1, Draw };

// Score for `player` under the corpus convention.
double score_of(Outcome o, int player);

struct TicTacToe {
  std::array<int, 9> cells{};  // 0 empty, 1 player 0, 2 player 1
  int to_move = 0;
  Outcome outcome = Outcome::Ongoing;

  bool legal(int x, int y) const;
  void play(int x, int y);  // throws InvalidMove(0)
  std::vector<std::pair<int, int>> moves() const;
};

Outcome adjudicate_tictactoe(const std::vector<std::pair<int, int>>& trace);

struct ConnectFour {
  static constexpr int kCols = 7, kRows = 6;
  std::array<std::array<int, kRows>, kCols> grid{};  // grid[col][row], row 0 bottom
  std::array<int, kCols> heights{};
  int to_move = 0;
  int placed = 0;
  Outcome outcome = Outcome::Ongoing;

  bool legal(int col) const;
  void play(int col);
  std::vector<int> moves() const;
};

Outcome adjudicate_connect4(const std::vector<int>& trace);

struct Catch {
  static constexpr int kWidth = 5, kHeight = 10;
  bool dropped = false;
  int ball_row = 0, ball_col = 0, paddle = 2;
  bool over = false;

  bool caught() const { return over && paddle == ball_col; }
  // Before the drop the only moves are columns; afterwards deltas.
  std::vector<int> moves() const;
  void drop(int col);
  void move(int delta);
};

struct Fraction {
  std::uint64_t num = 0, den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

struct TicTacToeOdds {
  Fraction draw, win0, win1;
  std::uint64_t playouts = 0;  // distinct complete move sequences
};

// Exhaustive enumeration of every playout under uniform random play.
TicTacToeOdds tictactoe_uniform_odds();

}  // namespace oracle
