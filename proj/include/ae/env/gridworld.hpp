#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ae/error.hpp"

namespace ae {

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

enum class Direction : int { North = 0, South = 1, East = 2, West = 3 };

/// Blocked-cell layout plus optional explicit start/goal (from a map file).
struct GridMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> wall;  // row-major
  std::optional<Cell> start;
  std::optional<Cell> goal;

  bool blocked(int r, int c) const { return wall[static_cast<std::size_t>(r * width + c)] != 0; }
};

/// Parse a map: '.' floor, '#' wall, 'S' start, 'G' goal, one row per line.
inline GridMap parse_grid_map(std::istream& is) {
  GridMap m;
  std::string line;
  int row = 0;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (m.width == 0) m.width = static_cast<int>(line.size());
    if (static_cast<int>(line.size()) != m.width)
      throw ConfigError("grid map: row " + std::to_string(row) + " has length " + std::to_string(line.size()) +
                        ", expected " + std::to_string(m.width));
    for (int c = 0; c < m.width; ++c) {
      const char ch = line[static_cast<std::size_t>(c)];
      switch (ch) {
        case '.': m.wall.push_back(0); break;
        case '#': m.wall.push_back(1); break;
        case 'S':
          if (m.start) throw ConfigError("grid map: more than one 'S'");
          m.start = Cell{row, c};
          m.wall.push_back(0);
          break;
        case 'G':
          if (m.goal) throw ConfigError("grid map: more than one 'G'");
          m.goal = Cell{row, c};
          m.wall.push_back(0);
          break;
        default:
          throw ConfigError(std::string("grid map: unexpected character '") + ch + "' at row " +
                            std::to_string(row));
      }
    }
    ++row;
  }
  m.height = row;
  if (m.width == 0 || m.height == 0) throw ConfigError("grid map: empty map");
  return m;
}

inline GridMap load_grid_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("grid map: cannot open " + path);
  return parse_grid_map(in);
}

/// 3x3 lattice of rooms with one-cell doorways centred on each shared wall.
inline GridMap room_lattice(int width, int height) {
  GridMap m;
  m.width = width;
  m.height = height;
  m.wall.assign(static_cast<std::size_t>(width * height), 0);
  if (width < 8 || height < 8) return m;  // too small for rooms
  const std::array<int, 2> wall_rows{height / 3, 2 * height / 3};
  const std::array<int, 2> wall_cols{width / 3, 2 * width / 3};
  auto set = [&](int r, int c, std::uint8_t v) { m.wall[static_cast<std::size_t>(r * width + c)] = v; };
  for (int r : wall_rows)
    for (int c = 0; c < width; ++c) set(r, c, 1);
  for (int c : wall_cols)
    for (int r = 0; r < height; ++r) set(r, c, 1);
  // Segment spans between lattice lines.
  const std::array<std::pair<int, int>, 3> row_spans{{{0, wall_rows[0] - 1},
                                                      {wall_rows[0] + 1, wall_rows[1] - 1},
                                                      {wall_rows[1] + 1, height - 1}}};
  const std::array<std::pair<int, int>, 3> col_spans{{{0, wall_cols[0] - 1},
                                                      {wall_cols[0] + 1, wall_cols[1] - 1},
                                                      {wall_cols[1] + 1, width - 1}}};
  for (int r : wall_rows)
    for (const auto& [lo, hi] : col_spans) set(r, (lo + hi) / 2, 0);
  for (int c : wall_cols)
    for (const auto& [lo, hi] : row_spans) set((lo + hi) / 2, c, 0);
  return m;
}

struct GridConfig {
  int width = 30;
  int height = 30;
  int k_categories = 10;
  double p_correct_same = 0.75;   // p_c^T
  double p_correct_diff = 0.5;    // p_c^F
  double p_elim_invalid = 1.0;    // p_e^F
  double p_elim_valid = 0.0;      // p_e^T
  int horizon = 150;
  bool rooms = true;              // default 3x3 room lattice when no map is given
  std::optional<GridMap> map;     // overrides width/height/rooms
  std::uint64_t category_seed = 0;
};

struct GridState {
  Cell cell;
  int steps_taken = 0;
  int category = 0;
};

struct GridStep {
  GridState next;
  double reward = 0.0;
  int elim = 0;
  bool done = false;      // goal reached or horizon hit
  bool terminal = false;  // goal reached (no bootstrap past this step)
};

/// K-category navigation world. Actions a in [0, 4K) decode to category a/4
/// and direction a%4. Categories are assigned per cell once, from
/// category_seed, so they persist across episodes.
class GridWorld {
 public:
  explicit GridWorld(GridConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.k_categories < 1) throw ConfigError("gridworld: k_categories must be positive");
    if (cfg_.horizon < 1) throw ConfigError("gridworld: horizon must be positive");
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(cfg_.p_correct_same) || !prob(cfg_.p_correct_diff) || !prob(cfg_.p_elim_invalid) ||
        !prob(cfg_.p_elim_valid))
      throw ConfigError("gridworld: probabilities must lie in [0,1]");
    if (!(cfg_.p_elim_invalid > cfg_.p_elim_valid))
      throw ConfigError("gridworld: p_elim_invalid must exceed p_elim_valid");

    if (cfg_.map) {
      map_ = *cfg_.map;
      cfg_.width = map_.width;
      cfg_.height = map_.height;
    } else {
      if (cfg_.width < 1 || cfg_.height < 1) throw ConfigError("gridworld: width and height must be positive");
      map_ = cfg_.rooms ? room_lattice(cfg_.width, cfg_.height)
                        : GridMap{cfg_.width, cfg_.height,
                                  std::vector<std::uint8_t>(static_cast<std::size_t>(cfg_.width * cfg_.height), 0),
                                  std::nullopt, std::nullopt};
    }
    start_ = map_.start.value_or(Cell{cfg_.height / 2, cfg_.width / 2});
    if (map_.blocked(start_.row, start_.col)) throw ConfigError("gridworld: start cell is a wall");
    if (map_.goal) {
      goal_ = *map_.goal;
    } else {
      bool found = false;
      // Upper-left-most traversable cell: smallest row + col, then smallest row.
      for (int sum = 0; sum < cfg_.width + cfg_.height && !found; ++sum)
        for (int r = 0; r <= sum && !found; ++r) {
          const int c = sum - r;
          if (r < cfg_.height && c < cfg_.width && !map_.blocked(r, c)) {
            goal_ = Cell{r, c};
            found = true;
          }
        }
      if (!found) throw ConfigError("gridworld: no traversable cell");
    }
    if (!reachable(start_, goal_)) throw ConfigError("gridworld: goal unreachable from start");

    std::mt19937_64 rng(cfg_.category_seed);
    std::uniform_int_distribution<int> cat(0, cfg_.k_categories - 1);
    categories_.resize(static_cast<std::size_t>(cfg_.width * cfg_.height));
    for (auto& c : categories_) c = cat(rng);
  }

  const GridConfig& config() const { return cfg_; }
  int width() const { return cfg_.width; }
  int height() const { return cfg_.height; }
  Cell start() const { return start_; }
  Cell goal() const { return goal_; }
  int num_actions() const { return 4 * cfg_.k_categories; }
  std::size_t num_states() const { return static_cast<std::size_t>(cfg_.width * cfg_.height); }
  std::size_t state_index(Cell c) const { return static_cast<std::size_t>(c.row * cfg_.width + c.col); }
  Cell cell_of(std::size_t index) const {
    return Cell{static_cast<int>(index) / cfg_.width, static_cast<int>(index) % cfg_.width};
  }
  bool blocked(Cell c) const { return map_.blocked(c.row, c.col); }
  int category(Cell c) const { return categories_[state_index(c)]; }

  static int action_category(int action) { return action / 4; }
  static Direction action_direction(int action) { return static_cast<Direction>(action % 4); }
  static int make_action(int category, Direction d) { return category * 4 + static_cast<int>(d); }

  /// Ground truth: the action's category matches the cell's.
  bool action_valid(Cell c, int action) const { return action_category(action) == category(c); }

  GridState reset() const { return GridState{start_, 0, category(start_)}; }

  /// Deterministic move (walls and borders leave the cell unchanged).
  Cell move(Cell c, Direction d) const {
    Cell n = c;
    switch (d) {
      case Direction::North: --n.row; break;
      case Direction::South: ++n.row; break;
      case Direction::East: ++n.col; break;
      case Direction::West: --n.col; break;
    }
    if (n.row < 0 || n.col < 0 || n.row >= cfg_.height || n.col >= cfg_.width || blocked(n)) return c;
    return n;
  }

  template <typename Rng>
  GridStep step(const GridState& s, int action, Rng& rng) const {
    if (action < 0 || action >= num_actions())
      throw InvalidArgument("gridworld: invalid action index " + std::to_string(action));
    const bool same = action_category(action) == s.category;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Direction d = action_direction(action);
    if (unit(rng) >= (same ? cfg_.p_correct_same : cfg_.p_correct_diff)) {
      std::uniform_int_distribution<int> dir(0, 3);
      d = static_cast<Direction>(dir(rng));
    }
    GridStep out;
    out.next.cell = move(s.cell, d);
    out.next.steps_taken = s.steps_taken + 1;
    out.next.category = category(out.next.cell);
    out.reward = -1.0;
    out.elim = unit(rng) < (same ? cfg_.p_elim_valid : cfg_.p_elim_invalid) ? 1 : 0;
    out.terminal = out.next.cell == goal_;
    out.done = out.terminal || out.next.steps_taken >= cfg_.horizon;
    return out;
  }

  std::string render_text(const GridState& s) const {
    return "row " + std::to_string(s.cell.row) + " col " + std::to_string(s.cell.col) + " category " +
           std::to_string(s.category);
  }

  /// BFS distance in moves ignoring stochasticity; -1 when unreachable.
  int shortest_path(Cell from, Cell to) const {
    std::vector<int> dist(num_states(), -1);
    std::queue<Cell> q;
    dist[state_index(from)] = 0;
    q.push(from);
    while (!q.empty()) {
      const Cell c = q.front();
      q.pop();
      if (c == to) return dist[state_index(c)];
      for (int d = 0; d < 4; ++d) {
        const Cell n = move(c, static_cast<Direction>(d));
        if (dist[state_index(n)] < 0) {
          dist[state_index(n)] = dist[state_index(c)] + 1;
          q.push(n);
        }
      }
    }
    return -1;
  }

 private:
  bool reachable(Cell from, Cell to) const { return shortest_path(from, to) >= 0; }

  GridConfig cfg_;
  GridMap map_;
  Cell start_;
  Cell goal_;
  std::vector<int> categories_;
};

/// Stateful wrapper exposing the reset/step surface used by learning loops.
class GridEnv {
 public:
  explicit GridEnv(GridConfig cfg) : world_(std::move(cfg)) {}

  void reset(std::uint64_t seed) {
    rng_.seed(seed);
    state_ = world_.reset();
  }
  void reset() { state_ = world_.reset(); }

  struct Outcome {
    double reward;
    int elim;
    bool done;
    bool terminal;
  };

  Outcome step(std::size_t action) {
    const auto r = world_.step(state_, static_cast<int>(action), rng_);
    state_ = r.next;
    return {r.reward, r.elim, r.done, r.terminal};
  }

  int num_actions() const { return world_.num_actions(); }
  int horizon() const { return world_.config().horizon; }
  std::string observation() const { return world_.render_text(state_); }
  std::string state_text() const { return observation(); }
  bool action_valid(int action) const { return world_.action_valid(state_.cell, action); }
  const GridState& state() const { return state_; }
  const GridWorld& world() const { return world_; }

 private:
  GridWorld world_;
  GridState state_;
  std::mt19937_64 rng_{0};
};

}  // namespace ae
