#pragma once

#include <cstddef>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rbi/mdp.hpp"
#include "rbi/random.hpp"

namespace rbi::harness {

/// Rectangular gridworld with four moves (up, right, down, left). Moves into
/// the border leave the agent in place. With probability `slip` the chosen
/// move is replaced by a uniformly random one. Entering a goal pays its reward
/// and ends the episode; every step also pays -step_cost.
struct GridWorld {
  struct Goal {
    std::size_t x;
    std::size_t y;
    double reward;
  };

  std::size_t width = 5;
  std::size_t height = 5;
  std::size_t start_x = 0;
  std::size_t start_y = 0;
  std::vector<Goal> goals{{4, 4, 1.0}};
  double step_cost = 0.01;
  double slip = 0.1;
  std::size_t max_episode_steps = 100;

  static constexpr std::size_t kActions = 4;

  struct Step {
    std::size_t next;
    double reward;
    bool terminal;
  };

  std::size_t n_states() const { return width * height; }
  std::size_t start() const { return start_y * width + start_x; }

  void validate() const {
    if (width == 0 || height == 0) throw std::invalid_argument("GridWorld: empty grid");
    if (start_x >= width || start_y >= height) throw std::invalid_argument("GridWorld: start outside the grid");
    if (goals.empty()) throw std::invalid_argument("GridWorld: at least one goal required");
    for (const auto& g : goals) {
      if (g.x >= width || g.y >= height) throw std::invalid_argument("GridWorld: goal outside the grid");
      if (g.x == start_x && g.y == start_y) throw std::invalid_argument("GridWorld: start must not be a goal");
    }
    if (!(slip >= 0.0 && slip <= 1.0)) throw std::invalid_argument("GridWorld: slip must lie in [0, 1]");
    if (max_episode_steps == 0) throw std::invalid_argument("GridWorld: max_episode_steps must be >= 1");
    // Every cell is connected on an open grid, so a goal is always reachable.
  }

  bool is_goal(std::size_t s) const { return goal_index(s) < goals.size(); }

  std::size_t goal_index(std::size_t s) const {
    for (std::size_t i = 0; i < goals.size(); ++i) {
      if (goals[i].y * width + goals[i].x == s) return i;
    }
    return goals.size();
  }

  /// Cell reached by a move, before slipping.
  std::size_t move(std::size_t s, std::size_t action) const {
    std::size_t x = s % width, y = s / width;
    switch (action) {
      case 0: y = (y + 1 < height) ? y + 1 : y; break;
      case 1: x = (x + 1 < width) ? x + 1 : x; break;
      case 2: y = (y > 0) ? y - 1 : y; break;
      case 3: x = (x > 0) ? x - 1 : x; break;
      default: throw std::invalid_argument("GridWorld: action out of range");
    }
    return y * width + x;
  }

  double entry_reward(std::size_t next) const {
    const std::size_t g = goal_index(next);
    return -step_cost + (g < goals.size() ? goals[g].reward : 0.0);
  }

  Step step(std::size_t s, std::size_t action, Engine& rng) const {
    if (slip > 0.0 && uniform01(rng) < slip) action = uniform_index(rng, kActions);
    const std::size_t next = move(s, action);
    return {next, entry_reward(next), is_goal(next)};
  }

  /// The same dynamics as an exact discounted MDP started from `start`
  /// (expected rewards, goals absorbing). The episode cap is not modeled.
  TabularMDP to_mdp(double gamma) const {
    validate();
    const std::size_t n = n_states();
    std::vector<double> transition(n * kActions * n, 0.0);
    std::vector<double> reward(n * kActions, 0.0);
    std::vector<bool> terminal(n, false);
    for (std::size_t s = 0; s < n; ++s) terminal[s] = is_goal(s);
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t a = 0; a < kActions; ++a) {
        for (std::size_t actual = 0; actual < kActions; ++actual) {
          const double p = (actual == a ? 1.0 - slip : 0.0) + slip / static_cast<double>(kActions);
          if (p == 0.0) continue;
          const std::size_t next = move(s, actual);
          transition[(s * kActions + a) * n + next] += p;
          reward[s * kActions + a] += p * entry_reward(next);
        }
      }
    }
    std::vector<double> initial(n, 0.0);
    initial[start()] = 1.0;
    return TabularMDP(n, kActions, std::move(transition), std::move(reward), gamma, std::move(terminal),
                      std::move(initial));
  }
};

}  // namespace rbi::harness
