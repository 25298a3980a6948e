#pragma once

#include <cmath>
#include <vector>

#include "mbmac/geometry.hpp"
#include "mbmac/rng.hpp"
#include "mbmac/time.hpp"

namespace mbmac {

// Gauss-Markov mobility: speed and heading are first-order autoregressive
// processes with memory alpha, pulled toward a per-node mean. Nodes reflect
// off the rectangular field boundary.
struct GaussMarkovParams {
  double alpha = 0.75;
  double mean_speed_mps = 40.0;
  double speed_sigma_mps = 5.0;
  double direction_sigma_rad = 0.3;
  SimTime update_interval = 1 * kSecond;
  double field_width_m = 10000.0;
  double field_height_m = 10000.0;
};

class GaussMarkovModel {
 public:
  GaussMarkovModel(GaussMarkovParams params, std::vector<Position> initial,
                   RngStream& rng)
      : p_(params), pos_(std::move(initial)) {
    states_.resize(pos_.size());
    for (auto& s : states_) {
      s.speed = p_.mean_speed_mps;
      s.direction = rng.uniform(0.0, 2.0 * kPi);
      s.mean_direction = s.direction;
    }
  }

  const std::vector<Position>& positions() const { return pos_; }

  // Advances every node by one update interval.
  void step(RngStream& rng) {
    const double dt = to_seconds(p_.update_interval);
    for (std::size_t i = 0; i < pos_.size(); ++i) {
      auto& s = states_[i];
      const double a = p_.alpha;
      const double root = std::sqrt(std::max(0.0, 1.0 - a * a));
      s.speed = a * s.speed + (1.0 - a) * p_.mean_speed_mps +
                root * p_.speed_sigma_mps * rng.normal();
      if (s.speed < 0.0) s.speed = 0.0;
      s.direction = a * s.direction + (1.0 - a) * s.mean_direction +
                    root * p_.direction_sigma_rad * rng.normal();
      Position& q = pos_[i];
      q.x += s.speed * std::cos(s.direction) * dt;
      q.y += s.speed * std::sin(s.direction) * dt;
      reflect(q, s);
    }
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;

  struct State {
    double speed = 0.0;
    double direction = 0.0;       // radians
    double mean_direction = 0.0;  // pull target, flipped on reflection
  };

  void reflect(Position& q, State& s) {
    if (q.x < 0.0) {
      q.x = -q.x;
      s.direction = kPi - s.direction;
      s.mean_direction = kPi - s.mean_direction;
    } else if (q.x > p_.field_width_m) {
      q.x = 2.0 * p_.field_width_m - q.x;
      s.direction = kPi - s.direction;
      s.mean_direction = kPi - s.mean_direction;
    }
    if (q.y < 0.0) {
      q.y = -q.y;
      s.direction = -s.direction;
      s.mean_direction = -s.mean_direction;
    } else if (q.y > p_.field_height_m) {
      q.y = 2.0 * p_.field_height_m - q.y;
      s.direction = -s.direction;
      s.mean_direction = -s.mean_direction;
    }
  }

  GaussMarkovParams p_;
  std::vector<Position> pos_;
  std::vector<State> states_;
};

}  // namespace mbmac
