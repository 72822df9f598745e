#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "devalign/core_model.hpp"
#include "devalign/numeffects.hpp"

namespace devalign::growth {

struct Point {
  double x = 0.0;  // age in years or epoch index, > 0
  double y = 0.0;
};

// Series ordered by strictly increasing x.
class Trajectory {
 public:
  Trajectory() = default;
  // Sorts by x; throws InvalidArgument on duplicate or non-finite x, or x <= 0.
  Trajectory(std::string label, std::vector<Point> points);

  const std::string& label() const noexcept { return label_; }
  const std::vector<Point>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }

 private:
  std::string label_;
  std::vector<Point> points_;
};

struct GrowthFit {
  double a = 0.0;
  double b = 0.0;
  double r2 = 0.0;
  int iterations = 0;

  double operator()(double x) const;
};

inline constexpr int kPowerMaxIterations = 200;
inline constexpr double kPowerRelTol = 1e-12;

// y ~ a * x^b by Gauss-Newton with step halving, started from a log-log
// regression over the points with y > 0 (a = mean(y), b = 0 if none).
// Throws DegenerateVariance (constant y), InvalidArgument (< 3 points) and
// FitFailure (no convergence within 200 iterations or singular normal equations).
GrowthFit fit_power(const Trajectory& traj);

struct Correlation {
  double r = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

// Pearson r and two-sided p from the Student t distribution with n - 2 df.
// Needs n >= 3; throws LengthMismatch or DegenerateVariance.
Correlation pearson(std::span<const double> xs, std::span<const double> ys);

struct AlignmentResult {
  Correlation correlation;
  std::size_t n_pairs = 0;
  std::size_t dropped_human = 0;
  std::size_t dropped_model = 0;
  EpochAgeMap mapping;
  std::vector<std::pair<Point, Point>> pairs;  // (human, model) in ascending age
};

// Pairs integer age a with epoch epochs_per_year * (a - base_age) and
// correlates the paired y values. Throws InsufficientOverlap below 3 pairs.
AlignmentResult align_trajectories(const Trajectory& human, const Trajectory& model, const EpochAgeMap& map = {});

enum class Effect { Distance, Size, Ratio };

// Nonnegative strength: max(0, -distance_r), max(0, size_r), ratio_r2.
double effect_strength(const numeffects::EffectStats& stats, Effect effect);

// Comma-separated table with a header row. The first column is x; blank cells
// are missing. Lines starting with '#' are skipped.
struct Table {
  std::vector<std::string> columns;  // columns[0] is the x column
  std::vector<double> x;
  std::vector<std::vector<std::optional<double>>> values;  // values[c - 1][row]

  // Trajectory of column `name` over x, skipping missing cells.
  Trajectory series(const std::string& name) const;
};

Table read_table(const std::filesystem::path& path);
Table parse_table(const std::string& text, const std::string& source = "table");

}  // namespace devalign::growth
