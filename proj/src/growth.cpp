#include "devalign/growth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "devalign/error.hpp"
#include "devalign/stats.hpp"

namespace devalign::growth {

Trajectory::Trajectory(std::string label, std::vector<Point> points)
    : label_(std::move(label)), points_(std::move(points)) {
  std::sort(points_.begin(), points_.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorCode::NonFinite, label_ + ": non-finite point");
    }
    if (!(p.x > 0.0)) throw Error(ErrorCode::InvalidArgument, label_ + ": x must be > 0");
    if (i > 0 && points_[i - 1].x == p.x) {
      throw Error(ErrorCode::InvalidArgument, label_ + ": duplicate x " + std::to_string(p.x));
    }
  }
}

double GrowthFit::operator()(double x) const { return a * std::pow(x, b); }

namespace {

double sum_squares(const std::vector<Point>& pts, double a, double b) {
  double ss = 0.0;
  for (const auto& p : pts) {
    const double e = p.y - a * std::pow(p.x, b);
    ss += e * e;
  }
  return ss;
}

}  // namespace

GrowthFit fit_power(const Trajectory& traj) {
  const auto& pts = traj.points();
  if (pts.size() < 3) throw Error(ErrorCode::InvalidArgument, traj.label() + ": power fit needs >= 3 points");

  double ymean = 0.0;
  for (const auto& p : pts) ymean += p.y;
  ymean /= static_cast<double>(pts.size());
  double ss_tot = 0.0;
  for (const auto& p : pts) ss_tot += (p.y - ymean) * (p.y - ymean);
  if (ss_tot == 0.0) throw Error(ErrorCode::DegenerateVariance, traj.label() + ": constant y");

  // Start: ordinary least squares of ln y on ln x over the positive points.
  double a = ymean;
  double b = 0.0;
  {
    std::vector<double> lx;
    std::vector<double> ly;
    for (const auto& p : pts) {
      if (p.y > 0.0) {
        lx.push_back(std::log(p.x));
        ly.push_back(std::log(p.y));
      }
    }
    if (lx.size() >= 2) {
      const double mx = stats::mean(lx);
      const double my = stats::mean(ly);
      double sxx = 0.0;
      double sxy = 0.0;
      for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
      }
      if (sxx > 0.0) {
        b = sxy / sxx;
        a = std::exp(my - b * mx);
      }
    } else if (lx.size() == 1) {
      a = std::exp(ly.front());
    }
  }

  double ss = sum_squares(pts, a, b);
  int iter = 0;
  bool converged = ss == 0.0;
  while (!converged && iter < kPowerMaxIterations) {
    ++iter;
    double jtj00 = 0.0;
    double jtj01 = 0.0;
    double jtj11 = 0.0;
    double g0 = 0.0;
    double g1 = 0.0;
    for (const auto& p : pts) {
      const double xb = std::pow(p.x, b);
      const double d_a = xb;
      const double d_b = a * xb * std::log(p.x);
      const double r = p.y - a * xb;
      jtj00 += d_a * d_a;
      jtj01 += d_a * d_b;
      jtj11 += d_b * d_b;
      g0 += d_a * r;
      g1 += d_b * r;
    }
    const double det = jtj00 * jtj11 - jtj01 * jtj01;
    if (!std::isfinite(det) || !(std::abs(det) > 1e-14 * jtj00 * jtj11)) {
      throw Error(ErrorCode::FitFailure, traj.label() + ": singular Gauss-Newton system");
    }
    const double step_a = (jtj11 * g0 - jtj01 * g1) / det;
    const double step_b = (jtj00 * g1 - jtj01 * g0) / det;

    double lambda = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 60; ++halving, lambda *= 0.5) {
      const double na = a + lambda * step_a;
      const double nb = b + lambda * step_b;
      const double nss = sum_squares(pts, na, nb);
      if (nss < ss) {
        const double rel = (ss - nss) / ss;
        a = na;
        b = nb;
        ss = nss;
        improved = true;
        converged = rel < kPowerRelTol || ss == 0.0;
        break;
      }
    }
    // No step along the Gauss-Newton direction lowers SS_res: we are at the
    // minimum to working precision.
    if (!improved) converged = true;
  }
  if (!converged) {
    throw Error(ErrorCode::FitFailure,
                traj.label() + ": no convergence in " + std::to_string(kPowerMaxIterations) + " iterations");
  }

  GrowthFit fit;
  fit.a = a;
  fit.b = b;
  fit.r2 = 1.0 - ss / ss_tot;
  fit.iterations = iter;
  return fit;
}

Correlation pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(xs.size()) + " vs " + std::to_string(ys.size()));
  }
  if (xs.size() < 3) throw Error(ErrorCode::InvalidArgument, "pearson needs at least 3 pairs");
  Correlation c;
  c.n = xs.size();
  c.r = stats::pearson_r(xs, ys);
  const double df = static_cast<double>(c.n) - 2.0;
  if (std::abs(c.r) >= 1.0) {
    c.p = 0.0;
  } else {
    const double t = c.r * std::sqrt(df / (1.0 - c.r * c.r));
    c.p = std::clamp(stats::student_t_two_sided(t, df), 0.0, 1.0);
  }
  return c;
}

AlignmentResult align_trajectories(const Trajectory& human, const Trajectory& model, const EpochAgeMap& map) {
  if (map.epochs_per_year < 1) throw Error(ErrorCode::InvalidArgument, "epochs_per_year must be >= 1");
  AlignmentResult out;
  out.mapping = map;
  std::vector<bool> model_used(model.size(), false);
  const auto& mp = model.points();
  for (const auto& h : human.points()) {
    const double epoch = map.epochs_per_year * (h.x - map.base_age_years);
    const bool integral_age = h.x == std::floor(h.x);
    const auto it = std::lower_bound(mp.begin(), mp.end(), epoch, [](const Point& p, double e) { return p.x < e; });
    if (!integral_age || epoch < 1.0 || it == mp.end() || it->x != epoch) {
      ++out.dropped_human;
      continue;
    }
    model_used[static_cast<std::size_t>(it - mp.begin())] = true;
    out.pairs.emplace_back(h, *it);
  }
  out.dropped_model = static_cast<std::size_t>(std::count(model_used.begin(), model_used.end(), false));
  out.n_pairs = out.pairs.size();
  if (out.n_pairs < 3) {
    throw Error(ErrorCode::InsufficientOverlap, std::to_string(out.n_pairs) + " paired points");
  }
  std::vector<double> hy;
  std::vector<double> my;
  for (const auto& [h, m] : out.pairs) {
    hy.push_back(h.y);
    my.push_back(m.y);
  }
  out.correlation = pearson(hy, my);
  return out;
}

double effect_strength(const numeffects::EffectStats& stats, Effect effect) {
  switch (effect) {
    case Effect::Distance: return std::max(0.0, -stats.distance_r);
    case Effect::Size: return std::max(0.0, stats.size_r);
    case Effect::Ratio: return stats.ratio_r2;
  }
  return 0.0;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::FormatError, where + ": not a number '" + s + "'");
  }
}

}  // namespace

Trajectory Table::series(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end() || it == columns.begin()) {
    throw Error(ErrorCode::FormatError, "no column '" + name + "'");
  }
  const auto& col = values[static_cast<std::size_t>(it - columns.begin()) - 1];
  std::vector<Point> pts;
  for (std::size_t r = 0; r < x.size(); ++r) {
    if (col[r]) pts.push_back({x[r], *col[r]});
  }
  return Trajectory(name, std::move(pts));
}

Table parse_table(const std::string& text, const std::string& source) {
  Table t;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto cells = split_csv(line);
    const std::string where = source + " line " + std::to_string(lineno);
    if (!header) {
      if (cells.size() < 2) throw Error(ErrorCode::FormatError, where + ": need an x column and at least one series");
      t.columns = cells;
      t.values.resize(cells.size() - 1);
      header = true;
      continue;
    }
    if (cells.size() != t.columns.size()) {
      throw Error(ErrorCode::FormatError, where + ": expected " + std::to_string(t.columns.size()) + " cells");
    }
    if (cells[0].empty()) throw Error(ErrorCode::FormatError, where + ": missing x value");
    t.x.push_back(parse_double(cells[0], where));
    for (std::size_t c = 1; c < cells.size(); ++c) {
      t.values[c - 1].push_back(cells[c].empty() ? std::nullopt
                                                 : std::optional<double>(parse_double(cells[c], where)));
    }
  }
  if (!header) throw Error(ErrorCode::FormatError, source + ": empty table");
  return t;
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_table(buf.str(), path.filename().string());
}

}  // namespace devalign::growth
