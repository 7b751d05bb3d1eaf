#include "critflow/exponent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace critflow {

bool validate_gap(std::span<const double> values, double p_plus, double gap) {
  if (!(gap > 0.0)) return false;
  return std::all_of(values.begin(), values.end(), [&](double p) {
    return std::isfinite(p) && (p == 1.0 || (p >= 1.0 + gap && p <= p_plus));
  });
}

bool validate_gap(const ExponentField& p, double gap) { return validate_gap(p.values(), p.p_plus(), gap); }

ExponentField::ExponentField(const Grid2D& grid, std::vector<double> values, double p_plus, double gap)
    : grid_(grid), values_(std::move(values)), p_plus_(p_plus), gap_(gap) {
  if (values_.size() != grid.cells()) throw InvalidInput("exponent field size does not match grid");
  if (!(gap > 0.0) || !std::isfinite(gap)) throw InvalidInput("exponent gap must be positive");
  if (!(p_plus >= 1.0) || !std::isfinite(p_plus)) throw InvalidInput("p_plus must be finite and >= 1");
  if (!validate_gap(values_, p_plus_, gap_))
    throw InvalidInput("exponent values must lie in {1} U [1+gap, p_plus] (gap " + std::to_string(gap_) + ")");
  p_minus_ = *std::min_element(values_.begin(), values_.end());
}

ExponentField ExponentField::constant(const Grid2D& grid, double p, double gap) {
  return ExponentField(grid, std::vector<double>(grid.cells(), p), p, gap);
}

double ExponentField::dual_exponent() const {
  if (p_plus_ == 1.0) return std::numeric_limits<double>::infinity();
  return p_plus_ / (p_plus_ - 1.0);
}

CriticalMask critical_mask(const ExponentField& p) {
  CriticalMask mask(p.grid());
  for (std::size_t idx = 0; idx < p.grid().cells(); ++idx) mask.set(idx, p[idx] == 1.0);
  return mask;
}

ExponentField edge_adaptive_exponent(const VectorField& u0, double sigma, double k, double p_max, double gap) {
  if (!(sigma >= 0.0)) throw InvalidInput("edge_adaptive_exponent: sigma must be >= 0");
  if (!(k > 0.0)) throw InvalidInput("edge_adaptive_exponent: k must be > 0");
  if (!(gap > 0.0)) throw InvalidInput("edge_adaptive_exponent: gap must be > 0");
  if (!(p_max > 1.0 + gap) || !std::isfinite(p_max))
    throw InvalidInput("edge_adaptive_exponent: p_max must exceed 1 + gap");

  const MatrixField g = gradient(gaussian_blur(u0, sigma));
  std::vector<double> p(u0.grid().cells());
  for (std::size_t idx = 0; idx < p.size(); ++idx) {
    const double s = g.magnitude(idx);
    const double raw = 1.0 + (p_max - 1.0) / (1.0 + k * s * s);
    p[idx] = raw < 1.0 + gap ? 1.0 : std::clamp(raw, 1.0 + gap, p_max);
  }
  return ExponentField(u0.grid(), std::move(p), p_max, gap);
}

ExponentSchedule::ExponentSchedule(std::vector<double> times, std::vector<ExponentField> slices)
    : times_(std::move(times)), slices_(std::move(slices)) {
  if (slices_.empty() || slices_.size() != times_.size())
    throw InvalidInput("schedule needs one exponent slice per time");
  if (!std::is_sorted(times_.begin(), times_.end()) ||
      std::adjacent_find(times_.begin(), times_.end()) != times_.end())
    throw InvalidInput("schedule times must be strictly increasing");
  for (const auto& s : slices_) {
    if (!(s.grid() == slices_.front().grid())) throw InvalidInput("schedule slices must share a grid");
    if (s.p_plus() != slices_.front().p_plus() || s.gap() != slices_.front().gap())
      throw InvalidInput("schedule slices must share p_plus and gap");
  }
}

ExponentSchedule ExponentSchedule::constant(ExponentField field) {
  return ExponentSchedule({0.0}, {std::move(field)});
}

const ExponentField& ExponentSchedule::at(double t) const {
  const auto it = std::upper_bound(times_.begin(), times_.end(), t + 1e-12 * (1.0 + std::abs(t)));
  if (it == times_.begin()) return slices_.front();
  return slices_[static_cast<std::size_t>(std::distance(times_.begin(), it)) - 1];
}

double ExponentSchedule::p_minus() const {
  double m = slices_.front().p_minus();
  for (const auto& s : slices_) m = std::min(m, s.p_minus());
  return m;
}

ExponentSchedule schedule_from_rule(const ExponentRule& rule, std::span<const double> times) {
  std::vector<ExponentField> slices;
  slices.reserve(times.size());
  for (double t : times) slices.push_back(rule(t));
  return ExponentSchedule(std::vector<double>(times.begin(), times.end()), std::move(slices));
}

ExponentRule frozen_rule(ExponentField field) {
  return [f = std::move(field)](double) { return f; };
}

ExponentRule linear_blend_rule(ExponentField from, ExponentField to, double T) {
  if (!(from.grid() == to.grid())) throw InvalidInput("linear_blend_rule: grid mismatch");
  if (!(critical_mask(from) == critical_mask(to))) throw InvalidInput("linear_blend_rule: critical sets differ");
  if (from.gap() != to.gap()) throw InvalidInput("linear_blend_rule: gap mismatch");
  if (!(T > 0.0)) throw InvalidInput("linear_blend_rule: T must be positive");
  const double p_plus = std::max(from.p_plus(), to.p_plus());
  return [from = std::move(from), to = std::move(to), T, p_plus](double t) {
    const double s = std::clamp(t / T, 0.0, 1.0);
    std::vector<double> v(from.grid().cells());
    for (std::size_t idx = 0; idx < v.size(); ++idx)
      v[idx] = from[idx] == 1.0 ? 1.0 : (1.0 - s) * from[idx] + s * to[idx];
    return ExponentField(from.grid(), std::move(v), p_plus, from.gap());
  };
}

}  // namespace critflow
