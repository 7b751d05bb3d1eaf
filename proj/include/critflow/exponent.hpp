/// @file exponent.hpp
/// @brief Variable exponent fields p(x) in [1, p_plus] and their time schedules.
///
/// A field is admissible when every value is either exactly 1 (the critical
/// set Y) or at least 1 + gap. This uniform gap is the grid version of
/// requiring that p only approaches 1 on Y itself.

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "critflow/grid.hpp"

namespace critflow {

inline constexpr double kDefaultGap = 0.1;

class ExponentField {
 public:
  ExponentField() = default;
  /// Throws InvalidInput unless every value lies in {1} U [1 + gap, p_plus].
  ExponentField(const Grid2D& grid, std::vector<double> values, double p_plus, double gap = kDefaultGap);

  static ExponentField constant(const Grid2D& grid, double p, double gap = kDefaultGap);

  const Grid2D& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t idx) const { return values_[idx]; }
  double at(int i, int j) const { return values_[grid_.index(i, j)]; }

  double p_plus() const { return p_plus_; }
  double p_minus() const { return p_minus_; }
  double gap() const { return gap_; }
  /// Conjugate exponent p_plus / (p_plus - 1); +inf when p_plus == 1.
  double dual_exponent() const;

  bool operator==(const ExponentField&) const = default;

 private:
  Grid2D grid_;
  std::vector<double> values_;
  double p_plus_ = 1.0;
  double p_minus_ = 1.0;
  double gap_ = kDefaultGap;
};

/// Cells with p exactly equal to 1.
CriticalMask critical_mask(const ExponentField& p);

/// True iff every value lies in {1} U [1 + gap, p_plus].
bool validate_gap(const ExponentField& p, double gap);
bool validate_gap(std::span<const double> values, double p_plus, double gap);

/// Edge-stopping exponent from an image: s = |grad(G_sigma * u0)|,
/// raw = 1 + (p_max - 1) / (1 + k s^2), snapped to exactly 1 where
/// raw < 1 + gap and clamped to [1 + gap, p_max] elsewhere.
/// sigma is in cells.
ExponentField edge_adaptive_exponent(const VectorField& u0, double sigma, double k, double p_max,
                                     double gap = kDefaultGap);

using ExponentRule = std::function<ExponentField(double)>;

/// p(t, x) sampled at a list of times and held piecewise constant between
/// them (left endpoint), matching the explicit stepping of the flow.
class ExponentSchedule {
 public:
  ExponentSchedule() = default;
  ExponentSchedule(std::vector<double> times, std::vector<ExponentField> slices);

  static ExponentSchedule constant(ExponentField field);

  /// Slice in force at time t: the last slice with time <= t.
  const ExponentField& at(double t) const;
  const ExponentField& slice(std::size_t k) const { return slices_[k]; }
  std::span<const double> times() const { return times_; }
  std::size_t size() const { return slices_.size(); }
  bool time_independent() const { return slices_.size() == 1; }

  const Grid2D& grid() const { return slices_.front().grid(); }
  double p_plus() const { return slices_.front().p_plus(); }
  double p_minus() const;
  double gap() const { return slices_.front().gap(); }

 private:
  std::vector<double> times_;
  std::vector<ExponentField> slices_;
};

/// Evaluates `rule` at each time and caches the slices.
ExponentSchedule schedule_from_rule(const ExponentRule& rule, std::span<const double> times);

/// Rule returning `field` at every time.
ExponentRule frozen_rule(ExponentField field);

/// Off-Y values interpolated linearly from `from` (t = 0) to `to` (t = T),
/// held at `to` afterwards. Both fields must share grid, Y and gap.
ExponentRule linear_blend_rule(ExponentField from, ExponentField to, double T);

}  // namespace critflow
