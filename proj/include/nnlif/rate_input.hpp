#pragma once

// Prescribed firing-rate inputs N(t) >= 0 for the linear auxiliary problems.
//
// A RateInput is either piecewise linear through (t_k, N_k) knots, or the
// singular profile c / sqrt(T - t). Both provide closed forms for the plain
// integral and for the exponentially weighted integral that enters the mean
// of the Ornstein-Uhlenbeck Green function.

#include <iosfwd>
#include <string>
#include <vector>

namespace nnlif {

class RateInput {
 public:
  /// N(t) = n0 for all t.
  static RateInput constant(double n0);

  /// Linear interpolation through the knots, held constant outside them.
  /// Repeated times encode jumps; at a jump the right value is used.
  static RateInput piecewise_linear(std::vector<double> times, std::vector<double> rates);

  /// N(t) = c / sqrt(T - t) for t < T.
  static RateInput inverse_sqrt(double c, double blowup_time);

  double operator()(double t) const;

  /// int_s^t N(u) du, s <= t.
  double integral(double s, double t) const;

  /// int_s^t e^{u - t} N(u) du, s <= t.
  double exp_weighted(double s, double t) const;

  /// Times where N is not smooth, restricted to (s, t).
  std::vector<double> breakpoints(double s, double t) const;

  RateInput scaled(double lambda) const;

  bool is_singular() const { return kind_ == Kind::inverse_sqrt; }
  double blowup_time() const { return blowup_time_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& rates() const { return rates_; }

 private:
  enum class Kind { piecewise_linear, inverse_sqrt };
  Kind kind_{Kind::piecewise_linear};
  std::vector<double> times_;
  std::vector<double> rates_;
  double coefficient_{0};
  double blowup_time_{0};

  void check_window(double s, double t) const;
};

/// Reads a two-column `t,N` table (header line required).
RateInput read_rate_table(std::istream& in);
RateInput read_rate_table(const std::string& path);

}  // namespace nnlif
