#include <nnlif/rate_input.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nnlif/errors.hpp>

namespace nnlif {

RateInput RateInput::constant(double n0) { return piecewise_linear({0.0}, {n0}); }

RateInput RateInput::piecewise_linear(std::vector<double> times, std::vector<double> rates) {
  if (times.empty() || times.size() != rates.size())
    throw ParameterError("rate input: need matching, non-empty time and rate columns");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k]) || !std::isfinite(rates[k]))
      throw ParameterError("rate input: non-finite entry");
    if (rates[k] < 0) throw ParameterError("rate input: rates must be non-negative");
    if (k > 0 && times[k] < times[k - 1]) throw ParameterError("rate input: times must be non-decreasing");
  }
  RateInput r;
  r.kind_ = Kind::piecewise_linear;
  r.times_ = std::move(times);
  r.rates_ = std::move(rates);
  return r;
}

RateInput RateInput::inverse_sqrt(double c, double blowup_time) {
  if (!(c >= 0)) throw ParameterError("rate input: coefficient must be non-negative");
  RateInput r;
  r.kind_ = Kind::inverse_sqrt;
  r.coefficient_ = c;
  r.blowup_time_ = blowup_time;
  return r;
}

void RateInput::check_window(double s, double t) const {
  if (!(s <= t)) throw ParameterError("rate input: integration window reversed");
  if (kind_ == Kind::inverse_sqrt && !(t < blowup_time_))
    throw ParameterError("rate input: window reaches the singular time");
}

double RateInput::operator()(double t) const {
  if (kind_ == Kind::inverse_sqrt) {
    if (!(t < blowup_time_)) throw ParameterError("rate input: evaluated at or past the singular time");
    return coefficient_ / std::sqrt(blowup_time_ - t);
  }
  if (t < times_.front()) return rates_.front();
  if (t >= times_.back()) return rates_.back();
  // First knot strictly after t; its predecessor is the last knot <= t.
  const auto hi = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t k = static_cast<std::size_t>(hi - times_.begin());
  const double t0 = times_[k - 1], t1 = times_[k];
  const double w = (t - t0) / (t1 - t0);
  return rates_[k - 1] + w * (rates_[k] - rates_[k - 1]);
}

namespace {

// Integrates a linear piece on [u0, u1] whose value at u0 is n0 and slope k.
double linear_piece(double u0, double u1, double n0, double k) {
  return (u1 - u0) * (n0 + 0.5 * k * (u1 - u0));
}

double linear_piece_exp(double u0, double u1, double n0, double k, double t) {
  // d/du [e^{u-t} (n0 + k(u-u0) - k)] = e^{u-t} (n0 + k(u-u0)).
  const double e1 = std::exp(u1 - t);
  const double e0 = std::exp(u0 - t);
  return e1 * (n0 + k * (u1 - u0) - k) - e0 * (n0 - k);
}

}  // namespace

std::vector<double> RateInput::breakpoints(double s, double t) const {
  std::vector<double> out;
  if (kind_ == Kind::inverse_sqrt) return out;
  for (double x : times_)
    if (x > s && x < t && (out.empty() || out.back() != x)) out.push_back(x);
  return out;
}

double RateInput::integral(double s, double t) const {
  check_window(s, t);
  if (kind_ == Kind::inverse_sqrt)
    return 2.0 * coefficient_ * (std::sqrt(blowup_time_ - s) - std::sqrt(blowup_time_ - t));
  double total = 0;
  std::vector<double> cuts{s};
  for (double x : breakpoints(s, t)) cuts.push_back(x);
  cuts.push_back(t);
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    const double u0 = cuts[j], u1 = cuts[j + 1];
    if (u1 <= u0) continue;
    // The slope comes from the midpoint so a jump at u1 does not leak in.
    const double n0 = (*this)(u0);
    const double mid = (*this)(0.5 * (u0 + u1));
    const double k = 2.0 * (mid - n0) / (u1 - u0);
    total += linear_piece(u0, u1, n0, k);
  }
  return total;
}

double RateInput::exp_weighted(double s, double t) const {
  check_window(s, t);
  if (kind_ == Kind::inverse_sqrt) {
    const double T = blowup_time_;
    return coefficient_ * std::sqrt(std::numbers::pi) * std::exp(T - t) *
           (std::erf(std::sqrt(T - s)) - std::erf(std::sqrt(T - t)));
  }
  double total = 0;
  std::vector<double> cuts{s};
  for (double x : breakpoints(s, t)) cuts.push_back(x);
  cuts.push_back(t);
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    const double u0 = cuts[j], u1 = cuts[j + 1];
    if (u1 <= u0) continue;
    const double n0 = (*this)(u0);
    const double mid = (*this)(0.5 * (u0 + u1));
    const double k = 2.0 * (mid - n0) / (u1 - u0);
    total += linear_piece_exp(u0, u1, n0, k, t);
  }
  return total;
}

RateInput RateInput::scaled(double lambda) const {
  if (!(lambda >= 0)) throw ParameterError("rate input: scale must be non-negative");
  RateInput r = *this;
  r.coefficient_ *= lambda;
  for (double& x : r.rates_) x *= lambda;
  return r;
}

RateInput read_rate_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParameterError("rate table: empty input");
  std::vector<double> t, n;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a = 0, b = 0;
    if (!(row >> a >> b)) {
      std::ostringstream msg;
      msg << "rate table: cannot parse line " << line_no;
      throw ParameterError(msg.str());
    }
    t.push_back(a);
    n.push_back(b);
  }
  return RateInput::piecewise_linear(std::move(t), std::move(n));
}

RateInput read_rate_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("rate table: cannot open " + path);
  return read_rate_table(in);
}

}  // namespace nnlif
