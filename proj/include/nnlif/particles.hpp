#pragma once

// Monte Carlo counterpart of the random-discharge model: each particle follows
//
//   dX = (-X + b N_hat(t)) dt + sqrt(2a) dW,
//
// fires with probability 1 - exp(-dt/eps) per step while X >= V_F and is then
// reset to V_R. N_hat is the empirical firing rate of the previous step.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <nnlif/model.hpp>
#include <nnlif/philox.hpp>
#include <nnlif/rate_input.hpp>

namespace nnlif {

/// Draws one initial voltage from the particle's own stream.
using InitSampler = std::function<double(CounterRng&)>;

InitSampler gaussian_sampler(double mean, double sd);
InitSampler point_sampler(double x0);
InitSampler uniform_sampler(double lo, double hi);

struct ParticleOptions {
  std::size_t n_particles{10000};
  double dt{1e-3};
  double t_end{1.0};
  std::uint64_t seed{1};
  unsigned threads{1};
  int steps_per_bin{10};
  bool firing{true};
  /// Replaces the empirical rate in the drift, giving the linear OU process
  /// of the tail-probability check. Requires firing = false.
  std::optional<RateInput> external_rate;
  double hist_v_min{-4.0};
  double hist_v_max{3.0};
  int hist_bins{140};
};

struct ParticleResult {
  std::vector<double> bin_start;
  std::vector<double> bin_end;
  std::vector<double> n_hat;         // fired / (n_particles * bin width)
  std::vector<double> fired_cum;     // cumulative fired fraction at bin end
  std::vector<std::uint64_t> fired_in_bin;
  std::vector<double> hist_center;
  std::vector<std::uint64_t> hist_count;  // out-of-range particles are clamped to the end bins
  std::vector<double> positions;     // terminal positions
  std::uint64_t fired_total{0};
  double time_integral_rate{0};      // sum over steps of N_hat * dt
};

ParticleResult simulate_particles(const ModelParams& params, const InitSampler& init,
                                  const ParticleOptions& options);

/// P(X_t >= V_F) for the linear OU process started at x0 with drift
/// -X + b N(t): Psi((V_F - V(0, t; x0)) / sigma(t)).
double ou_tail_probability(const ModelParams& params, double t, double x0, const RateInput& rate);

}  // namespace nnlif
