#include <nnlif/particles.hpp>

#include <algorithm>
#include <cmath>
#include <thread>

#include <nnlif/green.hpp>

namespace nnlif {

InitSampler gaussian_sampler(double mean, double sd) {
  if (!(sd > 0)) throw ParameterError("gaussian_sampler: sd must be positive");
  return [=](CounterRng& rng) { return mean + sd * rng.normal(); };
}

InitSampler point_sampler(double x0) {
  return [=](CounterRng&) { return x0; };
}

InitSampler uniform_sampler(double lo, double hi) {
  if (!(hi > lo)) throw ParameterError("uniform_sampler: need hi > lo");
  return [=](CounterRng& rng) { return lo + (hi - lo) * rng.uniform(); };
}

namespace {

constexpr std::uint32_t kStepPurpose = 0;
constexpr std::uint32_t kInitPurpose = 1;

struct StepConstants {
  double dt, sqrt_2a_dt, fire_prob, v_fire, v_reset;
  bool firing;
  std::array<std::uint32_t, 2> key;
};

// Advances particles [lo, hi) by one step and returns how many fired.
std::uint64_t advance_chunk(std::vector<double>& x, std::size_t lo, std::size_t hi, double drift,
                            std::uint32_t step, const StepConstants& c) {
  std::uint64_t fired = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    const PhiloxBlock r = philox4x32(
        {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(static_cast<std::uint64_t>(i) >> 32), step,
         kStepPurpose},
        c.key);
    const double z = box_muller(to_unit(r[0]), to_unit(r[1]))[0];
    double v = x[i] + (-x[i] + drift) * c.dt + c.sqrt_2a_dt * z;
    if (c.firing && v >= c.v_fire && to_unit(r[2]) < c.fire_prob) {
      v = c.v_reset;
      ++fired;
    }
    x[i] = v;
  }
  return fired;
}

}  // namespace

ParticleResult simulate_particles(const ModelParams& params, const InitSampler& init,
                                  const ParticleOptions& o) {
  params.validate();
  if (o.n_particles < 1) throw ParameterError("simulate_particles: need at least one particle");
  if (!(o.dt > 0)) throw ParameterError("simulate_particles: dt must be positive");
  if (!(o.t_end >= 0)) throw ParameterError("simulate_particles: t_end must be non-negative");
  if (o.steps_per_bin < 1) throw ParameterError("simulate_particles: steps_per_bin must be >= 1");
  if (o.external_rate && o.firing)
    throw ParameterError("simulate_particles: an external rate requires firing to be off");
  if (o.hist_bins < 1 || !(o.hist_v_max > o.hist_v_min))
    throw ParameterError("simulate_particles: bad histogram range");
  const double eps = o.firing ? params.require_eps() : 1.0;

  const std::size_t n = o.n_particles;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(o.seed, i, kInitPurpose);
    x[i] = init(rng);
    if (!std::isfinite(x[i])) throw ParameterError("simulate_particles: sampler returned a non-finite value");
  }

  const auto n_steps = static_cast<std::uint64_t>(std::llround(o.t_end / o.dt));
  if (std::abs(static_cast<double>(n_steps) * o.dt - o.t_end) > 1e-9 * std::max(1.0, o.t_end))
    throw ParameterError("simulate_particles: t_end must be a multiple of dt");
  StepConstants c{o.dt, std::sqrt(2.0 * params.a * o.dt), -std::expm1(-o.dt / eps), params.v_fire,
                  params.v_reset, o.firing,
                  {static_cast<std::uint32_t>(o.seed), static_cast<std::uint32_t>(o.seed >> 32)}};

  const unsigned threads = std::max(1u, std::min<unsigned>(o.threads, static_cast<unsigned>(n)));
  std::vector<std::size_t> bounds(threads + 1);
  for (unsigned k = 0; k <= threads; ++k) bounds[k] = n * k / threads;

  ParticleResult r;
  double rate = 0;  // empirical rate of the previous step
  std::uint64_t bin_fired = 0;
  int in_bin = 0;
  double bin_start = 0;
  std::vector<std::uint64_t> chunk_fired(threads);
  for (std::uint64_t step = 0; step < n_steps; ++step) {
    const double t = static_cast<double>(step) * o.dt;
    const double drift = params.b * (o.external_rate ? (*o.external_rate)(t) : rate);
    const auto step32 = static_cast<std::uint32_t>(step);
    if (threads == 1) {
      chunk_fired[0] = advance_chunk(x, 0, n, drift, step32, c);
    } else {
      std::vector<std::thread> pool;
      for (unsigned k = 0; k < threads; ++k)
        pool.emplace_back([&, k] { chunk_fired[k] = advance_chunk(x, bounds[k], bounds[k + 1], drift, step32, c); });
      for (auto& th : pool) th.join();
    }
    std::uint64_t fired = 0;
    for (auto f : chunk_fired) fired += f;
    rate = static_cast<double>(fired) / (static_cast<double>(n) * o.dt);
    r.time_integral_rate += rate * o.dt;
    r.fired_total += fired;
    bin_fired += fired;
    if (++in_bin == o.steps_per_bin || step + 1 == n_steps) {
      const double bin_end = static_cast<double>(step + 1) * o.dt;
      r.bin_start.push_back(bin_start);
      r.bin_end.push_back(bin_end);
      r.fired_in_bin.push_back(bin_fired);
      r.n_hat.push_back(static_cast<double>(bin_fired) / (static_cast<double>(n) * (bin_end - bin_start)));
      r.fired_cum.push_back(static_cast<double>(r.fired_total) / static_cast<double>(n));
      bin_fired = 0;
      in_bin = 0;
      bin_start = bin_end;
    }
  }

  const double hw = (o.hist_v_max - o.hist_v_min) / o.hist_bins;
  r.hist_count.assign(static_cast<std::size_t>(o.hist_bins), 0);
  for (int k = 0; k < o.hist_bins; ++k) r.hist_center.push_back(o.hist_v_min + (k + 0.5) * hw);
  for (double v : x) {
    const auto k = static_cast<long long>(std::floor((v - o.hist_v_min) / hw));
    ++r.hist_count[static_cast<std::size_t>(std::clamp<long long>(k, 0, o.hist_bins - 1))];
  }
  r.positions = std::move(x);
  return r;
}

double ou_tail_probability(const ModelParams& params, double t, double x0, const RateInput& rate) {
  params.validate();
  if (!(t > 0)) throw ParameterError("ou_tail_probability: t must be positive");
  const double mean = ou_mean(0.0, t, x0, rate, params);
  const double sd = std::sqrt(ou_variance(0.0, t, params.a));
  return 0.5 * std::erfc((params.v_fire - mean) / (sd * std::numbers::sqrt2));
}

}  // namespace nnlif
