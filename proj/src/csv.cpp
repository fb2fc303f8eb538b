#include <nnlif/csv.hpp>

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace nnlif::csv {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void row(std::ostream& out, std::initializer_list<double> xs) {
  bool first = true;
  for (double x : xs) {
    if (!first) out << ',';
    out << format_double(x);
    first = false;
  }
  out << '\n';
}

}  // namespace

void write_tau_trajectory(std::ostream& out, const TauTrajectory& traj) {
  out << "tau,Q,mass,mean,second_moment,l2,M,int_Q\n";
  for (const auto& s : traj.samples) {
    const auto& m = s.moments;
    row(out, {s.tau, s.q, m.mass, m.mean, m.second_moment, m.l2, m.tail_mass, s.int_q});
  }
}

void write_t_trajectory(std::ostream& out, const TTrajectory& traj) {
  out << "t,N,mass,mean,second_moment,l2,M,int_N\n";
  for (const auto& s : traj.samples) {
    const auto& m = s.moments;
    row(out, {s.t, s.n_rate, m.mass, m.mean, m.second_moment, m.l2, m.tail_mass, s.int_n});
  }
}

void write_density(std::ostream& out, const DensityField& d) {
  out << "v,n\n";
  for (Eigen::Index i = 0; i < d.grid.n_cells; ++i) row(out, {d.grid.center(i), d.values[i]});
}

void write_auxiliaries(std::ostream& out, const TTrajectory& traj) {
  out << "t,not_mass,spike_mass,bar_mass,bar_l2,split_l1,not_excess,spike_excess\n";
  for (const auto& s : traj.samples) {
    if (!s.aux) continue;
    const auto& a = *s.aux;
    row(out, {s.t, a.not_mass, a.spike_mass, a.bar_mass, a.bar_l2, a.split_l1, a.not_excess, a.spike_excess});
  }
}

void write_segments(std::ostream& out, const std::vector<Segment>& segments) {
  out << "start,end,blowup\n";
  for (const auto& s : segments)
    out << format_double(s.start) << ',' << format_double(s.end) << ',' << (s.blowup ? 1 : 0) << '\n';
}

void write_events(std::ostream& out, const std::vector<BlowupEvent>& events) {
  out << "tau1,delta_tau,classification,post_mass\n";
  for (const auto& e : events)
    out << format_double(e.tau1) << ',' << format_double(e.delta_tau) << ',' << to_string(e.classification)
        << ',' << format_double(e.post_mass) << '\n';
}

void write_particle_rate(std::ostream& out, const ParticleResult& r) {
  out << "t,N_hat,fired_cum\n";
  for (std::size_t k = 0; k < r.n_hat.size(); ++k) row(out, {r.bin_end[k], r.n_hat[k], r.fired_cum[k]});
}

void write_histogram(std::ostream& out, const ParticleResult& r) {
  out << "v,count\n";
  for (std::size_t k = 0; k < r.hist_center.size(); ++k)
    out << format_double(r.hist_center[k]) << ',' << r.hist_count[k] << '\n';
}

void write_rate_table(std::ostream& out, const std::vector<double>& t, const std::vector<double>& n) {
  if (t.size() != n.size()) throw std::invalid_argument("write_rate_table: column lengths differ");
  out << "t,N\n";
  for (std::size_t k = 0; k < t.size(); ++k) row(out, {t[k], n[k]});
}

void write_sweep_summary(std::ostream& out, const SweepReport& report) {
  out << "eps,max_qm_error,sup_second_moment,sup_l2,max_q_blowup,s_concentration,all_blowup,all_classical\n";
  for (const auto& m : report.members) {
    out << format_double(m.eps) << ',' << format_double(m.traj.max_qm_error) << ','
        << format_double(m.sup_second_moment) << ',' << format_double(m.sup_l2) << ','
        << format_double(m.max_q_blowup) << ',' << format_double(m.s_concentration) << ','
        << (m.all_blowup ? 1 : 0) << ',' << (m.all_classical ? 1 : 0) << '\n';
  }
}

void save(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  writer(f);
  f.flush();
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace nnlif::csv
