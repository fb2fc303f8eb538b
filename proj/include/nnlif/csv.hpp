#pragma once

// Plain CSV emitters for trajectories, profiles, events and particle
// statistics. Floating-point fields use 17 significant digits.

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <nnlif/blowup.hpp>
#include <nnlif/experiments.hpp>
#include <nnlif/particles.hpp>
#include <nnlif/solver_t.hpp>
#include <nnlif/solver_tau.hpp>

namespace nnlif::csv {

/// printf("%.17g").
std::string format_double(double x);

/// tau,Q,mass,mean,second_moment,l2,M,int_Q
void write_tau_trajectory(std::ostream& out, const TauTrajectory& traj);
/// t,N,mass,mean,second_moment,l2,M,int_N
void write_t_trajectory(std::ostream& out, const TTrajectory& traj);
/// v,n at cell centers.
void write_density(std::ostream& out, const DensityField& d);
/// t,not_mass,spike_mass,bar_mass,bar_l2,split_l1,not_excess,spike_excess
/// for the samples that carry auxiliary data.
void write_auxiliaries(std::ostream& out, const TTrajectory& traj);
/// start,end,blowup
void write_segments(std::ostream& out, const std::vector<Segment>& segments);
/// tau1,delta_tau,classification,post_mass
void write_events(std::ostream& out, const std::vector<BlowupEvent>& events);
/// t,N_hat,fired_cum at bin ends.
void write_particle_rate(std::ostream& out, const ParticleResult& r);
/// v,count
void write_histogram(std::ostream& out, const ParticleResult& r);
/// t,N
void write_rate_table(std::ostream& out, const std::vector<double>& t, const std::vector<double>& n);
/// eps,max_qm_error,sup_second_moment,sup_l2,max_q_blowup,s_concentration,all_blowup,all_classical
void write_sweep_summary(std::ostream& out, const SweepReport& report);

/// Opens path for writing (creating parent directories) and runs writer.
/// Throws std::runtime_error when the file cannot be written.
void save(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);

}  // namespace nnlif::csv
