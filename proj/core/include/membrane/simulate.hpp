#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <vector>

#include "membrane/geometry.hpp"
#include "membrane/hitting.hpp"
#include "membrane/rng.hpp"
#include "membrane/solve.hpp"

namespace membrane {

struct XSimConfig {
  double epsilon = 0.05;
  double jump_delta = 0.0;  // 0 selects default_jump_delta
  double max_step = 1e-2;
  double boundary_refine = 0.25;
  std::uint64_t rng_seed = 42;
  double time_budget = 1e4;
  bool bridge_correction = true;
  bool record_hits = true;
  // The trace clock runs only while the particle is outside all of these domains.
  std::vector<DomainId> trace_excluded;
};

struct YSimConfig {
  double push_off = 0.0;  // 0 selects default_push_off
  double max_step = 1e-2;
  double boundary_refine = 0.25;
  std::uint64_t rng_seed = 42;
  double time_budget = 1e4;
  bool bridge_correction = true;
  // Called with every post-redistribution position (before the push-off).
  std::function<void(const DomainId&, const Point&)> on_redistribute;
};

double default_jump_delta(const Scene& scene, double eps);
double default_push_off(const Scene& scene);
// Validated jump size actually used for a config.
double effective_jump_delta(const Scene& scene, const XSimConfig& config);

struct HitEvent {
  double time = 0.0;
  DomainId membrane;
  int side = 0;  // +1 jumped into the domain, -1 jumped out of it
  Point position;
};

struct ParticleRunResult {
  Point final_position;
  DomainId final_cell;
  std::vector<HitEvent> hit_log;
  std::map<DomainId, double> occupation_time;
  double trace_time = 0.0;
  double elapsed = 0.0;
  std::uint64_t steps = 0;
};

struct HitResult {
  DomainId target;
  double time = 0.0;
  Point position;
  double trace_time = 0.0;
};

ParticleRunResult run_x_to_time(const Scene& scene, const ContainmentTree& tree,
                                const XSimConfig& config, const Point& start, double t_final,
                                std::uint64_t particle = 0);

// Runs until the first touch of one of the target membranes.
HitResult run_x_until_hit(const Scene& scene, const ContainmentTree& tree, const XSimConfig& config,
                          const Point& start, const std::vector<DomainId>& target_membranes,
                          std::uint64_t particle = 0);

// 1D only: runs until the first touch of one of the absorbing points.
HitResult run_x_until_absorbed(const Scene& scene, const ContainmentTree& tree,
                               const XSimConfig& config, const Point& start,
                               const std::vector<AbsorbingPoint>& points,
                               std::uint64_t particle = 0);

HitResult run_y_until_hit(const Scene& scene, const ContainmentTree& tree, const HittingQuery& query,
                          const YSimConfig& config, std::uint64_t particle = 0);

// Monte Carlo estimate of the Y hitting law; tolerance is three standard errors.
HittingDistribution estimate_y_hitting(const Scene& scene, const ContainmentTree& tree,
                                       const HittingQuery& query, const YSimConfig& config,
                                       std::size_t samples);

HittingOracle make_mc_oracle(const Scene& scene, const ContainmentTree& tree,
                             const YSimConfig& config, std::size_t samples);

struct CollarSpec {
  double alpha = 0.5;
  double beta = 0.25;
  void validate() const;
};

struct ExcursionOptions {
  std::size_t escape_samples = 0;  // starts on the membrane, stop at the outer collar surface
  std::size_t deep_samples = 0;    // relax from deep inside, then stop at the outer collar surface
  double relax_time = 1.0;
};

struct ExcursionSummary {
  double epsilon = 0.0;
  double collar_radius = 0.0;
  std::size_t samples = 0;
  std::size_t outward = 0;
  double p_out = 0.0;
  double p_out_se = 0.0;
  double mean_exit_time = 0.0;
  double exit_time_se = 0.0;
  double exit_dispersion = 0.0;  // RMS displacement along the membrane at collar exit
  double mean_escape_time = 0.0;
  double escape_time_se = 0.0;
  // Deep-trap exit locations: angle in [0, 2pi) in 2D, 0/1 for the lo/hi side in 1D.
  std::vector<double> deep_exit_angles;
};

ExcursionSummary boundary_excursion_stats(const Scene& scene, const ContainmentTree& tree,
                                          const XSimConfig& config, const DomainId& membrane,
                                          const CollarSpec& collar, std::size_t samples,
                                          const ExcursionOptions& options = {});

// Continuous-time skew random walk on a face-aligned lattice of the circle, propagated exactly.
class LatticePropagator1D {
 public:
  LatticePropagator1D(const Scene& scene, const ContainmentTree& tree, double eps,
                      int min_cells = 400);

  std::size_t cells() const;
  double spacing() const;
  double cell_center(std::size_t i) const;
  const DomainId& cell_domain(std::size_t i) const;

  std::vector<double> distribution(const Point& start, double t) const;
  // Expected time spent in each lattice cell during [0, t].
  std::vector<double> expected_occupation(const Point& start, double t) const;
  std::vector<Point> sample(const Point& start, double t, std::size_t n, std::uint64_t seed) const;

  struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
};

}  // namespace membrane
