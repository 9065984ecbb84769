#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "membrane/predictor.hpp"
#include "membrane/simulate.hpp"
#include "membrane/stats.hpp"

namespace membrane {

enum class Engine { Auto, Stepper, Lattice };

inline const DomainId kTransient = "transient";

struct ExperimentSpec {
  std::vector<double> epsilons;  // strictly decreasing
  ExponentQ b{1, 2};
  std::vector<Point> starts;
  std::size_t particles = 1000;
  std::uint64_t seed = 42;
  double tv_tolerance = 0.05;
  Engine engine = Engine::Auto;
  XSimConfig sim;               // epsilon and seed are overridden
  HittingOracle oracle;         // empty: analytic in 1D, finite differences in 2D
  double fd_spacing = 0.01;
  int lattice_cells = 400;

  void validate() const;
};

struct ComparisonReport {
  double epsilon = 0.0;
  ExponentQ b;
  Point start;
  double t_final = 0.0;
  std::size_t particles = 0;
  std::map<DomainId, double> empirical;  // leaves plus kTransient
  MixtureMeasure predicted;
  double tv = 0.0;
  std::map<DomainId, Interval95> intervals;
  bool pass = false;
};

// Final-position samples alongside their leaf classification.
struct EndToEndRun {
  ComparisonReport report;
  std::vector<Point> finals;
};

EndToEndRun end_to_end_run(const Scene& scene, const ContainmentTree& tree, const ExperimentSpec& spec,
                           double epsilon, const Point& start, const MixtureMeasure& predicted);

std::vector<ComparisonReport> end_to_end(const Scene& scene, const ContainmentTree& tree,
                                         const ExperimentSpec& spec);

// True when tv never rises by more than slack from one epsilon to the next smaller one.
bool tv_non_increasing(const std::vector<double>& tv, double slack);

// Chi-square of samples lying in the leaf against the uniform law on it.
// 1D: equal subintervals; 2D: equal-area rings times sectors.
TestResult within_cell_uniformity(const Scene& scene, const std::vector<Point>& samples,
                                  const DomainId& leaf, int bins);

struct LemmaOptions {
  std::size_t escape_samples = 0;
  // Return probability P(X_t in closure of the membrane's domain) at t = eps^-b.
  double return_epsilon = 0.0;  // 0 skips
  ExponentQ return_b{1, 2};
  std::size_t return_samples = 0;
};

struct LemmaRow {
  double epsilon = 0.0;
  ExcursionSummary excursion;
};

struct LemmaReport {
  std::vector<LemmaRow> rows;
  LineFit outward_fit;      // log P(out) vs log eps
  LineFit exit_time_fit;    // log mean collar exit time vs log eps
  LineFit escape_time_fit;  // log mean escape time vs log eps
  double return_probability = 0.0;
  double return_se = 0.0;
};

LemmaReport lemma_suite(const Scene& scene, const ContainmentTree& tree, const XSimConfig& config,
                        const DomainId& membrane, const std::vector<double>& epsilons,
                        const CollarSpec& collar, std::size_t samples, const LemmaOptions& options = {});

// Fraction of particles started at x whose position at time t lies in the closure of d.
double closure_occupancy(const Scene& scene, const ContainmentTree& tree, const XSimConfig& config,
                         const DomainId& d, const Point& x, double t, std::size_t samples);

struct TraceReport {
  std::map<DomainId, double> x_split;
  std::map<DomainId, double> y_split;
  double tv = 0.0;
  double x_tolerance = 0.0;
  double y_tolerance = 0.0;
};

// Hitting split of X (trace clock outside S) against the Y simulator on the same query.
TraceReport trace_consistency(const Scene& scene, const ContainmentTree& tree, const XSimConfig& xcfg,
                              const YSimConfig& ycfg, const HittingQuery& query, std::size_t samples);

}  // namespace membrane
