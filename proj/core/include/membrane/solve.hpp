#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "membrane/geometry.hpp"
#include "membrane/hitting.hpp"

namespace membrane {

// Exact piecewise-linear solve for the reflected/redistributed motion on the circle.
// Atoms are the target endpoints.
HittingDistribution hitting_1d(const Scene& scene, const ContainmentTree& tree,
                               const HittingQuery& query);

// Poisson kernel of the target seen from start; masses keyed by the formatted endpoint
// positions, atoms carry the exact points.
HittingDistribution harmonic_measure_1d(const Scene& scene, const ContainmentTree& tree,
                                        const DomainId& ambient, const DomainId& target,
                                        const Point& start);

struct AbsorbingPoint {
  std::string label;
  double x = 0.0;
};

// Hitting probabilities of the skew process at finite eps, absorbed at the given points.
HittingDistribution transmission_hitting_1d(const Scene& scene, double eps,
                                            const std::vector<AbsorbingPoint>& targets,
                                            double start);

// Discretized 2D problem for a fixed (ambient, S, T) on a grid of the given spacing.
// The factorization is built once and reused for every start.
class FdProblem2D {
 public:
  FdProblem2D(const Scene& scene, const ContainmentTree& tree, const HittingQuery& structure,
              double spacing);

  HittingDistribution solve(const QueryStart& start) const;
  // Node values of the hitting probability of one target (other targets 0).
  std::vector<double> field(const DomainId& target) const;
  void write_csv(std::ostream& os, const std::vector<double>& field) const;

  double spacing() const;
  std::size_t unknowns() const;

  struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
};

HittingDistribution hitting_2d_fd(const Scene& scene, const ContainmentTree& tree,
                                  const HittingQuery& query, double spacing,
                                  bool richardson = true);

HittingOracle make_analytic_oracle(const Scene& scene, const ContainmentTree& tree);
HittingOracle make_fd_oracle(const Scene& scene, const ContainmentTree& tree, double spacing,
                             bool richardson = true);

}  // namespace membrane
