#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "membrane/asymptotics.hpp"
#include "membrane/hitting.hpp"

namespace membrane {

struct MixtureMeasure {
  std::map<DomainId, double> weights;

  double total() const;
  double at(const DomainId& id) const;
};

struct PredictionBranch;

struct PredictionTrace {
  QueryStart start;
  DomainId characteristic;
  std::vector<DomainId> trapping_children;
  std::vector<DomainId> non_trapping_children;
  std::vector<Chain> admissible;  // filled when the trap set is empty
  std::optional<HittingQuery> query;
  std::optional<HittingDistribution> resolved;
  std::vector<PredictionBranch> branches;
  MixtureMeasure result;
};

struct PredictionBranch {
  DomainId target;
  Point entry;
  double weight = 0.0;
  PredictionTrace trace;
};

struct PredictionReport {
  ExponentQ time_exponent;
  Classification classification;
  MixtureMeasure mixture;
  PredictionTrace trace;
};

struct PredictorOptions {
  // Hitting locations on a 2D target are merged into at most this many angular bins.
  int max_atoms_per_target = 16;
};

MixtureMeasure predict(const Scene& scene, const ContainmentTree& tree, const ExponentQ& b,
                       const Point& x, const HittingOracle& oracle,
                       const PredictorOptions& options = {});

PredictionReport predict_report(const Scene& scene, const ContainmentTree& tree,
                                const ExponentQ& b, const Point& x, const HittingOracle& oracle,
                                const PredictorOptions& options = {});

// Merges atoms of a target: exact endpoints in 1D, angular bins in 2D.
std::vector<BoundaryAtom> compact_atoms(const Scene& scene, const HittingDistribution& dist,
                                        int max_per_target);

}  // namespace membrane
