#pragma once

#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "membrane/geometry.hpp"

namespace membrane {

// Start uniformly on the boundary of a redistribution child.
struct CollapsedStart {
  DomainId component;
  bool operator==(const CollapsedStart&) const = default;
};

using QueryStart = std::variant<Point, CollapsedStart>;

// Reflected motion in ambient minus closures of S, absorbed on the boundaries of T.
struct HittingQuery {
  DomainId ambient = kRootId;
  std::vector<DomainId> redistribution;
  std::vector<DomainId> targets;
  QueryStart start = Point{};
};

struct BoundaryAtom {
  DomainId target;
  Point position;
  double weight = 0.0;
};

struct HittingDistribution {
  std::map<DomainId, double> mass;
  // Optional hitting locations; per target the weights add up to mass[target].
  std::vector<BoundaryAtom> atoms;
  // Reported numerical or statistical error bound on the masses.
  double tolerance = 0.0;

  double total() const;
  double at(const DomainId& id) const;
};

using HittingOracle = std::function<HittingDistribution(const HittingQuery&)>;

// Checks ids, S/T disjointness and that S and T are children of the ambient domain.
void validate_query(const ContainmentTree& tree, const HittingQuery& q);

std::string describe(const QueryStart& s);
std::string describe(const HittingQuery& q);

}  // namespace membrane
