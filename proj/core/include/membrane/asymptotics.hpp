#pragma once

#include <map>
#include <string>
#include <vector>

#include "membrane/exponent.hpp"
#include "membrane/geometry.hpp"

namespace membrane {

// Leaf-to-ancestor path; order_exponent sums a_k over its elements (root counts 0).
struct Chain {
  std::vector<DomainId> ids;
  ExponentQ order_exponent;
};

enum class Status { Trapping, NonTrapping };

struct Classification {
  ExponentQ time_exponent;
  std::map<DomainId, ExponentQ> order;  // m_D for every node including the root
  std::map<DomainId, Status> status;    // every non-root domain

  bool is_trapping(const DomainId& id) const;
  std::vector<DomainId> trapping() const;
};

std::vector<Chain> chains_to(const ContainmentTree& tree, const DomainId& d);
ExponentQ domain_order_exponent(const ContainmentTree& tree, const DomainId& d);
Classification classify(const ContainmentTree& tree, const ExponentQ& b);

// Lowest-rank trapping domain whose closure contains x, else the root.
DomainId characteristic_domain(const Scene& scene, const ContainmentTree& tree,
                               const Classification& cls, const Point& x, double tol = -1.0);
// Same for a whole cell U_k (the cell itself is included as a candidate).
DomainId characteristic_domain(const ContainmentTree& tree, const Classification& cls,
                               const DomainId& cell);

bool is_principal(const ContainmentTree& tree, const DomainId& d);
std::vector<Chain> admissible_chains(const ContainmentTree& tree, const Classification& cls,
                                     const DomainId& d);

// Pairs of chains sharing a last element with equal order exponent.
std::vector<std::pair<Chain, Chain>> order_ties(const ContainmentTree& tree);

std::string format_chain(const Chain& c);

}  // namespace membrane
