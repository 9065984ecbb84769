#include "membrane/asymptotics.hpp"

#include <algorithm>

#include "membrane/error.hpp"

namespace membrane {

namespace {

void require(const ContainmentTree& tree, const DomainId& d) {
  if (!tree.contains(d)) fail(ErrorCode::UnknownId, "no domain '" + d + "'");
}

void collect_chains(const ContainmentTree& tree, const DomainId& node, std::vector<DomainId>& path,
                    std::vector<Chain>& out) {
  path.push_back(node);
  const auto& kids = tree.children(node);
  if (kids.empty()) {
    Chain c;
    c.ids.assign(path.rbegin(), path.rend());
    for (const auto& id : c.ids) c.order_exponent += tree.exponent(id);
    out.push_back(std::move(c));
  }
  for (const auto& k : kids) collect_chains(tree, k, path, out);
  path.pop_back();
}

}  // namespace

bool Classification::is_trapping(const DomainId& id) const {
  auto it = status.find(id);
  return it != status.end() && it->second == Status::Trapping;
}

std::vector<DomainId> Classification::trapping() const {
  std::vector<DomainId> out;
  for (const auto& [id, st] : status)
    if (st == Status::Trapping) out.push_back(id);
  return out;
}

std::vector<Chain> chains_to(const ContainmentTree& tree, const DomainId& d) {
  require(tree, d);
  std::vector<Chain> out;
  std::vector<DomainId> path;
  collect_chains(tree, d, path, out);
  return out;
}

ExponentQ domain_order_exponent(const ContainmentTree& tree, const DomainId& d) {
  const auto chains = chains_to(tree, d);
  ExponentQ m = chains.front().order_exponent;
  for (const auto& c : chains) m = std::min(m, c.order_exponent);
  return m;
}

Classification classify(const ContainmentTree& tree, const ExponentQ& b) {
  Classification cls;
  cls.time_exponent = b;
  for (const auto& id : tree.ids()) {
    const ExponentQ m = domain_order_exponent(tree, id);
    cls.order[id] = m;
    if (tree.is_root(id)) continue;
    if (m == b)
      fail(ErrorCode::BoundaryTimeScale,
           "order exponent of '" + id + "' equals the time exponent " + b.to_string());
    cls.status[id] = m > b ? Status::Trapping : Status::NonTrapping;
  }
  return cls;
}

DomainId characteristic_domain(const ContainmentTree& tree, const Classification& cls,
                               const DomainId& cell) {
  require(tree, cell);
  if (tree.is_root(cell)) return kRootId;
  if (cls.is_trapping(cell)) return cell;
  for (const auto& a : tree.ancestors(cell))
    if (tree.is_root(a) || cls.is_trapping(a)) return a;
  return kRootId;
}

DomainId characteristic_domain(const Scene& scene, const ContainmentTree& tree,
                               const Classification& cls, const Point& x, double tol) {
  if (tol < 0.0) tol = boundary_tolerance(scene);
  DomainId best = kRootId;
  int best_rank = 0;
  for (const auto& d : scene.domains) {
    if (!cls.is_trapping(d.id)) continue;
    if (signed_distance(scene, d, x) > tol) continue;
    const int r = tree.rank(d.id);
    if (best == kRootId || r < best_rank) {
      best = d.id;
      best_rank = r;
    }
  }
  return best;
}

bool is_principal(const ContainmentTree& tree, const DomainId& d) {
  require(tree, d);
  if (tree.is_root(d)) fail(ErrorCode::RootHasNoSiblings, "the root has no siblings");
  const ExponentQ m = domain_order_exponent(tree, d);
  for (const auto& s : tree.children(tree.parent(d))) {
    if (s == d) continue;
    if (!(m > domain_order_exponent(tree, s))) return false;
  }
  return true;
}

std::vector<Chain> admissible_chains(const ContainmentTree& tree, const Classification& cls,
                                     const DomainId& d) {
  std::vector<Chain> out;
  for (auto& c : chains_to(tree, d)) {
    bool ok = true;
    for (std::size_t i = 0; i + 1 < c.ids.size(); ++i) {
      const auto& id = c.ids[i];
      if (!cls.is_trapping(id) && !is_principal(tree, id)) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(std::move(c));
  }
  return out;
}

std::vector<std::pair<Chain, Chain>> order_ties(const ContainmentTree& tree) {
  std::vector<std::pair<Chain, Chain>> out;
  for (const auto& id : tree.ids()) {
    const auto chains = chains_to(tree, id);
    for (std::size_t i = 0; i < chains.size(); ++i)
      for (std::size_t j = i + 1; j < chains.size(); ++j)
        if (chains[i].order_exponent == chains[j].order_exponent)
          out.emplace_back(chains[i], chains[j]);
  }
  return out;
}

std::string format_chain(const Chain& c) {
  std::string s = "(";
  for (std::size_t i = 0; i < c.ids.size(); ++i) {
    if (i) s += ",";
    s += c.ids[i];
  }
  return s + ")";
}

}  // namespace membrane
