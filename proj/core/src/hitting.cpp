#include "membrane/hitting.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "membrane/error.hpp"

namespace membrane {

double HittingDistribution::total() const {
  double s = 0.0;
  for (const auto& [id, m] : mass) s += m;
  return s;
}

double HittingDistribution::at(const DomainId& id) const {
  auto it = mass.find(id);
  return it == mass.end() ? 0.0 : it->second;
}

void validate_query(const ContainmentTree& tree, const HittingQuery& q) {
  if (!tree.contains(q.ambient)) fail(ErrorCode::UnknownId, "no domain '" + q.ambient + "'");
  if (q.targets.empty()) fail(ErrorCode::InvalidArgument, "query has no targets");
  std::set<DomainId> seen;
  const auto& kids = tree.children(q.ambient);
  auto check = [&](const DomainId& id) {
    if (!tree.contains(id)) fail(ErrorCode::UnknownId, "no domain '" + id + "'");
    if (std::find(kids.begin(), kids.end(), id) == kids.end())
      fail(ErrorCode::InvalidArgument, "'" + id + "' is not a child of '" + q.ambient + "'");
    if (!seen.insert(id).second)
      fail(ErrorCode::InvalidArgument, "'" + id + "' listed twice in query");
  };
  for (const auto& id : q.redistribution) check(id);
  for (const auto& id : q.targets) check(id);
  if (const auto* c = std::get_if<CollapsedStart>(&q.start)) {
    if (std::find(q.redistribution.begin(), q.redistribution.end(), c->component) ==
        q.redistribution.end())
      fail(ErrorCode::InvalidArgument, "collapsed start '" + c->component + "' is not in S");
  }
}

std::string describe(const QueryStart& s) {
  if (const auto* c = std::get_if<CollapsedStart>(&s)) return "boundary(" + c->component + ")";
  const auto& p = std::get<Point>(s);
  char buf[64];
  if (p.dim == 1)
    std::snprintf(buf, sizeof buf, "%.10g", p[0]);
  else
    std::snprintf(buf, sizeof buf, "(%.10g,%.10g)", p[0], p[1]);
  return buf;
}

std::string describe(const HittingQuery& q) {
  auto join = [](const std::vector<DomainId>& v) {
    std::string s = "{";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s + "}";
  };
  return "ambient=" + q.ambient + " S=" + join(q.redistribution) + " T=" + join(q.targets) +
         " start=" + describe(q.start);
}

}  // namespace membrane
