#include "membrane/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "membrane/error.hpp"

namespace membrane {

double MixtureMeasure::total() const {
  double s = 0.0;
  for (const auto& [id, w] : weights) s += w;
  return s;
}

double MixtureMeasure::at(const DomainId& id) const {
  auto it = weights.find(id);
  return it == weights.end() ? 0.0 : it->second;
}

std::vector<BoundaryAtom> compact_atoms(const Scene& scene, const HittingDistribution& dist,
                                        int max_per_target) {
  struct Bin {
    double weight = 0.0;
    Vec dir{0.0, 0.0};
    Point pos;
  };
  std::map<std::pair<DomainId, int>, Bin> bins;
  const double P = scene.period;
  for (const auto& a : dist.atoms) {
    if (a.weight <= 0.0) continue;
    const Domain& d = scene.domain(a.target);
    if (scene.dimension == 1) {
      const auto& iv = std::get<Interval>(d.shape);
      const double dl = std::abs(wrap_delta(a.position[0] - iv.lo, P));
      const double dh = std::abs(wrap_delta(a.position[0] - iv.hi, P));
      const int side = dl <= dh ? 0 : 1;
      Bin& b = bins[{a.target, side}];
      b.weight += a.weight;
      b.pos = Point::line(wrap_coord(side == 0 ? iv.lo : iv.hi, P));
    } else {
      const auto& ball = std::get<Ball>(d.shape);
      const Vec v = torus_delta(ball.center, a.position, P);
      const double th = std::atan2(v[1], v[0]);
      int k = static_cast<int>(std::floor((th + M_PI) / (2.0 * M_PI) * max_per_target));
      k = std::clamp(k, 0, max_per_target - 1);
      Bin& b = bins[{a.target, k}];
      const double rho = std::hypot(v[0], v[1]);
      b.weight += a.weight;
      b.dir[0] += a.weight * v[0] / rho;
      b.dir[1] += a.weight * v[1] / rho;
      if (b.dir[0] == 0.0 && b.dir[1] == 0.0) b.dir = {std::cos(th), std::sin(th)};
    }
  }
  std::map<DomainId, double> atom_sum;
  for (const auto& [key, b] : bins) atom_sum[key.first] += b.weight;
  std::vector<BoundaryAtom> out;
  for (auto& [key, b] : bins) {
    BoundaryAtom a;
    a.target = key.first;
    a.weight = b.weight * dist.at(key.first) / atom_sum[key.first];
    if (scene.dimension == 1) {
      a.position = b.pos;
    } else {
      const auto& ball = std::get<Ball>(scene.domain(key.first).shape);
      const double n = std::hypot(b.dir[0], b.dir[1]);
      a.position = wrap(scene, Point::plane(ball.center[0] + ball.radius * b.dir[0] / n,
                                            ball.center[1] + ball.radius * b.dir[1] / n));
    }
    out.push_back(a);
  }
  return out;
}

namespace {

class Recursion {
 public:
  Recursion(const Scene& scene, const ContainmentTree& tree, const Classification& cls,
            const HittingOracle& oracle, const PredictorOptions& opt)
      : scene_(scene), tree_(tree), cls_(cls), oracle_(oracle), opt_(opt) {}

  PredictionTrace at(const Point& x, int level) {
    if (level > tree_.height() + 1)
      fail(ErrorCode::OracleFailure, "prediction recursion did not terminate");
    const std::string key = memo_key(x);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    PredictionTrace tr;
    tr.start = x;
    tr.characteristic = characteristic_domain(scene_, tree_, cls_, x);
    for (const auto& c : tree_.children(tr.characteristic)) {
      if (cls_.is_trapping(c))
        tr.trapping_children.push_back(c);
      else
        tr.non_trapping_children.push_back(c);
    }

    if (tr.trapping_children.empty()) {
      tr.admissible = admissible_chains(tree_, cls_, tr.characteristic);
      if (tr.admissible.empty())
        fail(ErrorCode::NoAdmissibleChain, "no admissible chain ends at '" + tr.characteristic + "'");
      if (tr.admissible.size() > 1) {
        std::string list;
        for (const auto& c : tr.admissible) list += " " + format_chain(c);
        fail(ErrorCode::MultipleAdmissibleChainsWithEmptyTrapSet,
             "several admissible chains end at '" + tr.characteristic + "':" + list);
      }
      tr.result.weights[tr.admissible.front().ids.front()] = 1.0;
      memo_[key] = tr;
      return tr;
    }

    HittingQuery q;
    q.ambient = tr.characteristic;
    q.redistribution = tr.non_trapping_children;
    q.targets = tr.trapping_children;
    q.start = x;
    const double tol = boundary_tolerance(scene_);
    for (const auto& l : q.redistribution) {
      if (signed_distance(scene_, l, x) <= tol) {
        q.start = CollapsedStart{l};
        break;
      }
    }
    tr.start = q.start;
    HittingDistribution dist = oracle_(q);
    check(q, dist);
    tr.query = q;
    tr.resolved = dist;

    for (const auto& atom : compact_atoms(scene_, dist, opt_.max_atoms_per_target)) {
      if (atom.weight <= 0.0) continue;
      PredictionBranch br;
      br.target = atom.target;
      br.entry = atom.position;
      br.weight = atom.weight;
      br.trace = at(atom.position, level + 1);
      for (const auto& [leaf, w] : br.trace.result.weights) tr.result.weights[leaf] += atom.weight * w;
      tr.branches.push_back(std::move(br));
    }
    memo_[key] = tr;
    return tr;
  }

 private:
  static std::string memo_key(const Point& x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g,%.12g", x[0], x[1]);
    return buf;
  }

  void check(const HittingQuery& q, const HittingDistribution& dist) const {
    const double slack = std::max(1e-6, dist.tolerance);
    for (const auto& [id, m] : dist.mass) {
      if (std::find(q.targets.begin(), q.targets.end(), id) == q.targets.end())
        fail(ErrorCode::OracleFailure, "oracle returned mass on non-target '" + id + "'");
      if (!(m >= -slack && m <= 1.0 + slack))
        fail(ErrorCode::OracleFailure, "oracle mass out of range for '" + id + "'");
    }
    if (std::abs(dist.total() - 1.0) > slack)
      fail(ErrorCode::OracleFailure, "oracle masses do not sum to 1 (" + describe(q) + ")");
    for (const auto& [id, m] : dist.mass) {
      if (m <= 0.0) continue;
      bool has = false;
      for (const auto& a : dist.atoms) has = has || (a.target == id && a.weight > 0.0);
      if (!has) fail(ErrorCode::OracleFailure, "oracle gave no hitting locations on '" + id + "'");
    }
  }

  const Scene& scene_;
  const ContainmentTree& tree_;
  const Classification& cls_;
  const HittingOracle& oracle_;
  PredictorOptions opt_;
  std::map<std::string, PredictionTrace> memo_;
};

}  // namespace

PredictionReport predict_report(const Scene& scene, const ContainmentTree& tree,
                                const ExponentQ& b, const Point& x, const HittingOracle& oracle,
                                const PredictorOptions& options) {
  if (x.dim != scene.dimension) fail(ErrorCode::InvalidArgument, "start dimension mismatch");
  PredictionReport rep;
  rep.time_exponent = b;
  rep.classification = classify(tree, b);
  Recursion rec(scene, tree, rep.classification, oracle, options);
  rep.trace = rec.at(wrap(scene, x), 0);
  rep.mixture = rep.trace.result;
  return rep;
}

MixtureMeasure predict(const Scene& scene, const ContainmentTree& tree, const ExponentQ& b,
                       const Point& x, const HittingOracle& oracle, const PredictorOptions& options) {
  return predict_report(scene, tree, b, x, oracle, options).mixture;
}

}  // namespace membrane
