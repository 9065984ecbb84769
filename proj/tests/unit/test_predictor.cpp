#include <gtest/gtest.h>

#include <random>

#include "membrane/error.hpp"
#include "membrane/predictor.hpp"
#include "membrane/solve.hpp"
#include "support/scenes.hpp"

using namespace membrane;
using namespace membrane::testing;

namespace {

void expect_mixture(const MixtureMeasure& m, const std::map<DomainId, double>& want, double tol = 1e-9) {
  for (const auto& [id, w] : want) EXPECT_NEAR(m.at(id), w, tol) << id;
  for (const auto& [id, w] : m.weights)
    if (!want.count(id)) EXPECT_NEAR(w, 0.0, tol) << id;
}

// Splits mass evenly over the targets with one hitting location per target.
HittingOracle stub_oracle(const Scene& scene, std::vector<HittingQuery>* seen = nullptr) {
  return [&scene, seen](const HittingQuery& q) {
    if (seen) seen->push_back(q);
    HittingDistribution d;
    for (const auto& t : q.targets) {
      const double w = 1.0 / static_cast<double>(q.targets.size());
      d.mass[t] = w;
      const Domain& dom = scene.domain(t);
      Point p;
      if (scene.dimension == 1) {
        p = Point::line(wrap_coord(std::get<Interval>(dom.shape).lo, scene.period));
      } else {
        const auto& b = std::get<Ball>(dom.shape);
        p = wrap(scene, Point::plane(b.center[0] + b.radius, b.center[1]));
      }
      d.atoms.push_back({t, p, w});
    }
    return d;
  };
}

ExponentQ safe_b(std::mt19937_64& g) {
  std::uniform_int_distribution<int> n(1, 60);
  int k = n(g);
  if (k % 7 == 0) ++k;
  return ExponentQ(k, 7);
}

Point random_start(std::mt19937_64& g, const Scene& s) {
  std::uniform_real_distribution<double> u(0.0, s.period);
  for (;;) {
    const Point x = s.dimension == 1 ? Point::line(u(g)) : Point::plane(u(g), u(g));
    bool clear = true;
    for (const auto& d : s.domains) clear = clear && std::abs(signed_distance(s, d, x)) > 1e-3;
    if (clear) return x;
  }
}

bool is_descendant_or_self(const ContainmentTree& t, const DomainId& d, const DomainId& anc) {
  return d == anc || t.is_ancestor(anc, d);
}

}  // namespace

TEST(Predictor, SceneBRegimes) {
  const Scene s = scene_b();
  const auto t = build_tree(s);
  const auto oracle = make_analytic_oracle(s, t);
  const ExponentQ b1(1, 2), b3(3, 2);
  expect_mixture(predict(s, t, b1, Point::line(0.25), oracle), {{"D1", 1.0}});
  expect_mixture(predict(s, t, b1, Point::line(0.425), oracle), {{"D1", 0.5}, {"D2", 0.5}});
  expect_mixture(predict(s, t, b1, Point::line(0.675), oracle), {{"D2", 0.5}, {"D3", 0.5}});
  expect_mixture(predict(s, t, b1, Point::line(0.01), oracle), {{"D1", 0.6}, {"D3", 0.4}});
  expect_mixture(predict(s, t, b3, Point::line(0.675), oracle), {{"D2", 1.0}});
  expect_mixture(predict(s, t, b3, Point::line(0.01), oracle), {{"D1", 0.6}, {"D2", 0.4}});
  for (int k : {5, 7, 9})
    for (double x : {0.25, 0.425, 0.675, 0.01})
      expect_mixture(predict(s, t, ExponentQ(k, 2), Point::line(x), oracle), {{"D1", 1.0}});
}

TEST(Predictor, TraceRecordsQueriesAndBranches) {
  const Scene s = scene_b();
  const auto t = build_tree(s);
  const auto rep = predict_report(s, t, ExponentQ(1, 2), Point::line(0.01), make_analytic_oracle(s, t));
  EXPECT_EQ(rep.trace.characteristic, kRootId);
  ASSERT_TRUE(rep.trace.query.has_value());
  EXPECT_EQ(rep.trace.query->targets, (std::vector<DomainId>{"D7"}));
  ASSERT_EQ(rep.trace.branches.size(), 2u);
  double w = 0.0;
  for (const auto& br : rep.trace.branches) {
    w += br.weight;
    EXPECT_EQ(br.trace.characteristic, "D7");
  }
  EXPECT_NEAR(w, 1.0, 1e-12);
}

TEST(Predictor, CollapsedStartOnRedistributionComponent) {
  const Scene s = scene_b();
  const auto t = build_tree(s);
  std::vector<HittingQuery> seen;
  // b = 3/2: D3 is non-trapping, starting on its boundary is a collapsed start.
  predict(s, t, ExponentQ(3, 2), Point::line(0.7), stub_oracle(s, &seen));
  ASSERT_FALSE(seen.empty());
  ASSERT_TRUE(std::holds_alternative<CollapsedStart>(seen.front().start));
  EXPECT_EQ(std::get<CollapsedStart>(seen.front().start).component, "D3");
}

TEST(Predictor, RejectsBadOracles) {
  const Scene s = scene_b();
  const auto t = build_tree(s);
  const HittingOracle short_mass = [](const HittingQuery& q) {
    HittingDistribution d;
    d.mass[q.targets.front()] = 0.5;
    d.atoms.push_back({q.targets.front(), Point::line(0.05), 0.5});
    return d;
  };
  EXPECT_THROW(predict(s, t, ExponentQ(1, 2), Point::line(0.01), short_mass), Error);
  const HittingOracle no_atoms = [](const HittingQuery& q) {
    HittingDistribution d;
    d.mass[q.targets.front()] = 1.0;
    return d;
  };
  EXPECT_THROW(predict(s, t, ExponentQ(1, 2), Point::line(0.01), no_atoms), Error);
}

TEST(Predictor, EmptySceneIsUniformOnTheTorus) {
  const Scene s{1, 1.0, {}};
  const auto t = build_tree(s);
  expect_mixture(predict(s, t, ExponentQ(1, 2), Point::line(0.3), make_analytic_oracle(s, t)), {{kRootId, 1.0}});
}

TEST(Predictor, NoAdmissibleChain) {
  const Scene s{1, 1.0, {interval("P", 0.1, 0.9), interval("a", 0.2, 0.3), interval("b", 0.5, 0.6)}};
  const auto t = build_tree(s);
  try {
    predict(s, t, ExponentQ(7, 2), Point::line(0.95), make_analytic_oracle(s, t));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoAdmissibleChain);
  }
}

TEST(Predictor, CompactAtomsKeepsMassPerTarget) {
  const Scene s = scene_d();
  HittingDistribution d;
  d.mass = {{"A", 0.7}, {"B", 0.3}};
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(0.0, 2 * M_PI);
  for (int i = 0; i < 500; ++i) {
    const double th = u(g);
    d.atoms.push_back({"A", Point::plane(0.30 + 0.10 * std::cos(th), 0.45 + 0.10 * std::sin(th)), 0.7 / 500});
    d.atoms.push_back({"B", Point::plane(0.62 + 0.08 * std::cos(th), 0.66 + 0.08 * std::sin(th)), 0.3 / 500});
  }
  const auto c = compact_atoms(s, d, 16);
  std::map<DomainId, double> sum;
  std::map<DomainId, int> count;
  for (const auto& a : c) {
    sum[a.target] += a.weight;
    ++count[a.target];
    EXPECT_NEAR(std::abs(signed_distance(s, a.target, a.position)), 0.0, 1e-12);
  }
  EXPECT_NEAR(sum["A"], 0.7, 1e-12);
  EXPECT_NEAR(sum["B"], 0.3, 1e-12);
  EXPECT_LE(count["A"], 16);
  EXPECT_LE(count["B"], 16);
}

TEST(PredictorProperty, WeightsSumToOneWithLeafSupport) {
  std::mt19937_64 g(31);
  int predicted = 0, refused = 0;
  for (int rep = 0; rep < 300; ++rep) {
    const int dim = rep % 2 + 1;
    const Scene s = random_scene(g, dim);
    const auto t = build_tree(s);
    const ExponentQ b = safe_b(g);
    const auto cls = classify(t, b);
    const Point x = random_start(g, s);
    std::vector<HittingQuery> seen;
    const HittingOracle oracle = dim == 1 ? make_analytic_oracle(s, t) : stub_oracle(s, &seen);
    try {
      const auto m = predict(s, t, b, x, oracle);
      ++predicted;
      EXPECT_NEAR(m.total(), 1.0, 1e-9);
      const auto leaves = t.leaves();
      const DomainId ch = characteristic_domain(s, t, cls, x);
      for (const auto& [id, w] : m.weights) {
        EXPECT_GE(w, -1e-12);
        if (w <= 1e-12) continue;
        EXPECT_NE(std::find(leaves.begin(), leaves.end(), id), leaves.end()) << id;
        EXPECT_TRUE(is_descendant_or_self(t, id, ch)) << id << " outside " << ch;
      }
      for (const auto& q : seen) {
        EXPECT_NO_THROW(validate_query(t, q));
        for (const auto& c : t.children(q.ambient)) {
          const bool in_s = std::find(q.redistribution.begin(), q.redistribution.end(), c) != q.redistribution.end();
          const bool in_t = std::find(q.targets.begin(), q.targets.end(), c) != q.targets.end();
          EXPECT_NE(in_s, in_t);
          EXPECT_EQ(in_t, cls.is_trapping(c));
        }
      }
    } catch (const Error& e) {
      ++refused;
      EXPECT_TRUE(e.code() == ErrorCode::NoAdmissibleChain ||
                  e.code() == ErrorCode::MultipleAdmissibleChainsWithEmptyTrapSet)
          << e.what();
    }
  }
  EXPECT_GT(predicted, 150);
}
