#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "membrane/error.hpp"
#include "membrane/simulate.hpp"

namespace membrane {

struct LatticePropagator1D::Impl {
  double P = 1.0;
  double h = 0.0;
  std::size_t n = 0;
  std::vector<DomainId> domain;
  Eigen::VectorXd sqrt_m;  // relative, normalized to max 1
  Eigen::MatrixXd V;
  Eigen::VectorXd lambda;

  Eigen::VectorXd start_vector(const Point& x) const;
  Eigen::VectorXd propagate(const Eigen::VectorXd& p0, double t, bool integrate) const;
};

namespace {

std::size_t aligned_cells(const Scene& scene, int min_cells) {
  std::vector<double> ends;
  for (const auto& d : scene.domains) {
    const auto& iv = std::get<Interval>(d.shape);
    ends.push_back(wrap_coord(iv.lo, scene.period) / scene.period);
    ends.push_back(wrap_coord(iv.hi, scene.period) / scene.period);
  }
  for (std::size_t m = static_cast<std::size_t>(std::max(min_cells, 2)); m <= 20000; ++m) {
    bool ok = true;
    for (double e : ends) {
      const double v = e * static_cast<double>(m);
      if (std::abs(v - std::round(v)) > 1e-7) {
        ok = false;
        break;
      }
    }
    if (ok) return m;
  }
  fail(ErrorCode::InvalidArgument, "membrane endpoints do not fit a lattice of at most 20000 cells");
}

double chain_exponent(const Scene& scene, const ContainmentTree& tree, const DomainId& id) {
  double e = 0.0;
  for (DomainId c = id; !tree.is_root(c); c = tree.parent(c))
    e += scene.domain(c).permeability_exponent.to_double();
  return e;
}

}  // namespace

LatticePropagator1D::LatticePropagator1D(const Scene& scene, const ContainmentTree& tree, double eps,
                                         int min_cells) {
  if (scene.dimension != 1) fail(ErrorCode::InvalidArgument, "lattice engine needs a 1D scene");
  if (!(eps > 0.0)) fail(ErrorCode::InvalidArgument, "epsilon must be positive");
  auto impl = std::make_shared<Impl>();
  impl->P = scene.period;
  impl->n = aligned_cells(scene, min_cells);
  impl->h = scene.period / static_cast<double>(impl->n);
  const std::size_t n = impl->n;
  std::vector<double> expo(n);
  impl->domain.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    impl->domain[i] = locate_cell(scene, tree, Point::line((static_cast<double>(i) + 0.5) * impl->h));
    expo[i] = chain_exponent(scene, tree, impl->domain[i]);
  }
  const double emax = *std::max_element(expo.begin(), expo.end());
  impl->sqrt_m.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    impl->sqrt_m[static_cast<Eigen::Index>(i)] = std::pow(eps, 0.5 * (emax - expo[i]));

  const double base = 1.0 / (2.0 * impl->h * impl->h);
  // Rate from cell i to neighbour j.
  auto rate = [&](std::size_t i, std::size_t j) {
    const DomainId& a = impl->domain[i];
    const DomainId& b = impl->domain[j];
    if (a == b) return base;
    if (!tree.is_root(b) && tree.parent(b) == a) {
      const double ek = std::pow(eps, scene.domain(b).permeability_exponent.to_double());
      return base * 2.0 / (1.0 + ek);
    }
    const double ek = std::pow(eps, scene.domain(a).permeability_exponent.to_double());
    return base * 2.0 * ek / (1.0 + ek);
  };
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t j : {(i + 1) % n, (i + n - 1) % n}) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double q = rate(i, j);
      S(ii, ii) -= q;
      S(ii, jj) += q * std::pow(eps, 0.5 * (expo[j] - expo[i]));
    }
  }
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) fail(ErrorCode::LinearSolveFailure, "lattice eigensolve failed");
  impl->V = es.eigenvectors();
  impl->lambda = es.eigenvalues().cwiseMin(0.0);
  impl_ = impl;
}

Eigen::VectorXd LatticePropagator1D::Impl::start_vector(const Point& x) const {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  const double u = wrap_coord(x[0], P) / h;
  const double f = std::round(u);
  if (std::abs(u - f) < 1e-9) {
    const std::size_t k = static_cast<std::size_t>(f) % n;
    p[static_cast<Eigen::Index>(k)] += 0.5;
    p[static_cast<Eigen::Index>((k + n - 1) % n)] += 0.5;
  } else {
    p[static_cast<Eigen::Index>(std::min(static_cast<std::size_t>(u), n - 1))] = 1.0;
  }
  return p;
}

Eigen::VectorXd LatticePropagator1D::Impl::propagate(const Eigen::VectorXd& p0, double t,
                                                     bool integrate) const {
  Eigen::VectorXd g(lambda.size());
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    const double lt = lambda[k] * t;
    if (!integrate)
      g[k] = std::exp(lt);
    else
      g[k] = std::abs(lt) < 1e-10 ? t : std::expm1(lt) / lambda[k];
  }
  const Eigen::VectorXd q = V.transpose() * p0.cwiseQuotient(sqrt_m);
  Eigen::VectorXd p = (V * g.cwiseProduct(q)).cwiseProduct(sqrt_m);
  p = p.cwiseMax(0.0);
  const double target = integrate ? t : 1.0;
  const double s = p.sum();
  if (s > 0.0) p *= target / s;
  return p;
}

std::size_t LatticePropagator1D::cells() const { return impl_->n; }
double LatticePropagator1D::spacing() const { return impl_->h; }
double LatticePropagator1D::cell_center(std::size_t i) const {
  return (static_cast<double>(i) + 0.5) * impl_->h;
}
const DomainId& LatticePropagator1D::cell_domain(std::size_t i) const { return impl_->domain.at(i); }

std::vector<double> LatticePropagator1D::distribution(const Point& start, double t) const {
  if (!(t >= 0.0)) fail(ErrorCode::InvalidArgument, "time must be non-negative");
  const Eigen::VectorXd p = impl_->propagate(impl_->start_vector(start), t, false);
  return {p.data(), p.data() + p.size()};
}

std::vector<double> LatticePropagator1D::expected_occupation(const Point& start, double t) const {
  if (!(t >= 0.0)) fail(ErrorCode::InvalidArgument, "time must be non-negative");
  const Eigen::VectorXd p = impl_->propagate(impl_->start_vector(start), t, true);
  return {p.data(), p.data() + p.size()};
}

std::vector<Point> LatticePropagator1D::sample(const Point& start, double t, std::size_t n,
                                               std::uint64_t seed) const {
  const std::vector<double> p = distribution(start, t);
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) cdf[i] = (acc += p[i]);
  std::vector<Point> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    RngStream rng(seed, k);
    const double u = rng.uniform() * acc;
    std::size_t i = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    i = std::min(i, p.size() - 1);
    while (p[i] == 0.0 && i > 0) --i;
    out[k] = Point::line(wrap_coord((static_cast<double>(i) + rng.uniform()) * impl_->h, impl_->P));
  }
  return out;
}

}  // namespace membrane
