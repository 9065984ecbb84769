#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "membrane/simulate.hpp"

namespace membrane::detail {

// A point (1D) or circle (2D) the walker can touch.
struct Surface {
  double p = 0.0;       // 1D position
  int inside_dir = 0;   // 1D: +1 if the owning domain lies to the right
  Point center;         // 2D
  double radius = 0.0;  // 2D
  int domain = -1;      // index into scene.domains for membranes, -1 otherwise
  int tag = -1;         // caller label for stop surfaces
};

struct StepParams {
  double refine = 0.25;
  double max_step = 1e-2;
  double floor = 1e-12;
  bool bridge = true;
};

struct StepOutcome {
  double dt = 0.0;
  int surface = -1;
  Point pos;
  bool floored = false;
};

class Mover {
 public:
  Mover(int dim, double period, const std::vector<Surface>* surfaces, StepParams prm)
      : dim_(dim), P_(period), s_(surfaces), prm_(prm) {}

  double distance(const Surface& s, const Point& x) const;
  Point project(const Surface& s, const Point& x) const;
  // Exterior normal of the owning domain (or of the circle) at a point of the surface.
  Vec outward(const Surface& s, const Point& y) const;
  double nearest(const std::vector<int>& active, const Point& x) const;

  StepOutcome move(const std::vector<int>& active, const std::vector<std::uint8_t>& reflect,
                   const Point& x, double dt_cap, RngStream& rng) const;

  double period() const { return P_; }
  int dim() const { return dim_; }
  const StepParams& params() const { return prm_; }

 private:
  double crossing(const Surface& s, const Point& x, const Vec& d) const;
  Point shift(const Point& x, const Vec& d, double f) const;
  bool shadowed(const std::vector<int>& active, int k, const Point& x, double dk) const;

  int dim_;
  double P_;
  const std::vector<Surface>* s_;
  StepParams prm_;
};

// Membrane surfaces of a scene, indexed per cell (index 0 = root, k + 1 = domains[k]).
struct SceneSurfaces {
  std::vector<Surface> surfaces;
  std::vector<std::vector<int>> by_domain;  // surfaces of each domain's boundary
  std::vector<int> parent;                  // cell index of each cell's parent
  std::vector<std::vector<int>> cell_active;
  std::vector<DomainId> cell_id;

  SceneSurfaces(const Scene& scene, const ContainmentTree& tree);
  int cell_index(const DomainId& id) const;
};

void add_boundary_surfaces(const Scene& scene, int domain, int tag, std::vector<Surface>& out);

}  // namespace membrane::detail

namespace membrane::detail {

class XEngine {
 public:
  struct State {
    Point x;
    int cell = 0;
    double t = 0.0;
    double trace = 0.0;
    std::uint64_t steps = 0;
    std::vector<double> occupation;  // per cell index
  };

  XEngine(const XEngine&) = delete;
  XEngine& operator=(const XEngine&) = delete;
  XEngine(const Scene& scene, const ContainmentTree& tree, const XSimConfig& config,
          std::vector<Surface> extra_stops = {}, const std::vector<DomainId>& target_membranes = {});

  // Places the particle at x0; returns the index of a stop surface it starts on, else -1.
  int start(State& st, const Point& x0, RngStream& rng, std::vector<HitEvent>* log) const;
  // Runs until t_final (returns -1) or the first stop surface touched (returns its index).
  int advance(State& st, double t_final, RngStream& rng, std::vector<HitEvent>* log) const;

  const Surface& surface(int i) const { return all_[static_cast<std::size_t>(i)]; }
  const SceneSurfaces& cells() const { return ss_; }
  double delta() const { return delta_; }
  const Mover& mover() const { return mover_; }

 private:
  void jump(State& st, int surf, RngStream& rng, std::vector<HitEvent>* log) const;

  const Scene& scene_;
  const ContainmentTree& tree_;
  XSimConfig cfg_;
  double delta_;
  SceneSurfaces ss_;
  std::vector<Surface> all_;
  std::vector<std::uint8_t> stop_;
  std::vector<std::uint8_t> no_reflect_;
  std::vector<std::vector<int>> active_;
  std::vector<double> eps_k_;
  std::vector<std::uint8_t> excluded_;
  Mover mover_;
};

class YEngine {
 public:
  YEngine(const YEngine&) = delete;
  YEngine& operator=(const YEngine&) = delete;
  YEngine(const Scene& scene, const ContainmentTree& tree, const HittingQuery& query,
          const YSimConfig& config);
  HitResult run(RngStream& rng) const;
  double push_off() const { return eta_; }

 private:
  enum class Kind : std::uint8_t { Wall, Redistribute, Target };
  Point redistribute(int l, RngStream& rng) const;

  const Scene& scene_;
  HittingQuery query_;
  YSimConfig cfg_;
  double eta_;
  std::vector<Surface> surf_;
  std::vector<Kind> kind_;
  std::vector<int> owner_;  // index into S or T list
  std::vector<std::uint8_t> reflect_;
  std::vector<int> active_;
  std::vector<int> s_domain_, t_domain_;
  int ambient_domain_ = -1;
  Mover mover_;
};

}  // namespace membrane::detail
