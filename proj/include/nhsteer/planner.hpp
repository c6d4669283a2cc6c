#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nhsteer/canonical.hpp"
#include "nhsteer/control_law.hpp"
#include "nhsteer/desing.hpp"
#include "nhsteer/expr.hpp"
#include "nhsteer/privcoord.hpp"
#include "nhsteer/sim.hpp"
#include "nhsteer/steer.hpp"

namespace nhsteer {

struct PlannerConfig {
  double tolerance = 1e-3;        // e, on the pseudo-norm of the goal chart
  double integrator_tol = 1e-12;  // weight-r coordinates need about e^r absolute accuracy
  double R = 0;                   // 0 picks the middle of the admissible interval
  long max_iterations = 10000;
  double cover_threshold = 0.1;   // relative |det| bound at box corners
  int boxes_per_axis = 9;
  double fiber_radius = 0;        // 0: ten times the dry-run maximum
  bool modified = false;
  SteerConfig steer;
};

// Lower end of the interval for R: (1/2)^(1/(r+1)^2).
double r_lower_bound(int r);
// R from the config, validated; throws InvalidArgument outside the interval.
double resolve_R(const PlannerConfig& cfg, int r);

// A system free up to step r on its working cell, ready for planning.
struct FreeSystem {
  std::vector<ExprField> fields;
  CanonicalSystem canon;
  FrequencyPlan plan;
  DriftlessSystem sim;
  std::function<bool(const std::vector<double>&)> inside;  // working cell, empty = everywhere

  static FreeSystem make(const std::vector<ExprField>& fields, int r, const SteerConfig& cfg = {});
  int r() const { return canon.r; }
  PrivilegedChart chart_at(const std::vector<double>& a) const;
};

struct AppSteerResult {
  std::vector<double> x;
  ControlLaw law;
};

// Steers the canonical approximation at the chart's anchor from the image of
// x to 0 and applies the same input to the true system. Throws
// IntegrationError (DomainExit) when the trajectory leaves the working cell.
AppSteerResult app_steer(const std::vector<double>& x, const PrivilegedChart& goal_chart, const FreeSystem& sys,
                         double integrator_tol = 1e-10);

// Point whose goal-chart image is dilate(z(xbar), t_j), t_j = max(0, 1 - j eta / |z(xbar)|).
std::vector<double> subgoal(const std::vector<double>& xbar, double eta, long j, const PrivilegedChart& goal_chart);

struct PlannerStep {
  std::vector<double> subgoal;
  double eta = 0;
  long j = 0;
  std::string outcome;  // accepted, rejected, domain_exit, capped (modified: eta halved without moving)
  double z_norm = 0;    // |z(x)| of the candidate point
};

struct PlannerReport {
  std::vector<std::vector<double>> iterates;  // x_0, x_1, ...
  std::vector<std::vector<double>> subgoals;  // x^d_1, x^d_2, ... of accepted steps
  std::vector<double> eta_history;            // eta at every loop pass
  std::vector<double> z_norms;                // |z(x_i)| per iterate
  std::vector<ControlLaw> inputs;             // one per accepted step
  std::vector<PlannerStep> trace;
  double total_length = 0;
  long loops = 0;
  long rejections = 0;
  bool modified = false;
  double R = 0;
  double k_bound = 0;  // |z(x_0)| / (1 - R) for the modified variant
  std::string status = "running";  // converged, iteration_cap

  bool converged() const { return status == "converged"; }
  const std::vector<double>& final_point() const { return iterates.back(); }
  ControlLaw law() const;
};

// The iterative free-system planner; throws nothing on non-convergence, the
// status carries it. Use require_converged to turn it into IterationCapExceeded.
PlannerReport global_free(const std::vector<double>& x0, const std::vector<double>& x1, const FreeSystem& sys,
                          const PlannerConfig& cfg);
void require_converged(const PlannerReport& rep);

// Axis-aligned grid on a box K.
struct BoxGrid {
  std::vector<double> lo, hi;
  int per_axis = 9;

  std::size_t dim() const { return lo.size(); }
  std::size_t count() const;
  std::vector<int> cell_of(std::size_t flat) const;
  std::size_t flat_of(const std::vector<int>& idx) const;
  std::vector<double> box_lo(std::size_t flat) const;
  std::vector<double> box_hi(std::size_t flat) const;
  std::vector<double> center(std::size_t flat) const;
  // Boxes whose closure contains x.
  std::vector<std::size_t> boxes_containing(const std::vector<double>& x) const;
};

struct CoverCell {
  std::vector<int> frame;         // Hall indices
  std::vector<std::size_t> core;  // boxes assigned to this frame (connected)
  std::vector<std::size_t> boxes; // core plus one admissible layer
  bool contains(const BoxGrid& g, const std::vector<double>& x) const;
};

struct CoveringAtlas {
  BoxGrid grid;
  std::vector<CoverCell> cells;
  std::vector<std::vector<int>> edges;  // adjacency by shared boxes
  std::vector<int> path;                // cell indices from start to goal
  std::vector<std::vector<double>> waypoints;  // one per consecutive pair on the path
};

// Throws CoverageGap when some box admits no frame and NoPath when the cells
// of the two points are not connected.
CoveringAtlas build_covering(const std::vector<ExprField>& x, const BoxGrid& grid, int r,
                             const std::vector<double>& from, const std::vector<double>& to,
                             const PlannerConfig& cfg);

struct LegReport {
  int cell = 0;
  std::vector<int> frame;
  std::vector<double> start, goal;  // base points
  int lifted_dim = 0;
  double fiber_radius = 0;
  double max_fiber_norm = 0;
  PlannerReport free;
};

struct GlobalReport {
  CoveringAtlas atlas;
  std::vector<LegReport> legs;
  std::vector<double> final_point;  // base point
  double final_residual = 0;        // goal-chart pseudo-norm of the last leg
  double replay_error = 0;          // max |replayed - reported| on the original system
  double total_length = 0;
  std::string status = "running";

  bool converged() const { return status == "converged"; }
};

struct GlobalResult {
  ControlLaw law;
  GlobalReport report;
};

GlobalResult global_plan(const std::vector<ExprField>& x, int r, const std::vector<double>& from,
                         const std::vector<double>& to, const BoxGrid& grid, const PlannerConfig& cfg);

// Degree of nonholonomy: least r with full rank of the Hall brackets at p.
int nonholonomy_degree(const std::vector<ExprField>& x, const std::vector<double>& p, int max_r = 6);

}  // namespace nhsteer
