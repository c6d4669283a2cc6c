#include "nhsteer/planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>

#include "nhsteer/errors.hpp"
#include "nhsteer/hall.hpp"
#include "nhsteer/homogeneous.hpp"

namespace nhsteer {

double r_lower_bound(int r) { return std::pow(0.5, 1.0 / static_cast<double>((r + 1) * (r + 1))); }

double resolve_R(const PlannerConfig& cfg, int r) {
  double lo = r_lower_bound(r);
  if (cfg.R == 0) return 0.5 * (lo + 1.0);
  if (!(cfg.R > lo && cfg.R < 1.0))
    throw Error(ErrorCode::InvalidArgument, "R must lie in (" + std::to_string(lo) + ", 1) for r = " +
                                                std::to_string(r));
  return cfg.R;
}

FreeSystem FreeSystem::make(const std::vector<ExprField>& fields, int r, const SteerConfig& cfg) {
  FreeSystem s;
  s.fields = fields;
  s.canon = canonical_fields(static_cast<int>(fields.size()), r);
  if (fields.empty() || static_cast<int>(fields[0].size()) != s.canon.dim())
    throw Error(ErrorCode::DimensionMismatch, "system dimension differs from the free dimension; lift it first");
  s.plan = plan_all(s.canon, cfg);
  s.sim = DriftlessSystem(fields, "free");
  return s;
}

PrivilegedChart FreeSystem::chart_at(const std::vector<double>& a) const {
  return privileged_chart(fields, a, canon.basis);
}

AppSteerResult app_steer(const std::vector<double>& x, const PrivilegedChart& goal_chart, const FreeSystem& sys,
                         double integrator_tol) {
  AppSteerResult out;
  ExactSteerOptions so;
  so.tolerance = integrator_tol;
  out.law = exact_steer(goal_chart.to_z(x), sys.canon, sys.plan, so);
  if (out.law.empty()) {
    out.x = x;
    return out;
  }
  IntegratorOptions io;
  io.tolerance = integrator_tol;
  io.record = false;
  io.inside = sys.inside;
  out.x = integrate_endpoint(sys.sim, x, out.law, io);
  return out;
}

std::vector<double> subgoal(const std::vector<double>& xbar, double eta, long j, const PrivilegedChart& goal_chart) {
  std::vector<double> zb = goal_chart.to_z(xbar);
  double nz = pseudo_norm(zb, goal_chart.weights);
  if (nz == 0) return goal_chart.anchor_value;
  double t = std::max(0.0, 1.0 - static_cast<double>(j) * eta / nz);
  if (t == 0) return goal_chart.anchor_value;
  if (t == 1) return xbar;
  return goal_chart.to_x(dilate(zb, t, goal_chart.weights));
}

ControlLaw PlannerReport::law() const {
  if (inputs.empty()) return {};
  return concatenate(inputs);
}

void require_converged(const PlannerReport& rep) {
  if (!rep.converged())
    throw Error(ErrorCode::IterationCapExceeded, "planner stopped after " + std::to_string(rep.loops) +
                                                     " iterations at residual " +
                                                     std::to_string(rep.z_norms.empty() ? 0 : rep.z_norms.back()));
}

PlannerReport global_free(const std::vector<double>& x0, const std::vector<double>& x1, const FreeSystem& sys,
                          const PlannerConfig& cfg) {
  if (!(cfg.tolerance > 0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  PlannerReport rep;
  rep.modified = cfg.modified;
  rep.R = resolve_R(cfg, sys.r());
  PrivilegedChart goal = sys.chart_at(x1);
  auto znorm = [&](const std::vector<double>& x) { return pseudo_norm(goal.to_z(x), goal.weights); };

  std::vector<double> xi = x0, xbar = x0;
  long j = 1;
  int k = 0;
  double z0 = znorm(x0);
  double eta = z0;
  rep.k_bound = z0 / (1.0 - rep.R);
  rep.iterates.push_back(xi);
  rep.z_norms.push_back(z0);
  auto Rk = [&](int kk) {
    double s = 0, p = 1;
    for (int l = 0; l <= kk; ++l, p *= rep.R) s += p;
    return s;
  };
  auto accept = [&](const std::vector<double>& x, const std::vector<double>& xd, ControlLaw law, double zn) {
    xi = x;
    ++j;
    rep.iterates.push_back(x);
    rep.subgoals.push_back(xd);
    rep.z_norms.push_back(zn);
    rep.inputs.push_back(std::move(law));
  };
  auto restart = [&]() {
    eta /= 2;
    xbar = xi;
    j = 1;
    ++rep.rejections;
  };

  while (rep.z_norms.back() > cfg.tolerance) {
    if (rep.loops >= cfg.max_iterations) {
      rep.status = "iteration_cap";
      break;
    }
    ++rep.loops;
    rep.eta_history.push_back(eta);
    PlannerStep step;
    step.eta = eta;
    step.j = j;
    std::vector<double> xd = subgoal(xbar, eta, j, goal);
    step.subgoal = xd;
    AppSteerResult res;
    PrivilegedChart local;
    try {
      local = sys.chart_at(xd);
      res = app_steer(xi, local, sys, cfg.integrator_tol);
    } catch (const Error& err) {
      // Leaving the cell, or a subgoal where the chart degenerates: treated
      // like a failed approach.
      if (err.code() != ErrorCode::DomainExit && err.code() != ErrorCode::SingularFrame &&
          err.code() != ErrorCode::StepFailure)
        throw;
      step.outcome = "domain_exit";
      rep.trace.push_back(step);
      restart();
      continue;
    }
    double after = pseudo_norm(local.to_z(res.x), local.weights);
    double before = pseudo_norm(local.to_z(xi), local.weights);
    double zn = znorm(res.x);
    step.z_norm = zn;
    if (after > 0.5 * before) {
      step.outcome = "rejected";
      restart();
    } else if (!cfg.modified) {
      step.outcome = "accepted";
      accept(res.x, xd, std::move(res.law), zn);
    } else if (zn >= Rk(k + 1) * z0) {
      step.outcome = "held";
      eta /= 2;
    } else if (zn >= Rk(k) * z0) {
      step.outcome = "accepted";
      accept(res.x, xd, std::move(res.law), zn);
      eta /= 2;
      ++k;
    } else {
      step.outcome = "accepted";
      accept(res.x, xd, std::move(res.law), zn);
    }
    rep.trace.push_back(step);
  }
  if (rep.status == "running") rep.status = "converged";
  for (const auto& law : rep.inputs) rep.total_length += input_length(law);
  return rep;
}

std::size_t BoxGrid::count() const {
  std::size_t c = 1;
  for (std::size_t i = 0; i < dim(); ++i) c *= static_cast<std::size_t>(per_axis);
  return c;
}

std::vector<int> BoxGrid::cell_of(std::size_t flat) const {
  std::vector<int> idx(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    idx[i] = static_cast<int>(flat % static_cast<std::size_t>(per_axis));
    flat /= static_cast<std::size_t>(per_axis);
  }
  return idx;
}

std::size_t BoxGrid::flat_of(const std::vector<int>& idx) const {
  std::size_t f = 0;
  for (std::size_t i = dim(); i-- > 0;) f = f * static_cast<std::size_t>(per_axis) + static_cast<std::size_t>(idx[i]);
  return f;
}

std::vector<double> BoxGrid::box_lo(std::size_t flat) const {
  auto idx = cell_of(flat);
  std::vector<double> out(dim());
  for (std::size_t i = 0; i < dim(); ++i) out[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / per_axis;
  return out;
}

std::vector<double> BoxGrid::box_hi(std::size_t flat) const {
  auto idx = cell_of(flat);
  std::vector<double> out(dim());
  for (std::size_t i = 0; i < dim(); ++i) out[i] = lo[i] + (hi[i] - lo[i]) * (idx[i] + 1) / per_axis;
  return out;
}

std::vector<double> BoxGrid::center(std::size_t flat) const {
  auto a = box_lo(flat), b = box_hi(flat);
  for (std::size_t i = 0; i < dim(); ++i) a[i] = 0.5 * (a[i] + b[i]);
  return a;
}

std::vector<std::size_t> BoxGrid::boxes_containing(const std::vector<double>& x) const {
  std::vector<std::vector<int>> axis(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    double h = (hi[i] - lo[i]) / per_axis;
    double slack = 1e-12 * std::max(1.0, std::abs(hi[i] - lo[i]));
    for (int b = 0; b < per_axis; ++b) {
      double a0 = lo[i] + h * b, a1 = lo[i] + h * (b + 1);
      if (x[i] >= a0 - slack && x[i] <= a1 + slack) axis[i].push_back(b);
    }
    if (axis[i].empty()) return {};
  }
  std::vector<std::size_t> out;
  std::vector<int> idx(dim());
  std::function<void(std::size_t)> rec = [&](std::size_t d) {
    if (d == dim()) {
      out.push_back(flat_of(idx));
      return;
    }
    for (int b : axis[d]) {
      idx[d] = b;
      rec(d + 1);
    }
  };
  rec(0);
  return out;
}

bool CoverCell::contains(const BoxGrid& g, const std::vector<double>& x) const {
  for (std::size_t b : g.boxes_containing(x))
    if (std::binary_search(boxes.begin(), boxes.end(), b)) return true;
  return false;
}

namespace {

struct Candidate {
  FrameSelection frame;
  int weight = 0;
};

std::vector<std::vector<double>> corners(const BoxGrid& g, std::size_t box) {
  auto a = g.box_lo(box), b = g.box_hi(box);
  std::size_t n = g.dim();
  std::vector<std::vector<double>> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = (mask >> i) & 1 ? b[i] : a[i];
    out.push_back(p);
  }
  return out;
}

// Smallest |det| over the corners when the frame is admissible on the box, -1 otherwise.
double box_margin(const FrameSelection& f, const BoxGrid& g, std::size_t box, double threshold) {
  double least = std::numeric_limits<double>::infinity();
  int sign = 0;
  for (const auto& p : corners(g, box)) {
    if (!f.contains(p, threshold)) return -1;
    double d = f.det_at(p);
    int s = d > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    else if (s != sign) return -1;
    least = std::min(least, std::abs(d));
  }
  return least;
}

std::vector<std::size_t> face_neighbors(const BoxGrid& g, std::size_t box) {
  std::vector<std::size_t> out;
  auto idx = g.cell_of(box);
  for (std::size_t i = 0; i < g.dim(); ++i)
    for (int d : {-1, 1}) {
      auto n = idx;
      n[i] += d;
      if (n[i] < 0 || n[i] >= g.per_axis) continue;
      out.push_back(g.flat_of(n));
    }
  return out;
}

}  // namespace

CoveringAtlas build_covering(const std::vector<ExprField>& x, const BoxGrid& grid, int r,
                             const std::vector<double>& from, const std::vector<double>& to,
                             const PlannerConfig& cfg) {
  if (grid.lo.size() != grid.hi.size() || grid.per_axis < 1 || x.empty() || grid.dim() != x[0].size())
    throw Error(ErrorCode::InvalidArgument, "box grid does not match the state dimension");
  HallBasis basis = build_hall_basis(static_cast<int>(x.size()), r);
  CoveringAtlas atlas;
  atlas.grid = grid;
  std::size_t count = grid.count();

  std::vector<Candidate> cands;
  std::set<std::vector<int>> seen;
  auto add_candidate_at = [&](const std::vector<double>& p) {
    try {
      FrameSelection f = select_frame(x, basis, p);
      if (seen.insert(f.indices).second) {
        int w = 0;
        for (int j : f.indices) w += basis.at(j).length;
        cands.push_back({std::move(f), w});
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoFrame) throw;
    }
  };
  for (std::size_t b = 0; b < count; ++b) add_candidate_at(grid.center(b));

  std::vector<int> assigned(count, -1);
  auto assign = [&](std::size_t b) {
    int best = -1;
    double best_margin = 0;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      double mg = box_margin(cands[c].frame, grid, b, cfg.cover_threshold);
      if (mg < 0) continue;
      bool better = best < 0 || cands[c].weight < cands[static_cast<std::size_t>(best)].weight ||
                    (cands[c].weight == cands[static_cast<std::size_t>(best)].weight && mg > best_margin);
      if (better) {
        best = static_cast<int>(c);
        best_margin = mg;
      }
    }
    assigned[b] = best;
  };
  for (std::size_t b = 0; b < count; ++b) {
    assign(b);
    if (assigned[b] >= 0) continue;
    for (const auto& p : corners(grid, b)) add_candidate_at(p);
    assign(b);
    if (assigned[b] < 0) {
      std::string where;
      for (double v : grid.center(b)) where += (where.empty() ? "" : ",") + std::to_string(v);
      throw Error(ErrorCode::CoverageGap, "no admissible frame on the box centred at (" + where + ")");
    }
  }
  // Boxes with a frame chosen earlier may prefer a later candidate.
  for (std::size_t b = 0; b < count; ++b) assign(b);

  // Connected components per frame.
  std::vector<int> comp(count, -1);
  for (std::size_t b = 0; b < count; ++b) {
    if (comp[b] >= 0) continue;
    int id = static_cast<int>(atlas.cells.size());
    CoverCell cell;
    cell.frame = cands[static_cast<std::size_t>(assigned[b])].frame.indices;
    std::deque<std::size_t> queue{b};
    comp[b] = id;
    while (!queue.empty()) {
      std::size_t c = queue.front();
      queue.pop_front();
      cell.core.push_back(c);
      for (std::size_t nb : face_neighbors(grid, c))
        if (comp[nb] < 0 && assigned[nb] == assigned[b]) {
          comp[nb] = id;
          queue.push_back(nb);
        }
    }
    std::sort(cell.core.begin(), cell.core.end());
    // One extra layer where the frame stays admissible, so neighbours overlap.
    std::set<std::size_t> grown(cell.core.begin(), cell.core.end());
    const FrameSelection& f = cands[static_cast<std::size_t>(assigned[b])].frame;
    for (std::size_t c : cell.core)
      for (std::size_t nb : face_neighbors(grid, c))
        if (!grown.count(nb) && box_margin(f, grid, nb, cfg.cover_threshold) >= 0) grown.insert(nb);
    cell.boxes.assign(grown.begin(), grown.end());
    atlas.cells.push_back(std::move(cell));
  }

  std::size_t nc = atlas.cells.size();
  atlas.edges.assign(nc, {});
  for (std::size_t a = 0; a < nc; ++a)
    for (std::size_t b = a + 1; b < nc; ++b) {
      std::vector<std::size_t> common;
      std::set_intersection(atlas.cells[a].boxes.begin(), atlas.cells[a].boxes.end(), atlas.cells[b].boxes.begin(),
                            atlas.cells[b].boxes.end(), std::back_inserter(common));
      if (common.empty()) continue;
      atlas.edges[a].push_back(static_cast<int>(b));
      atlas.edges[b].push_back(static_cast<int>(a));
    }

  auto cell_of_point = [&](const std::vector<double>& p, const char* what) {
    auto boxes = grid.boxes_containing(p);
    if (boxes.empty()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " lies outside the box");
    return comp[boxes.front()];
  };
  int start = cell_of_point(from, "start point");
  int goal = cell_of_point(to, "goal point");
  // Stay in the start cell when it already reaches the goal.
  if (atlas.cells[static_cast<std::size_t>(start)].contains(grid, to)) goal = start;

  std::vector<int> prev(nc, -2);
  std::deque<int> queue{start};
  prev[static_cast<std::size_t>(start)] = -1;
  while (!queue.empty()) {
    int c = queue.front();
    queue.pop_front();
    if (c == goal) break;
    for (int nb : atlas.edges[static_cast<std::size_t>(c)])
      if (prev[static_cast<std::size_t>(nb)] == -2) {
        prev[static_cast<std::size_t>(nb)] = c;
        queue.push_back(nb);
      }
  }
  if (prev[static_cast<std::size_t>(goal)] == -2)
    throw Error(ErrorCode::NoPath, "the cells of the two points are not connected; refine the grid");
  for (int c = goal; c != -1; c = prev[static_cast<std::size_t>(c)]) atlas.path.push_back(c);
  std::reverse(atlas.path.begin(), atlas.path.end());

  for (std::size_t s = 0; s + 1 < atlas.path.size(); ++s) {
    const auto& A = atlas.cells[static_cast<std::size_t>(atlas.path[s])].boxes;
    const auto& B = atlas.cells[static_cast<std::size_t>(atlas.path[s + 1])].boxes;
    std::vector<std::size_t> common;
    std::set_intersection(A.begin(), A.end(), B.begin(), B.end(), std::back_inserter(common));
    std::vector<double> centroid(grid.dim(), 0.0);
    for (std::size_t b : common) {
      auto c = grid.center(b);
      for (std::size_t i = 0; i < grid.dim(); ++i) centroid[i] += c[i] / static_cast<double>(common.size());
    }
    std::size_t best = common.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t b : common) {
      auto c = grid.center(b);
      double d = 0;
      for (std::size_t i = 0; i < grid.dim(); ++i) d += (c[i] - centroid[i]) * (c[i] - centroid[i]);
      if (d < best_d - 1e-15) {
        best_d = d;
        best = b;
      }
    }
    atlas.waypoints.push_back(grid.center(best));
  }
  return atlas;
}

namespace {

double fiber_norm(const LiftedSystem& lift, const Weights& fiber_w, const std::vector<double>& p) {
  double s = 0;
  for (std::size_t k = 0; k < fiber_w.size(); ++k)
    s += std::pow(std::abs(p[static_cast<std::size_t>(lift.n) + k]), 1.0 / fiber_w[k]);
  return s;
}

}  // namespace

GlobalResult global_plan(const std::vector<ExprField>& x, int r, const std::vector<double>& from,
                         const std::vector<double>& to, const BoxGrid& grid, const PlannerConfig& cfg) {
  GlobalResult out;
  GlobalReport& rep = out.report;
  rep.atlas = build_covering(x, grid, r, from, to, cfg);
  HallBasis basis = build_hall_basis(static_cast<int>(x.size()), r);

  std::vector<double> current = from;
  std::vector<ControlLaw> laws;
  for (std::size_t leg = 0; leg < rep.atlas.path.size(); ++leg) {
    int cid = rep.atlas.path[leg];
    const CoverCell& cell = rep.atlas.cells[static_cast<std::size_t>(cid)];
    std::vector<double> target = leg + 1 < rep.atlas.path.size() ? rep.atlas.waypoints[leg] : to;
    LegReport lr;
    lr.cell = cid;
    lr.frame = cell.frame;
    lr.start = current;
    lr.goal = target;

    FrameSelection frame = fixed_frame(x, basis, target, cell.frame);
    LiftedSystem lift = desingularize(x, frame, r);
    lr.lifted_dim = lift.dim;
    Weights fiber_w;
    for (int h : lift.fiber_hall) fiber_w.push_back(basis.at(h).length);
    FreeSystem sys = FreeSystem::make(lift.xi, r, cfg.steer);
    std::vector<double> p0 = lift.lift_point(current), p1 = lift.lift_point(target);

    // Dry run: one unconstrained step straight at the goal.
    double radius = cfg.fiber_radius;
    if (radius <= 0) {
      double seen_max = 0;
      try {
        PrivilegedChart gc = sys.chart_at(p1);
        ExactSteerOptions so;
        so.tolerance = cfg.integrator_tol;
        ControlLaw u = exact_steer(gc.to_z(p0), sys.canon, sys.plan, so);
        if (!u.empty()) {
          IntegratorOptions io;
          io.tolerance = cfg.integrator_tol;
          for (const auto& s : integrate(sys.sim, p0, u, io).states)
            seen_max = std::max(seen_max, fiber_norm(lift, fiber_w, s));
        }
      } catch (const Error&) {
      }
      radius = 10.0 * seen_max;
      if (!(radius > 0)) radius = 1.0;
    }
    lr.fiber_radius = radius;
    sys.inside = [&cell, &grid, &lift, fiber_w, radius](const std::vector<double>& p) {
      std::vector<double> base(p.begin(), p.begin() + lift.n);
      return cell.contains(grid, base) && fiber_norm(lift, fiber_w, p) <= radius;
    };

    lr.free = global_free(p0, p1, sys, cfg);
    for (const auto& it : lr.free.iterates) lr.max_fiber_norm = std::max(lr.max_fiber_norm, fiber_norm(lift, fiber_w, it));
    for (const auto& u : lr.free.inputs) laws.push_back(u);
    current = lift.project(lr.free.final_point());
    rep.final_residual = lr.free.z_norms.back();
    bool ok = lr.free.converged();
    rep.legs.push_back(std::move(lr));
    if (!ok) {
      rep.status = "iteration_cap";
      break;
    }
  }
  rep.final_point = current;
  if (rep.status == "running") rep.status = "converged";

  if (laws.empty()) out.law.m = static_cast<int>(x.size());
  else out.law = concatenate(laws);
  if (!out.law.empty()) {
    IntegratorOptions io;
    io.tolerance = cfg.integrator_tol;
    io.record = false;
    auto replay = integrate_endpoint(DriftlessSystem(x, "original"), from, out.law, io);
    for (std::size_t i = 0; i < replay.size(); ++i)
      rep.replay_error = std::max(rep.replay_error, std::abs(replay[i] - current[i]));
    rep.total_length = input_length(out.law);
  }
  return out;
}

int nonholonomy_degree(const std::vector<ExprField>& x, const std::vector<double>& p, int max_r) {
  HallBasis basis = build_hall_basis(static_cast<int>(x.size()), max_r);
  auto g = GrowthProbe(x, basis).at(p);
  for (std::size_t s = 0; s < g.size(); ++s)
    if (g[s] == static_cast<int>(p.size())) return static_cast<int>(s) + 1;
  throw Error(ErrorCode::NoFrame, "brackets up to length " + std::to_string(max_r) + " do not span at the point");
}

}  // namespace nhsteer
