#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "nhsteer/canonical.hpp"
#include "nhsteer/desing.hpp"
#include "nhsteer/errors.hpp"
#include "nhsteer/hall.hpp"
#include "nhsteer/homogeneous.hpp"
#include "nhsteer/planner.hpp"
#include "nhsteer/privcoord.hpp"
#include "nhsteer/sim.hpp"
#include "nhsteer/steer.hpp"
#include "nhsteer/system_spec.hpp"

using namespace nhsteer;

namespace {

struct Globals {
  std::uint64_t seed = 7;
  bool json = false;
};

std::vector<double> parse_point(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, std::string("cannot read ") + what + " '" + text + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " is empty");
  return out;
}

void check_dim(const std::vector<double>& p, std::size_t n, const char* what) {
  if (p.size() != n)
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has " + std::to_string(p.size()) +
                                                  " coordinates, expected " + std::to_string(n));
}

std::vector<std::string> strings(const std::vector<Poly>& polys, const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& p : polys) out.push_back(p.to_string(names));
  return out;
}

std::vector<std::vector<std::string>> strings(const std::vector<PolyField>& fields,
                                              const std::vector<std::string>& names) {
  std::vector<std::vector<std::string>> out;
  for (const auto& f : fields) out.push_back(strings(f, names));
  return out;
}

std::vector<std::vector<std::string>> strings(const std::vector<ExprField>& fields,
                                              const std::vector<std::string>& names) {
  std::vector<std::vector<std::string>> out;
  for (const auto& f : fields) {
    std::vector<std::string> row;
    for (const auto& e : f) row.push_back(e.to_string(names));
    out.push_back(row);
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(12);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os.str();
}

int system_step(const SystemSpec& spec, const std::vector<double>& at, int given) {
  if (given > 0) return given;
  if (spec.step > 0) return spec.step;
  return nonholonomy_degree(spec.parsed, at);
}

int cmd_hall(const Globals& g, int m, int r) {
  HallBasis basis = build_hall_basis(m, r);
  if (g.json) {
    std::cout << to_json(basis).dump(2) << "\n";
    return 0;
  }
  std::cout << "Hall basis m=" << m << " r=" << r << ", " << basis.size() << " elements\n";
  for (const auto& e : basis.elements)
    std::cout << "  " << e.index << "  " << basis.bracket_string(e.index) << "  length " << e.length << "  phi "
              << e.phi << "  class " << e.class_id << "\n";
  return 0;
}

int cmd_canonical(const Globals& g, int m, int r) {
  CanonicalSystem c = canonical_fields(m, r);
  auto names = default_names(static_cast<std::size_t>(c.dim()), "v");
  if (g.json) {
    Json j;
    j["m"] = m;
    j["r"] = r;
    j["weights"] = c.weights;
    j["monomials"] = strings(c.monomials, names);
    j["fields"] = strings(c.fields, names);
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::cout << "Canonical form m=" << m << " r=" << r << " in v1..v" << c.dim() << "\n";
  for (int j = 1; j <= c.dim(); ++j)
    std::cout << "  P" << j << " = " << c.monomials[static_cast<std::size_t>(j - 1)].to_string(names) << "\n";
  for (std::size_t i = 0; i < c.fields.size(); ++i) std::cout << "  D" << i + 1 << " = " << to_string(c.fields[i], names) << "\n";
  return 0;
}

int cmd_lift(const Globals& g, const std::string& file, const std::string& at_s, const std::string& frame_s,
             int r_given, const std::string& out) {
  SystemSpec spec = load_system_spec(file);
  auto at = parse_point(at_s, "--at");
  check_dim(at, static_cast<std::size_t>(spec.n), "--at");
  int r = system_step(spec, at, r_given);
  HallBasis basis = build_hall_basis(spec.m, r);
  FrameSelection frame;
  if (frame_s.empty()) {
    frame = select_frame(spec.parsed, basis, at);
  } else {
    std::vector<int> idx;
    for (double v : parse_point(frame_s, "--frame")) idx.push_back(static_cast<int>(v));
    frame = fixed_frame(spec.parsed, basis, at, idx);
  }
  LiftedSystem lift = desingularize(spec.parsed, frame, r, spec.names);
  SystemSpec lifted;
  lifted.name = spec.name + "_lifted";
  lifted.n = lift.dim;
  lifted.m = lift.m;
  lifted.names = lift.names;
  lifted.fields = strings(lift.xi, lift.names);
  lifted.step = r;
  if (!out.empty()) write_file(out, serialize_system_spec(lifted));
  auto growth = growth_vector(lift.xi, basis, lift.lift_point(at));
  if (g.json) {
    Json j;
    j["r"] = r;
    j["frame"] = frame.indices;
    j["fiber_hall"] = lift.fiber_hall;
    j["dim"] = lift.dim;
    j["exact"] = lift.exact;
    j["growth_vector"] = growth;
    Json steps = Json::array();
    for (const auto& s : lift.steps) steps.push_back({{"s", s.s}, {"K", s.K}, {"added", s.added}});
    j["steps"] = steps;
    j["system"] = Json::parse(serialize_system_spec(lifted));
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::cout << "frame:";
  for (int i : frame.indices) std::cout << " " << basis.bracket_string(i);
  std::cout << "\nlifted dimension " << lift.dim << ", growth vector at the anchor:";
  for (int v : growth) std::cout << " " << v;
  std::cout << "\n";
  for (std::size_t i = 0; i < lift.xi.size(); ++i) std::cout << "  xi" << i + 1 << " = " << to_string(lift.xi[i], lift.names) << "\n";
  return 0;
}

int cmd_approx(const Globals& g, const std::string& file, const std::string& at_s, int r_given) {
  SystemSpec spec = load_system_spec(file);
  auto at = parse_point(at_s, "--at");
  check_dim(at, static_cast<std::size_t>(spec.n), "--at");
  int r = system_step(spec, at, r_given);
  HallBasis basis = build_hall_basis(spec.m, r);
  std::vector<ExprField> fields = spec.parsed;
  std::vector<std::string> names = spec.names;
  std::vector<double> anchor = at;
  bool lifted = false;
  if (static_cast<int>(spec.n) != basis.size()) {
    LiftedSystem lift = desingularize(spec.parsed, select_frame(spec.parsed, basis, at), r, spec.names);
    fields = lift.xi;
    names = lift.names;
    anchor = lift.lift_point(at);
    lifted = true;
  }
  ApproxSystem ap = first_order_approx(fields, anchor, basis);
  OrderReport orders = check_orders(ap.jets, basis, ap.chart.map.forward, ap.in_chart, ap.approx);
  auto znames = default_names(ap.chart.dim(), "z");
  std::vector<std::string> chart;
  for (const auto& p : ap.chart.map.forward) chart.push_back(from_poly_shifted(p, ap.chart.anchor).to_string(names));
  if (g.json) {
    Json j;
    j["r"] = r;
    j["lifted"] = lifted;
    j["coordinates"] = names;
    j["anchor"] = anchor;
    j["weights"] = ap.chart.weights;
    j["exact"] = ap.chart.exact;
    j["chart"] = chart;
    j["fields_in_chart"] = strings(ap.in_chart, znames);
    j["approximation"] = strings(ap.approx.fields, znames);
    j["orders"] = {{"expected", orders.expected},
                   {"word_orders", orders.word_orders},
                   {"frame_ok", orders.frame_ok},
                   {"approx_is_canonical", orders.approx_is_canonical},
                   {"ok", orders.ok()}};
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  if (lifted) std::cout << "system lifted to dimension " << fields[0].size() << " before approximation\n";
  for (std::size_t k = 0; k < chart.size(); ++k)
    std::cout << "  z" << k + 1 << " (weight " << ap.chart.weights[k] << ") = " << chart[k] << "\n";
  for (std::size_t i = 0; i < ap.approx.fields.size(); ++i)
    std::cout << "  approx X" << i + 1 << " = " << to_string(ap.approx.fields[i], znames) << "\n";
  std::cout << "orders " << (orders.ok() ? "ok" : "FAILED") << "\n";
  return orders.ok() ? 0 : 1;
}

int cmd_steer(const Globals& g, int m, int r, const std::string& from_s, int smooth, double tol,
              const std::string& out) {
  CanonicalSystem canon = canonical_fields(m, r);
  auto from = parse_point(from_s, "--from");
  check_dim(from, static_cast<std::size_t>(canon.dim()), "--from");
  SteerConfig cfg;
  cfg.seed = g.seed;
  cfg.plan_smoothing = smooth > 0;
  FrequencyPlan plan = plan_all(canon, cfg);
  ControlLaw law = exact_steer(from, canon, plan, {tol, smooth});
  std::vector<double> end = from;
  if (!law.empty()) {
    IntegratorOptions io;
    io.tolerance = tol;
    io.record = false;
    end = integrate_endpoint(DriftlessSystem::from_poly(canon.fields), from, law, io);
  }
  double residual = pseudo_norm(end, canon.weights);
  Json j;
  j["law"] = to_json(law);
  j["endpoint"] = end;
  j["residual"] = residual;
  j["length"] = input_length(law);
  if (!out.empty()) write_file(out, to_json(law).dump(2) + "\n");
  if (g.json) {
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::cout << law.periods.size() << " periods, scale " << law.scale << ", input length " << j["length"].get<double>()
            << "\nendpoint " << join(end) << "\nresidual pseudo-norm " << residual << "\n";
  return 0;
}

int cmd_plan(const Globals& g, const std::string& file, const std::string& from_s, const std::string& to_s, double e,
             const std::string& box_s, bool modified, const std::string& report, const std::string& traj,
             int boxes, long max_iter, double int_tol, int r_given) {
  SystemSpec spec = load_system_spec(file);
  auto from = parse_point(from_s, "--from");
  auto to = parse_point(to_s, "--to");
  std::size_t n = static_cast<std::size_t>(spec.n);
  check_dim(from, n, "--from");
  check_dim(to, n, "--to");
  auto box = parse_point(box_s, "--box");
  BoxGrid grid;
  grid.per_axis = boxes;
  if (box.size() == 2) {
    grid.lo.assign(n, box[0]);
    grid.hi.assign(n, box[1]);
  } else if (box.size() == 2 * n) {
    for (std::size_t i = 0; i < n; ++i) {
      grid.lo.push_back(box[2 * i]);
      grid.hi.push_back(box[2 * i + 1]);
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "--box takes LO,HI or LO1,HI1,...,LOn,HIn");
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!(grid.lo[i] < grid.hi[i])) throw Error(ErrorCode::InvalidArgument, "--box has an empty side");
  int r = r_given > 0 ? r_given : spec.step;
  if (r <= 0) {
    for (std::size_t b = 0; b < grid.count(); ++b) r = std::max(r, nonholonomy_degree(spec.parsed, grid.center(b)));
  }
  PlannerConfig cfg;
  cfg.tolerance = e;
  cfg.modified = modified;
  cfg.boxes_per_axis = boxes;
  cfg.max_iterations = max_iter;
  cfg.integrator_tol = int_tol;
  cfg.steer.seed = g.seed;
  GlobalResult res = global_plan(spec.parsed, r, from, to, grid, cfg);
  Json j;
  j["system"] = spec.name;
  j["r"] = r;
  j["tolerance"] = e;
  j["report"] = to_json(res.report);
  j["law"] = to_json(res.law);
  if (!report.empty()) write_file(report, j.dump(2) + "\n");
  if (!traj.empty()) {
    IntegratorOptions io;
    io.tolerance = int_tol;
    Trajectory t;
    if (res.law.empty()) {
      t.times = {0.0};
      t.states = {from};
    } else {
      t = integrate(DriftlessSystem(spec.parsed, spec.name), from, res.law, io);
    }
    std::ofstream os(traj);
    if (!os) throw Error(ErrorCode::InvalidArgument, "cannot write " + traj);
    write_trajectory_csv(os, t, spec.names);
  }
  const GlobalReport& rep = res.report;
  if (g.json) {
    Json s;
    s["status"] = rep.status;
    s["final_point"] = rep.final_point;
    s["final_residual"] = rep.final_residual;
    s["replay_error"] = rep.replay_error;
    s["cells"] = rep.atlas.cells.size();
    s["path"] = rep.atlas.path;
    s["total_length"] = rep.total_length;
    std::cout << s.dump(2) << "\n";
  } else {
    std::cout << "status " << rep.status << "\ncells " << rep.atlas.cells.size() << ", path of "
              << rep.atlas.path.size() - 1 << " transitions\n";
    for (const auto& l : rep.legs)
      std::cout << "  leg in cell " << l.cell << ": " << l.free.loops << " iterations, " << l.free.inputs.size()
                << " accepted, residual " << l.free.z_norms.back() << "\n";
    std::cout << "final point " << join(rep.final_point) << "\nresidual " << rep.final_residual << ", replay error "
              << rep.replay_error << ", input length " << rep.total_length << "\n";
  }
  if (!rep.converged())
    throw Error(ErrorCode::IterationCapExceeded, "planner hit the iteration cap; see the report for the trace");
  return 0;
}

int cmd_simulate(const Globals& g, const std::string& file, const std::string& x0_s, const std::string& law_file,
                 const std::string& out, double tol) {
  SystemSpec spec = load_system_spec(file);
  auto x0 = parse_point(x0_s, "--x0");
  check_dim(x0, static_cast<std::size_t>(spec.n), "--x0");
  Json lj;
  std::string text = read_file(law_file);
  try {
    lj = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed law document: ") + e.what());
  }
  // Accept a bare law or a plan report holding one.
  ControlLaw law = control_law_from_json(lj.contains("law") ? lj.at("law") : lj);
  if (law.m != spec.m) throw Error(ErrorCode::DimensionMismatch, "law channel count differs from the system");
  IntegratorOptions io;
  io.tolerance = tol;
  Trajectory t;
  if (law.empty()) {
    t.times = {0.0};
    t.states = {x0};
  } else {
    t = integrate(DriftlessSystem(spec.parsed, spec.name), x0, law, io);
  }
  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) throw Error(ErrorCode::InvalidArgument, "cannot write " + out);
    write_trajectory_csv(os, t, spec.names);
  }
  if (g.json) {
    Json j;
    j["endpoint"] = t.back();
    j["samples"] = t.states.size();
    j["horizon"] = t.times.back();
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "endpoint " << join(t.back()) << " after t = " << t.times.back() << " (" << t.states.size()
              << " samples)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steering of driftless nonholonomic systems"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "seed for randomized frequency searches");
  app.add_flag("--json", g.json, "machine-readable output");

  int m = 2, r = 2;
  auto* hall = app.add_subcommand("hall", "P. Hall basis listing");
  hall->add_option("--m", m, "number of generators")->required()->check(CLI::Range(1, 9));
  hall->add_option("--r", r, "maximal bracket length")->required()->check(CLI::Range(1, 8));

  auto* canon = app.add_subcommand("canonical", "canonical nilpotent fields");
  canon->add_option("--m", m)->required()->check(CLI::Range(1, 9));
  canon->add_option("--r", r)->required()->check(CLI::Range(1, 6));

  std::string system, at, frame, out, from, to, box = "-1,1", report, traj, x0, law;
  int r_given = 0, smooth = 0, boxes = 9;
  double tol = 1e-10, e = 1e-3, int_tol = 1e-12;
  long max_iter = 10000;
  bool modified = false;

  auto* lift = app.add_subcommand("lift", "desingularization by lifting at a point");
  lift->add_option("--system", system, "system document or benchmark name")->required();
  lift->add_option("--at", at, "anchor point")->required();
  lift->add_option("--frame", frame, "Hall indices of the frame, comma separated");
  lift->add_option("--r", r_given, "step; default from the system metadata");
  lift->add_option("--out", out, "write the lifted system document");

  auto* approx = app.add_subcommand("approx", "privileged chart and first-order approximation");
  approx->add_option("--system", system)->required();
  approx->add_option("--at", at)->required();
  approx->add_option("--r", r_given);

  auto* steer = app.add_subcommand("steer", "exact steering of the canonical system to 0");
  steer->add_option("--m", m)->required()->check(CLI::Range(1, 9));
  steer->add_option("--r", r)->required()->check(CLI::Range(1, 6));
  steer->add_option("--from", from, "initial point")->required();
  steer->add_option("--smooth", smooth, "continuity order at period junctions (0 or 1)")->check(CLI::Range(0, 1));
  steer->add_option("--tol", tol, "integrator tolerance");
  steer->add_option("--out", out, "write the control law document");

  auto* plan = app.add_subcommand("plan", "global planning between two points");
  plan->add_option("--system", system)->required();
  plan->add_option("--from", from)->required();
  plan->add_option("--to", to)->required();
  plan->add_option("--tol", e, "planner tolerance on the goal pseudo-norm")->check(CLI::PositiveNumber);
  plan->add_option("--box", box, "working box LO,HI or per-axis bounds");
  plan->add_flag("--modified", modified, "bounded variant with the R_k sequence");
  plan->add_option("--report", report, "write the full report document");
  plan->add_option("--traj", traj, "write the replayed trajectory as CSV");
  plan->add_option("--boxes", boxes, "grid boxes per axis")->check(CLI::Range(1, 64));
  plan->add_option("--max-iter", max_iter, "iteration cap per cell")->check(CLI::PositiveNumber);
  plan->add_option("--int-tol", int_tol, "integrator tolerance")->check(CLI::PositiveNumber);
  plan->add_option("--r", r_given);

  auto* sim = app.add_subcommand("simulate", "integrate a system under a control law");
  sim->add_option("--system", system)->required();
  sim->add_option("--x0", x0)->required();
  sim->add_option("--law", law, "control law document")->required();
  sim->add_option("--out", out, "trajectory CSV");
  sim->add_option("--tol", tol, "integrator tolerance")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return 2;
  }

  try {
    if (*hall) return cmd_hall(g, m, r);
    if (*canon) return cmd_canonical(g, m, r);
    if (*lift) return cmd_lift(g, system, at, frame, r_given, out);
    if (*approx) return cmd_approx(g, system, at, r_given);
    if (*steer) return cmd_steer(g, m, r, from, smooth, tol, out);
    if (*plan)
      return cmd_plan(g, system, from, to, e, box, modified, report, traj, boxes, max_iter, int_tol, r_given);
    if (*sim) return cmd_simulate(g, system, x0, law, out, tol);
  } catch (const Error& err) {
    Json j;
    j["error"] = error_code_name(err.code());
    j["message"] = err.what();
    std::cerr << j.dump() << "\n";
    return 1;
  }
  return 0;
}
