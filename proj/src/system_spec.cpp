#include "nhsteer/system_spec.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "nhsteer/errors.hpp"

namespace nhsteer {

namespace {

std::string position(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

template <class T>
T require(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::ParseError, std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::ParseError, std::string("key '") + key + "' has the wrong type");
  }
}

}  // namespace

SystemSpec parse_system_spec(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "malformed system document at " + position(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "system document must be an object");
  SystemSpec s;
  s.name = doc.value("name", std::string("system"));
  s.n = require<int>(doc, "n");
  s.m = require<int>(doc, "m");
  if (s.n < 1 || s.m < 1) throw Error(ErrorCode::DimensionMismatch, "n and m must be positive");
  if (doc.contains("coordinates")) {
    s.names = require<std::vector<std::string>>(doc, "coordinates");
    if (static_cast<int>(s.names.size()) != s.n)
      throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(s.n) + " coordinate names");
  } else {
    s.names = default_names(static_cast<std::size_t>(s.n), "x");
  }
  s.fields = require<std::vector<std::vector<std::string>>>(doc, "fields");
  if (static_cast<int>(s.fields.size()) != s.m)
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(s.m) + " fields, found " + std::to_string(s.fields.size()));
  for (std::size_t i = 0; i < s.fields.size(); ++i) {
    if (static_cast<int>(s.fields[i].size()) != s.n)
      throw Error(ErrorCode::DimensionMismatch, "field " + std::to_string(i + 1) + " has " +
                                                    std::to_string(s.fields[i].size()) + " components, expected " +
                                                    std::to_string(s.n));
    ExprField f;
    for (std::size_t k = 0; k < s.fields[i].size(); ++k) {
      try {
        f.push_back(parse_expr(s.fields[i][k], s.names));
      } catch (const Error& e) {
        throw Error(e.code(), "field " + std::to_string(i + 1) + ", component " + std::to_string(k + 1) + ": " +
                                  e.what());
      }
    }
    s.parsed.push_back(std::move(f));
  }
  if (doc.contains("metadata")) {
    const Json& md = doc.at("metadata");
    s.step = md.value("step", 0);
    s.singular_locus = md.value("singular_locus", std::string());
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << contents;
}

SystemSpec load_system_spec(const std::string& path) {
  for (const auto& b : benchmark_names())
    if (path == b) return benchmark_system(b);
  return parse_system_spec(read_file(path));
}

std::string serialize_system_spec(const SystemSpec& spec) {
  Json doc;
  doc["name"] = spec.name;
  doc["n"] = spec.n;
  doc["m"] = spec.m;
  doc["coordinates"] = spec.names;
  doc["fields"] = spec.fields;
  if (spec.step > 0 || !spec.singular_locus.empty()) {
    Json md = Json::object();
    if (spec.step > 0) md["step"] = spec.step;
    if (!spec.singular_locus.empty()) md["singular_locus"] = spec.singular_locus;
    doc["metadata"] = md;
  }
  return doc.dump(2) + "\n";
}

std::vector<std::string> benchmark_names() { return {"unicycle", "martinet", "chained4"}; }

SystemSpec benchmark_system(const std::string& name) {
  Json doc;
  doc["name"] = name;
  if (name == "unicycle") {
    doc["n"] = 3;
    doc["m"] = 2;
    doc["coordinates"] = {"x", "y", "theta"};
    doc["fields"] = {{"cos(theta)", "sin(theta)", "0"}, {"0", "0", "1"}};
    doc["metadata"] = {{"step", 2}};
  } else if (name == "martinet") {
    doc["n"] = 3;
    doc["m"] = 2;
    doc["coordinates"] = {"x1", "x2", "x3"};
    doc["fields"] = {{"1", "0", "0"}, {"0", "1", "x1^2"}};
    doc["metadata"] = {{"step", 3}, {"singular_locus", "x1 = 0"}};
  } else if (name == "chained4") {
    doc["n"] = 4;
    doc["m"] = 2;
    doc["coordinates"] = {"x1", "x2", "x3", "x4"};
    doc["fields"] = {{"1", "0", "x2", "x3"}, {"0", "1", "0", "0"}};
    doc["metadata"] = {{"step", 3}};
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown benchmark '" + name + "'");
  }
  return parse_system_spec(doc.dump());
}

Json to_json(const ControlLaw& law) {
  Json j;
  j["m"] = law.m;
  j["scale"] = law.scale;
  j["time_scale"] = law.time_scale;
  Json periods = Json::array();
  for (const auto& p : law.periods) {
    Json chans = Json::array();
    for (const auto& ch : p.channels) {
      Json terms = Json::array();
      for (const auto& s : ch) terms.push_back({{"amplitude", s.amplitude}, {"frequency", s.frequency}, {"phase", s.phase}});
      chans.push_back(terms);
    }
    periods.push_back(chans);
  }
  j["periods"] = periods;
  return j;
}

ControlLaw control_law_from_json(const Json& j) {
  ControlLaw law;
  try {
    law.m = j.at("m").get<int>();
    law.scale = j.value("scale", 1.0);
    law.time_scale = j.value("time_scale", 1.0);
    for (const auto& p : j.at("periods")) {
      Period per(law.m);
      if (static_cast<int>(p.size()) != law.m) throw Error(ErrorCode::DimensionMismatch, "period with wrong channel count");
      for (std::size_t c = 0; c < p.size(); ++c)
        for (const auto& t : p[c])
          per.channels[c].push_back({t.at("amplitude").get<double>(), t.at("frequency").get<long>(), t.value("phase", 0)});
      law.periods.push_back(std::move(per));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed control law: ") + e.what());
  }
  if (!(law.time_scale > 0)) throw Error(ErrorCode::ParseError, "time_scale must be positive");
  return law;
}

Json to_json(const HallBasis& basis) {
  Json j;
  j["m"] = basis.m;
  j["r"] = basis.r;
  j["level_dims"] = basis.level_dims;
  Json els = Json::array();
  for (const auto& e : basis.elements) {
    Json x;
    x["index"] = e.index;
    x["bracket"] = basis.bracket_string(e.index);
    x["length"] = e.length;
    if (e.is_generator()) {
      x["generator"] = e.generator;
    } else {
      x["left"] = e.left;
      x["right"] = e.right;
    }
    x["phi"] = e.phi;
    x["alpha"] = e.alpha;
    x["delta"] = e.delta;
    x["class"] = e.class_id;
    els.push_back(x);
  }
  j["elements"] = els;
  j["classes"] = basis.classes;
  return j;
}

Json to_json(const PlannerReport& rep) {
  Json j;
  j["status"] = rep.status;
  j["modified"] = rep.modified;
  j["R"] = rep.R;
  if (rep.modified) j["k_bound"] = rep.k_bound;
  j["loops"] = rep.loops;
  j["accepted"] = rep.inputs.size();
  j["rejections"] = rep.rejections;
  j["total_length"] = rep.total_length;
  j["final_residual"] = rep.z_norms.empty() ? 0.0 : rep.z_norms.back();
  j["iterates"] = rep.iterates;
  j["subgoals"] = rep.subgoals;
  j["z_norms"] = rep.z_norms;
  j["eta_history"] = rep.eta_history;
  Json trace = Json::array();
  for (const auto& s : rep.trace)
    trace.push_back({{"eta", s.eta}, {"j", s.j}, {"outcome", s.outcome}, {"z_norm", s.z_norm}, {"subgoal", s.subgoal}});
  j["trace"] = trace;
  return j;
}

Json to_json(const GlobalReport& rep) {
  Json j;
  j["status"] = rep.status;
  j["final_point"] = rep.final_point;
  j["final_residual"] = rep.final_residual;
  j["replay_error"] = rep.replay_error;
  j["total_length"] = rep.total_length;
  Json cov;
  cov["lo"] = rep.atlas.grid.lo;
  cov["hi"] = rep.atlas.grid.hi;
  cov["boxes_per_axis"] = rep.atlas.grid.per_axis;
  Json cells = Json::array();
  for (const auto& c : rep.atlas.cells)
    cells.push_back({{"frame", c.frame}, {"core_boxes", c.core.size()}, {"boxes", c.boxes.size()}});
  cov["cells"] = cells;
  cov["edges"] = rep.atlas.edges;
  cov["path"] = rep.atlas.path;
  cov["waypoints"] = rep.atlas.waypoints;
  j["covering"] = cov;
  Json legs = Json::array();
  for (const auto& l : rep.legs) {
    Json x;
    x["cell"] = l.cell;
    x["frame"] = l.frame;
    x["start"] = l.start;
    x["goal"] = l.goal;
    x["lifted_dim"] = l.lifted_dim;
    x["fiber_radius"] = l.fiber_radius;
    x["max_fiber_norm"] = l.max_fiber_norm;
    x["planner"] = to_json(l.free);
    legs.push_back(x);
  }
  j["legs"] = legs;
  return j;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const std::vector<std::string>& names) {
  out << "t";
  for (const auto& n : names) out << "," << n;
  out << "\n" << std::setprecision(17);
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    out << traj.times[i];
    for (double v : traj.states[i]) out << "," << v;
    out << "\n";
  }
}

}  // namespace nhsteer
