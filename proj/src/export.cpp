#include "tnav/export.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace tnav {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

nlohmann::json vec(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

std::string opt_csv(const std::optional<double>& v) { return v ? num(*v) : ""; }

nlohmann::json quart_json(const std::optional<Quartiles>& q) {
  if (!q) return nullptr;
  return {{"q1", q->q1}, {"median", q->median}, {"q3", q->q3}};
}

}  // namespace

nlohmann::json node_json(const PlaneNode& node, int id) {
  nlohmann::json rot = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    rot.push_back({node.plane.rotation(r, 0), node.plane.rotation(r, 1), node.plane.rotation(r, 2)});
  }
  return {{"id", id},
          {"position", vec(node.position())},
          {"rotation", rot},
          {"tau", node.tau()},
          {"parent", node.parent ? nlohmann::json(*node.parent) : nlohmann::json(nullptr)},
          {"cost", node.cost_from_root}};
}

nlohmann::json tree_json(const SamplingTree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) nodes.push_back(node_json(tree.nodes[i], static_cast<int>(i)));
  return {{"root", tree.root}, {"goal_region", tree.goal_region}, {"nodes", nodes}};
}

nlohmann::json path_json(const SparsePath& path) {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    nlohmann::json n = node_json(path.nodes[i], static_cast<int>(i));
    // Within a path the parent is simply the previous entry.
    n["parent"] = i == 0 ? nlohmann::json(nullptr) : nlohmann::json(static_cast<int>(i) - 1);
    nodes.push_back(std::move(n));
  }
  return {{"cost", path.cost}, {"length", path.length()}, {"nodes", nodes}};
}

nlohmann::json report_json(const RunReport& r) {
  return {{"success", r.success},
          {"status", r.status},
          {"path_length", r.path_length},
          {"elapsed", r.elapsed},
          {"min_clearance", std::isfinite(r.min_clearance) ? nlohmann::json(r.min_clearance)
                                                           : nlohmann::json(nullptr)},
          {"cycles", r.cycles},
          {"steps", r.log.rows.size()}};
}

nlohmann::json bench_json(const BenchResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : result.rows) {
    rows.push_back({{"fixture", row.fixture},
                    {"algorithm", to_string(row.contender)},
                    {"trials", row.trials},
                    {"solved", row.solved},
                    {"analysis_seconds", quart_json(row.analysis)},
                    {"search_seconds", quart_json(row.search)},
                    {"total_seconds", quart_json(row.total)},
                    {"matched_cost_seconds", quart_json(row.matched)}});
  }
  return {{"rows", rows}};
}

std::string dense_csv(const DensePath& dense) {
  std::ostringstream out;
  out << "x,y,z,tau,sigma\n";
  for (const auto& w : dense.waypoints) {
    out << num(w.position.x()) << ',' << num(w.position.y()) << ',' << num(w.position.z()) << ','
        << num(w.tau) << ',' << num(w.sigma) << '\n';
  }
  return out.str();
}

std::string trajectory_csv(const TrajectoryLog& log) {
  std::ostringstream out;
  out << "t,x,y,theta,v,omega_z,t_mean,sigma_mean,lambda\n";
  for (const auto& r : log.rows) {
    out << num(r.t) << ',' << num(r.x) << ',' << num(r.y) << ',' << num(r.theta) << ',' << num(r.v)
        << ',' << num(r.omega) << ',' << num(r.t_mean) << ',' << num(r.sigma_mean) << ','
        << num(r.lambda) << '\n';
  }
  return out.str();
}

std::string bench_summary_csv(const BenchResult& result) {
  std::ostringstream out;
  out << "fixture,algorithm,trials,solved";
  for (const char* m : {"analysis", "search", "total", "matched_cost"}) {
    out << ',' << m << "_q1," << m << "_median," << m << "_q3";
  }
  out << '\n';
  auto q = [&](const std::optional<Quartiles>& v) {
    if (!v) {
      out << ",,,";
      return;
    }
    out << ',' << num(v->q1) << ',' << num(v->median) << ',' << num(v->q3);
  };
  for (const auto& row : result.rows) {
    out << row.fixture << ',' << to_string(row.contender) << ',' << row.trials << ',' << row.solved;
    q(row.analysis);
    q(row.search);
    q(row.total);
    q(row.matched);
    out << '\n';
  }
  return out.str();
}

std::string bench_timings_csv(const BenchResult& result) {
  std::ostringstream out;
  out << "fixture,algorithm,trial,seed,analysis_seconds,search_seconds,total_seconds,"
         "matched_cost_seconds\n";
  for (const auto& t : result.trials) {
    out << t.fixture << ',' << to_string(t.contender) << ',' << t.trial << ',' << t.seed << ','
        << num(t.analysis_seconds) << ',' << opt_csv(t.search_seconds) << ','
        << opt_csv(t.total_seconds) << ',' << opt_csv(t.matched_seconds) << '\n';
  }
  return out.str();
}

std::string bench_outcomes_csv(const BenchResult& result) {
  std::ostringstream out;
  out << "fixture,algorithm,trial,seed,solved,first_solution_iteration,initial_cost,final_cost,"
         "plane_fits,tree_size\n";
  for (const auto& t : result.trials) {
    out << t.fixture << ',' << to_string(t.contender) << ',' << t.trial << ',' << t.seed << ','
        << (t.solved ? 1 : 0) << ','
        << (t.first_solution_iteration ? std::to_string(*t.first_solution_iteration) : "") << ','
        << opt_csv(t.initial_cost) << ',' << opt_csv(t.final_cost) << ',' << t.plane_fits << ','
        << t.tree_size << '\n';
  }
  return out.str();
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

void OutputDir::write_text(const std::string& name, const std::string& content) {
  std::ofstream out(root_ / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (root_ / name).string());
  out << content;
  add(name);
}

void OutputDir::write_json(const std::string& name, const nlohmann::json& doc) {
  write_text(name, doc.dump(2) + "\n");
}

void OutputDir::add(const std::string& name) { files_.push_back(name); }

void OutputDir::write_manifest(const std::string& command, const nlohmann::json& config) {
  const nlohmann::json doc{{"command", command}, {"files", files_}, {"config", config}};
  std::ofstream out(root_ / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest.json");
  out << doc.dump(2) << '\n';
}

}  // namespace tnav
