// Command line front end: solve, sweep, timereg, freeboundary, blowup, report.
// Exit codes: 0 pass, 1 analysis fail, 2 usage/config error, 3 numerical abort.

#include "signorini/experiment.hpp"
#include "signorini/field_io.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace signorini;
using nlohmann::json;

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kAbort = 3 };

struct Globals {
  std::string config;
  std::string out;
  int threads = 1;
};

// x' then t, or the full x (with x_n = 0) then t.
SpaceTimePoint parse_point(const std::vector<double>& v, int n) {
  if (static_cast<int>(v.size()) != n && static_cast<int>(v.size()) != n + 1) {
    throw ConfigError("point", "expected " + std::to_string(n) + " or " + std::to_string(n + 1) + " values");
  }
  SpaceTimePoint p{Coord::Zero(n), v.back()};
  for (int a = 0; a < n - 1; ++a) p.x[a] = v[a];
  if (static_cast<int>(v.size()) == n + 1) p.x[n - 1] = v[n - 1];
  return p;
}

GraphWindow parse_window(const std::vector<double>& v, const GridSpec& spec) {
  GraphWindow w = default_window(spec);
  if (v.empty()) return w;
  if (spec.n == 2 && v.size() == 4) {
    w.x_lo = v[0], w.x_hi = v[1], w.t_lo = v[2], w.t_hi = v[3];
  } else if (spec.n == 3 && v.size() == 6) {
    w.x_lo = v[0], w.x_hi = v[1], w.y_lo = v[2], w.y_hi = v[3], w.t_lo = v[4], w.t_hi = v[5];
  } else {
    throw ConfigError("window", spec.n == 2 ? "expected x_lo,x_hi,t_lo,t_hi" : "expected x_lo,x_hi,y_lo,y_hi,t_lo,t_hi");
  }
  return w;
}

void emit(const Globals& g, const std::string& name, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(g.out);
  std::ofstream f(fs::path(g.out) / name);
  f << text;
  if (!f) throw std::runtime_error("write failed for " + name);
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", x);
  return buf;
}

std::string cell(const json& j, const char* key) {
  return j.contains(key) && j[key].is_number() ? num(j[key].get<double>()) : "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parabolic Signorini solver and regularity checks"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  Globals g;
  app.add_option("--config", g.config, "Experiment config (JSON)");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);

  std::string run_dir;
  std::vector<double> point, radii, window;
  std::vector<std::string> analyses{"timereg", "freeboundary", "blowup"};
  int levels = 3;

  auto* solve = app.add_subcommand("solve", "Solve a config into a run directory");
  auto* sweep_cmd = app.add_subcommand("sweep", "Refinement sweep, CSV out");
  sweep_cmd->add_option("--levels", levels, "Number of levels (>= 2)");
  auto* timereg = app.add_subcommand("timereg", "Time-derivative checks on a run");
  auto* fb = app.add_subcommand("freeboundary", "Free boundary graph of a run");
  auto* blow = app.add_subcommand("blowup", "Blowup series at a point");
  auto* rep = app.add_subcommand("report", "Combined analysis report");
  for (auto* sub : {timereg, fb, blow, rep}) sub->add_option("--run", run_dir, "Run directory")->required();
  for (auto* sub : {timereg, blow, rep}) {
    sub->add_option("--point", point, "x',t or x,t")->delimiter(',');
    sub->add_option("--radii", radii, "Decreasing radii")->delimiter(',');
  }
  blow->get_option("--point")->required();
  blow->get_option("--radii")->required();
  for (auto* sub : {fb, rep}) sub->add_option("--window", window, "x_lo,x_hi[,y_lo,y_hi],t_lo,t_hi")->delimiter(',');
  rep->add_option("--analyses", analyses, "Subset of timereg,freeboundary,blowup")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (solve->parsed() || sweep_cmd->parsed()) {
      if (g.config.empty()) throw ConfigError("--config", "required");
      const ExperimentConfig config = load_config(g.config);
      if (solve->parsed()) {
        if (g.out.empty()) throw ConfigError("--out", "required");
        const RunFiles files = run_experiment(config, g.out);
        std::cout << "wrote " << files.dir.string() << "\n";
        return files.converged ? kPass : kAbort;
      }
      const auto rows = sweep(config, levels, g.threads);
      emit(g, "sweep.csv", sweep_csv(rows));
      return kPass;
    }

    const Run run = load_run(run_dir);
    AnalysisOptions opts;
    if (!point.empty()) opts.point = parse_point(point, run.spec().n);
    if (!radii.empty()) opts.radii = radii;
    if (!window.empty()) opts.window = parse_window(window, run.spec());

    if (timereg->parsed()) {
      const AnalysisResult r = analyze_timereg(run, opts);
      std::string csv = "r,M,omega\n";
      for (const auto& row : r.data.value("table", json::array())) {
        csv += num(row["r"].get<double>()) + "," + cell(row, "M") + "," + cell(row, "omega") + "\n";
      }
      json out = r.data;
      out["pass"] = r.pass;
      emit(g, "timereg.json", out.dump(2) + "\n");
      if (!g.out.empty()) emit(g, "timereg.csv", csv);
      return r.pass ? kPass : kFail;
    }
    if (fb->parsed()) {
      const AnalysisResult r = analyze_freeboundary(run, opts);
      const bool n3 = run.spec().n == 3;
      std::string csv = n3 ? "t,y,g,flagged\n" : "t,g,flagged\n";
      for (const auto& row : r.data["table"]) {
        csv += num(row["t"].get<double>()) + ",";
        if (n3) csv += num(row["y"].get<double>()) + ",";
        csv += cell(row, "g") + "," + (row["flagged"].get<bool>() ? "1" : "0") + "\n";
      }
      emit(g, "freeboundary.csv", csv);
      if (!g.out.empty()) {
        json summary = r.data;
        summary.erase("table");
        summary["pass"] = r.pass;
        emit(g, "freeboundary.json", summary.dump(2) + "\n");
      }
      return r.pass ? kPass : kFail;
    }
    if (blow->parsed()) {
      const AnalysisResult r = analyze_blowup(run, opts);
      std::string csv = "r,H,D,rotation\n";
      for (const auto& row : r.data.value("table", json::array())) {
        csv += num(row["r"].get<double>()) + "," + num(row["H"].get<double>()) + "," + num(row["D"].get<double>()) +
               "," + num(row["rotation"].get<double>()) + "\n";
      }
      emit(g, "blowup.csv", csv);
      if (!g.out.empty() && r.data.contains("table")) {
        const Grid grid = run.grid();
        for (std::size_t i = 0; i < radii.size(); ++i) {
          const BlowupSample s = rescale(grid, run.u, *opts.point, radii[i], run.scale);
          write_sigf(fs::path(g.out) / ("ur_" + std::to_string(i) + ".sigf"), s.ur);
        }
      }
      std::cerr << "verdict: " << r.data.value("verdict", "skipped") << "\n";
      return r.pass ? kPass : kFail;
    }
    const AnalysisResult r = report(run_dir, analyses, opts);
    emit(g, "report.json", r.data.dump(2) + "\n");
    return r.pass ? kPass : kFail;
  } catch (const NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
