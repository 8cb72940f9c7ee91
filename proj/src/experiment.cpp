#include "signorini/experiment.hpp"

#include "signorini/field_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

namespace signorini {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kEdge = 1e-9;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(join(path, key), "unknown key");
  }
}

const json* find(const json& obj, const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

int get_int(const json& obj, const std::string& key, const std::string& path, std::optional<int> fallback) {
  const json* v = find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError(join(path, key), "missing required field");
  }
  if (!v->is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v->get<int>();
}

double get_number(const json& obj, const std::string& key, const std::string& path,
                  std::optional<double> fallback) {
  const json* v = find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError(join(path, key), "missing required field");
  }
  if (!v->is_number()) throw ConfigError(join(path, key), "expected a number");
  return v->get<double>();
}

const json& get_object(const json& obj, const std::string& key, const std::string& path) {
  static const json empty = json::object();
  const json* v = find(obj, key);
  if (!v) return empty;
  if (!v->is_object()) throw ConfigError(join(path, key), "expected an object");
  return *v;
}

// validate() messages start with the offending field name.
[[noreturn]] void rethrow_as_config(const std::string& section, const std::invalid_argument& e,
                                    const std::set<std::string>& fields) {
  const std::string msg = e.what();
  const std::string first = msg.substr(0, msg.find(' '));
  if (fields.count(first)) throw ConfigError(join(section, first), msg);
  throw ConfigError(section, msg);
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected an object");
  reject_unknown(j, "", {"n", "preset", "params", "grid", "solver"});
  ExperimentConfig c;
  const int n = get_int(j, "n", "", std::nullopt);

  const json* preset_name = find(j, "preset");
  if (!preset_name) throw ConfigError("preset", "missing required field");
  if (!preset_name->is_string()) throw ConfigError("preset", "expected a string");
  c.preset = preset_name->get<std::string>();
  c.params = get_object(j, "params", "");

  if (!find(j, "grid")) throw ConfigError("grid", "missing required field");
  const json& g = get_object(j, "grid", "");
  reject_unknown(g, "grid", {"n", "m", "dt", "t0", "t1"});
  if (find(g, "n") && get_int(g, "n", "grid", std::nullopt) != n) throw ConfigError("grid.n", "disagrees with n");
  c.grid.n = n;
  c.grid.m = get_int(g, "m", "grid", std::nullopt);
  c.grid.dt = get_number(g, "dt", "grid", std::nullopt);
  c.grid.t0 = get_number(g, "t0", "grid", -1.0);
  c.grid.t1 = get_number(g, "t1", "grid", 0.0);
  try {
    validate(c.grid);
  } catch (const std::invalid_argument& e) {
    if (std::string(e.what()).rfind("n ", 0) == 0) throw ConfigError("n", e.what());
    rethrow_as_config("grid", e, {"m", "dt", "t0", "t1"});
  }

  const json& s = get_object(j, "solver", "");
  reject_unknown(s, "solver", {"method", "omega", "tol_residual", "tol_comp", "max_iters", "penalty_eps"});
  if (const json* m = find(s, "method")) {
    if (!m->is_string()) throw ConfigError("solver.method", "expected a string");
    try {
      c.solver.method = method_from_string(m->get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("solver.method", e.what());
    }
  }
  c.solver.omega = get_number(s, "omega", "solver", c.solver.omega);
  c.solver.tol_residual = get_number(s, "tol_residual", "solver", c.solver.tol_residual);
  c.solver.tol_comp = get_number(s, "tol_comp", "solver", c.solver.tol_comp);
  c.solver.max_iters = get_int(s, "max_iters", "solver", c.solver.max_iters);
  if (const json* eps = find(s, "penalty_eps")) {
    if (!eps->is_array()) throw ConfigError("solver.penalty_eps", "expected an array of numbers");
    c.solver.penalty_eps.clear();
    for (const auto& e : *eps) {
      if (!e.is_number()) throw ConfigError("solver.penalty_eps", "expected an array of numbers");
      c.solver.penalty_eps.push_back(e.get<double>());
    }
  }
  try {
    validate(c.solver);
  } catch (const std::invalid_argument& e) {
    rethrow_as_config("solver", e, {"omega", "max_iters", "penalty_eps"});
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  return json{{"n", c.grid.n},
              {"preset", c.preset},
              {"params", c.params},
              {"grid", {{"m", c.grid.m}, {"dt", c.grid.dt}, {"t0", c.grid.t0}, {"t1", c.grid.t1}}},
              {"solver",
               {{"method", to_string(c.solver.method)},
                {"omega", c.solver.omega},
                {"tol_residual", c.solver.tol_residual},
                {"tol_comp", c.solver.tol_comp},
                {"max_iters", c.solver.max_iters},
                {"penalty_eps", c.solver.penalty_eps}}}};
}

SignoriniProblem make_problem(const ExperimentConfig& config) {
  try {
    return preset(config.preset, config.params, config.grid);
  } catch (const json::exception& e) {
    throw ConfigError("params", e.what());
  } catch (const std::invalid_argument& e) {
    if (std::string(e.what()).rfind("unknown preset", 0) == 0) throw ConfigError("preset", e.what());
    throw ConfigError("params", e.what());
  }
}

// ------------------------------------------------------------ run directories

namespace {

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const std::vector<std::string> kDumps{"u.sigf", "u.sigf.json", "v.sigf", "v.sigf.json", "mask.bin"};

}  // namespace

RunFiles run_experiment(const ExperimentConfig& config, const fs::path& out) {
  const SignoriniProblem problem = make_problem(config);
  const auto start = std::chrono::steady_clock::now();
  const Run run = solve_problem(problem, config.grid, config.solver);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  fs::create_directories(out);
  write_sigf(out / "u.sigf", run.u);
  write_sigf(out / "v.sigf", run.v);
  write_bytes(out / "mask.bin", run.mask.bytes());

  json stats = json::array();
  for (const auto& s : run.stats) {
    stats.push_back({{"iterations", s.iterations},
                     {"residual", s.residual},
                     {"comp_gap", s.comp_gap},
                     {"converged", s.converged}});
  }
  json sums = json::object();
  for (const auto& name : kDumps) sums[name] = file_checksum(out / name);
  RunFiles files;
  files.dir = out;
  files.converged = run.converged;
  files.manifest = json{{"version", kVersion},
                        {"config", to_json(config)},
                        {"grid", json::parse(grid_spec_json(config.grid))},
                        {"scale", run.scale},
                        {"converged", run.converged},
                        {"stats", stats},
                        {"wall_time_s", wall},
                        {"checksums", sums}};
  std::ofstream m(out / "manifest.json");
  m << files.manifest.dump(2) << "\n";
  if (!m) throw std::runtime_error("write failed for manifest.json");
  return files;
}

Run load_run(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw std::runtime_error("no run manifest in " + dir.string());
  std::ifstream in(manifest_path);
  const json manifest = json::parse(in);
  for (const auto& [name, sum] : manifest.at("checksums").items()) {
    if (file_checksum(dir / name) != sum.get<std::string>()) {
      throw std::runtime_error("checksum mismatch for " + (dir / name).string());
    }
  }
  const ExperimentConfig config = parse_config(manifest.at("config"));
  Run run = assemble_run(make_problem(config), config.grid, config.solver, read_sigf(dir / "u.sigf"));
  if (read_bytes(dir / "mask.bin") != run.mask.bytes()) {
    throw std::runtime_error("mask.bin disagrees with u.sigf in " + dir.string());
  }
  const json& stats = manifest.at("stats");
  for (std::size_t k = 0; k < stats.size() && k < run.stats.size(); ++k) {
    run.stats[k] = {stats[k].at("iterations").get<int>(), stats[k].at("residual").get<double>(),
                    stats[k].at("comp_gap").get<double>(), stats[k].at("converged").get<bool>()};
  }
  run.converged = manifest.at("converged").get<bool>();
  return run;
}

// ------------------------------------------------------------ sweep

std::optional<double> oracle_error(const Run& run, double rho) {
  if (!run.problem.oracle) return std::nullopt;
  const Grid grid = run.grid();
  double err = 0.0;
  for (int k = 0; k < grid.slices(); ++k) {
    for (int p = 0; p < grid.nodes(); ++p) {
      if (!in_cylinder(grid, p, k, rho)) continue;
      err = std::max(err, std::abs(run.v(k, p) - run.problem.oracle->v(grid.point(p), grid.time(k))));
    }
  }
  return err;
}

std::vector<SweepRow> sweep(const ExperimentConfig& config, int levels, int threads) {
  if (levels < 2) throw ConfigError("levels", "a sweep needs at least two levels");
  auto level_row = [&config](int l) {
    ExperimentConfig c = config;
    c.grid.m = (config.grid.m - 1) * (1 << l) + 1;
    c.grid.dt = config.grid.dt * std::pow(0.25, l);
    const Run run = solve_problem(make_problem(c), c.grid, c.solver);
    SweepRow row;
    row.level = l;
    row.m = c.grid.m;
    row.dt = c.grid.dt;
    row.hx = c.grid.hx();
    row.sup_err = oracle_error(run);
    row.sup_dt = sup_dt_bound(run).sup_dt;
    row.energy_ratio = energy_ratio(run, 0.5).value;
    row.converged = run.converged;
    return row;
  };

  std::vector<SweepRow> rows(levels);
  const int batch = std::max(1, threads);
  for (int first = 0; first < levels; first += batch) {
    std::vector<std::future<SweepRow>> jobs;
    for (int l = first; l < std::min(levels, first + batch); ++l) {
      jobs.push_back(std::async(batch > 1 ? std::launch::async : std::launch::deferred, level_row, l));
    }
    for (auto& j : jobs) {
      SweepRow r = j.get();
      rows[r.level] = r;
    }
  }
  for (int l = 1; l < levels; ++l) {
    const auto& a = rows[l - 1].sup_err;
    const auto& b = rows[l].sup_err;
    if (a && b && *a > 0.0 && *b > 0.0) rows[l].order = std::log2(*a / *b);
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "level,m,hx,dt,sup_err,order,sup_dt,energy_ratio,converged\n";
  auto num = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10e", x);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    out << r.level << ',' << r.m << ',' << num(r.hx) << ',' << num(r.dt) << ',' << (r.sup_err ? num(*r.sup_err) : "")
        << ',' << (r.order ? num(*r.order) : "") << ',' << num(r.sup_dt) << ',' << num(r.energy_ratio) << ','
        << (r.converged ? 1 : 0) << '\n';
  }
  return out.str();
}

// ------------------------------------------------------------ analyses

GraphWindow default_window(const GridSpec& spec) {
  GraphWindow w;
  w.x_lo = w.y_lo = -0.75;
  w.x_hi = w.y_hi = 0.75;
  w.t_lo = spec.t1 - 0.75 * (spec.t1 - spec.t0);
  w.t_hi = spec.t1;
  return w;
}

std::optional<SpaceTimePoint> default_point(const Run& run) {
  const Grid grid = run.grid();
  const GridSpec& spec = grid.spec();
  const int n = grid.n();
  const int k = static_cast<int>(std::lround((spec.t1 - 0.25 * (spec.t1 - spec.t0) - spec.t0) / spec.dt));
  GraphWindow w = default_window(spec);
  w.t_lo = w.t_hi = grid.time(k);
  w.y_lo = w.y_hi = 0.0;
  const FreeBoundaryGraph graph = fit_graph(run, w);
  for (const auto& c : graph.columns) {
    if (c.flagged) continue;
    SpaceTimePoint p{Coord::Zero(n), grid.time(k)};
    p.x[n - 2] = c.g;
    if (n == 3) p.x[0] = c.y;
    return p;
  }
  return std::nullopt;
}

std::vector<double> default_radii(const Run& run, const SpaceTimePoint& c, bool two_sided) {
  const Grid grid = run.grid();
  const GridSpec& spec = grid.spec();
  double r = std::min(0.25, std::sqrt(std::max(0.0, c.t - spec.t0)));
  if (two_sided) r = std::min(r, std::sqrt(std::max(0.0, spec.t1 - c.t)));
  for (int a = 0; a + 1 < grid.n(); ++a) r = std::min(r, 1.0 - std::abs(c.x[a]));
  std::vector<double> radii;
  for (int i = 0;; ++i) {
    const double ri = r * std::pow(2.0, -0.5 * i);
    if (ri < 2.0 * grid.hx() * (1.0 - kEdge)) break;
    radii.push_back(ri);
  }
  return radii;
}

namespace {

json point_json(const SpaceTimePoint& p) {
  return json{{"x", std::vector<double>(p.x.data(), p.x.data() + p.x.size())}, {"t", p.t}};
}

json fit_json(const LogLogFit& f) {
  return json{{"slope", f.slope}, {"intercept", f.intercept}, {"residual", f.residual}, {"stderr_slope", f.stderr_slope}};
}

json smoothness_json(const Smoothness& s) {
  json j{{"delta", s.delta}, {"osc", s.osc}, {"floor", s.floor}, {"flat", s.flat}, {"pass", s.pass}};
  if (s.delta.size() >= 2) j["fit"] = fit_json(s.fit);
  return j;
}

}  // namespace

AnalysisResult analyze_timereg(const Run& run, const AnalysisOptions& opts) {
  AnalysisResult out;
  // h = 4 dt keeps the quotient well above the solver tolerance.
  const int shift = std::max(1, std::min(4, run.u.slices() - 3));
  const QuotientPair pair = quotients(run.u, run.f, shift);
  const SubcaloricityResult sub = subcaloricity_check(pair);
  const double threshold = -1e-6 * run.scale;
  const bool sub_pass = sub.min_residual >= threshold;
  out.data["subcaloricity"] = {{"h", pair.h},
                               {"min_residual", sub.min_residual},
                               {"min_interface", sub.min_interface},
                               {"threshold", threshold},
                               {"tested", sub.tested},
                               {"interface_nodes", sub.interface_nodes},
                               {"pass", sub_pass}};
  const DtBound b = sup_dt_bound(run);
  out.data["sup_dt"] = {{"sup_dt", b.sup_dt}, {"l2_v", b.l2_v}, {"surrogate", b.surrogate}, {"ratio", b.ratio},
                        {"finite", std::isfinite(b.sup_dt)}};
  const EnergyRatio e = energy_ratio(run, 0.5);
  out.data["energy"] = {{"ratio", e.value}, {"d2", e.d2}, {"dt", e.dt}, {"u_norm", e.u_norm},
                        {"f_norm", e.f_norm}, {"degenerate", e.degenerate}};
  out.pass = sub_pass && std::isfinite(b.sup_dt);

  const std::optional<SpaceTimePoint> c = opts.point ? opts.point : default_point(run);
  if (!c) {
    out.data["point"] = nullptr;
    out.data["note"] = "no free boundary point; decay checks skipped";
    return out;
  }
  out.data["point"] = point_json(*c);
  const std::vector<double> radii = opts.radii ? *opts.radii : default_radii(run, *c, true);
  json table = json::array();
  try {
    const HolderFit h = holder_fit(run, *c, radii);
    out.data["holder"] = {{"radii", h.radii}, {"M", h.M}, {"alpha", h.fit.slope}, {"fit", fit_json(h.fit)},
                          {"pass", h.pass}};
    out.pass = out.pass && h.pass;
    for (std::size_t i = 0; i < h.radii.size(); ++i) table.push_back({{"r", h.radii[i]}, {"M", h.M[i]}});
  } catch (const std::invalid_argument& ex) {
    out.data["holder"] = {{"skipped", ex.what()}};
  }
  const double R = radii.empty() ? 0.0 : radii.front();
  const std::vector<double> geometric{R, R / 2, R / 4};
  if (R / 4 >= 2.0 * run.grid().hx() * (1.0 - kEdge)) {
    const ModulusCheck mc = modulus_iteration_check(run, *c, 0.5, geometric);
    out.data["modulus"] = {{"radii", mc.radii}, {"omega", mc.omega}, {"tau", mc.tau}, {"C", mc.C},
                           {"theta", mc.theta}, {"pass", mc.pass}};
    out.pass = out.pass && mc.pass;
    for (std::size_t i = 0; i < mc.radii.size(); ++i) table.push_back({{"r", mc.radii[i]}, {"omega", mc.omega[i]}});
  } else {
    out.data["modulus"] = {{"skipped", "R/4 is below 2 hx"}};
  }
  out.data["table"] = table;
  return out;
}

AnalysisResult analyze_freeboundary(const Run& run, const AnalysisOptions& opts) {
  AnalysisResult out;
  const Grid grid = run.grid();
  const GraphWindow w = opts.window ? *opts.window : default_window(grid.spec());
  const FreeBoundaryGraph graph = fit_graph(run, w);
  const bool empty = std::all_of(graph.columns.begin(), graph.columns.end(),
                                 [](const GraphColumn& c) { return c.transitions == 0; });
  json table = json::array();
  for (const auto& c : graph.columns) {
    json row{{"t", c.t}, {"g", c.flagged ? json(nullptr) : json(c.g)}, {"flagged", c.flagged}};
    if (graph.n == 3) row["y"] = c.y;
    table.push_back(row);
  }
  out.data = {{"columns", graph.columns.size()}, {"flagged", graph.flagged}, {"graphical", graph.graphical},
              {"min_sep", graph.min_sep}, {"L_est", graph.L_est}, {"empty", empty}, {"hx", graph.hx}};
  if (empty) {
    out.data["note"] = "no free boundary in the window";
    out.data["table"] = table;
    return out;
  }
  out.pass = graph.graphical;
  if (graph.graphical) {
    try {
      const Smoothness s = time_smoothness(graph);
      out.data["time_smoothness"] = smoothness_json(s);
      out.pass = out.pass && s.pass;
    } catch (const std::invalid_argument& ex) {
      out.data["time_smoothness"] = {{"skipped", ex.what()}};
    }
    if (graph.n == 3) {
      try {
        const Smoothness s = space_smoothness(graph);
        out.data["space_smoothness"] = smoothness_json(s);
        out.pass = out.pass && s.pass;
      } catch (const std::invalid_argument& ex) {
        out.data["space_smoothness"] = {{"skipped", ex.what()}};
      }
    }
  }
  if (run.problem.path) {
    const auto path = [&](double, double t) { return run.problem.path(t); };
    const double err = tracking_error(graph, path);
    const double L_path = parabolic_lipschitz(columns_from(graph, path), graph.min_sep);
    out.data["path"] = {{"tracking_error", err}, {"tolerance", 2.0 * graph.hx}, {"L_path", L_path}};
    out.pass = out.pass && err <= 2.0 * graph.hx;
  }
  out.data["table"] = table;
  return out;
}

AnalysisResult analyze_blowup(const Run& run, const AnalysisOptions& opts) {
  AnalysisResult out;
  const std::optional<SpaceTimePoint> c = opts.point ? opts.point : default_point(run);
  if (!c) {
    out.data["point"] = nullptr;
    out.data["note"] = "no free boundary point; classification skipped";
    return out;
  }
  out.data["point"] = point_json(*c);
  const std::vector<double> radii = opts.radii ? *opts.radii : default_radii(run, *c, false);
  try {
    const Classification cl = classify(run, *c, radii);
    json table = json::array();
    for (const auto& s : cl.samples) table.push_back({{"r", s.r}, {"H", s.H}, {"D", s.D}, {"rotation", s.rotation}});
    out.data["verdict"] = cl.verdict == PointClass::regular ? "regular" : "inconclusive";
    out.data["distance"] = "G-weighted L2 on the reference cylinder (stand-in convergence notion)";
    out.data["slack"] = cl.slack;
    out.data["floor"] = cl.floor;
    out.data["table"] = table;
    out.pass = cl.verdict == PointClass::regular;
  } catch (const DegenerateCenter& ex) {
    out.data["verdict"] = "degenerate";
    out.data["note"] = ex.what();
    out.pass = false;
  } catch (const std::invalid_argument& ex) {
    out.data["skipped"] = ex.what();
  }
  return out;
}

AnalysisResult report(const fs::path& dir, const std::vector<std::string>& analyses, const AnalysisOptions& opts) {
  for (const auto& a : analyses) {
    if (a != "timereg" && a != "freeboundary" && a != "blowup") throw ConfigError("analyses", "unknown analysis '" + a + "'");
  }
  const Run run = load_run(dir);
  std::ifstream in(dir / "manifest.json");
  AnalysisResult out;
  out.data["manifest"] = json::parse(in);
  for (const auto& a : analyses) {
    const AnalysisResult r = a == "timereg" ? analyze_timereg(run, opts)
                             : a == "freeboundary" ? analyze_freeboundary(run, opts)
                                                   : analyze_blowup(run, opts);
    out.data[a] = r.data;
    out.data[a]["pass"] = r.pass;
    out.pass = out.pass && r.pass;
  }
  out.data["pass"] = out.pass;
  return out;
}

}  // namespace signorini
