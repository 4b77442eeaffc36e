#include "rtd/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

namespace rtd {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string to_string(Engine e) {
  switch (e) {
    case Engine::Direct: return "direct";
    case Engine::Oma: return "oma";
    case Engine::Reference: return "reference";
  }
  return "oma";
}

Engine engine_from_string(const std::string& name) {
  if (name == "direct") return Engine::Direct;
  if (name == "oma") return Engine::Oma;
  if (name == "reference") return Engine::Reference;
  throw ConfigError("unknown engine '" + name + "' (expected direct, oma or reference)");
}

DeviceSetup RunConfig::device_setup() const {
  DeviceSetup d;
  d.params.relative_mass = physics.relative_mass;
  d.params.relative_permittivity = physics.relative_permittivity;
  d.params.temperature = physics.temperature;
  d.params.fermi_level = units::joule_to_ev(physics.fermi_level);
  const auto& g = geometry;
  d.geom = {g.L, g.a1, g.a2, g.a3, g.b3, g.b2, g.b1, g.v0, units::per_m3_to_per_nm3(doping.nD1),
            units::per_m3_to_per_nm3(doping.nD2)};
  d.grid = SpatialGrid(mesh.J, g.L);
  d.kM = mesh.kM;
  return d;
}

BiasSchedule RunConfig::bias_schedule() const {
  BiasSchedule b;
  b.initial = bias.initial;
  b.final = bias.final;
  b.ramp_duration = units::seconds_to_fs(bias.t0);
  b.mode = bias_mode_from_string(bias.mode);
  return b;
}

int RunConfig::steps() const { return static_cast<int>(std::llround(mesh.final_time / mesh.dt)); }

namespace {

PhaseRule phase_rule_from_string(const std::string& name) {
  if (name == "cayley") return PhaseRule::Cayley;
  if (name == "exact") return PhaseRule::Exact;
  throw ConfigError("transient.phase_rule: unknown rule '" + name + "' (expected cayley or exact)");
}

}  // namespace

void RunConfig::validate() const {
  try {
    bias_mode_from_string(bias.mode);
  } catch (const ModelError&) {
    throw ConfigError("bias.mode: unknown mode '" + bias.mode + "' (expected step, cubic-ramp or constant)");
  }
  phase_rule_from_string(transient.phase_rule);
  if (mesh.J < 2) throw ConfigError("mesh.J: at least 2 intervals required");
  try {
    const DeviceSetup d = device_setup();
    d.params.validate();
    d.geom.validate();
    Grids g;
    g.space = d.grid;
    g.P = mesh.P;
    g.P_coarse = mesh.P_coarse;
    g.kM = d.cutoff();
    g.dt = units::seconds_to_fs(mesh.dt);
    g.validate(d.params);
  } catch (const ModelError& e) {
    throw ConfigError(std::string("invalid device: ") + e.what());
  }
  if (mesh.P_stationary < 1) throw ConfigError("mesh.P_stationary must be positive");
  if (!(mesh.final_time >= mesh.dt)) throw ConfigError("mesh.final_time must be at least one time step");
  if (stationary.max_iterations < 1 || stationary.initial_state_max_iterations < 1) {
    throw ConfigError("stationary: iteration caps must be positive");
  }
  if (!(stationary.tolerance > 0)) throw ConfigError("stationary.tolerance must be positive");
  if (stationary.direct_base_intervals < 1 || stationary.reference_intervals < 1) {
    throw ConfigError("stationary: frequency intervals must be positive");
  }
  if (stationary.points_per_halfwidth < 1 || !(stationary.grading > 1)) {
    throw ConfigError("stationary: refinement needs points_per_halfwidth >= 1 and grading > 1");
  }
  if (transient.record_every < 1) throw ConfigError("transient.record_every must be positive");
  if (transient.snapshots < 0) throw ConfigError("transient.snapshots must be non-negative");
}

// ---------------------------------------------------------------------------
// JSON

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  const auto& g = c.geometry;
  j["geometry"] = {{"L", g.L},   {"a1", g.a1}, {"a2", g.a2}, {"a3", g.a3},
                   {"b3", g.b3}, {"b2", g.b2}, {"b1", g.b1}, {"v0", g.v0}};
  j["physics"] = {{"relative_mass", c.physics.relative_mass},
                  {"relative_permittivity", c.physics.relative_permittivity},
                  {"temperature", c.physics.temperature},
                  {"fermi_level", c.physics.fermi_level}};
  j["doping"] = {{"nD1", c.doping.nD1}, {"nD2", c.doping.nD2}};
  j["mesh"] = {{"J", c.mesh.J},   {"P_stationary", c.mesh.P_stationary}, {"P", c.mesh.P},
               {"P_coarse", c.mesh.P_coarse}, {"kM", c.mesh.kM},     {"dt", c.mesh.dt},
               {"final_time", c.mesh.final_time}};
  j["bias"] = {{"mode", c.bias.mode}, {"initial", c.bias.initial}, {"final", c.bias.final}, {"t0", c.bias.t0}};
  j["engine"] = to_string(c.engine);
  const auto& s = c.stationary;
  j["stationary"] = {{"tolerance", s.tolerance},
                     {"max_iterations", s.max_iterations},
                     {"v_ref", s.v_ref},
                     {"direct_base_intervals", s.direct_base_intervals},
                     {"reference_intervals", s.reference_intervals},
                     {"points_per_halfwidth", s.points_per_halfwidth},
                     {"grading", s.grading},
                     {"initial_state_max_iterations", s.initial_state_max_iterations}};
  j["transient"] = {{"record_every", c.transient.record_every},
                    {"scan_times", c.transient.scan_times},
                    {"snapshots", c.transient.snapshots},
                    {"phase_rule", c.transient.phase_rule}};
  j["output"] = c.output;
  j["cache"] = c.cache;
  return j;
}

namespace {

void convert(const json& v, const std::string& path, double& out) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  out = v.get<double>();
}

void convert(const json& v, const std::string& path, int& out) {
  if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
  const auto x = v.get<long long>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ConfigError(path + ": integer out of range");
  }
  out = static_cast<int>(x);
}

void convert(const json& v, const std::string& path, std::string& out) {
  if (!v.is_string()) throw ConfigError(path + ": expected a string");
  out = v.get<std::string>();
}

void convert(const json& v, const std::string& path, std::vector<double>& out) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
  out.clear();
  for (std::size_t i = 0; i < v.size(); ++i) {
    double x = 0.0;
    convert(v[i], path + "[" + std::to_string(i) + "]", x);
    out.push_back(x);
  }
}

// Reads the keys of one object and rejects the ones nobody asked for.
class Block {
 public:
  Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError((path_.empty() ? "config" : path_) + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    known_.emplace_back(key);
    if (auto it = j_.find(key); it != j_.end()) convert(*it, join(key), out);
  }

  template <class F>
  void block(const char* key, F&& read) {
    known_.emplace_back(key);
    if (auto it = j_.find(key); it != j_.end()) {
      Block b(*it, join(key));
      read(b);
      b.finish();
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::find(known_.begin(), known_.end(), it.key()) == known_.end()) {
        throw ConfigError("unknown key '" + join(it.key()) + "'");
      }
    }
  }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::vector<std::string> known_;
};

}  // namespace

RunConfig config_from_json(const json& j) {
  RunConfig c;
  Block root(j, "");
  root.block("geometry", [&](Block& b) {
    auto& g = c.geometry;
    b.get("L", g.L);
    b.get("a1", g.a1);
    b.get("a2", g.a2);
    b.get("a3", g.a3);
    b.get("b3", g.b3);
    b.get("b2", g.b2);
    b.get("b1", g.b1);
    b.get("v0", g.v0);
  });
  root.block("physics", [&](Block& b) {
    b.get("relative_mass", c.physics.relative_mass);
    b.get("relative_permittivity", c.physics.relative_permittivity);
    b.get("temperature", c.physics.temperature);
    b.get("fermi_level", c.physics.fermi_level);
  });
  root.block("doping", [&](Block& b) {
    b.get("nD1", c.doping.nD1);
    b.get("nD2", c.doping.nD2);
  });
  root.block("mesh", [&](Block& b) {
    b.get("J", c.mesh.J);
    b.get("P_stationary", c.mesh.P_stationary);
    b.get("P", c.mesh.P);
    b.get("P_coarse", c.mesh.P_coarse);
    b.get("kM", c.mesh.kM);
    b.get("dt", c.mesh.dt);
    b.get("final_time", c.mesh.final_time);
  });
  root.block("bias", [&](Block& b) {
    b.get("mode", c.bias.mode);
    b.get("initial", c.bias.initial);
    b.get("final", c.bias.final);
    b.get("t0", c.bias.t0);
  });
  std::string engine = to_string(c.engine);
  root.get("engine", engine);
  c.engine = engine_from_string(engine);
  root.block("stationary", [&](Block& b) {
    auto& s = c.stationary;
    b.get("tolerance", s.tolerance);
    b.get("max_iterations", s.max_iterations);
    b.get("v_ref", s.v_ref);
    b.get("direct_base_intervals", s.direct_base_intervals);
    b.get("reference_intervals", s.reference_intervals);
    b.get("points_per_halfwidth", s.points_per_halfwidth);
    b.get("grading", s.grading);
    b.get("initial_state_max_iterations", s.initial_state_max_iterations);
  });
  root.block("transient", [&](Block& b) {
    b.get("record_every", c.transient.record_every);
    b.get("scan_times", c.transient.scan_times);
    b.get("snapshots", c.transient.snapshots);
    b.get("phase_rule", c.transient.phase_rule);
  });
  root.get("output", c.output);
  root.get("cache", c.cache);
  root.finish();
  c.validate();
  return c;
}

RunConfig ingest_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  // a manifest carries its config under "config"
  if (j.is_object() && j.contains("config") && j.contains("kind")) return config_from_json(j["config"]);
  return config_from_json(j);
}

void write_config(const RunConfig& cfg, const fs::path& path) {
  std::ofstream out(path);
  out << to_json(cfg).dump(2) << "\n";
}

std::string config_hash(const RunConfig& cfg) {
  const std::string s = to_json(cfg).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// stationary

ResonanceRow resonance_row(const DeviceSetup& dev, std::span<const double> v, double bias, int gummel_iterations,
                           const NewtonOptions& newton) {
  const RealField q = dev.total_potential(v, bias);
  const DirichletState d = dirichlet_ground_state(dev.params, dev.grid, q, dev.geom.a2, dev.geom.b2);
  const Resonance r = first_resonance(dev.params, dev.grid, q, dev.geom.a2, dev.geom.b2, newton);
  return {bias, gummel_iterations, d.energy, r.energy(), r.width(), r.iterations};
}

namespace {

// Only what determines the reference solution enters its cache key.
std::string reference_key(const RunConfig& cfg, double bias) {
  RunConfig k;
  k.geometry = cfg.geometry;
  k.physics = cfg.physics;
  k.doping = cfg.doping;
  k.mesh.J = cfg.mesh.J;
  k.mesh.kM = cfg.mesh.kM;
  k.stationary.tolerance = cfg.stationary.tolerance;
  k.stationary.v_ref = cfg.stationary.v_ref;
  k.stationary.reference_intervals = cfg.stationary.reference_intervals;
  k.engine = Engine::Reference;
  k.output.clear();
  k.cache.clear();
  char b[32];
  std::snprintf(b, sizeof b, "%a", bias);
  return config_hash(k) + "-" + b;
}

json row_json(const ResonanceRow& r) {
  return {{"bias", r.bias},
          {"gummel_iterations", r.gummel_iterations},
          {"dirichlet_energy", r.dirichlet_energy},
          {"energy", r.energy},
          {"width", r.width},
          {"newton_iterations", r.newton_iterations}};
}

ResonanceRow row_from_json(const json& j) {
  return {j.at("bias").get<double>(),   j.at("gummel_iterations").get<int>(), j.at("dirichlet_energy").get<double>(),
          j.at("energy").get<double>(), j.at("width").get<double>(),          j.at("newton_iterations").get<int>()};
}

std::optional<StationaryArtifacts> load_cached(const RunConfig& cfg, const fs::path& file) {
  std::ifstream in(file);
  if (!in) return std::nullopt;
  try {
    const json j = json::parse(in);
    StationaryArtifacts a;
    a.config = cfg;
    a.bias = j.at("bias").get<double>();
    a.grid = cfg.device_setup().grid;
    a.potential = j.at("potential").get<RealField>();
    a.density = j.at("density").get<RealField>();
    a.trace = j.at("trace").get<std::vector<double>>();
    a.converged = j.at("converged").get<bool>();
    a.row = row_from_json(j.at("resonance"));
    a.frequency_points = j.at("frequency_points").get<int>();
    a.schrodinger_solves = j.at("schrodinger_solves").get<long long>();
    a.wall_seconds = j.at("wall_seconds").get<double>();
    a.from_cache = true;
    if (static_cast<int>(a.potential.size()) != a.grid.nodes()) return std::nullopt;
    return a;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

void store_cached(const StationaryArtifacts& a, const fs::path& file) {
  fs::create_directories(file.parent_path());
  json j = {{"bias", a.bias},
            {"potential", a.potential},
            {"density", a.density},
            {"trace", a.trace},
            {"converged", a.converged},
            {"resonance", row_json(a.row)},
            {"frequency_points", a.frequency_points},
            {"schrodinger_solves", a.schrodinger_solves},
            {"wall_seconds", a.wall_seconds}};
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << j.dump();
  }
  fs::rename(tmp, file);
}

}  // namespace

StationaryArtifacts run_stationary(const RunConfig& cfg, const StationaryRequest& req) {
  cfg.validate();
  const DeviceSetup dev = cfg.device_setup();
  const bool reference = cfg.engine == Engine::Reference && !req.uniform_intervals && !req.oma_intervals;
  fs::path cache_file;
  if (reference && !cfg.cache.empty()) {
    cache_file = fs::path(cfg.cache) / ("reference-" + reference_key(cfg, req.bias) + ".json");
    if (auto hit = load_cached(cfg, cache_file)) return *hit;
  }

  StationaryArtifacts a;
  a.config = cfg;
  a.bias = req.bias;
  a.grid = dev.grid;
  const RealField nd = doping_profile(dev.geom, dev.grid);
  RealField v0 = req.warm_start ? *req.warm_start : RealField(dev.grid.nodes(), 0.0);
  if (static_cast<int>(v0.size()) != dev.grid.nodes()) {
    throw ConfigError("warm start has " + std::to_string(v0.size()) + " nodes, grid has " +
                      std::to_string(dev.grid.nodes()));
  }
  const bool use_oma = req.oma_intervals || (cfg.engine == Engine::Oma && !req.uniform_intervals);
  // a cold OMA start under bias can lock onto a spurious bound state; continue from zero bias
  if (use_oma && !req.warm_start && req.bias != 0.0) {
    StationaryRequest zero = req;
    zero.bias = 0.0;
    const StationaryArtifacts z = run_stationary(cfg, zero);
    v0 = z.potential;
    a.continued_from_zero_bias = true;
  }
  GummelOptions go;
  go.tolerance = cfg.stationary.tolerance;
  go.max_iterations = req.max_iterations.value_or(cfg.stationary.max_iterations);
  go.v_ref = cfg.stationary.v_ref;

  const auto start = std::chrono::steady_clock::now();
  GummelState st;
  if (use_oma) {
    OmaEngine e(dev, req.bias, req.oma_intervals.value_or(cfg.mesh.P_stationary));
    st = gummel_loop(dev.params, dev.grid, nd, std::ref(e), std::move(v0), go);
    a.frequency_points = static_cast<int>(e.last().mesh.size());
    a.schrodinger_solves = e.schrodinger_solves();
    a.newton_iterations = e.newton_history();
  } else {
    DirectOptions o;
    o.rule.points_per_halfwidth = cfg.stationary.points_per_halfwidth;
    o.rule.grading = cfg.stationary.grading;
    if (req.uniform_intervals) {
      o.base_intervals = *req.uniform_intervals;
      o.refine = false;
    } else if (cfg.engine == Engine::Reference) {
      o.base_intervals = cfg.stationary.reference_intervals;
      o.refine = false;
    } else {
      o.base_intervals = cfg.stationary.direct_base_intervals;
      o.refine = true;
    }
    DirectEngine e(dev, req.bias, o);
    st = gummel_loop(dev.params, dev.grid, nd, std::ref(e), std::move(v0), go);
    a.frequency_points = e.point_history().empty() ? 0 : e.point_history().back();
    a.schrodinger_solves = e.schrodinger_solves();
  }
  a.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  a.potential = std::move(st.potential);
  a.density = std::move(st.density);
  a.trace = std::move(st.errors);
  a.converged = st.converged;
  a.row = resonance_row(dev, a.potential, req.bias, st.iterations);
  if (!cache_file.empty()) store_cached(a, cache_file);
  return a;
}

StationaryArtifacts run_stationary(const RunConfig& cfg) {
  StationaryRequest req;
  req.bias = cfg.bias.initial;
  return run_stationary(cfg, req);
}

// ---------------------------------------------------------------------------
// transient

TransientSetup transient_setup(const RunConfig& cfg) {
  cfg.validate();
  TransientSetup ts;
  ts.device = cfg.device_setup();
  ts.bias = cfg.bias_schedule();
  ts.dt = units::seconds_to_fs(cfg.mesh.dt);
  ts.steps = cfg.steps();
  ts.P = cfg.mesh.P;
  ts.P_coarse = cfg.mesh.P_coarse;
  ts.phase = phase_rule_from_string(cfg.transient.phase_rule);
  ts.v_ref = cfg.stationary.v_ref;
  return ts;
}

std::vector<int> scan_levels(const RunConfig& cfg) {
  const int n = cfg.steps();
  std::vector<int> out;
  for (double t : cfg.transient.scan_times) {
    out.push_back(std::clamp(static_cast<int>(std::llround(t / cfg.mesh.dt)), 1, n));
  }
  for (int i = 1; i <= cfg.transient.snapshots; ++i) {
    out.push_back(std::max(1, static_cast<int>((static_cast<long long>(i) * n) / cfg.transient.snapshots)));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double relative_l2(std::span<const double> a, std::span<const double> ref) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    num += (a[j] - ref[j]) * (a[j] - ref[j]);
    den += ref[j] * ref[j];
  }
  return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

TransientArtifacts run_transient(const RunConfig& cfg, const RealField* warm_start,
                                 const std::function<void(const TransientRecord&)>& progress) {
  const TransientSetup ts = transient_setup(cfg);
  const bool direct = cfg.engine != Engine::Oma;
  StationaryRequest req;
  req.bias = ts.bias.initial;
  req.warm_start = warm_start;
  if (direct) {
    req.uniform_intervals = ts.P;
    req.max_iterations = cfg.stationary.initial_state_max_iterations;
  } else {
    req.oma_intervals = ts.P;
  }
  TransientArtifacts out;
  out.config = cfg;
  out.grid = ts.device.grid;
  out.initial_state = run_stationary(cfg, req);
  req.bias = bias_at(ts.bias, std::numeric_limits<double>::max());
  req.warm_start = &out.initial_state.potential;
  out.asymptotic_state = run_stationary(cfg, req);

  std::unique_ptr<TransientEngine> engine;
  if (direct) {
    engine = std::make_unique<DirectTransient>(ts, out.initial_state.potential);
  } else {
    engine = std::make_unique<OmaTransient>(ts, out.initial_state.potential);
  }
  out.initial_density_distance = 100.0 * relative_l2(engine->density(), out.initial_state.density);

  TransientObserver obs;
  obs.reference_density = &out.asymptotic_state.density;
  obs.scan_steps = scan_levels(cfg);
  obs.record_every = cfg.transient.record_every;
  obs.on_record = progress;
  TransientResult res = run_transient(ts, *engine, out.initial_state.potential, obs);
  out.initial_potential = out.initial_state.potential;
  out.final_potential = std::move(res.potential);
  out.final_density = std::move(res.density);
  out.series = std::move(res.series);
  out.scans = std::move(res.scans);
  out.schrodinger_solves = res.solves;
  out.solves_per_step = res.solves / ts.steps;
  out.wall_seconds = res.wall_seconds;
  return out;
}

// ---------------------------------------------------------------------------
// artifacts

namespace {

class Table {
 public:
  Table(const fs::path& file, std::initializer_list<const char*> columns) : out_(file) {
    if (!out_) throw ConfigError("cannot write " + file.string());
    bool first = true;
    for (const char* c : columns) {
      out_ << (first ? "" : "\t") << c;
      first = false;
    }
    out_ << "\n";
  }

  Table& operator<<(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17e", x);
    put(buf);
    return *this;
  }
  Table& operator<<(int x) {
    put(std::to_string(x));
    return *this;
  }
  Table& operator<<(long long x) {
    put(std::to_string(x));
    return *this;
  }
  void end() {
    out_ << "\n";
    fresh_ = true;
  }

 private:
  void put(const std::string& s) {
    out_ << (fresh_ ? "" : "\t") << s;
    fresh_ = false;
  }

  std::ofstream out_;
  bool fresh_ = true;
};

void write_json(const ordered_json& j, const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write " + file.string());
  out << j.dump(2) << "\n";
}

void write_trace(const std::vector<double>& trace, const fs::path& file) {
  Table t(file, {"iteration", "relative_change"});
  for (std::size_t l = 0; l < trace.size(); ++l) {
    t << static_cast<int>(l + 1) << trace[l];
    t.end();
  }
}

void write_resonance(const ResonanceRow& r, const fs::path& file) {
  Table t(file, {"bias_eV", "gummel_iterations", "dirichlet_energy_eV", "energy_eV", "width_eV", "width_over_energy",
                 "newton_iterations"});
  t << r.bias << r.gummel_iterations << r.dirichlet_energy << r.energy << r.width << r.width / r.energy
    << r.newton_iterations;
  t.end();
}

ordered_json stationary_summary(const StationaryArtifacts& a) {
  ordered_json j;
  j["bias"] = a.bias;
  j["converged"] = a.converged;
  j["gummel_iterations"] = a.row.gummel_iterations;
  j["resonance"] = {{"dirichlet_energy", a.row.dirichlet_energy},
                    {"energy", a.row.energy},
                    {"width", a.row.width},
                    {"width_over_energy", a.row.width / a.row.energy},
                    {"newton_iterations", a.row.newton_iterations}};
  j["counters"] = {{"frequency_points", a.frequency_points},
                   {"schrodinger_solves", a.schrodinger_solves},
                   {"newton_iterations_per_gummel_iteration", a.newton_iterations}};
  j["wall_seconds"] = a.wall_seconds;
  j["from_cache"] = a.from_cache;
  j["continued_from_zero_bias"] = a.continued_from_zero_bias;
  return j;
}

std::string time_label(double t_fs) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t_fs);
  return buf;
}

}  // namespace

void emit_artifacts(const StationaryArtifacts& a, const fs::path& dir) {
  fs::create_directories(dir);
  const DeviceSetup dev = a.config.device_setup();
  const RealField q = dev.total_potential(a.potential, a.bias);
  const RealField nd = doping_profile(dev.geom, dev.grid);
  {
    Table t(dir / "potential.tsv", {"x_nm", "V_eV", "Q_eV"});
    for (int j = 0; j <= a.grid.J; ++j) {
      t << a.grid.x(j) << a.potential[j] << q[j];
      t.end();
    }
  }
  {
    Table t(dir / "density.tsv", {"x_nm", "n_per_nm3", "nD_per_nm3"});
    for (int j = 0; j <= a.grid.J; ++j) {
      t << a.grid.x(j) << a.density[j] << nd[j];
      t.end();
    }
  }
  write_trace(a.trace, dir / "trace.tsv");
  write_resonance(a.row, dir / "resonance.tsv");
  ordered_json m;
  m["kind"] = "stationary";
  m["config"] = to_json(a.config);
  m["config_hash"] = config_hash(a.config);
  m["result"] = stationary_summary(a);
  write_json(m, dir / "manifest.json");
}

void emit_artifacts(const TransientArtifacts& a, const fs::path& dir) {
  fs::create_directories(dir);
  {
    Table t(dir / "potential.tsv", {"x_nm", "V_eV", "V_initial_eV"});
    for (int j = 0; j <= a.grid.J; ++j) {
      t << a.grid.x(j) << a.final_potential[j] << a.initial_potential[j];
      t.end();
    }
  }
  {
    Table t(dir / "density.tsv", {"x_nm", "n_per_nm3", "n_initial_per_nm3", "n_asymptotic_per_nm3"});
    for (int j = 0; j <= a.grid.J; ++j) {
      t << a.grid.x(j) << a.final_density[j] << a.initial_state.density[j] << a.asymptotic_state.density[j];
      t.end();
    }
  }
  write_trace(a.initial_state.trace, dir / "trace.tsv");
  {
    Table t(dir / "timeseries.tsv", {"step", "t_fs", "bias_eV", "well_charge_per_nm2", "distance_percent", "energy_eV",
                                     "width_eV", "well_norm_v", "cross_term", "phase_residual"});
    for (const auto& r : a.series) {
      t << r.l << r.t << r.bias << r.charge << r.distance << r.energy << r.width << r.well_norm_v << r.cross_term
        << r.mu_residual;
      t.end();
    }
  }
  ordered_json scans = ordered_json::array();
  for (const auto& s : a.scans) {
    const std::string name = "kscan_" + time_label(s.t) + ".tsv";
    Table t(dir / name, {"k_per_nm", "log_well_charge", "log_theta_part", "log_lambda_part"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t p = 0; p < s.k.size(); ++p) {
      t << s.k[p] << s.C[p] << (s.C_theta.empty() ? nan : s.C_theta[p]) << (s.C_lambda.empty() ? nan : s.C_lambda[p]);
      t.end();
    }
    scans.push_back({{"file", name}, {"step", s.l}, {"t_fs", s.t}, {"energy", s.energy}, {"k_minus", s.k_minus},
                     {"k_plus", s.k_plus}});
  }
  ordered_json m;
  m["kind"] = "transient";
  m["config"] = to_json(a.config);
  m["config_hash"] = config_hash(a.config);
  m["initial_state"] = stationary_summary(a.initial_state);
  m["asymptotic_state"] = stationary_summary(a.asymptotic_state);
  m["result"] = {{"steps", a.config.steps()},
                 {"schrodinger_solves", a.schrodinger_solves},
                 {"solves_per_step", a.solves_per_step},
                 {"wall_seconds", a.wall_seconds},
                 {"initial_density_distance_percent", a.initial_density_distance},
                 {"scans", scans}};
  write_json(m, dir / "manifest.json");
}

RealField load_potential(const fs::path& dir) {
  const fs::path file = dir / "potential.tsv";
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read " + file.string());
  std::string line;
  std::getline(in, line);
  RealField v;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    double x = 0.0, value = 0.0;
    if (!(row >> x >> value)) throw ConfigError(file.string() + ": malformed row '" + line + "'");
    v.push_back(value);
  }
  return v;
}

}  // namespace rtd
