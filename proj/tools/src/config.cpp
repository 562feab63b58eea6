#include "adot_cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace adot::cli {

namespace {

class Reader {
 public:
  Reader(std::string origin, std::set<std::string> overridden)
      : origin_(std::move(origin)), overridden_(std::move(overridden)) {}

  std::string where(const YAML::Node& node, const std::string& path) const {
    for (const auto& o : overridden_)
      if (path == o || path.rfind(o + ".", 0) == 0) return "--set " + o;
    const YAML::Mark mark = node.Mark();
    if (mark.line < 0) return origin_;
    return origin_ + ":" + std::to_string(mark.line + 1) + ":" + std::to_string(mark.column + 1);
  }

  [[noreturn]] void fail(const YAML::Node& node, const std::string& path,
                         const std::string& message) const {
    const std::string prefix = path + ": ";
    const std::string text = message.rfind(prefix, 0) == 0 ? message.substr(prefix.size()) : message;
    throw ConfigError(where(node, path) + ": " + prefix + text);
  }

  void keys(const YAML::Node& node, const std::string& path,
            std::initializer_list<const char*> allowed) const {
    if (!node.IsMap()) fail(node, path, "expected a mapping");
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      const bool known = std::any_of(allowed.begin(), allowed.end(),
                                     [&](const char* a) { return key == a; });
      if (!known) fail(kv.first, join(path, key), "unknown key");
    }
  }

  template <class T>
  T get(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, path, "expected a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, path, "cannot parse '" + node.Scalar() + "'");
    }
  }

  template <class T>
  void read(const YAML::Node& parent, const std::string& path, const char* key, T& out) const {
    const YAML::Node node = parent[key];
    if (node) out = get<T>(node, join(path, key));
  }

  double positive(const YAML::Node& parent, const std::string& path, const char* key,
                  double fallback) const {
    double v = fallback;
    read(parent, path, key, v);
    if (parent[key] && !(v > 0.0)) fail(parent[key], join(path, key), "must be > 0");
    return v;
  }

  Vector vector(const YAML::Node& node, const std::string& path) const {
    if (!node.IsSequence()) fail(node, path, "expected a list of numbers");
    Vector v(static_cast<Eigen::Index>(node.size()));
    for (std::size_t i = 0; i < node.size(); ++i)
      v(static_cast<Eigen::Index>(i)) = get<double>(node[i], path + "[" + std::to_string(i) + "]");
    return v;
  }

  Matrix matrix(const YAML::Node& node, const std::string& path) const {
    if (!node.IsSequence() || node.size() == 0) fail(node, path, "expected a list of rows");
    const auto rows = static_cast<Eigen::Index>(node.size());
    Matrix m;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Vector row = vector(node[static_cast<std::size_t>(r)], path);
      if (r == 0) m.resize(rows, row.size());
      if (row.size() != m.cols()) fail(node[static_cast<std::size_t>(r)], path, "ragged matrix");
      m.row(r) = row.transpose();
    }
    return m;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  std::string origin_;
  std::set<std::string> overridden_;
};

bool is_auto(const YAML::Node& node) { return node.IsScalar() && node.Scalar() == "auto"; }

GaussianSpec read_gaussian(const Reader& r, const YAML::Node& node, const std::string& path) {
  GaussianSpec g;
  if (!node["mean"]) r.fail(node, path, "missing 'mean'");
  g.mean = r.vector(node["mean"], path + ".mean");
  const auto d = g.mean.size();
  if (node["covariance"] && node["std"]) r.fail(node, path, "give either 'covariance' or 'std'");
  if (node["covariance"]) {
    g.covariance = r.matrix(node["covariance"], path + ".covariance");
  } else {
    const double s = r.positive(node, path, "std", 1.0);
    g.covariance = s * s * Matrix::Identity(d, d);
  }
  if (g.covariance.rows() != d || g.covariance.cols() != d)
    r.fail(node, path, "covariance must be " + std::to_string(d) + "x" + std::to_string(d));
  return g;
}

DatasetSpec read_dataset(const Reader& r, const YAML::Node& node, const std::string& path,
                         std::uint64_t default_seed) {
  if (!node.IsMap()) r.fail(node, path, "expected a mapping");
  DatasetSpec spec;
  spec.seed = default_seed;
  r.read(node, path, "seed", spec.seed);
  long long n = 0;
  if (!node["n"]) r.fail(node, path, "missing 'n'");
  n = r.get<long long>(node["n"], path + ".n");
  if (n < 1) r.fail(node["n"], path + ".n", "must be >= 1");
  spec.n = static_cast<Eigen::Index>(n);
  if (!node["kind"]) r.fail(node, path, "missing 'kind'");
  const std::string kind = r.get<std::string>(node["kind"], path + ".kind");

  if (kind == "gaussian") {
    r.keys(node, path, {"kind", "n", "seed", "mean", "covariance", "std"});
    spec.kind = read_gaussian(r, node, path);
  } else if (kind == "mixture") {
    r.keys(node, path, {"kind", "n", "seed", "components"});
    const YAML::Node comps = node["components"];
    if (!comps || !comps.IsSequence() || comps.size() == 0)
      r.fail(node, path, "'components' must be a nonempty list");
    MixtureSpec m;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const std::string cp = path + ".components[" + std::to_string(i) + "]";
      r.keys(comps[i], cp, {"weight", "mean", "covariance", "std"});
      if (!comps[i]["weight"]) r.fail(comps[i], cp, "missing 'weight'");
      m.weights.push_back(r.get<double>(comps[i]["weight"], cp + ".weight"));
      m.components.push_back(read_gaussian(r, comps[i], cp));
    }
    spec.kind = std::move(m);
  } else if (kind == "annulus") {
    r.keys(node, path, {"kind", "n", "seed", "center", "r_inner", "r_outer"});
    AnnulusSpec a;
    a.center = node["center"] ? r.vector(node["center"], path + ".center") : Vector::Zero(2);
    r.read(node, path, "r_inner", a.r_inner);
    r.read(node, path, "r_outer", a.r_outer);
    spec.kind = std::move(a);
  } else {
    r.fail(node["kind"], path + ".kind",
           "unknown dataset kind '" + kind + "' (gaussian, mixture, annulus)");
  }
  try {
    spec.validate();
  } catch (const ContractError& e) {
    r.fail(node, path, e.what());
  }
  return spec;
}

void read_features(const Reader& r, const YAML::Node& node, FeatureConfig& f) {
  if (!node) return;
  const std::string p = "features";
  r.keys(node, p, {"phi_bumps", "g_bumps", "phi_kind", "g_kind", "gauss_newton"});
  r.read(node, p, "phi_bumps", f.phi_bumps);
  r.read(node, p, "g_bumps", f.g_bumps);
  r.read(node, p, "gauss_newton", f.gauss_newton);
  for (const char* key : {"phi_kind", "g_kind"}) {
    if (!node[key] || is_auto(node[key])) continue;
    try {
      const ScaleKind kind = parse_scale_kind(r.get<std::string>(node[key], p + "." + key));
      (std::string(key) == "phi_kind" ? f.phi_kind : f.g_kind) = kind;
    } catch (const ContractError& e) {
      r.fail(node[key], p + "." + key, e.what());
    }
  }
  try {
    f.validate();
  } catch (const ContractError& e) {
    r.fail(node, p, e.what());
  }
}

void read_penalty(const Reader& r, const YAML::Node& node, PenaltyConfig& c) {
  if (!node) return;
  const std::string p = "penalty";
  r.keys(node, p, {"lambda", "epsilon", "diameter", "epsilon_floor"});
  r.read(node, p, "lambda", c.lambda);
  r.read(node, p, "epsilon_floor", c.epsilon_floor);
  if (node["epsilon"] && !is_auto(node["epsilon"])) c.epsilon = r.positive(node, p, "epsilon", 1.0);
  if (node["diameter"] && !is_auto(node["diameter"]))
    c.diameter = r.positive(node, p, "diameter", 1.0);
  try {
    c.validate();
  } catch (const ContractError& e) {
    r.fail(node, p, e.what());
  }
}

void read_solver(const Reader& r, const YAML::Node& node, SolverConfig& c) {
  if (!node) return;
  const std::string p = "solver";
  r.keys(node, p,
         {"eta0", "eta_min", "eta_max", "grow", "shrink", "tolerance", "max_iter",
          "rejection_slack", "monotone_guard", "convexity_floor", "grad_growth",
          "absolute_curvature"});
  r.read(node, p, "eta0", c.eta0);
  r.read(node, p, "eta_min", c.eta_min);
  r.read(node, p, "eta_max", c.eta_max);
  r.read(node, p, "grow", c.grow);
  r.read(node, p, "shrink", c.shrink);
  r.read(node, p, "tolerance", c.tolerance);
  r.read(node, p, "max_iter", c.max_iter);
  r.read(node, p, "rejection_slack", c.rejection_slack);
  r.read(node, p, "monotone_guard", c.monotone_guard);
  r.read(node, p, "convexity_floor", c.convexity_floor);
  r.read(node, p, "grad_growth", c.grad_growth);
  r.read(node, p, "absolute_curvature", c.absolute_curvature);
  try {
    SolverConfig check = c;
    check.penalty = PenaltyConfig{};
    check.validate();
  } catch (const ContractError& e) {
    r.fail(node, p, e.what());
  }
}

void read_kl(const Reader& r, const YAML::Node& node, AscentConfig& c) {
  if (!node) return;
  const std::string p = "kl";
  r.keys(node, p, {"eta0", "eta_min", "eta_max", "tolerance", "max_iter"});
  r.read(node, p, "eta0", c.eta0);
  r.read(node, p, "eta_min", c.eta_min);
  r.read(node, p, "eta_max", c.eta_max);
  r.read(node, p, "tolerance", c.tolerance);
  r.read(node, p, "max_iter", c.max_iter);
  if (!(c.eta_min > 0.0 && c.eta_min <= c.eta0 && c.eta0 <= c.eta_max))
    r.fail(node, p, "need 0 < eta_min <= eta0 <= eta_max");
  if (!(c.tolerance > 0.0)) r.fail(node["tolerance"], p + ".tolerance", "must be > 0");
  if (c.max_iter < 1) r.fail(node["max_iter"], p + ".max_iter", "must be >= 1");
}

void read_solve(const Reader& r, const YAML::Node& node, GlobalConfig& g) {
  if (!node) return;
  const std::string p = "solve";
  r.keys(node, p, {"steps", "max_sweeps", "sweep_tol", "pairing", "quadratic_fallback"});
  r.read(node, p, "steps", g.steps);
  r.read(node, p, "max_sweeps", g.max_sweeps);
  r.read(node, p, "sweep_tol", g.sweep_tol);
  r.read(node, p, "quadratic_fallback", g.quadratic_fallback);
  if (node["pairing"] && !is_auto(node["pairing"])) {
    try {
      g.pairing = parse_pairing(r.get<std::string>(node["pairing"], p + ".pairing"));
    } catch (const ContractError& e) {
      r.fail(node["pairing"], p + ".pairing", e.what());
    }
  }
  if (g.steps < 1) r.fail(node["steps"], p + ".steps", "must be >= 1");
  if (g.max_sweeps < 1) r.fail(node["max_sweeps"], p + ".max_sweeps", "must be >= 1");
  if (!(g.sweep_tol > 0.0)) r.fail(node["sweep_tol"], p + ".sweep_tol", "must be > 0");
}

template <class T>
std::vector<T> read_list(const Reader& r, const YAML::Node& node, const std::string& path,
                         bool allow_empty = false) {
  if (!node.IsSequence() || (!allow_empty && node.size() == 0))
    r.fail(node, path, allow_empty ? "expected a list" : "expected a nonempty list");
  std::vector<T> out;
  for (std::size_t i = 0; i < node.size(); ++i)
    out.push_back(r.get<T>(node[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

void read_benchmark(const Reader& r, const YAML::Node& node, SuiteConfig& s) {
  if (!node) return;
  const std::string p = "benchmark";
  r.keys(node, p,
         {"kind", "epsilon", "k_list", "n_list", "seeds", "n_for_k", "k_for_n", "grid_points",
          "timing"});
  if (node["kind"]) {
    const std::string kind = r.get<std::string>(node["kind"], p + ".kind");
    if (kind != "power") r.fail(node["kind"], p + ".kind", "unknown benchmark '" + kind + "' (power)");
  }
  s.epsilon = r.positive(node, p, "epsilon", s.epsilon);
  if (node["k_list"]) s.k_list = read_list<int>(r, node["k_list"], p + ".k_list", true);
  if (node["n_list"]) {
    s.n_list.clear();
    for (long long n : read_list<long long>(r, node["n_list"], p + ".n_list", true))
      s.n_list.push_back(static_cast<Eigen::Index>(n));
  }
  if (node["seeds"]) s.seeds = read_list<std::uint64_t>(r, node["seeds"], p + ".seeds");
  long long n_for_k = s.n_for_k;
  r.read(node, p, "n_for_k", n_for_k);
  s.n_for_k = static_cast<Eigen::Index>(n_for_k);
  r.read(node, p, "k_for_n", s.k_for_n);
  r.read(node, p, "grid_points", s.grid_points);
  r.read(node, p, "timing", s.timing);
  for (int k : s.k_list)
    if (k < 1) r.fail(node["k_list"], p + ".k_list", "entries must be >= 1");
  for (auto n : s.n_list)
    if (n < 2) r.fail(node["n_list"], p + ".n_list", "entries must be >= 2");
  if (s.k_list.empty() && s.n_list.empty()) r.fail(node, p, "k_list and n_list are both empty");
  if (s.n_for_k < 2) r.fail(node["n_for_k"], p + ".n_for_k", "must be >= 2");
  if (s.k_for_n < 1) r.fail(node["k_for_n"], p + ".k_for_n", "must be >= 1");
  if (s.grid_points < 2) r.fail(node["grid_points"], p + ".grid_points", "must be >= 2");
}

void read_plots(const Reader& r, const YAML::Node& node, PlotSettings& s) {
  if (!node) return;
  const std::string p = "plots";
  r.keys(node, p, {"result", "bins", "grid_points", "snapshots"});
  r.read(node, p, "result", s.result);
  r.read(node, p, "bins", s.bins);
  r.read(node, p, "grid_points", s.grid_points);
  r.read(node, p, "snapshots", s.snapshots);
  if (s.bins < 1) r.fail(node["bins"], p + ".bins", "must be >= 1");
  if (s.grid_points < 2) r.fail(node["grid_points"], p + ".grid_points", "must be >= 2");
  if (s.snapshots < 1) r.fail(node["snapshots"], p + ".snapshots", "must be >= 1");
}

void apply_override(YAML::Node& root, const std::string& path, const std::string& value) {
  if (path.empty()) throw ConfigError("--set: empty key");
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) throw ConfigError("--set " + path + ": malformed key");
    parts.push_back(part);
  }
  YAML::Node parsed;
  try {
    parsed = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ConfigError("--set " + path + ": " + e.msg);
  }
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = chain.back()[parts[i]];
    if (next && !next.IsMap()) throw ConfigError("--set " + path + ": '" + parts[i] + "' is not a section");
    chain.push_back(next);
  }
  chain.back()[parts.back()] = parsed;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin,
                       const Overrides& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ":" +
                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  std::set<std::string> overridden;
  for (const auto& [path, value] : overrides) {
    apply_override(root, path, value);
    overridden.insert(path);
  }
  const Reader r(origin, overridden);
  r.keys(root, "",
         {"seed", "out", "header", "data", "input", "solve", "features", "solver", "penalty",
          "kl", "benchmark", "plots"});

  RunConfig cfg;
  r.read(root, "", "seed", cfg.seed);
  r.read(root, "", "out", cfg.out);
  r.read(root, "", "header", cfg.header);
  cfg.global.seed = cfg.seed;

  if (const YAML::Node data = root["data"]) {
    r.keys(data, "data", {"source", "target", "power"});
    if (data["power"] && (data["source"] || data["target"]))
      r.fail(data, "data", "use either 'power' or 'source'/'target'");
    if (data["source"]) cfg.source = read_dataset(r, data["source"], "data.source", cfg.seed);
    if (data["target"]) cfg.target = read_dataset(r, data["target"], "data.target", cfg.seed + 1);
    if (cfg.source.has_value() != cfg.target.has_value())
      r.fail(data, "data", "'source' and 'target' go together");
    if (const YAML::Node pw = data["power"]) {
      r.keys(pw, "data.power", {"epsilon", "n", "seed"});
      PowerData p;
      p.seed = cfg.seed;
      p.epsilon = r.positive(pw, "data.power", "epsilon", p.epsilon);
      long long n = p.n;
      r.read(pw, "data.power", "n", n);
      if (n < 1) r.fail(pw["n"], "data.power.n", "must be >= 1");
      p.n = static_cast<Eigen::Index>(n);
      r.read(pw, "data.power", "seed", p.seed);
      cfg.power = p;
    }
  }
  if (const YAML::Node input = root["input"]) {
    r.keys(input, "input", {"source", "target"});
    r.read(input, "input", "source", cfg.source_csv);
    r.read(input, "input", "target", cfg.target_csv);
  }
  read_solve(r, root["solve"], cfg.global);
  read_features(r, root["features"], cfg.global.features);
  read_solver(r, root["solver"], cfg.global.local);
  read_penalty(r, root["penalty"], cfg.global.local.penalty);
  read_kl(r, root["kl"], cfg.global.kl);

  cfg.benchmark.k_list = {1, 2, 5, 10};
  cfg.benchmark.n_list = {25, 100, 500};
  cfg.benchmark.timing = false;
  read_benchmark(r, root["benchmark"], cfg.benchmark);
  cfg.benchmark.base = cfg.global;
  read_plots(r, root["plots"], cfg.plots);
  return cfg;
}

RunConfig load_config(const std::string& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path, overrides);
}

namespace {

YAML::Node encode(const Vector& v) {
  YAML::Node n(YAML::NodeType::Sequence);
  for (Eigen::Index i = 0; i < v.size(); ++i) n.push_back(v(i));
  n.SetStyle(YAML::EmitterStyle::Flow);
  return n;
}

YAML::Node encode(const Matrix& m) {
  YAML::Node n(YAML::NodeType::Sequence);
  for (Eigen::Index r = 0; r < m.rows(); ++r) n.push_back(encode(Vector(m.row(r).transpose())));
  n.SetStyle(YAML::EmitterStyle::Flow);
  return n;
}

YAML::Node encode(const DatasetSpec& spec) {
  YAML::Node n;
  auto gaussian = [](YAML::Node node, const GaussianSpec& g) {
    node["mean"] = encode(g.mean);
    node["covariance"] = encode(g.covariance);
  };
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, GaussianSpec>) {
          n["kind"] = "gaussian";
          gaussian(n, k);
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          n["kind"] = "mixture";
          for (std::size_t i = 0; i < k.components.size(); ++i) {
            YAML::Node c;
            c["weight"] = k.weights[i];
            gaussian(c, k.components[i]);
            n["components"].push_back(c);
          }
        } else if constexpr (std::is_same_v<T, AnnulusSpec>) {
          n["kind"] = "annulus";
          n["center"] = encode(k.center);
          n["r_inner"] = k.r_inner;
          n["r_outer"] = k.r_outer;
        } else {
          n["kind"] = "power";
          n["epsilon"] = k.epsilon;
        }
      },
      spec.kind);
  n["n"] = static_cast<long long>(spec.n);
  n["seed"] = spec.seed;
  return n;
}

}  // namespace

std::string dump_config(const RunConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  YAML::Node root;
  root["seed"] = cfg.seed;
  root["out"] = cfg.out;
  root["header"] = cfg.header;
  if (cfg.source) root["data"]["source"] = encode(*cfg.source);
  if (cfg.target) root["data"]["target"] = encode(*cfg.target);
  if (cfg.power) {
    root["data"]["power"]["epsilon"] = cfg.power->epsilon;
    root["data"]["power"]["n"] = static_cast<long long>(cfg.power->n);
    root["data"]["power"]["seed"] = cfg.power->seed;
  }
  if (!cfg.source_csv.empty()) root["input"]["source"] = cfg.source_csv;
  if (!cfg.target_csv.empty()) root["input"]["target"] = cfg.target_csv;

  const GlobalConfig& g = cfg.global;
  root["solve"]["steps"] = g.steps;
  root["solve"]["max_sweeps"] = g.max_sweeps;
  root["solve"]["sweep_tol"] = g.sweep_tol;
  root["solve"]["pairing"] = g.pairing ? std::string(to_string(*g.pairing)) : std::string("auto");
  root["solve"]["quadratic_fallback"] = g.quadratic_fallback;

  const FeatureConfig& f = g.features;
  root["features"]["phi_bumps"] = f.phi_bumps;
  root["features"]["g_bumps"] = f.g_bumps;
  root["features"]["phi_kind"] = f.phi_kind ? std::string(to_string(*f.phi_kind)) : std::string("auto");
  root["features"]["g_kind"] = f.g_kind ? std::string(to_string(*f.g_kind)) : std::string("auto");
  root["features"]["gauss_newton"] = f.gauss_newton;

  const SolverConfig& s = g.local;
  YAML::Node solver = root["solver"];
  solver["eta0"] = s.eta0;
  solver["eta_min"] = s.eta_min;
  solver["eta_max"] = s.eta_max;
  solver["grow"] = s.grow;
  solver["shrink"] = s.shrink;
  solver["tolerance"] = s.tolerance;
  solver["max_iter"] = s.max_iter;
  solver["rejection_slack"] = s.rejection_slack;
  solver["monotone_guard"] = s.monotone_guard;
  solver["convexity_floor"] = s.convexity_floor;
  solver["grad_growth"] = s.grad_growth;
  solver["absolute_curvature"] = s.absolute_curvature;

  const PenaltyConfig& p = s.penalty;
  root["penalty"]["lambda"] = p.lambda;
  root["penalty"]["epsilon"] = p.epsilon ? YAML::Node(*p.epsilon) : YAML::Node("auto");
  root["penalty"]["diameter"] = p.diameter ? YAML::Node(*p.diameter) : YAML::Node("auto");
  root["penalty"]["epsilon_floor"] = p.epsilon_floor;

  root["kl"]["eta0"] = g.kl.eta0;
  root["kl"]["eta_min"] = g.kl.eta_min;
  root["kl"]["eta_max"] = g.kl.eta_max;
  root["kl"]["tolerance"] = g.kl.tolerance;
  root["kl"]["max_iter"] = g.kl.max_iter;

  const SuiteConfig& b = cfg.benchmark;
  YAML::Node bench = root["benchmark"];
  bench["kind"] = "power";
  bench["epsilon"] = b.epsilon;
  bench["k_list"] = YAML::Node(YAML::NodeType::Sequence);
  for (int k : b.k_list) bench["k_list"].push_back(k);
  bench["n_list"] = YAML::Node(YAML::NodeType::Sequence);
  for (auto n : b.n_list) bench["n_list"].push_back(static_cast<long long>(n));
  bench["seeds"] = YAML::Node(YAML::NodeType::Sequence);
  for (auto seed : b.seeds) bench["seeds"].push_back(seed);
  for (const char* key : {"k_list", "n_list", "seeds"}) bench[key].SetStyle(YAML::EmitterStyle::Flow);
  bench["n_for_k"] = static_cast<long long>(b.n_for_k);
  bench["k_for_n"] = b.k_for_n;
  bench["grid_points"] = b.grid_points;
  bench["timing"] = b.timing;

  root["plots"]["result"] = cfg.plots.result;
  root["plots"]["bins"] = cfg.plots.bins;
  root["plots"]["grid_points"] = cfg.plots.grid_points;
  root["plots"]["snapshots"] = cfg.plots.snapshots;
  out << root;
  return std::string(out.c_str()) + "\n";
}

}  // namespace adot::cli
