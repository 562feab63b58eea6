#include "adot_cli/commands.hpp"

#include "adot/evaluation.hpp"
#include "adot/random.hpp"
#include "adot_cli/io.hpp"
#include "adot_cli/result.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace adot::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int threads_from_env() {
  const char* raw = std::getenv("ADOT_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (*end != '\0' || v < 0) throw IoError("ADOT_THREADS must be a non-negative integer");
  return static_cast<int>(v);
}

namespace {

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out) / name).string();
}

void make_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec || !fs::is_directory(cfg.out)) throw IoError(cfg.out + ": cannot create output directory");
}

json vec(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json gaussian_json(const GaussianSpec& g) {
  json cov = json::array();
  for (Eigen::Index r = 0; r < g.covariance.rows(); ++r) cov.push_back(vec(g.covariance.row(r).transpose()));
  return {{"mean", vec(g.mean)}, {"covariance", cov}};
}

json spec_json(const DatasetSpec& spec) {
  json out = std::visit(
      [](const auto& k) -> json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, GaussianSpec>) {
          json j = gaussian_json(k);
          j["kind"] = "gaussian";
          return j;
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          json comps = json::array();
          for (std::size_t i = 0; i < k.components.size(); ++i) {
            json c = gaussian_json(k.components[i]);
            c["weight"] = k.weights[i];
            comps.push_back(c);
          }
          return {{"kind", "mixture"}, {"components", comps}};
        } else if constexpr (std::is_same_v<T, AnnulusSpec>) {
          return {{"kind", "annulus"}, {"center", vec(k.center)}, {"r_inner", k.r_inner},
                  {"r_outer", k.r_outer}};
        } else {
          return {{"kind", "power_source"}, {"epsilon", k.epsilon}};
        }
      },
      spec.kind);
  out["n"] = spec.n;
  out["seed"] = spec.seed;
  return out;
}

json provenance() {
  return {{"format_version", kFormatVersion},
          {"generator", {{"name", "adot"}, {"version", kGeneratorVersion}}},
          {"rng", {{"name", kRngName}, {"version", kRngVersion}}}};
}

void write_json(const std::string& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

struct Inputs {
  SampleSet x;
  SampleSet y;
  std::string source_path;
  std::string target_path;
};

bool has_generated(const RunConfig& cfg) { return cfg.power.has_value() || cfg.source.has_value(); }

/// Generates the configured datasets, writes them with a metadata sidecar.
Inputs generate_inputs(const RunConfig& cfg) {
  Inputs in;
  json meta = provenance();
  meta["seed"] = cfg.seed;
  if (cfg.power) {
    const PowerPair pair = power_pair(cfg.power->n, cfg.power->epsilon, cfg.power->seed);
    in.x = pair.x;
    in.y = pair.y;
    meta["datasets"]["source"] = spec_json(DatasetSpec{PowerPairSpec{cfg.power->epsilon}, cfg.power->n, cfg.power->seed});
    meta["datasets"]["target"] = {{"kind", "power_image"}, {"epsilon", cfg.power->epsilon},
                                  {"of", "source"}};
  } else {
    in.x = generate(*cfg.source);
    in.y = generate(*cfg.target);
    meta["datasets"]["source"] = spec_json(*cfg.source);
    meta["datasets"]["target"] = spec_json(*cfg.target);
  }
  make_out_dir(cfg);
  in.source_path = out_path(cfg, "source.csv");
  in.target_path = out_path(cfg, "target.csv");
  meta["files"] = {{"source", in.source_path}, {"target", in.target_path}};
  meta["header"] = cfg.header;
  write_text(in.source_path, format_samples(in.x, cfg.header));
  write_text(in.target_path, format_samples(in.y, cfg.header));
  write_json(out_path(cfg, "metadata.json"), meta);
  return in;
}

Inputs load_inputs(const RunConfig& cfg) {
  if (!cfg.source_csv.empty() || !cfg.target_csv.empty()) {
    if (cfg.source_csv.empty() || cfg.target_csv.empty())
      throw IoError("input: both 'source' and 'target' CSV paths are needed");
    Inputs in;
    in.source_path = cfg.source_csv;
    in.target_path = cfg.target_csv;
    in.x = read_samples(cfg.source_csv);
    in.y = read_samples(cfg.target_csv);
    return in;
  }
  if (!has_generated(cfg)) throw IoError("no input: set 'input' CSV paths or 'data' datasets");
  return generate_inputs(cfg);
}

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kInputError;
}

}  // namespace

int cmd_gen_data(const RunConfig& cfg) {
  return guarded([&] {
    if (!has_generated(cfg)) throw IoError("gen-data: no 'data' section in the config");
    const Inputs in = generate_inputs(cfg);
    std::cout << "wrote " << in.source_path << " (" << in.x.rows() << "x" << in.x.cols() << "), "
              << in.target_path << " (" << in.y.rows() << "x" << in.y.cols() << ")\n";
    return static_cast<int>(kOk);
  });
}

int cmd_solve(const RunConfig& cfg) {
  return guarded([&] {
    const Inputs in = load_inputs(cfg);
    if (in.x.cols() != in.y.cols())
      throw IoError("source has " + std::to_string(in.x.cols()) + " columns, target has " +
                    std::to_string(in.y.cols()));
    make_out_dir(cfg);

    SolveRecord record;
    record.config_yaml = dump_config(cfg);
    record.source_path = in.source_path;
    record.target_path = in.target_path;
    int code = kOk;
    try {
      record.result = sbgot(in.x, in.y, cfg.global);
    } catch (const StallError& e) {
      record.stall = StallInfo{e.step, e.sweep, e.what()};
    } catch (const NonFiniteError& e) {
      record.stall = StallInfo{-1, -1, e.what()};
    }

    if (record.result) {
      record.transported_path = out_path(cfg, "transported.csv");
      write_text(record.transported_path,
                 format_samples(record.result->trajectory.steps.back(), cfg.header));
      const TransportResult& r = *record.result;
      if (!(r.sweeps_converged && r.locals_converged)) code = kNotConverged;
      std::cout << "sweeps " << r.sweeps << (r.sweeps_converged ? " (converged)" : " (not converged)")
                << ", KL " << format_double(r.kl_initial) << " -> " << format_double(r.kl_final)
                << ", cost " << format_double(r.cost) << "\n";
    } else {
      code = kNotConverged;
      std::cerr << "stalled: " << record.stall->message << "\n";
    }
    write_json(out_path(cfg, "result.json"), result_document(record));
    return code;
  });
}

int cmd_benchmark(const RunConfig& cfg) {
  return guarded([&] {
    SuiteConfig suite = cfg.benchmark;
    suite.base = cfg.global;
    suite.threads = threads_from_env();
    make_out_dir(cfg);
    const SuiteResult res = convergence_suite(suite);

    std::string rows = "sweep,param,seed,weighted_l2,linf,cost,runtime_s,error\n";
    int failures = 0;
    for (const auto& r : res.rows) {
      std::string error = r.error;
      std::replace(error.begin(), error.end(), '\n', ' ');
      std::replace(error.begin(), error.end(), '"', '\'');
      if (!r.error.empty()) ++failures;
      const bool ok = r.error.empty();
      const double nan = std::nan("");
      rows += std::string(to_string(r.sweep)) + "," + format_double(r.param) + "," +
              std::to_string(r.seed) + "," + format_double(ok ? r.metrics.weighted_l2 : nan) + "," +
              format_double(ok ? r.metrics.linf : nan) + "," + format_double(ok ? r.metrics.cost : nan) +
              "," + format_double(r.runtime_s) + "," + (error.empty() ? "" : "\"" + error + "\"") + "\n";
    }
    std::string summary = "sweep,param,runs,failures,weighted_l2,linf,cost,runtime_s\n";
    for (const auto& a : res.aggregates)
      summary += std::string(to_string(a.sweep)) + "," + format_double(a.param) + "," +
                 std::to_string(a.runs) + "," + std::to_string(a.failures) + "," +
                 format_double(a.weighted_l2) + "," + format_double(a.linf) + "," +
                 format_double(a.cost) + "," + format_double(a.runtime_s) + "\n";
    write_text(out_path(cfg, "benchmark.csv"), rows);
    write_text(out_path(cfg, "benchmark_summary.csv"), summary);
    std::cout << summary;
    if (failures == static_cast<int>(res.rows.size())) {
      std::cerr << "every benchmark cell failed\n";
      return static_cast<int>(kNotConverged);
    }
    return static_cast<int>(kOk);
  });
}

int cmd_emit_plots(const RunConfig& cfg) {
  return guarded([&] {
    const std::string path = cfg.plots.result.empty() ? out_path(cfg, "result.json") : cfg.plots.result;
    const LoadedResult loaded = load_result(path);
    const SampleSet x = read_samples(loaded.source_path);
    const SampleSet y = read_samples(loaded.target_path);
    const SampleSet tx = apply_map(loaded.composed, x);
    const auto d = x.cols();
    make_out_dir(cfg);

    if (d == 1) {
      const double lo = std::min({x.minCoeff(), tx.minCoeff(), y.minCoeff()});
      double hi = std::max({x.maxCoeff(), tx.maxCoeff(), y.maxCoeff()});
      if (!(hi > lo)) hi = lo + 1.0;
      const int bins = cfg.plots.bins;
      const double width = (hi - lo) / bins;
      auto counts = [&](const SampleSet& s) {
        std::vector<long> c(static_cast<std::size_t>(bins), 0);
        for (Eigen::Index i = 0; i < s.rows(); ++i) {
          const int b = std::clamp(static_cast<int>(std::floor((s(i, 0) - lo) / width)), 0, bins - 1);
          ++c[static_cast<std::size_t>(b)];
        }
        return c;
      };
      const auto cx = counts(x), ct = counts(tx), cy = counts(y);
      std::string hist = "bin_left,bin_right,source,transported,target\n";
      for (int b = 0; b < bins; ++b) {
        const auto k = static_cast<std::size_t>(b);
        hist += format_double(lo + b * width) + "," +
                format_double(b + 1 == bins ? hi : lo + (b + 1) * width) + "," +
                std::to_string(cx[k]) + "," + std::to_string(ct[k]) + "," + std::to_string(cy[k]) + "\n";
      }
      write_text(out_path(cfg, "histogram.csv"), hist);

      const SampleSet grid = evaluation_grid(x, cfg.plots.grid_points);
      const SampleSet tgrid = apply_map(loaded.composed, grid);
      Vector g(grid.rows());
      for (Eigen::Index i = 0; i < grid.rows(); ++i)
        g(i) = eval_discriminator(loaded.discriminator, grid.row(i).transpose());
      const double peak = g.cwiseAbs().maxCoeff();
      std::string curves = "x,g,g_rescaled,displacement\n";
      for (Eigen::Index i = 0; i < grid.rows(); ++i)
        curves += format_double(grid(i, 0)) + "," + format_double(g(i)) + "," +
                  format_double(peak < 1e-12 ? 0.0 : g(i) / peak) + "," +
                  format_double(tgrid(i, 0) - grid(i, 0)) + "\n";
      write_text(out_path(cfg, "curves.csv"), curves);
    }

    std::string header = "set";
    for (Eigen::Index j = 0; j < d; ++j) header += ",x" + std::to_string(j + 1);
    std::string scatter = header + "\n";
    auto dump = [&](std::string& out, const std::string& label, const SampleSet& s) {
      for (Eigen::Index i = 0; i < s.rows(); ++i) {
        out += label;
        for (Eigen::Index j = 0; j < d; ++j) out += "," + format_double(s(i, j));
        out += "\n";
      }
    };
    dump(scatter, "source", x);
    dump(scatter, "transported", tx);
    dump(scatter, "target", y);
    write_text(out_path(cfg, "scatter.csv"), scatter);

    std::string snaps = "t";
    for (Eigen::Index j = 0; j < d; ++j) snaps += ",x" + std::to_string(j + 1);
    snaps += "\n";
    const int k_max = cfg.plots.snapshots;
    for (int k = 1; k <= k_max; ++k) {
      const double t = static_cast<double>(k) / k_max;
      const SampleSet z = (1.0 - t) * x + t * tx;
      dump(snaps, format_double(t), z);
    }
    write_text(out_path(cfg, "interpolants.csv"), snaps);
    std::cout << "wrote plot data to " << cfg.out << "\n";
    return static_cast<int>(kOk);
  });
}

}  // namespace adot::cli
