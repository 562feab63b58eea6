#include "adot_cli/result.hpp"

#include "adot/random.hpp"
#include "adot_cli/io.hpp"

namespace adot::cli {

using nlohmann::json;

namespace {

json vec(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec(m.row(r).transpose()));
  return rows;
}

Vector read_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix read_mat(const json& j) {
  Matrix m(static_cast<Eigen::Index>(j.size()), j.empty() ? 0 : static_cast<Eigen::Index>(j[0].size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) m.row(r) = read_vec(j[static_cast<std::size_t>(r)]).transpose();
  return m;
}

json bumps(const std::vector<GaussianBump>& list) {
  json out = json::array();
  for (const auto& b : list)
    out.push_back({{"amplitude", b.amplitude},
                   {"center", vec(b.center)},
                   {"scale", {{"kind", to_string(b.scale.kind())}, {"params", vec(b.scale.params())}}}});
  return out;
}

std::vector<GaussianBump> read_bumps(const json& j, int dim) {
  std::vector<GaussianBump> out;
  for (const auto& b : j) {
    GaussianBump bump;
    bump.amplitude = b.at("amplitude").get<double>();
    bump.center = read_vec(b.at("center"));
    const auto& s = b.at("scale");
    bump.scale = ScaleForm::from_params(parse_scale_kind(s.at("kind").get<std::string>()), dim,
                                        read_vec(s.at("params")));
    out.push_back(std::move(bump));
  }
  return out;
}

json local_summary(const LocalSummary& s) {
  return {{"step", s.step},
          {"status", to_string(s.status)},
          {"iterations", s.iterations},
          {"rejected_steps", s.rejected_steps},
          {"final_grad_norm", s.final_grad_norm},
          {"final_core", s.final_core},
          {"min_jacobian_eigenvalue", s.min_jacobian_eigenvalue},
          {"saturated", s.saturated},
          {"degenerate_centers", s.degenerate_centers},
          {"quadratic_fallback", s.quadratic_fallback},
          {"lagrangian_trace", s.lagrangian_trace}};
}

}  // namespace

json to_json(const PotentialParams& p) {
  return {{"A0", mat(p.A0)}, {"a1", vec(p.a1)}, {"bumps", bumps(p.bumps)}};
}

json to_json(const DiscriminatorParams& g) {
  return {{"B0", mat(g.B0)}, {"b1", vec(g.b1)}, {"b2", g.b2}, {"bumps", bumps(g.bumps)}};
}

PotentialParams potential_from_json(const json& j) {
  PotentialParams p;
  p.A0 = read_mat(j.at("A0"));
  p.a1 = read_vec(j.at("a1"));
  p.bumps = read_bumps(j.at("bumps"), p.dim());
  return p;
}

DiscriminatorParams discriminator_from_json(const json& j) {
  DiscriminatorParams g;
  g.B0 = read_mat(j.at("B0"));
  g.b1 = read_vec(j.at("b1"));
  g.b2 = j.at("b2").get<double>();
  g.bumps = read_bumps(j.at("bumps"), g.dim());
  return g;
}

json result_document(const SolveRecord& record) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["generator"] = {{"name", "adot"}, {"version", kGeneratorVersion}};
  doc["rng"] = {{"name", kRngName}, {"version", kRngVersion}};
  doc["config"] = record.config_yaml;
  doc["inputs"] = {{"source", record.source_path}, {"target", record.target_path}};
  doc["transported"] = record.transported_path;

  if (record.stall) {
    doc["stall"] = {{"step", record.stall->step},
                    {"sweep", record.stall->sweep},
                    {"message", record.stall->message}};
  } else {
    doc["stall"] = nullptr;
  }
  if (!record.result) return doc;

  const TransportResult& r = *record.result;
  doc["converged"] = r.sweeps_converged && r.locals_converged;
  doc["sweeps"] = r.sweeps;
  doc["sweeps_converged"] = r.sweeps_converged;
  doc["locals_converged"] = r.locals_converged;
  doc["kl_initial"] = r.kl_initial;
  doc["kl_final"] = r.kl_final;
  doc["cost"] = r.cost;

  json steps = json::array();
  for (std::size_t t = 0; t < r.composed.locals.size(); ++t)
    steps.push_back({{"step", t + 1}, {"potential", to_json(r.composed.locals[t])}});
  doc["steps"] = std::move(steps);

  json history = json::array();
  for (const auto& rec : r.history) {
    json locals = json::array();
    for (const auto& s : rec.locals) locals.push_back(local_summary(s));
    history.push_back(
        {{"sweep", rec.sweep}, {"relative_change", rec.relative_change}, {"locals", std::move(locals)}});
  }
  doc["history"] = std::move(history);
  doc["final_discriminator"] = to_json(r.final_discriminator);
  return doc;
}

LoadedResult load_result(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  try {
    if (doc.at("format_version").get<int>() != kFormatVersion)
      throw IoError(path + ": unsupported format_version");
    if (!doc.contains("steps")) throw IoError(path + ": result has no transport map (stalled run)");
    LoadedResult out;
    out.source_path = doc.at("inputs").at("source").get<std::string>();
    out.target_path = doc.at("inputs").at("target").get<std::string>();
    for (const auto& s : doc.at("steps")) out.composed.locals.push_back(potential_from_json(s.at("potential")));
    out.discriminator = discriminator_from_json(doc.at("final_discriminator"));
    return out;
  } catch (const json::exception& e) {
    throw IoError(path + ": malformed result document: " + e.what());
  } catch (const ContractError& e) {
    throw IoError(path + ": malformed result document: " + e.what());
  }
}

}  // namespace adot::cli
