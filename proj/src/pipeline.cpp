#include "ctgraph/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <utility>

#include "ctgraph/errors.hpp"
#include "ctgraph/graph.hpp"
#include "ctgraph/io.hpp"

namespace ctgraph {

using nlohmann::json;

std::string to_string(BeamMode m) { return m == BeamMode::parallel ? "parallel" : "fan"; }
BeamMode beam_mode_from_string(const std::string& s) {
  if (s == "parallel") return BeamMode::parallel;
  if (s == "fan") return BeamMode::fan;
  throw ConfigError("unknown beam mode: " + s);
}

std::string to_string(PhantomKind k) {
  return k == PhantomKind::ellipses ? "ellipses" : "shepp_logan";
}
PhantomKind phantom_kind_from_string(const std::string& s) {
  if (s == "ellipses") return PhantomKind::ellipses;
  if (s == "shepp_logan") return PhantomKind::shepp_logan_like;
  throw ConfigError("unknown phantom kind: " + s);
}

std::string to_string(DistanceNorm d) { return d == DistanceNorm::linf ? "linf" : "l1"; }
DistanceNorm distance_norm_from_string(const std::string& s) {
  if (s == "linf") return DistanceNorm::linf;
  if (s == "l1") return DistanceNorm::l1;
  throw ConfigError("unknown distance norm: " + s);
}

std::string to_string(AlphaRule r) { return r == AlphaRule::fixed ? "fixed" : "discrepancy"; }
AlphaRule alpha_rule_from_string(const std::string& s) {
  if (s == "fixed") return AlphaRule::fixed;
  if (s == "discrepancy") return AlphaRule::discrepancy;
  throw ConfigError("unknown alpha rule: " + s);
}

namespace {

void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) { ok = true; break; }
    if (!ok) throw ConfigError(std::string("unknown key in ") + where + ": " + item.key());
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for ") + key + ": " + e.what());
  }
}

void read_enum(const json& j, const char* key, auto parse, auto& out) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_string()) throw ConfigError(std::string(key) + " must be a string");
  out = parse(j.at(key).get<std::string>());
}

}  // namespace

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["geometry"] = {{"mode", to_string(c.geometry.mode)},
                   {"image_side", c.geometry.image_side},
                   {"n_angles", c.geometry.n_angles},
                   {"angles_deg", c.geometry.angles_deg},
                   {"n_detector", c.geometry.n_detector},
                   {"source_radius", c.geometry.source_radius},
                   {"detector_radius", c.geometry.detector_radius},
                   {"detector_spacing", c.geometry.detector_spacing}};
  j["phantom"] = {{"kind", to_string(c.phantom_kind)},
                  {"seed", c.phantom_seed},
                  {"path", c.phantom_path}};
  j["delta"] = c.delta;
  j["noise_seed"] = c.noise_seed;
  j["graph"] = {{"radius", c.graph.R},
                {"sigma", c.graph.sigma},
                {"distance", to_string(c.graph.distance_norm)}};
  j["psi"] = {{"kind", to_string(c.psi.kind)},
              {"theta", c.psi.theta},
              {"tau", c.psi.tau},
              {"fbp_cutoff", c.psi.fbp_cutoff},
              {"path", c.psi.path}};
  j["solver"] = {{"alpha_rule", to_string(c.alpha_rule)},
                 {"alpha_fixed", c.alpha_fixed},
                 {"tau", c.solver_tau},
                 {"smoothing_eps", c.smoothing_eps},
                 {"max_outer", c.max_outer},
                 {"basis_cap", c.basis_cap},
                 {"tol", c.solver_tol}};
  j["output_dir"] = c.output_dir;
  j["sweep_deltas"] = c.sweep_deltas;
  return j.dump(2) + "\n";
}

ExperimentConfig config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"geometry", "phantom", "delta", "noise_seed", "graph", "psi", "solver",
              "output_dir", "sweep_deltas"});
  ExperimentConfig c;
  if (j.contains("geometry")) {
    const json& g = j.at("geometry");
    check_keys(g, "geometry",
               {"mode", "image_side", "n_angles", "angles_deg", "n_detector", "source_radius",
                "detector_radius", "detector_spacing"});
    read_enum(g, "mode", beam_mode_from_string, c.geometry.mode);
    read_field(g, "image_side", c.geometry.image_side);
    read_field(g, "n_angles", c.geometry.n_angles);
    read_field(g, "angles_deg", c.geometry.angles_deg);
    read_field(g, "n_detector", c.geometry.n_detector);
    read_field(g, "source_radius", c.geometry.source_radius);
    read_field(g, "detector_radius", c.geometry.detector_radius);
    read_field(g, "detector_spacing", c.geometry.detector_spacing);
  }
  if (j.contains("phantom")) {
    const json& p = j.at("phantom");
    check_keys(p, "phantom", {"kind", "seed", "path"});
    read_enum(p, "kind", phantom_kind_from_string, c.phantom_kind);
    read_field(p, "seed", c.phantom_seed);
    read_field(p, "path", c.phantom_path);
  }
  read_field(j, "delta", c.delta);
  read_field(j, "noise_seed", c.noise_seed);
  if (j.contains("graph")) {
    const json& g = j.at("graph");
    check_keys(g, "graph", {"radius", "sigma", "distance"});
    read_field(g, "radius", c.graph.R);
    read_field(g, "sigma", c.graph.sigma);
    read_enum(g, "distance", distance_norm_from_string, c.graph.distance_norm);
  }
  if (j.contains("psi")) {
    const json& p = j.at("psi");
    check_keys(p, "psi", {"kind", "theta", "tau", "fbp_cutoff", "path"});
    read_enum(p, "kind", reconstructor_kind_from_string, c.psi.kind);
    read_field(p, "theta", c.psi.theta);
    read_field(p, "tau", c.psi.tau);
    read_field(p, "fbp_cutoff", c.psi.fbp_cutoff);
    read_field(p, "path", c.psi.path);
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    check_keys(s, "solver",
               {"alpha_rule", "alpha_fixed", "tau", "smoothing_eps", "max_outer", "basis_cap",
                "tol"});
    read_enum(s, "alpha_rule", alpha_rule_from_string, c.alpha_rule);
    read_field(s, "alpha_fixed", c.alpha_fixed);
    read_field(s, "tau", c.solver_tau);
    read_field(s, "smoothing_eps", c.smoothing_eps);
    read_field(s, "max_outer", c.max_outer);
    read_field(s, "basis_cap", c.basis_cap);
    read_field(s, "tol", c.solver_tol);
  }
  read_field(j, "output_dir", c.output_dir);
  read_field(j, "sweep_deltas", c.sweep_deltas);
  return c;
}

ExperimentConfig desk_config() {
  ExperimentConfig c;
  c.geometry.mode = BeamMode::parallel;
  c.geometry.image_side = 64;
  c.geometry.n_angles = 30;
  c.phantom_kind = PhantomKind::ellipses;
  c.phantom_seed = 1;
  c.delta = 0.02;
  c.noise_seed = 101;
  c.graph.R = 3;
  c.graph.sigma = 0.02;
  c.psi.kind = ReconstructorKind::tikhonov_discrepancy;
  c.output_dir = "run";
  return c;
}

namespace {

template <typename F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const StageError& e) {
    throw StageError(std::string(name) + " stage failed: " + e.what());
  }
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

std::string short_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

RunResult run(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.geometry.finalize();
  const int side = c.geometry.image_side;
  const bool writing = !c.output_dir.empty();
  if (writing) ensure_dir(c.output_dir);
  const auto out = [&](const char* name) { return c.output_dir + "/" + name; };

  RunResult r;
  r.x_gt = stage("phantom", [&] {
    if (!c.phantom_path.empty()) return external_reconstruction(c.phantom_path, side);
    return make_phantom(c.phantom_kind, side, c.phantom_seed);
  });
  if (writing) write_image(r.x_gt, out("x_gt.pgm"));

  const ProjectorMatrix K = stage("project", [&] { return build_projector(c.geometry); });
  r.clean = apply(K, r.x_gt);
  if (writing) write_sinogram(r.clean, out("sino_clean.f64"));

  r.noisy = stage("noise", [&] { return add_noise(r.clean, c.delta, c.noise_seed); });
  if (writing) write_sinogram(r.noisy, out("sino_noisy.f64"));

  // Zero-noise runs cannot use the discrepancy principle; fall back to a
  // fixed weight (alpha_fixed if set, else a small default) and, for the
  // preliminary step, to a plain ridge solve at the configured theta.
  const bool degenerate = r.noisy.noise_norm <= 0.0;
  const double alpha_fallback = c.alpha_fixed > 0.0 ? c.alpha_fixed : 1e-3;

  r.psi.method = "psi";
  r.psi.image = stage("psi", [&]() -> ImageGrid {
    if (c.psi.kind == ReconstructorKind::tikhonov_discrepancy) {
      if (degenerate) {
        r.psi_theta = c.psi.theta;
        return tikhonov(r.noisy, K, c.psi.theta).clipped();
      }
      auto [img, th] = tikhonov_discrepancy(r.noisy, K, c.psi.tau);
      r.psi_theta = th;
      return img.clipped();
    }
    if (c.psi.kind == ReconstructorKind::tikhonov) r.psi_theta = c.psi.theta;
    if (degenerate && c.psi.kind == ReconstructorKind::tv) {
      SparseOperator G(gradient_operator(side, side));
      VariationalProblem p = make_problem(K, r.noisy, G);
      p.alpha_rule = AlphaRule::fixed;
      p.alpha_fixed = alpha_fallback;
      auto [x, st] = solve(p, Eigen::VectorXd());
      return ImageGrid(side, side, x).clipped();
    }
    return reconstruct(c.psi, r.noisy, K, &r.x_gt);
  });
  if (writing) write_image(r.psi.image, out("psi.pgm"));

  const ImageGraph graph = stage("graph", [&] { return build_graph(r.psi.image, c.graph); });
  const GraphLaplacianOp lap(graph);

  auto [x, state] = stage("solve", [&] {
    VariationalProblem p = make_problem(K, r.noisy, lap);
    p.alpha_rule = degenerate && c.alpha_rule == AlphaRule::discrepancy ? AlphaRule::fixed
                                                                        : c.alpha_rule;
    p.alpha_fixed = p.alpha_rule == AlphaRule::fixed && c.alpha_fixed <= 0.0 ? alpha_fallback
                                                                             : c.alpha_fixed;
    p.tau = c.solver_tau;
    p.smoothing_eps = c.smoothing_eps;
    p.max_outer = c.max_outer;
    p.basis_cap = c.basis_cap;
    p.tol = c.solver_tol;
    return solve(p, r.psi.image.values);
  });
  r.state = std::move(state);
  r.graphla.method = "graphla";
  r.graphla.image = ImageGrid(side, side, x).clipped();
  if (writing) write_image(r.graphla.image, out("graphla.pgm"));

  stage("metrics", [&] {
    r.psi.metrics = compute_metrics(r.psi.image, r.x_gt);
    r.graphla.metrics = compute_metrics(r.graphla.image, r.x_gt);
    return 0;
  });

  if (writing) {
    write_text_file(out("metrics.csv"), metrics_csv({r.psi, r.graphla}));
    write_trace_csv(r.state, out("solver_trace.csv"));
    write_text_file(out("config.json"), config_to_json(c));
  }
  return r;
}

std::vector<SweepRow> sweep(const ExperimentConfig& config) {
  if (config.sweep_deltas.empty()) throw ConfigError("sweep needs a nonempty list of noise levels");
  std::vector<SweepRow> rows;
  for (double d : config.sweep_deltas) {
    ExperimentConfig c = config;
    c.delta = d;
    c.sweep_deltas.clear();
    // Fixed rule with no explicit weight follows the noise level: alpha = delta.
    if (c.alpha_rule == AlphaRule::fixed && c.alpha_fixed <= 0.0) c.alpha_fixed = d;
    if (!config.output_dir.empty()) c.output_dir = config.output_dir + "/delta_" + short_double(d);
    const RunResult r = run(c);
    rows.push_back({d, r.psi.method, r.psi.metrics});
    rows.push_back({d, r.graphla.method, r.graphla.metrics});
  }
  if (!config.output_dir.empty()) {
    ensure_dir(config.output_dir);
    write_text_file(config.output_dir + "/sweep.csv", sweep_csv(rows));
  }
  return rows;
}

std::string metrics_csv(const std::vector<MethodResult>& rows) {
  std::string s = "method,rre,psnr,ssim\n";
  for (const auto& r : rows) s += r.method + "," + r.metrics.csv_row() + "\n";
  return s;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string s = "delta,method,rre,psnr,ssim\n";
  for (const auto& r : rows)
    s += format_double(r.delta) + "," + r.method + "," + r.metrics.csv_row() + "\n";
  return s;
}

}  // namespace ctgraph
