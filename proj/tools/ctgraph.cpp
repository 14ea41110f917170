#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

#include "ctgraph/errors.hpp"
#include "ctgraph/io.hpp"
#include "ctgraph/pipeline.hpp"
#include "ctgraph/theory.hpp"

using namespace ctgraph;

namespace {

// Flag overrides layered on top of --config (or the built-in 64x64 default).
struct ConfigFlags {
  std::string config_path;
  std::optional<std::string> mode, phantom_kind, phantom_path, graph_distance, psi_kind,
      psi_path, alpha_rule, output_dir;
  std::optional<int> side, n_angles, n_detector, max_outer, basis_cap, graph_radius;
  std::optional<double> delta, graph_sigma, psi_theta, psi_tau, fbp_cutoff, alpha_fixed,
      solver_tau, smoothing_eps, tol;
  std::optional<std::uint64_t> phantom_seed, noise_seed;
  std::vector<double> sweep_deltas;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON experiment config; flags override its fields");
    cmd->add_option("--mode", mode, "beam mode: parallel or fan");
    cmd->add_option("--side", side, "image side length in pixels");
    cmd->add_option("--angles", n_angles, "number of projection angles");
    cmd->add_option("--detectors", n_detector, "detector count (0 = automatic)");
    cmd->add_option("--phantom-kind", phantom_kind, "ellipses or shepp_logan");
    cmd->add_option("--phantom-seed", phantom_seed, "phantom generator seed");
    cmd->add_option("--phantom-path", phantom_path, "ground-truth image file instead of a phantom");
    cmd->add_option("--delta", delta, "relative noise level");
    cmd->add_option("--noise-seed", noise_seed, "noise generator seed");
    cmd->add_option("--graph-radius", graph_radius, "neighborhood radius of the image graph");
    cmd->add_option("--graph-sigma", graph_sigma, "intensity width of the edge weights");
    cmd->add_option("--graph-distance", graph_distance, "pixel distance: linf or l1");
    cmd->add_option("--psi", psi_kind,
                    "preliminary method: fbp, tikhonov, tikhonov_discrepancy, tv, external");
    cmd->add_option("--psi-theta", psi_theta, "ridge weight for the preliminary solve");
    cmd->add_option("--psi-tau", psi_tau, "discrepancy safety factor for the preliminary solve");
    cmd->add_option("--fbp-cutoff", fbp_cutoff, "fraction of the ramp kernel support kept");
    cmd->add_option("--psi-path", psi_path, "external preliminary reconstruction file");
    cmd->add_option("--alpha-rule", alpha_rule, "fixed or discrepancy");
    cmd->add_option("--alpha", alpha_fixed, "regularization weight for the fixed rule");
    cmd->add_option("--solver-tau", solver_tau, "discrepancy safety factor for the solver");
    cmd->add_option("--eps", smoothing_eps, "l1 smoothing parameter");
    cmd->add_option("--max-outer", max_outer, "outer iteration cap");
    cmd->add_option("--basis-cap", basis_cap, "subspace dimension before restart");
    cmd->add_option("--tol", tol, "relative-change stopping tolerance");
    cmd->add_option("--out", output_dir, "output directory");
    cmd->add_option("--deltas", sweep_deltas, "noise levels for sweep mode");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c =
        config_path.empty() ? desk_config() : config_from_json(read_text_file(config_path));
    if (mode) c.geometry.mode = beam_mode_from_string(*mode);
    if (side) { c.geometry.image_side = *side; c.geometry.n_detector = 0; c.geometry.detector_spacing = 0; }
    if (n_angles) { c.geometry.n_angles = *n_angles; c.geometry.angles_deg.clear(); }
    if (n_detector) c.geometry.n_detector = *n_detector;
    if (phantom_kind) c.phantom_kind = phantom_kind_from_string(*phantom_kind);
    if (phantom_seed) c.phantom_seed = *phantom_seed;
    if (phantom_path) c.phantom_path = *phantom_path;
    if (delta) c.delta = *delta;
    if (noise_seed) c.noise_seed = *noise_seed;
    if (graph_radius) c.graph.R = *graph_radius;
    if (graph_sigma) c.graph.sigma = *graph_sigma;
    if (graph_distance) c.graph.distance_norm = distance_norm_from_string(*graph_distance);
    if (psi_kind) c.psi.kind = reconstructor_kind_from_string(*psi_kind);
    if (psi_theta) c.psi.theta = *psi_theta;
    if (psi_tau) c.psi.tau = *psi_tau;
    if (fbp_cutoff) c.psi.fbp_cutoff = *fbp_cutoff;
    if (psi_path) c.psi.path = *psi_path;
    if (alpha_rule) c.alpha_rule = alpha_rule_from_string(*alpha_rule);
    if (alpha_fixed) c.alpha_fixed = *alpha_fixed;
    if (solver_tau) c.solver_tau = *solver_tau;
    if (smoothing_eps) c.smoothing_eps = *smoothing_eps;
    if (max_outer) c.max_outer = *max_outer;
    if (basis_cap) c.basis_cap = *basis_cap;
    if (tol) c.solver_tol = *tol;
    if (output_dir) c.output_dir = *output_dir;
    if (!sweep_deltas.empty()) c.sweep_deltas = sweep_deltas;
    return c;
  }
};

void print_method(const MethodResult& m) {
  std::printf("%-8s rre=%.6g psnr=%.6g ssim=%.6g\n", m.method.c_str(), m.metrics.rre,
              m.metrics.psnr, m.metrics.ssim);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-view CT reconstruction with graph-Laplacian regularization"};
  app.require_subcommand(1);

  // phantom
  auto ph = std::make_shared<ConfigFlags>();
  std::string ph_out = "phantom.pgm";
  auto* phantom_cmd = app.add_subcommand("phantom", "generate a synthetic test image");
  ph->attach(phantom_cmd);
  phantom_cmd->add_option("--image-out", ph_out, "output image path (.pgm or .png)");
  phantom_cmd->callback([ph, &ph_out] {
    ExperimentConfig c = ph->resolve();
    write_image(make_phantom(c.phantom_kind, c.geometry.image_side, c.phantom_seed), ph_out);
    std::printf("wrote %s\n", ph_out.c_str());
  });

  // project
  auto pj = std::make_shared<ConfigFlags>();
  std::string pj_image, pj_out = "sino.f64";
  auto* project_cmd = app.add_subcommand("project", "forward-project an image to a sinogram");
  pj->attach(project_cmd);
  project_cmd->add_option("--image", pj_image, "input image")->required();
  project_cmd->add_option("--sino-out", pj_out, "output sinogram path");
  project_cmd->callback([pj, &pj_image, &pj_out] {
    ExperimentConfig c = pj->resolve();
    const ImageGrid img = read_image(pj_image);
    if (img.height != img.width) throw ConfigError("projection needs a square image");
    c.geometry.image_side = img.height;
    c.geometry.finalize();
    write_sinogram(apply(build_projector(c.geometry), img), pj_out);
    std::printf("wrote %s\n", pj_out.c_str());
  });

  // noise
  std::string nz_in, nz_out = "sino_noisy.f64";
  double nz_delta = 0.02;
  std::uint64_t nz_seed = 101;
  auto* noise_cmd = app.add_subcommand("noise", "add scaled Gaussian noise to a sinogram");
  noise_cmd->add_option("--in", nz_in, "input sinogram")->required();
  noise_cmd->add_option("--delta", nz_delta, "relative noise level");
  noise_cmd->add_option("--seed", nz_seed, "noise generator seed");
  noise_cmd->add_option("--sino-out", nz_out, "output sinogram path");
  noise_cmd->callback([&] {
    write_sinogram(add_noise(read_sinogram(nz_in), nz_delta, nz_seed), nz_out);
    std::printf("wrote %s\n", nz_out.c_str());
  });

  // reconstruct
  std::string rc_in, rc_out = "recon.pgm", rc_method = "fbp", rc_path;
  double rc_theta = 1.0, rc_tau = 1.01, rc_cutoff = 1.0;
  auto* rec_cmd = app.add_subcommand("reconstruct", "single-method reconstruction from a sinogram");
  rec_cmd->add_option("--in", rc_in, "input sinogram")->required();
  rec_cmd->add_option("--method", rc_method, "fbp, tikhonov, tikhonov_discrepancy, or tv");
  rec_cmd->add_option("--theta", rc_theta, "ridge weight");
  rec_cmd->add_option("--tau", rc_tau, "discrepancy safety factor");
  rec_cmd->add_option("--cutoff", rc_cutoff, "ramp kernel cutoff fraction");
  rec_cmd->add_option("--path", rc_path, "external image (method external)");
  rec_cmd->add_option("--image-out", rc_out, "output image path");
  rec_cmd->callback([&] {
    const Sinogram y = read_sinogram(rc_in);
    const ProjectorMatrix K = build_projector(y.geometry);
    ReconstructorSpec spec;
    spec.kind = reconstructor_kind_from_string(rc_method);
    spec.theta = rc_theta;
    spec.tau = rc_tau;
    spec.fbp_cutoff = rc_cutoff;
    spec.path = rc_path;
    write_image(reconstruct(spec, y, K), rc_out);
    std::printf("wrote %s\n", rc_out.c_str());
  });

  // graphla
  auto gl = std::make_shared<ConfigFlags>();
  auto* graphla_cmd =
      app.add_subcommand("graphla", "full pipeline: phantom, noisy sinogram, preliminary "
                                    "reconstruction, graph-regularized solve, metrics");
  gl->attach(graphla_cmd);
  graphla_cmd->callback([gl] {
    const ExperimentConfig c = gl->resolve();
    const RunResult r = run(c);
    print_method(r.psi);
    print_method(r.graphla);
    std::printf("alpha=%.6g residual=%.6g outer=%zu restarts=%d%s\n", r.state.final_alpha(),
                r.state.final_residual(), r.state.alpha_trace.size(), r.state.restarts,
                r.state.warning.empty() ? "" : (" warning: " + r.state.warning).c_str());
    if (!c.output_dir.empty()) std::printf("outputs in %s\n", c.output_dir.c_str());
  });

  // sweep
  auto sw = std::make_shared<ConfigFlags>();
  auto* sweep_cmd = app.add_subcommand("sweep", "run the pipeline across noise levels");
  sw->attach(sweep_cmd);
  sweep_cmd->callback([sw] {
    const ExperimentConfig c = sw->resolve();
    for (const SweepRow& row : sweep(c))
      std::printf("delta=%-8g %-8s rre=%.6g psnr=%.6g ssim=%.6g\n", row.delta, row.method.c_str(),
                  row.metrics.rre, row.metrics.psnr, row.metrics.ssim);
    if (!c.output_dir.empty()) std::printf("outputs in %s\n", c.output_dir.c_str());
  });

  // verify
  std::uint64_t vf_seed = 1;
  bool vf_fast = false, vf_self = false;
  std::string vf_json;
  auto* verify_cmd = app.add_subcommand("verify", "run the numeric verification battery");
  verify_cmd->add_option("--seed", vf_seed, "seed for the sampled checks");
  verify_cmd->add_flag("--fast", vf_fast, "skip the slow convergence/stability sweeps");
  verify_cmd->add_flag("--self-test", vf_self, "check that corrupted inputs are caught");
  verify_cmd->add_option("--json", vf_json, "write the full report to this path");
  verify_cmd->callback([&] {
    TheoryConfig tc;
    tc.seed = vf_seed;
    tc.include_sweeps = !vf_fast;
    const auto results = vf_self ? self_test(vf_seed) : run_all(tc);
    for (const auto& r : results)
      std::printf("[%s] %-42s margin=%-12.4g %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                  r.margin, r.witness.c_str());
    if (!vf_json.empty()) write_text_file(vf_json, to_json(results));
    if (!all_passed(results)) std::exit(1);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const StageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
