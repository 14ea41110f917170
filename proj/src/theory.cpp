#include "ctgraph/theory.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ctgraph/errors.hpp"
#include "ctgraph/graph.hpp"
#include "ctgraph/io.hpp"
#include "ctgraph/pipeline.hpp"
#include "ctgraph/rng.hpp"

namespace ctgraph {

namespace {

ImageGrid random_image(Rng& rng, int side) {
  return ImageGrid(side, side, rng.uniform_vector(Eigen::Index(side) * side));
}

ScanGeometry small_ct(int side, int n_angles) {
  ScanGeometry g;
  g.image_side = side;
  g.n_angles = n_angles;
  g.finalize();
  return g;
}

std::string describe(double value, double bound) {
  return "value " + format_double(value) + " vs bound " + format_double(bound);
}

// Validators shared between run_all and the self test: a mutated structure
// must fail the same code path the healthy one passes.

// Zero diagonal, symmetric weights, node measure consistent with ||W||_F.
double graph_symmetry_defect(const ImageGraph& g) {
  double defect = 0.0;
  Eigen::SparseMatrix<double> diff = g.weights - Eigen::SparseMatrix<double>(g.weights.transpose());
  for (int k = 0; k < diff.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it)
      defect = std::max(defect, std::abs(it.value()));
  for (Eigen::Index i = 0; i < g.n; ++i) defect = std::max(defect, std::abs(g.weights.coeff(i, i)));
  defect = std::max(defect, std::abs(g.mu - g.weights.norm()));
  return defect;
}

bool patterns_match(const ImageGraph& a, const ImageGraph& b) {
  return a.pattern_hash == b.pattern_hash && a.weights.nonZeros() == b.weights.nonZeros();
}

CheckResult check_pattern_invariance(const TheoryConfig& cfg) {
  CheckResult r{"pattern_invariance", true, 0.0, "", cfg.seed};
  Rng rng(cfg.seed);
  GraphParams params{cfg.radius, cfg.sigma, DistanceNorm::linf};
  for (int trial = 0; trial < 20; ++trial) {
    const ImageGraph g1 = build_graph(random_image(rng, cfg.small_side), params);
    const ImageGraph g2 = build_graph(random_image(rng, cfg.small_side), params);
    if (!patterns_match(g1, g2)) {
      r.passed = false;
      r.witness = "trial " + std::to_string(trial) + ": hashes " +
                  std::to_string(g1.pattern_hash) + " vs " + std::to_string(g2.pattern_hash);
      return r;
    }
  }
  r.witness = "20 pairs, identical pattern hash and nonzero count";
  return r;
}

CheckResult check_projector_and_kernel(const TheoryConfig& cfg) {
  CheckResult r{"projector_positivity_and_laplacian_kernel", true, 0.0, "", cfg.seed};
  Rng rng(cfg.seed + 1);
  const int side = 8;
  const ProjectorMatrix K = build_projector(small_ct(side, 10));
  const Eigen::VectorXd k_ones = apply_vec(K, Eigen::VectorXd::Ones(side * side));
  if (k_ones.minCoeff() < 0.0 || k_ones.norm() <= 0.0) {
    r.passed = false;
    r.witness = "projector applied to the constant image is not nonnegative-and-nonzero";
    return r;
  }

  const ImageGraph g = build_graph(random_image(rng, side), {1, 1.0, DistanceNorm::linf});
  const double defect = graph_symmetry_defect(g);
  if (defect > 1e-12) {
    r.passed = false;
    r.witness = "weight matrix defect " + format_double(defect);
    return r;
  }
  const GraphLaplacianOp lap(g);
  const double ones_residual =
      lap.apply(Eigen::VectorXd::Ones(g.n)).cwiseAbs().maxCoeff();
  if (ones_residual != 0.0) {
    r.passed = false;
    r.witness = "constant vector not annihilated exactly: " + format_double(ones_residual);
    return r;
  }
  const Eigen::MatrixXd dense = Eigen::MatrixXd(lap.matrix());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense);
  const Eigen::VectorXd s = svd.singularValues();
  const double second_smallest = s[s.size() - 2];
  if (!(second_smallest > 1e-12)) {
    r.passed = false;
    r.witness = "second-smallest singular value " + format_double(second_smallest);
    return r;
  }
  // Null spaces intersect trivially: the stacked [K; Lap] map keeps full rank.
  Eigen::MatrixXd stacked(K.rows() + g.n, g.n);
  stacked.topRows(K.rows()) = Eigen::MatrixXd(K.matrix);
  stacked.bottomRows(g.n) = dense;
  Eigen::JacobiSVD<Eigen::MatrixXd> ssvd(stacked);
  const double stack_min = ssvd.singularValues().minCoeff();
  r.margin = std::min(second_smallest, stack_min);
  r.passed = stack_min > 1e-12;
  r.witness = "spectral gap " + format_double(second_smallest) + ", stacked minimum " +
              format_double(stack_min);
  return r;
}

CheckResult check_node_measure_lipschitz(const TheoryConfig& cfg) {
  CheckResult r{"node_measure_lipschitz", true, 0.0, "", cfg.seed};
  Rng rng(cfg.seed + 2);
  GraphParams params{cfg.radius, cfg.sigma, DistanceNorm::linf};
  const Eigen::Index n = Eigen::Index(cfg.small_side) * cfg.small_side;
  const LipschitzConstants lc = lipschitz_constants(params, n);
  double worst = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 50; ++trial) {
    const ImageGrid x = random_image(rng, cfg.small_side);
    const ImageGrid y = random_image(rng, cfg.small_side);
    const ImageGraph gx = build_graph(x, params);
    const ImageGraph gy = build_graph(y, params);
    const double lhs = std::abs(gx.mu - gy.mu);
    const double rhs = lc.L_doubleprime * (x.values - y.values).norm();
    const double slack = (rhs - lhs) / rhs;
    if (slack < worst) {
      worst = slack;
      r.witness = "trial " + std::to_string(trial) + ": " + describe(lhs, rhs);
    }
  }
  r.margin = worst;
  r.passed = worst >= 0.0;
  return r;
}

CheckResult check_laplacian_difference_bound(const TheoryConfig& cfg) {
  CheckResult r{"laplacian_difference_bound", true, 0.0, "", cfg.seed};
  Rng rng(cfg.seed + 3);
  GraphParams params{cfg.radius, cfg.sigma, DistanceNorm::linf};
  const Eigen::Index n = Eigen::Index(cfg.small_side) * cfg.small_side;
  const LipschitzConstants lc = lipschitz_constants(params, n);
  if (!lc.usable) {
    r.witness = "bound unusable (underflow) at sigma " + format_double(params.sigma);
    return r;
  }
  double worst = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 50; ++trial) {
    const ImageGrid x1 = random_image(rng, cfg.small_side);
    const ImageGrid x2 = random_image(rng, cfg.small_side);
    const Eigen::VectorXd z = rng.normal_vector(n);
    const GraphLaplacianOp l1(build_graph(x1, params));
    const GraphLaplacianOp l2(build_graph(x2, params));
    const double lhs = (l1.apply(z) - l2.apply(z)).lpNorm<1>();
    const double rhs = lc.c_bound * z.lpNorm<1>() * (x1.values - x2.values).norm();
    const double slack = (rhs - lhs) / rhs;
    if (slack < worst) {
      worst = slack;
      r.witness = "trial " + std::to_string(trial) + ": " + describe(lhs, rhs);
    }
  }
  r.margin = worst;
  r.passed = worst >= 0.0;
  return r;
}

CheckResult check_difference_constant_bounded(const TheoryConfig& cfg) {
  CheckResult r{"difference_constant_bounded_in_n", true, 0.0, "", cfg.seed};
  GraphParams params{cfg.radius, std::max(cfg.sigma, 0.5), DistanceNorm::linf};
  const std::vector<Eigen::Index> sizes = {16 * 16, 32 * 32, 64 * 64};
  std::vector<double> cs;
  for (Eigen::Index n : sizes) cs.push_back(lipschitz_constants(params, n).c_bound);
  double worst = std::numeric_limits<double>::infinity();
  for (size_t i = 1; i < cs.size(); ++i) worst = std::min(worst, (cs[0] - cs[i]) / cs[0]);
  r.margin = worst;
  r.passed = worst >= 0.0 && std::isfinite(cs[0]);
  r.witness = "constants " + format_double(cs[0]) + ", " + format_double(cs[1]) + ", " +
              format_double(cs[2]) + " for n = 256, 1024, 4096";
  return r;
}

CheckResult check_objective_transfer(const TheoryConfig& cfg) {
  CheckResult r{"objective_transfer_inequality", true, 0.0, "", cfg.seed};
  Rng rng(cfg.seed + 4);
  const int side = cfg.small_side;
  const ProjectorMatrix K = build_projector(small_ct(side, 10));
  const ImageGrid x_gt = make_phantom(PhantomKind::ellipses, side, cfg.seed);
  const Sinogram clean = apply(K, x_gt);
  GraphParams params{cfg.radius, cfg.sigma, DistanceNorm::linf};

  double worst = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    const double d1 = 0.005 + 0.035 * rng.uniform();
    const double d2 = 0.005 + 0.035 * rng.uniform();
    const Sinogram y1 = add_noise(clean, d1, cfg.seed + 10 + 2 * trial);
    const Sinogram y2 = add_noise(clean, d2, cfg.seed + 11 + 2 * trial);
    const ImageGrid psi1 = tikhonov_discrepancy(y1, K).first.clipped();
    const ImageGrid psi2 = tikhonov_discrepancy(y2, K).first.clipped();
    const GraphLaplacianOp l1(build_graph(psi1, params));
    const GraphLaplacianOp l2(build_graph(psi2, params));

    VariationalProblem p1 = make_problem(K, y1, l1);
    VariationalProblem p2 = make_problem(K, y2, l2);
    p1.alpha_rule = p2.alpha_rule = AlphaRule::fixed;
    p1.alpha_fixed = p2.alpha_fixed = rng.uniform() * 0.999 + 0.001;  // the bound needs alpha <= 1
    const Eigen::VectorXd x = rng.uniform_vector(K.cols()) * (rng.uniform() < 0.5 ? 1.0 : 10.0);

    const double g1 = objective(p1, x).gamma;
    const double g2 = objective(p2, x).gamma;
    const double rhs = 2.0 * g2 + (p1.y - p2.y).squaredNorm() +
                       (l1.apply(x) - l2.apply(x)).lpNorm<1>();
    const double slack = (rhs - g1) / std::max(1.0, rhs);
    if (!gamma_inequality_check(p1, p2, x)) r.passed = false;
    if (slack < worst) {
      worst = slack;
      r.witness = "trial " + std::to_string(trial) + ": " + describe(g1, rhs);
    }
  }
  r.margin = worst;
  return r;
}

CheckResult check_tikhonov_spectral_bound(const TheoryConfig& cfg) {
  CheckResult r{"tikhonov_spectral_bound", true, 0.0, "", cfg.seed};
  const ProjectorMatrix K = build_projector(small_ct(cfg.small_side, 10));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(K.matrix));
  const Eigen::VectorXd s = svd.singularValues();
  double worst = std::numeric_limits<double>::infinity();
  for (int e = -4; e <= 2; ++e) {
    const double theta = std::pow(10.0, e);
    const double rhs = 1.0 / (2.0 * std::sqrt(theta));
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double lhs = s[i] / (s[i] * s[i] + theta);
      const double slack = (rhs - lhs) / rhs;
      if (slack < worst) {
        worst = slack;
        r.witness = "s = " + format_double(s[i]) + ", theta = " + format_double(theta) + ": " +
                    describe(lhs, rhs);
      }
    }
  }
  r.margin = worst;
  r.passed = worst >= 0.0;
  return r;
}

CheckResult check_coercivity_rays(const TheoryConfig& cfg) {
  CheckResult r{"coercivity_rays", true, 0.0, "", cfg.seed};
  Rng rng(cfg.seed + 5);
  const int side = cfg.small_side;
  const ProjectorMatrix K = build_projector(small_ct(side, 10));
  const ImageGrid x_gt = make_phantom(PhantomKind::ellipses, side, cfg.seed);
  const Sinogram y = add_noise(apply(K, x_gt), 0.02, cfg.seed + 6);
  const ImageGraph g = build_graph(random_image(rng, side), {cfg.radius, 1.0, DistanceNorm::linf});
  const GraphLaplacianOp lap(g);
  VariationalProblem p = make_problem(K, y, lap);
  p.alpha_rule = AlphaRule::fixed;
  p.alpha_fixed = 0.5;

  double worst = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd d = rng.normal_vector(K.cols()).normalized();
    const double near = objective(p, 10.0 * d, p.alpha_fixed).gamma;
    const double far = objective(p, 100.0 * d, p.alpha_fixed).gamma;
    const double slack = (far - near) / std::max(1.0, far);
    if (slack < worst) {
      worst = slack;
      r.witness = "trial " + std::to_string(trial) + ": objective " + format_double(near) +
                  " at radius 10 vs " + format_double(far) + " at radius 100";
    }
  }
  r.margin = worst;
  r.passed = worst > 0.0;
  return r;
}

CheckResult check_convergence_sweep(const TheoryConfig& cfg) {
  CheckResult r{"convergence_sweep", true, 0.0, "", cfg.seed};
  ExperimentConfig c = desk_config();
  c.geometry.image_side = cfg.desk_side;
  c.geometry.n_angles = cfg.desk_angles;
  c.geometry.angles_deg.clear();
  c.geometry.n_detector = 0;
  c.phantom_seed = cfg.seed;
  c.alpha_rule = AlphaRule::fixed;
  c.alpha_fixed = 0.0;  // sweep convention: alpha follows delta
  c.output_dir.clear();
  c.sweep_deltas = {0.04, 0.02, 0.01, 0.005, 0.0025};
  const std::vector<SweepRow> rows = sweep(c);

  std::vector<double> rre;
  for (const auto& row : rows)
    if (row.method == "graphla") rre.push_back(row.metrics.rre);
  int inversions = 0;
  double worst = std::numeric_limits<double>::infinity();
  std::string trail;
  for (size_t i = 0; i + 1 < rre.size(); ++i) {
    const double rel_drop = (rre[i] - rre[i + 1]) / rre[i];
    worst = std::min(worst, rel_drop);
    if (rel_drop < 0.0 && -rel_drop > 0.02) {
      r.passed = false;
    } else if (rel_drop < 0.0) {
      ++inversions;
    }
  }
  for (double v : rre) trail += (trail.empty() ? "" : " -> ") + format_double(v);
  if (inversions > 1) r.passed = false;
  r.margin = worst;
  r.witness = "relative error per noise level: " + trail;
  return r;
}

CheckResult check_stability_sweep(const TheoryConfig& cfg) {
  CheckResult r{"stability_sweep", true, 0.0, "", cfg.seed};
  ExperimentConfig c = desk_config();
  c.geometry.image_side = cfg.desk_side;
  c.geometry.n_angles = cfg.desk_angles;
  c.geometry.angles_deg.clear();
  c.geometry.n_detector = 0;
  c.phantom_seed = cfg.seed;
  c.output_dir.clear();
  c.geometry.finalize();

  const ImageGrid x_gt = make_phantom(c.phantom_kind, c.geometry.image_side, c.phantom_seed);
  const ProjectorMatrix K = build_projector(c.geometry);
  const Sinogram clean = apply(K, x_gt);
  const Sinogram y1 = add_noise(clean, c.delta, c.noise_seed);
  Sinogram y2 = y1;
  Rng rng(c.noise_seed + 1);
  Eigen::VectorXd zeta = rng.normal_vector(y1.values.size());
  y2.values += (1e-3 * y1.values.norm() / zeta.norm()) * zeta;

  auto solve_one = [&](const Sinogram& y) {
    const ImageGrid psi = tikhonov_discrepancy(y, K).first.clipped();
    const GraphLaplacianOp lap(build_graph(psi, c.graph));
    VariationalProblem p = make_problem(K, y, lap);
    p.tau = c.solver_tau;
    auto [x, st] = solve(p, psi.values);
    return x;
  };
  const Eigen::VectorXd x1 = solve_one(y1);
  const Eigen::VectorXd x2 = solve_one(y2);
  const double ratio = (x1 - x2).norm() / x1.norm();
  r.margin = 0.05 - ratio;
  r.passed = ratio <= 0.05;
  r.witness = "iterate shift " + format_double(ratio) + " for data shift 1e-3";
  return r;
}

}  // namespace

std::vector<CheckResult> run_all(const TheoryConfig& config) {
  std::vector<CheckResult> out;
  out.push_back(check_pattern_invariance(config));
  out.push_back(check_projector_and_kernel(config));
  out.push_back(check_node_measure_lipschitz(config));
  out.push_back(check_laplacian_difference_bound(config));
  out.push_back(check_difference_constant_bounded(config));
  out.push_back(check_objective_transfer(config));
  out.push_back(check_tikhonov_spectral_bound(config));
  out.push_back(check_coercivity_rays(config));
  if (config.include_sweeps) {
    out.push_back(check_convergence_sweep(config));
    out.push_back(check_stability_sweep(config));
  }
  return out;
}

std::vector<CheckResult> self_test(std::uint64_t seed) {
  std::vector<CheckResult> out;
  Rng rng(seed);
  const int side = 8;
  ImageGraph g = build_graph(random_image(rng, side), {1, 1.0, DistanceNorm::linf});

  ImageGraph mutated = g;
  // Break symmetry at the first stored off-diagonal entry.
  for (int k = 0; k < mutated.weights.outerSize(); ++k) {
    bool done = false;
    for (Eigen::SparseMatrix<double>::InnerIterator it(mutated.weights, k); it; ++it)
      if (it.row() != it.col()) {
        mutated.weights.coeffRef(it.row(), it.col()) = it.value() + 0.125;
        done = true;
        break;
      }
    if (done) break;
  }
  const double defect = graph_symmetry_defect(mutated);
  out.push_back({"self_test_detects_asymmetric_weights", defect > 1e-12, defect,
                 "injected +0.125 on one directed edge; defect " + format_double(defect), seed});

  const ImageGraph other = build_graph(random_image(rng, side), {2, 1.0, DistanceNorm::linf});
  const bool caught = !patterns_match(g, other);
  out.push_back({"self_test_detects_pattern_mismatch", caught, caught ? 1.0 : 0.0,
                 "radius-1 vs radius-2 stencil hashes " + std::to_string(g.pattern_hash) + " vs " +
                     std::to_string(other.pattern_hash),
                 seed});
  return out;
}

std::string to_json(const std::vector<CheckResult>& results) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : results)
    j.push_back({{"name", r.name},
                 {"passed", r.passed},
                 {"margin", r.margin},
                 {"witness", r.witness},
                 {"seed", r.seed}});
  return j.dump(2) + "\n";
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
}

}  // namespace ctgraph
