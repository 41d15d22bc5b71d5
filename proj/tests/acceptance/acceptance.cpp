// Acceptance suite. Usage: ksmi_acceptance [criterion ...]; no argument runs
// all eleven. Prints one [PASS]/[FAIL] line per criterion and exits non-zero
// when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ksmi/bench.hpp"
#include "ksmi/gaussmodel.hpp"
#include "ksmi/kdtree.hpp"
#include "ksmi/knn_mi.hpp"
#include "ksmi/ksmi_estimator.hpp"
#include "ksmi/neural_mi.hpp"
#include "ksmi/parallel.hpp"
#include "support/gradient_check.hpp"

namespace {

using namespace ksmi;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " FAILED(" << what << ")";
    }
  }
};

std::size_t workers() {
  return std::max(1u, std::thread::hardware_concurrency());
}

PairedSamples scalar_gaussian(double rho, std::size_t n, std::uint64_t seed) {
  const Matrix one = Matrix::Identity(1, 1);
  RngStream rng = RngStream::derive(seed, "acceptance_scalar", 0);
  return sample_joint(GaussianJoint(one, one, rho * one), n, rng);
}

StiefelFrame block_frame(const StiefelFrame& a, const StiefelFrame& b) {
  Matrix m = Matrix::Zero(a.d() + b.d(), a.k() + b.k());
  m.topLeftCorner(a.d(), a.k()) = a.cols();
  m.bottomRightCorner(b.d(), b.k()) = b.cols();
  return StiefelFrame(m);
}

// Shared by criteria 7 and 10.
struct EndToEnd {
  double estimate;
  double truth;
};

EndToEnd end_to_end() {
  const GaussianJoint model = make_common_signal_model(10, 2, 0);
  RngStream rng = RngStream::derive(7, "acceptance_e2e", 0);
  const PairedSamples data = sample_joint(model, 16000, rng);
  KsmiConfig cfg;
  cfg.k = 2;
  cfg.m = 500;
  cfg.seed = 7;
  cfg.threads = workers();
  const double estimate = estimate_ksmi(data, cfg).estimate;
  const double truth =
      gaussian_ksmi_exact_mc(model, 2, 5000, RngStream::derive(7, "acceptance_truth", 0),
                             workers())
          .estimate;
  return {estimate, truth};
}

// 1. KSG against the closed form at rho = 0.5, n = 16000, ten seeds.
void ac1(Verdict& v) {
  const double truth = -0.5 * std::log(0.75);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const double est = ksg_mi(scalar_gaussian(0.5, 16000, seed), {3, 1e-10});
    worst = std::max(worst, std::abs(est - truth));
  }
  v.detail << "max |ksg - 0.143841| over 10 seeds = " << worst;
  v.require(worst <= 0.02, "tolerance 0.02");
}

// 2. Exact / asymptotic ratio on the isotropic family.
void ac2(Verdict& v) {
  double ratio[2];
  const std::size_t ds[2] = {10, 40};
  for (int i = 0; i < 2; ++i) {
    const GaussianJoint model = make_isotropic_model(ds[i], 0.5);
    const auto exact = gaussian_ksmi_exact_mc(
        model, 1, 5000, RngStream::derive(2, "acceptance_ratio", ds[i]), workers());
    ratio[i] = exact.estimate / gaussian_ksmi_asymptotic(model, 1);
  }
  v.detail << "ratio d=10: " << ratio[0] << ", d=40: " << ratio[1];
  v.require(ratio[1] >= 0.85 && ratio[1] <= 1.15, "ratio at d=40 in [0.85, 1.15]");
  v.require(std::abs(ratio[1] - 1.0) < std::abs(ratio[0] - 1.0), "closer to 1 at d=40");
}

// 3. Per-projection std against the bound coefficient.
void ac3(Verdict& v) {
  double worst = 0.0;
  for (std::size_t d : {10, 20, 40}) {
    const GaussianJoint model = make_common_signal_model(d, 2, d);
    const OperatorNorms n = operator_norms(model);
    for (std::size_t k : {1, 2}) {
      const auto exact = gaussian_ksmi_exact_mc(
          model, k, 2000, RngStream::derive(3, "acceptance_std", d * 10 + k), workers());
      const double coeff = mc_error_bound(k, d, d, 1, n.sigma_x, n.sigma_y, n.fisher);
      worst = std::max(worst, exact.std / coeff);
      v.require(exact.std <= coeff, "d=" + std::to_string(d) + " k=" + std::to_string(k));
    }
  }
  v.detail << "max std / bound coefficient = " << worst;
}

// 4. Population k-SMI and its spread decay from d = 10 to d = 40.
void ac4(Verdict& v) {
  const std::size_t ds[3] = {10, 20, 40};
  double mean[3] = {0, 0, 0}, spread[3] = {0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    const GaussianJoint model = make_isotropic_model(ds[i], 0.5);
    for (std::uint64_t rep = 0; rep < 5; ++rep) {
      const auto r = gaussian_ksmi_exact_mc(
          model, 1, 2000, RngStream::derive(4 + rep, "acceptance_decay", ds[i]), workers());
      mean[i] += r.estimate / 5.0;
      spread[i] += r.std / 5.0;
    }
  }
  v.detail << "k-SMI " << mean[0] << " > " << mean[1] << " > " << mean[2] << "; std "
           << spread[0] << " > " << spread[1] << " > " << spread[2];
  v.require(mean[0] > mean[1] && mean[1] > mean[2], "k-SMI decreasing");
  v.require(spread[0] > spread[1] && spread[1] > spread[2], "std decreasing");
}

// 5. Structural properties on exact oracles.
void ac5(Verdict& v) {
  const std::size_t m = 2000;
  const GaussianJoint model = make_common_signal_model(8, 2, 5);

  const auto dep = gaussian_ksmi_exact_mc(model, 2, 200, RngStream(5, 0), workers());
  const auto ind =
      gaussian_ksmi_exact_mc(model.independent(), 2, 200, RngStream(5, 0), workers());
  v.require(ind.estimate == 0.0 && ind.std == 0.0, "independent gives exactly 0");
  v.require(dep.estimate > 0.0, "dependent gives > 0");

  const auto nested =
      gaussian_ksmi_exact_mc_nested(model, {1, 2}, m, RngStream(5, 1), workers());
  const double full = gaussian_mi(model);
  const double se1 = nested[0].std / std::sqrt(double(m));
  const double se2 = nested[1].std / std::sqrt(double(m));
  v.require(nested[0].estimate <= nested[1].estimate + 3.0 * (se1 + se2), "SMI_1 <= SMI_2");
  v.require(nested[1].estimate <= full + 3.0 * se2, "SMI_2 <= I");

  const GaussianJoint p1 = make_common_signal_model(5, 1, 6);
  const GaussianJoint p2 = make_isotropic_model(4, 0.6);
  const GaussianJoint sum = GaussianJoint::direct_sum(p1, p2);
  const auto r1 = gaussian_ksmi_exact_mc(p1, 1, m, RngStream(5, 2), workers());
  const auto r2 = gaussian_ksmi_exact_mc(p2, 1, m, RngStream(5, 3), workers());
  RngStream frames(5, 4);
  double total = 0.0, total_sq = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto a1 = sample_stiefel(1, 5, frames), b1 = sample_stiefel(1, 5, frames);
    const auto a2 = sample_stiefel(1, 4, frames), b2 = sample_stiefel(1, 4, frames);
    const double x = projected_gaussian_mi(sum, block_frame(a1, a2), block_frame(b1, b2));
    total += x;
    total_sq += x * x;
  }
  const double joint_mean = total / double(m);
  const double joint_var = (total_sq - double(m) * joint_mean * joint_mean) / double(m - 1);
  const double slack =
      3.0 * std::sqrt((joint_var + r1.std * r1.std + r2.std * r2.std) / double(m));
  const double gap = joint_mean - (r1.estimate + r2.estimate);
  v.require(std::abs(gap) <= slack, "tensorization");

  double scale_gap = 0.0;
  for (double s : {1e-3, 0.5, 7.0, -3.0}) {
    const auto scaled =
        gaussian_ksmi_exact_mc(model.scaled(s), 2, 500, RngStream(5, 5), workers());
    const auto base = gaussian_ksmi_exact_mc(model, 2, 500, RngStream(5, 5), workers());
    scale_gap = std::max(scale_gap, std::abs(scaled.estimate - base.estimate));
  }
  v.require(scale_gap <= 1e-10, "scale invariance");
  v.detail << "SMI_1=" << nested[0].estimate << " SMI_2=" << nested[1].estimate
           << " I=" << full << "; tensorization gap " << gap << " (slack " << slack
           << "); scale gap " << scale_gap;
}

// 6. Entropy Lipschitz inequality on random anisotropic marginals.
void ac6(Verdict& v) {
  RngStream rng(6, 0);
  double worst = -INFINITY;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t d = 2 + rng.below(11);
    const std::size_t k = 1 + rng.below(d);
    Vector spectrum(d);
    for (std::size_t i = 0; i < d; ++i) spectrum(i) = std::exp(4.0 * rng.uniform() - 2.0);
    const Matrix q = sample_stiefel(d, d, rng).cols();
    const Matrix sx = q * spectrum.asDiagonal() * q.transpose();
    const GaussianJoint model(0.5 * (sx + sx.transpose()), Matrix::Identity(d, d),
                              Matrix::Zero(d, d));
    RngStream trial = rng.substream("trial", t);
    worst = std::max(worst, lipschitz_check(model, k, 1, trial));
  }
  v.detail << "max violation over 1000 cases = " << worst;
  v.require(worst <= 1e-9, "violation <= 1e-9");
}

// 7. End-to-end estimator against the exact oracle.
void ac7(Verdict& v) {
  const EndToEnd r = end_to_end();
  v.detail << "estimate " << r.estimate << " vs exact " << r.truth << " (error "
           << r.estimate - r.truth << ")";
  v.require(std::abs(r.estimate - r.truth) <= 0.03, "tolerance 0.03");
}

// 8. Independence testing AUC.
void ac8(Verdict& v) {
  TrialSpec spec;
  SyntheticModelSpec model;
  model.family = ModelFamily::common_signal;
  model.d = 10;
  model.rank = 2;
  model.seed = 8;
  spec.model = model;
  spec.d_grid = {10};
  spec.k_grid = {2};
  spec.n_grid = {500, 1000, 2000, 4000};
  spec.m = 1000;
  spec.trials = 100;
  spec.seed = 8;
  spec.threads = workers();
  const auto rows = run_independence_benchmark(spec);
  v.detail << "AUC by n:";
  for (const auto& r : rows) v.detail << " " << r.n << "->" << r.auc;
  v.require(rows.size() == 4, "four cells");
  if (rows.size() != 4) return;
  v.require(rows.back().auc >= 0.9, "AUC >= 0.9 at n=4000");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    v.require(rows[i].auc >= rows[i - 1].auc - 0.05, "non-decreasing in n");
  }
}

// 9. Neural estimator accuracy and gradient check.
void ac9(Verdict& v) {
  const double truth = 0.830366;
  std::vector<double> errors(10);
  ksmi::parallel_for(10, workers(), [&](std::size_t seed) {
    TrainConfig cfg;
    cfg.hidden = 64;
    cfg.steps = 4000;
    cfg.seed = seed;
    errors[seed] = train_dv_mi(scalar_gaussian(0.9, 16000, 100 + seed), cfg).estimate - truth;
  });
  double worst = 0.0;
  for (double e : errors) worst = std::max(worst, std::abs(e));
  const auto grad = ksmi::testing::gradient_suite(9);
  v.detail << "max |dv - 0.830366| over 10 seeds = " << worst
           << "; gradient max rel error " << grad.max_rel_error << " over " << grad.checked
           << " coordinates";
  v.require(worst <= 0.08, "tolerance 0.08");
  v.require(grad.max_rel_error < 1e-4, "gradient check");
}

// 10. Residual on Gaussian data within the criterion-7 band plus MC noise.
void ac10(Verdict& v) {
  const EndToEnd e2e = end_to_end();
  const double bias = std::abs(e2e.estimate - e2e.truth);
  const GaussianJoint model = make_common_signal_model(10, 2, 0);
  RngStream rng = RngStream::derive(10, "acceptance_residual", 0);
  const PairedSamples data = sample_joint(model, 16000, rng);
  KsmiConfig cfg;
  cfg.k = 2;
  cfg.m = 500;
  cfg.seed = 10;
  cfg.threads = workers();
  const ResidualReport r = residual_vs_gaussian(data, cfg, 5000);
  const double mc = std::hypot(r.ksmi_hat_mc_std, r.ksmi_gauss_mc_std);
  const double band = bias + 3.0 * mc;
  v.detail << "residual " << r.residual << ", band " << band << " (bias " << bias
           << " + 3 x MC std " << mc << ")";
  v.require(std::abs(r.residual) <= band, "residual within band");
}

// 11. Exact agreement with O(n^2) references.
void ac11(Verdict& v) {
  RngStream rng(11, 0);
  std::size_t instances = 0;
  bool radius_ok = true, count_ok = true, auc_ok = true;
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 5 + rng.below(60);
    const std::size_t d = 1 + rng.below(4);
    Matrix p = sample_gaussian_matrix(n, d, rng);
    if (t % 3 == 0) p = p.array().round();
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> dist;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) dist.push_back((p.row(i) - p.row(j)).cwiseAbs().maxCoeff());
      }
      std::sort(dist.begin(), dist.end());
      const std::size_t k = 1 + rng.below(n - 1);
      radius_ok &= knn_radius(p, i, std::min<std::size_t>(k, 64)) ==
                   dist[std::min<std::size_t>(k, 64) - 1];
      const double r = rng.below(3) == 0 ? dist[rng.below(n - 1)] : 2.0 * rng.uniform();
      const auto brute = static_cast<std::size_t>(
          std::count_if(dist.begin(), dist.end(), [&](double x) { return x < r; }));
      count_ok &= count_within(p, i, r) == brute;
    }
    std::vector<double> null(1 + rng.below(40)), deps(1 + rng.below(40));
    for (auto& x : null) x = static_cast<double>(rng.below(15));
    for (auto& x : deps) x = static_cast<double>(rng.below(15)) + 0.5 * (t % 2);
    double wins = 0.0;
    for (double a : deps) {
      for (double b : null) wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
    }
    auc_ok &= auc_from_scores(null, deps) ==
              wins / (double(null.size()) * double(deps.size()));
    ++instances;
  }
  v.detail << instances << " instances each";
  v.require(radius_ok, "knn_radius");
  v.require(count_ok, "count_within");
  v.require(auc_ok, "auc_from_scores");
}

struct Criterion {
  const char* name;
  double limit_seconds;
  std::function<void(Verdict&)> body;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {"KSG Gaussian oracle", 10, ac1},
      {"asymptotic ratio", 30, ac2},
      {"MC std under bound", 60, ac3},
      {"dimension decay", 60, ac4},
      {"property suite", 60, ac5},
      {"Lipschitz inequality", 10, ac6},
      {"end-to-end estimate", 300, ac7},
      {"independence AUC", 900, ac8},
      {"neural estimator", 600, ac9},
      {"Gaussian residual", 300, ac10},
      {"brute-force equivalence", 10, ac11},
  };
  return all;
}

bool run_one(std::size_t id) {
  const Criterion& c = criteria()[id - 1];
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  try {
    c.body(v);
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail << " exception: " << e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > c.limit_seconds) {
    v.pass = false;
    v.detail << " FAILED(runtime)";
  }
  std::printf("[%s] AC%zu %s: %s [%.1fs, limit %.0fs]\n", v.pass ? "PASS" : "FAIL", id,
              c.name, v.detail.str().c_str(), secs, c.limit_seconds);
  std::fflush(stdout);
  return v.pass;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::size_t> ids;
  for (int i = 1; i < argc; ++i) {
    const long id = std::strtol(argv[i], nullptr, 10);
    if (id < 1 || id > static_cast<long>(criteria().size())) {
      std::fprintf(stderr, "unknown criterion '%s' (1..%zu)\n", argv[i], criteria().size());
      return 2;
    }
    ids.push_back(static_cast<std::size_t>(id));
  }
  if (ids.empty()) {
    for (std::size_t i = 1; i <= criteria().size(); ++i) ids.push_back(i);
  }
  bool ok = true;
  for (std::size_t id : ids) ok &= run_one(id);
  return ok ? 0 : 1;
}
