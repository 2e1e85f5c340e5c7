// Copyright 2026 The mpsgan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset. The exit status is nonzero when any hard
// criterion fails; soft criteria are reported only.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mpsgan/mpsgan.hpp"
#include "oracles.hpp"

using namespace mpsgan;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  bool soft;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

MpsEnsemble seeded(std::size_t C, std::size_t N, std::size_t D, const Embedding& e, double sigma,
                   std::uint64_t seed) {
  RngStream rng(seed);
  return init_ensemble(C, N, D, e.dim(), e, sigma, rng);
}

void set_site(MpsEnsemble& m, std::size_t c, std::size_t n, const std::vector<Matrix>& full) {
  for (std::size_t l = 0; l < m.bond(); ++l)
    for (std::size_t r = 0; r < m.bond(); ++r)
      for (std::size_t e = 0; e < m.phys(); ++e)
        m.delta()[m.index(c, n, l, r, e)] = full[e](l, r) - (l == r ? m.base() : 0.0);
}

// ---------------------------------------------------------------------------

Outcome binning_golden() {
  const auto t0 = Clock::now();
  const std::vector<std::size_t> bins{10, 100, 1000, 10000};
  const std::vector<double> reference{3.09e-3, 2.55e-5, 2.51e-7, 2.50e-9};
  const auto rows = binning_experiment(bins, 100);
  bool ok = true;
  std::ostringstream os;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double ratio = rows[i].squared_error / reference[i];
    ok = ok && ratio >= 0.1 && ratio <= 10.0;
    os << rows[i].bins << ":" << fmt("%.3g", rows[i].squared_error) << " ";
  }
  const double slope = loglog_slope(rows);
  const double secs = seconds_since(t0);
  ok = ok && slope >= -2.2 && slope <= -1.8 && secs < 10.0;
  os << "slope=" << fmt("%.3f", slope) << " time=" << fmt("%.2fs", secs);
  return {ok, os.str()};
}

Outcome quantile_symmetry() {
  const auto rows = binning_experiment({100000}, 1);
  const double err = rows[0].squared_error;
  return {err < 1e-10, "bins=1e5 |x-0.5|^2=" + fmt("%.3g", err)};
}

Outcome gram_diagonality() {
  const auto t0 = Clock::now();
  double worst = 0;
  const auto fourier = gram_matrix(Embedding(EmbeddingKind::Fourier, 10), 100000);
  const auto legendre = gram_matrix(Embedding(EmbeddingKind::Legendre, 10), 100000);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) {
      const double f = i != j ? 0.0 : (i == 0 ? 1.0 : 0.5);
      const double l = i != j ? 0.0 : 2.0 / (2.0 * double(i) + 1.0);
      worst = std::max({worst, std::abs(fourier.b(i, j) - f), std::abs(legendre.b(i, j) - l)});
    }
  const bool spin = gram_matrix(Embedding(EmbeddingKind::SpinCoherent, 4), 100000).generation_capable;
  const double secs = seconds_since(t0);
  const bool ok = worst < 1e-5 && fourier.generation_capable && legendre.generation_capable && !spin && secs < 5;
  return {ok, "max|B-diag|=" + fmt("%.2g", worst) + " spin-coherent capable=" + (spin ? "yes" : "no") +
                  " time=" + fmt("%.2fs", secs)};
}

Outcome dense_oracle() {
  const auto t0 = Clock::now();
  const EmbeddingKind kinds[] = {EmbeddingKind::Fourier, EmbeddingKind::Legendre};
  double worst = 0;
  std::size_t cases = 0;
  for (std::size_t N = 1; N <= 6; ++N)
    for (std::size_t D = 1; D <= 3; ++D)
      for (std::size_t d = 1; d <= 3; ++d)
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
          const Embedding e(d == 2 && seed % 3 == 0 ? EmbeddingKind::SinCos : kinds[seed % 2], d);
          const auto m = seeded(2, N, D, e, 0.5, seed * 1000 + N * 100 + D * 10 + d);
          RngStream rng(seed);
          std::vector<double> x(N);
          for (double& v : x) v = rng.uniform(e.lower(), e.upper());
          const auto scores = classify(m, x);
          for (std::size_t c = 0; c < 2; ++c) {
            const double y = oracle::dense_amplitude(m, c, x);
            worst = std::max(worst, oracle::relative_error(scores[c].value(), y, 1e-300));
            const double p = std::exp(2.0 * scores[c].log_abs());
            worst = std::max(worst, oracle::relative_error(p, oracle::dense_density(m, c, x), 1e-300));
          }
          ++cases;
        }
  const double secs = seconds_since(t0);
  return {worst < 1e-9 && secs < 30, std::to_string(cases) + " models, max rel err=" + fmt("%.2g", worst) +
                                         " time=" + fmt("%.2fs", secs)};
}

Outcome marginal_oracle() {
  const auto t0 = Clock::now();
  const Embedding e(EmbeddingKind::Fourier, 3);
  const auto m = seeded(2, 3, 3, e, 0.4, 2024);
  const auto gram = gram_matrix(e);
  const auto rdm = reduced_density_matrix(m, 0, 1, {}, gram);
  // Left boundary row vectors of site 0 and right column vectors of site 2 on
  // a 2000-point midpoint grid.
  const std::size_t n = 2000;
  const auto g = oracle::midpoints(0.0, 1.0, n);
  const std::size_t D = m.bond();
  std::vector<double> left(n * D), right(n * D);
  for (std::size_t i = 0; i < n; ++i) {
    const auto phi = oracle::embed(e, g[i]);
    for (std::size_t k = 0; k < D; ++k) {
      double a = 0, b = 0;
      for (std::size_t j = 0; j < 3; ++j) {
        a += oracle::site_entry(m, 0, 0, 0, k, j) * phi[j];
        b += oracle::site_entry(m, 0, 2, k, 0, j) * phi[j];
      }
      left[i * D + k] = a;
      right[i * D + k] = b;
    }
  }
  RngStream rng(5);
  double worst = 0;
  std::vector<double> probes(50), grid_vals(50), rdm_vals(50);
  for (std::size_t p = 0; p < 50; ++p) {
    const double x = rng.uniform();
    const auto phi = oracle::embed(e, x);
    std::vector<double> mid(D * D, 0.0);
    for (std::size_t a = 0; a < D; ++a)
      for (std::size_t b = 0; b < D; ++b)
        for (std::size_t j = 0; j < 3; ++j) mid[a * D + b] += oracle::site_entry(m, 0, 1, a, b, j) * phi[j];
    // u_i = left_i · M, then y_ij = u_i · right_j.
    std::vector<double> u(n * D, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < D; ++a)
        for (std::size_t b = 0; b < D; ++b) u[i * D + b] += left[i * D + a] * mid[a * D + b];
    double total = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double y = 0;
        for (std::size_t b = 0; b < D; ++b) y += u[i * D + b] * right[j * D + b];
        total += y * y;
      }
    grid_vals[p] = total / double(n * n);
    rdm_vals[p] = pdf_eval(rdm, e, x);
  }
  // The reduced density is stored on a rescaled mantissa; compare after
  // restoring its scale.
  for (std::size_t p = 0; p < 50; ++p) {
    worst = std::max(worst, oracle::relative_error(rdm_vals[p] * std::exp(rdm.log_scale), grid_vals[p]));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 60, "50 probes, max rel err=" + fmt("%.2g", worst) + " time=" + fmt("%.1fs", secs)};
}

// ∫_0^t cos(jπx) cos(kπx) dx.
double cos_product_integral(std::size_t j, std::size_t k, double t) {
  const double pi = std::numbers::pi;
  auto s = [&](double w) { return w == 0 ? t : std::sin(w * pi * t) / (w * pi); };
  return 0.5 * (s(double(j) - double(k)) + s(double(j) + double(k)));
}

Outcome sampler_statistics() {
  const auto t0 = Clock::now();
  // 1-D: single-site Fourier model, y(x) = Σ_e a_e cos(eπx).
  const Embedding e(EmbeddingKind::Fourier, 4);
  const auto m1 = seeded(2, 1, 2, e, 0.4, 606);
  std::vector<double> a(4);
  for (std::size_t k = 0; k < 4; ++k) a[k] = m1.site(0, 0, 0, 0, k);
  auto analytic_cdf = [&](double t) {
    double v = 0;
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t k = 0; k < 4; ++k) v += a[j] * a[k] * cos_product_integral(j, k, t);
    return v;
  };
  const double norm = analytic_cdf(1.0);
  const auto gram = gram_matrix(e);
  const std::size_t S = 100000;
  RngStream rng(7);
  std::vector<double> xs(S);
  {
    const Sampler sampler(m1, 0, gram);
    std::vector<double> nu(1);
    for (auto& x : xs) {
      nu[0] = rng.uniform();
      x = sampler.sample(nu)[0];
    }
  }
  std::sort(xs.begin(), xs.end());
  double ks = 0;
  for (std::size_t i = 0; i < S; ++i) {
    const double f = analytic_cdf(xs[i]) / norm;
    ks = std::max({ks, std::abs(f - double(i) / S), std::abs(f - double(i + 1) / S)});
  }

  // 2-D: two sites, histogram on an 8×8 grid vs midpoint-integrated density.
  const Embedding e2(EmbeddingKind::Legendre, 3);
  const auto m2 = seeded(2, 2, 2, e2, 0.4, 607);
  const auto gram2 = gram_matrix(e2);
  const std::size_t H = 8, sub = 40;
  std::vector<double> hist(H * H, 0.0), want(H * H, 0.0);
  {
    const Sampler sampler(m2, 1, gram2);
    std::vector<double> nu(2);
    for (std::size_t s = 0; s < S; ++s) {
      nu[0] = rng.uniform();
      nu[1] = rng.uniform();
      const auto x = sampler.sample(nu);
      const auto bin = [&](double v) { return std::min(H - 1, std::size_t((v + 1.0) / 2.0 * double(H))); };
      hist[bin(x[0]) * H + bin(x[1])] += 1.0 / double(S);
    }
  }
  const auto g = oracle::midpoints(-1.0, 1.0, H * sub);
  double total = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double p = oracle::dense_density(m2, 1, {g[i], g[j]});
      want[(i / sub) * H + j / sub] += p;
      total += p;
    }
  double tv = 0;
  for (std::size_t k = 0; k < H * H; ++k) tv += 0.5 * std::abs(hist[k] - want[k] / total);
  const double secs = seconds_since(t0);
  return {ks < 0.01 && tv < 0.02 && secs < 120,
          "KS=" + fmt("%.4f", ks) + " TV(8x8)=" + fmt("%.4f", tv) + " time=" + fmt("%.1fs", secs)};
}

Outcome spd_property() {
  RngStream rng(31);
  double worst = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t N = 2 + rng.index(4), D = 1 + rng.index(4), d = 2 + rng.index(4);
    const Embedding e(t % 2 ? EmbeddingKind::Fourier : EmbeddingKind::Legendre, d);
    const auto m = seeded(2, N, D, e, 0.2 + rng.uniform(), 9000 + t);
    const std::size_t site = rng.index(N);
    std::map<std::size_t, double> cond;
    for (std::size_t j = 0; j < N; ++j)
      if (j != site && rng.uniform() < 0.5) cond[j] = rng.uniform(e.lower(), e.upper());
    const auto rdm = reduced_density_matrix(m, rng.index(2), site, cond, gram_matrix(e, 20000));
    Eigen::MatrixXd v(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) v(i, j) = rdm.v(i, j);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(v).eigenvalues();
    worst = std::min(worst, ev.minCoeff() / ev.maxCoeff());
  }
  return {worst >= -1e-8, "200 cases, min λ/λmax=" + fmt("%.3g", worst)};
}

Outcome gradient_check() {
  std::ostringstream os;
  bool ok = true;
  for (auto kind : {EmbeddingKind::SinCos, EmbeddingKind::SpinCoherent, EmbeddingKind::Fourier,
                    EmbeddingKind::Legendre}) {
    const Embedding e(kind, kind == EmbeddingKind::SinCos ? 2 : 5);
    auto m = seeded(3, 4, 3, e, 0.3, 77);
    RngStream rng(78);
    Dataset batch{Matrix(8, 4), {}, 3};
    for (std::size_t i = 0; i < 8; ++i) {
      for (std::size_t n = 0; n < 4; ++n) batch.features(i, n) = rng.uniform(e.lower(), e.upper());
      batch.labels.push_back(i % 3);
    }
    const auto grad = grad_loss(m, batch);
    auto loss = [&] { return cross_entropy_loss(m, batch); };
    double worst = 0;
    for (int p = 0; p < 20; ++p) {
      const std::size_t k = rng.index(m.delta().size());
      const double fd = oracle::central_difference(loss, m.delta()[k], 1e-5);
      worst = std::max(worst, oracle::relative_error(grad[k], fd, 1e-6));
    }
    ok = ok && worst < 1e-4;
    os << to_string(kind) << "=" << fmt("%.2g", worst) << " ";
  }
  return {ok, os.str()};
}

Outcome scale_invariance() {
  double worst_p = 0, worst_x = 0;
  RngStream rng(41);
  for (int t = 0; t < 100; ++t) {
    const Embedding e(t % 2 ? EmbeddingKind::Fourier : EmbeddingKind::Legendre, 4);
    const auto m = seeded(3, 8, 3, e, 0.3, 4000 + t);
    std::vector<double> x(8);
    for (double& v : x) v = rng.uniform(e.lower(), e.upper());
    const auto on = predict_proba(m, x, Rescale::On);
    const auto off = predict_proba(m, x, Rescale::Off);
    for (std::size_t c = 0; c < 3; ++c) worst_p = std::max(worst_p, std::abs(on[c] - off[c]));

    Matrix g(4, 4), v(4, 4);
    for (double& w : g.data()) w = rng.normal();
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j)
        for (std::size_t k = 0; k < 4; ++k) v(i, j) += g(i, k) * g(j, k);
    const double s = std::exp(rng.uniform(-20, 20));
    Matrix vs = v;
    vs *= s;
    const auto c1 = build_cdf(v, e, 1000);
    const auto c2 = build_cdf(vs, e, 1000);
    for (double nu : {0.0, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0})
      worst_x = std::max(worst_x, std::abs(inverse_cdf(c1, nu) - inverse_cdf(c2, nu)));
  }
  return {worst_p <= 1e-10 && worst_x <= 1e-12,
          "max|Δp|=" + fmt("%.2g", worst_p) + " max|Δx|=" + fmt("%.2g", worst_x)};
}

struct PreparedData {
  Split unit;
  Split support;
};

PreparedData prepare(const std::string& which, std::uint64_t seed, const Embedding& e) {
  RngStream rng(seed);
  Dataset ds = which == "moons" ? gen_moons(2000, 0.1, rng) : gen_spiral(8000, rng);
  RngStream split_rng = rng.derive(0x5b1);
  Split unit = stratified_split(ds, split_rng);
  Split support{to_support(unit.train, e), to_support(unit.validation, e)};
  return {std::move(unit), std::move(support)};
}

TrainResult pretrain(const Split& s, std::uint64_t seed, std::size_t bond = 4) {
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.seed = seed;
  const auto m = make_model(s.train, {EmbeddingKind::Fourier, 10, bond}, cfg.sigma_init, seed);
  return train_classifier(m, s.train, s.validation, cfg);
}

Outcome classification() {
  const Embedding e(EmbeddingKind::Fourier, 10);
  std::ostringstream os;
  bool ok = true;
  for (const char* which : {"moons", "spiral"}) {
    const auto t0 = Clock::now();
    const auto data = prepare(which, 1, e);
    const auto r = pretrain(data.support, 1);
    const double acc = accuracy(r.model, data.support.validation);
    const double secs = seconds_since(t0);
    const double need = std::string(which) == "moons" ? 0.95 : 0.90;
    ok = ok && acc >= need && r.history.size() <= 200 && secs < 600;
    os << which << "=" << fmt("%.4f", acc) << " (" << r.history.size() << " epochs, " << fmt("%.0fs", secs) << ") ";
  }
  return {ok, os.str()};
}

struct SampleQuality {
  double fid = 0;
  double outliers = 0;
};

// Per-class averages over generated samples matching the training class sizes.
SampleQuality sample_quality(const MpsEnsemble& m, const Dataset& train, std::uint64_t seed) {
  RngStream rng(seed);
  const auto counts = train.class_counts();
  const auto s = generate_samples(m, gram_matrix(m.embedding()), counts, rng);
  SampleQuality q;
  for (std::size_t c = 0; c < train.classes; ++c) {
    q.fid += fid_like(train.class_points(c), s.class_points(c)) / double(train.classes);
    q.outliers += outlier_rate(train.class_points(c), s.class_points(c)) / double(train.classes);
  }
  return q;
}

Outcome gan_improvement() {
  const auto t0 = Clock::now();
  const Embedding e(EmbeddingKind::Fourier, 10);
  std::ostringstream os;
  bool ok = true;
  for (const char* which : {"spiral", "moons"}) {
    std::vector<double> fid_pre, fid_post, out_pre, out_post;
    bool floor_ok = true;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto data = prepare(which, seed, e);
      const auto base = pretrain(data.support, seed);
      const auto pre = sample_quality(base.model, data.support.train, seed + 50);
      GanConfig cfg;
      cfg.seed = seed;
      TrainConfig cls;
      cls.seed = seed;
      const auto gan = train_gan(base.model, data.support.train, data.support.validation, cfg, cls);
      const auto post = sample_quality(gan.model, data.support.train, seed + 50);
      floor_ok = floor_ok && accuracy(gan.model, data.support.validation) >= gan.accuracy_floor;
      fid_pre.push_back(pre.fid);
      fid_post.push_back(post.fid);
      out_pre.push_back(pre.outliers);
      out_post.push_back(post.outliers);
    }
    const bool fid_ok = median(fid_post) < median(fid_pre);
    const bool out_ok = median(out_post) < median(out_pre);
    ok = ok && fid_ok && out_ok && floor_ok;
    os << which << ": FID " << fmt("%.4g", median(fid_pre)) << "->" << fmt("%.4g", median(fid_post))
       << " outliers " << fmt("%.3f", median(out_pre)) << "->" << fmt("%.3f", median(out_post))
       << " floor " << (floor_ok ? "kept" : "BROKEN") << "; ";
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 1800;
  os << "time=" << fmt("%.0fs", secs);
  return {ok, os.str()};
}

Outcome bond_saturation() {
  const auto t0 = Clock::now();
  const Embedding e(EmbeddingKind::Fourier, 10);
  RngStream rng(1);
  Dataset ds = gen_spiral(8000, rng);
  RngStream split_rng = rng.derive(0x5b1);
  const Split unit = stratified_split(ds, split_rng);
  TrainConfig cfg;
  cfg.epochs = 200;
  const auto rows = bond_dim_sweep(unit, {4, 30}, {1, 2, 3}, {EmbeddingKind::Fourier, 10, 4}, cfg);
  std::vector<double> d4, d30;
  for (const auto& r : rows) (r.bond == 4 ? d4 : d30).push_back(r.val_accuracy);
  const double a4 = median(d4), a30 = median(d30);
  return {std::abs(a4 - a30) <= 0.01, "median acc D=4 " + fmt("%.4f", a4) + ", D=30 " + fmt("%.4f", a30) +
                                          " time=" + fmt("%.0fs", seconds_since(t0))};
}

Outcome robustness_trend() {
  const auto t0 = Clock::now();
  RngStream rng(1);
  Dataset ds = gen_spiral(2000, rng);
  RngStream split_rng = rng.derive(0x5b1);
  const Split unit = stratified_split(ds, split_rng);
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.early_stop_patience = 15;
  const std::vector<double> sigmas{0.0, 0.5};
  std::map<std::pair<int, double>, std::vector<double>> acc;
  for (auto kind : {EmbeddingKind::Fourier, EmbeddingKind::Legendre}) {
    const auto rows = robustness_sweep(unit, sigmas, {1, 2, 3}, {NoiseMode::EvalNoise}, {kind, 20, 50}, cfg);
    for (const auto& r : rows) acc[{int(kind), r.sigma}].push_back(r.accuracy);
  }
  const double f0 = median(acc[{int(EmbeddingKind::Fourier), 0.0}]);
  const double l0 = median(acc[{int(EmbeddingKind::Legendre), 0.0}]);
  const double f1 = median(acc[{int(EmbeddingKind::Fourier), sigmas.back()}]);
  const double l1 = median(acc[{int(EmbeddingKind::Legendre), sigmas.back()}]);
  return {l0 >= f0 && f1 >= l1, "σ=0: legendre " + fmt("%.4f", l0) + " fourier " + fmt("%.4f", f0) + "; σ=" +
                                     fmt("%g", sigmas.back()) + ": fourier " + fmt("%.4f", f1) + " legendre " +
                                     fmt("%.4f", l1) + " time=" + fmt("%.0fs", seconds_since(t0))};
}

Outcome gauge_covariance() {
  RngStream rng(91);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t N = 2 + rng.index(5), D = 2 + rng.index(3);
    const Embedding e(t % 2 ? EmbeddingKind::Fourier : EmbeddingKind::Legendre, 3);
    auto m = seeded(2, N, D, e, 0.3, 7000 + t);
    std::vector<double> x(N);
    for (double& v : x) v = rng.uniform(e.lower(), e.upper());
    const auto before = classify(m, x);
    const std::size_t c = rng.index(2), n = rng.index(N - 1);
    Eigen::MatrixXd X = 2.0 * Eigen::MatrixXd::Identity(Eigen::Index(D), Eigen::Index(D));
    for (std::size_t i = 0; i < D; ++i)
      for (std::size_t j = 0; j < D; ++j) X(Eigen::Index(i), Eigen::Index(j)) += rng.uniform(-1, 1);
    const Eigen::MatrixXd Xi = X.inverse();
    Matrix gx(D, D), gxi(D, D);
    for (std::size_t i = 0; i < D; ++i)
      for (std::size_t j = 0; j < D; ++j) {
        gx(i, j) = X(Eigen::Index(i), Eigen::Index(j));
        gxi(i, j) = Xi(Eigen::Index(i), Eigen::Index(j));
      }
    std::vector<Matrix> left, right;
    for (std::size_t k = 0; k < 3; ++k) {
      left.push_back(m.slice(c, n, k) * gx);
      right.push_back(gxi * m.slice(c, n + 1, k));
    }
    set_site(m, c, n, left);
    set_site(m, c, n + 1, right);
    const auto after = classify(m, x);
    for (std::size_t k = 0; k < 2; ++k)
      worst = std::max(worst, oracle::relative_error(after[k].value(), before[k].value()));
  }
  return {worst <= 1e-8, "100 cases, max rel err=" + fmt("%.2g", worst)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "binning accuracy golden", false, binning_golden},
      {2, "exact quantile symmetry", false, quantile_symmetry},
      {3, "Gram diagonality", false, gram_diagonality},
      {4, "dense-oracle equivalence", false, dense_oracle},
      {5, "marginal-oracle equivalence", false, marginal_oracle},
      {6, "sampler statistical correctness", false, sampler_statistics},
      {7, "SPD property", false, spd_property},
      {8, "gradient check", false, gradient_check},
      {9, "scale/rescale invariance", false, scale_invariance},
      {10, "classification at desk scale", false, classification},
      {11, "GAN directional improvement", false, gan_improvement},
      {12, "bond-dimension saturation", false, bond_saturation},
      {13, "robustness trend (soft)", true, robustness_trend},
      {14, "gauge covariance", false, gauge_covariance},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int hard_failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome r;
    try {
      r = c.run();
    } catch (const std::exception& err) {
      r = {false, std::string("exception: ") + err.what()};
    }
    const char* tag = r.pass ? "PASS" : (c.soft ? "SOFT-FAIL" : "FAIL");
    std::printf("[%s] %2d %s: %s\n", tag, c.id, c.name, r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass && !c.soft) ++hard_failures;
  }
  std::printf("%d hard failure(s)\n", hard_failures);
  return hard_failures == 0 ? 0 : 1;
}
