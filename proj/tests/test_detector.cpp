#include "doctest.h"
#include "detector.hpp"
#include "errors.hpp"
#include "oracles.hpp"
#include "rng.hpp"
#include "schedules.hpp"
#include "synthtask.hpp"

#include <cmath>
#include <numeric>
#include <vector>

using namespace crda;

namespace {

SampleSet random_batch(const TaskConfig& cfg, int n_real, int n_fake, Rng& rng) {
  const RegionPool pool = build_region_pool({0.2, 0.2, 0.25, 0.35}, 1.0);
  SampleSet reals = generate_real(cfg, n_real + n_fake, rng);
  SampleSet out;
  for (int i = 0; i < n_real; ++i) out.push_back(reals[static_cast<size_t>(i)]);
  for (int i = 0; i < n_fake; ++i) {
    const int op = static_cast<int>(rng.uniform_int(kNumOps));
    out.push_back(apply_augmentation(reals[static_cast<size_t>(n_real + i)], op,
                                     pool.regions[14], cfg));
  }
  return out;
}

// A detector whose hidden pre-activations stay away from the ReLU kinks on
// every sample of the batch, so finite differences are trustworthy.
Detector smooth_detector(const SampleSet& batch, int hidden, int latent, Rng& rng) {
  for (int tries = 0; tries < 200; ++tries) {
    Detector det = detector_init(static_cast<int>(batch[0].features.size()),
                                 hidden, latent, rng);
    const BatchForward fwd = batch_forward(det, batch);
    bool smooth = true;
    for (const Mlp2Cache& c : fwd.caches) {
      for (double h : c.h_pre) smooth = smooth && std::abs(h) > 1e-3;
      for (double y : c.y_pre) smooth = smooth && std::abs(y) > 1e-3;
    }
    if (smooth) return det;
  }
  FAIL("no kink-free detector found");
  return Detector{};
}

}  // namespace

TEST_CASE("sigmoid matches frozen values and stays stable at extremes") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(2.0) == doctest::Approx(0.8807970779778823).epsilon(1e-15));
  CHECK(sigmoid(-2.0) == doctest::Approx(1.0 - 0.8807970779778823).epsilon(1e-15));
  CHECK(sigmoid(800.0) == 1.0);
  CHECK(sigmoid(-800.0) >= 0.0);
  CHECK(sigmoid(-800.0) < 1e-300);
  CHECK(std::isfinite(sigmoid(-800.0)));
}

TEST_CASE("detector layout appends the head behind the backbone") {
  Rng rng(1);
  const Detector det = detector_init(23, 64, 32, rng);
  CHECK(det.params.size() == det.param_count());
  CHECK(det.param_count() == det.backbone_dims().param_count() + 32 + 1);
  const double bound = 1.0 / std::sqrt(32.0);
  for (size_t i = det.head_off(); i < det.params.size(); ++i) {
    CHECK(std::abs(det.params[i]) <= bound);
  }
  Rng r2(1);
  CHECK(det.params == detector_init(23, 64, 32, r2).params);
}

TEST_CASE("classification matches a hand-built one-unit network") {
  Detector det;
  det.input_dim = 1;
  det.hidden = 1;
  det.latent = 1;
  // backbone [w1=2, b1=0.5, w2=1, b2=0], head [w=3, b=-1]
  det.params = {2.0, 0.5, 1.0, 0.0, 3.0, -1.0};
  const std::vector<double> x{1.0};
  const std::vector<double> z = forward_latent(det, x);
  REQUIRE(z.size() == 1);
  CHECK(z[0] == doctest::Approx(2.5).epsilon(1e-12));
  const Classification c = classify_input(det, x);
  CHECK(c.logit == doctest::Approx(6.5).epsilon(1e-12));
  CHECK(c.prob_fake == doctest::Approx(sigmoid(6.5)).epsilon(1e-12));
  // The backbone output ReLU clamps negative latents to zero.
  const std::vector<double> zneg = forward_latent(det, {-1.0});
  CHECK(zneg[0] == 0.0);
  const Classification c0 = classify(det, zneg);
  CHECK(c0.logit == doctest::Approx(-1.0).epsilon(1e-12));  // just the head bias
}

TEST_CASE("cross entropy matches frozen examples and clamps") {
  CHECK(ce_loss({0.5}, {1}) == doctest::Approx(0.6931471805599453).epsilon(1e-12));
  CHECK(ce_loss({0.5}, {0}) == doctest::Approx(0.6931471805599453).epsilon(1e-12));
  CHECK(ce_loss({0.9, 0.1}, {1, 0}) ==
        doctest::Approx(0.10536051565782628).epsilon(1e-12));
  CHECK(ce_loss({1.0}, {1}) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(std::isfinite(ce_loss({0.0}, {1})));  // clamped, not -log(0)
  CHECK(ce_loss({0.0}, {1}) == doctest::Approx(-std::log(1e-12)).epsilon(1e-9));
}

TEST_CASE("batch forward agrees with the single-sample path") {
  TaskConfig cfg;
  Rng rng(3);
  const SampleSet batch = random_batch(cfg, 4, 4, rng);
  const Detector det = detector_init(cfg.feature_dim(), 16, 8, rng);
  const BatchForward fwd = batch_forward(det, batch);
  REQUIRE(fwd.logits.size() == batch.size());
  REQUIRE(fwd.probs.size() == batch.size());
  REQUIRE(fwd.caches.size() == batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    const Classification c = classify_input(det, batch[i].features);
    CHECK(fwd.logits[i] == doctest::Approx(c.logit).epsilon(1e-12));
    CHECK(fwd.probs[i] == doctest::Approx(c.prob_fake).epsilon(1e-12));
    CHECK(fwd.caches[i].y == forward_latent(det, batch[i].features));
  }
}

TEST_CASE("a zero head is a stationary point of balanced-batch CE in the bias") {
  TaskConfig cfg;
  Rng rng(5);
  const SampleSet batch = random_batch(cfg, 8, 8, rng);
  Detector det = detector_init(cfg.feature_dim(), 16, 8, rng);
  for (size_t i = det.head_off(); i < det.params.size(); ++i) det.params[i] = 0.0;
  const BatchForward fwd = batch_forward(det, batch);
  for (double p : fwd.probs) CHECK(p == 0.5);
  const std::vector<double> grad = ce_backward(det, batch);
  // dCE/d(head bias) = mean(p - y) = 0 on a balanced batch at p = 1/2.
  CHECK(grad.back() == doctest::Approx(0.0).epsilon(1e-12));
  // Backbone parameters receive no gradient through a zero head.
  for (size_t i = 0; i < det.head_off(); ++i) CHECK(grad[i] == 0.0);
}

TEST_CASE("analytic CE gradient matches finite differences on 100 instances") {
  TaskConfig cfg;
  cfg.organ_block_dim = 2;  // small nets keep the FD sweep fast
  cfg.spurious_dim = 7;
  Rng rng(2024);
  int checked = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const SampleSet batch = random_batch(cfg, 3, 3, rng);
    Detector det = smooth_detector(batch, 5, 4, rng);
    const std::vector<double> analytic = ce_backward(det, batch);
    const std::vector<double> fd = oracle::fd_gradient(
        det.params, [&]() { return ce_loss_batch(det, batch); });
    CHECK(oracle::max_rel_error(analytic, fd) < 1e-4);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("gradient check rejects a corrupted gradient") {
  TaskConfig cfg;
  cfg.organ_block_dim = 2;
  Rng rng(77);
  const SampleSet batch = random_batch(cfg, 3, 3, rng);
  Detector det = smooth_detector(batch, 5, 4, rng);
  std::vector<double> analytic = ce_backward(det, batch);
  const double clean = gradient_check(
      det, [&](const Detector& d) { return ce_loss_batch(d, batch); }, analytic);
  CHECK(clean < 1e-4);
  analytic[0] += 1e-2;  // corrupt one coordinate
  const double corrupted = gradient_check(
      det, [&](const Detector& d) { return ce_loss_batch(d, batch); }, analytic);
  CHECK(corrupted > 1e-3);
}

TEST_CASE("gradient permutation invariance over the batch order") {
  TaskConfig cfg;
  Rng rng(9);
  SampleSet batch = random_batch(cfg, 5, 5, rng);
  const Detector det = detector_init(cfg.feature_dim(), 8, 6, rng);
  const std::vector<double> before = ce_backward(det, batch);
  std::reverse(batch.begin(), batch.end());
  const std::vector<double> after = ce_backward(det, batch);
  for (size_t i = 0; i < before.size(); ++i) {
    CHECK(before[i] == doctest::Approx(after[i]).epsilon(1e-12));
  }
}

TEST_CASE("a small detector separates the synthetic task in 200 steps") {
  TaskConfig cfg;
  Rng rng(42);
  const SampleSet batch = random_batch(cfg, 32, 32, rng);
  Detector det = detector_init(cfg.feature_dim(), 16, 8, rng);
  AdamState opt = adam_init(det.params.size(), 0.01, 0.0);
  for (int step = 0; step < 200; ++step) {
    const std::vector<double> grad = ce_backward(det, batch);
    adam_step(opt, det.params, grad);
  }
  const BatchForward fwd = batch_forward(det, batch);
  std::vector<int> labels;
  for (const SyntheticSample& s : batch) labels.push_back(s.label);
  CHECK(oracle::auc(fwd.probs, labels) > 0.99);
  CHECK(ce_loss(fwd.probs, labels) < 0.3);
}
