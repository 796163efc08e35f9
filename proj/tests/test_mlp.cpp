#include <cmath>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "sopt/mlp.hpp"

using namespace sopt;

namespace {

// two interleaved half-moons are overkill; a separable diagonal works
void separable_data(int n, std::vector<std::vector<double>>& x,
                    std::vector<int>& y) {
  Rng rng(123);
  for (int i = 0; i < n; i++) {
    double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
    x.push_back({a, b});
    y.push_back(a + b > 0 ? 1 : 0);
  }
}

}  // namespace

TEST_CASE("glorot init is bounded, zero-biased and seed-deterministic") {
  Rng r1(9), r2(9);
  Net a = Net::init({3, 5, 1}, r1);
  Net b = Net::init({3, 5, 1}, r2);
  CHECK(a.weights == b.weights);
  CHECK(a.parameter_count() == 3 * 5 + 5 + 5 * 1 + 1);
  double limit0 = std::sqrt(6.0 / (3 + 5));
  for (double w : a.weights[0]) {
    CHECK(w <= limit0);
    CHECK(w >= -limit0);
  }
  for (const auto& layer : a.biases)
    for (double v : layer) CHECK(v == 0.0);
  CHECK_THROWS_AS(Net::init({4}, r1), std::invalid_argument);
}

TEST_CASE("backprop agrees with central differences") {
  Rng rng(17);
  Net net = Net::init({2, 4, 1}, rng);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 12; i++) {
    x.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2)});
    y.push_back(i % 2);
  }
  CHECK(gradient_check(net, x, y) < 1e-4);
}

TEST_CASE("training separates a linearly separable cloud") {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  separable_data(200, x, y);
  TrainConfig cfg;
  cfg.epochs = 120;
  TrainResult r = train(x, y, cfg);

  REQUIRE(r.loss_curve.size() == 120);
  CHECK(r.loss_curve.back() < r.loss_curve.front());
  int correct = 0;
  for (size_t i = 0; i < x.size(); i++)
    correct += (r.net.forward(x[i]) >= 0.5 ? 1 : 0) == y[i];
  CHECK(correct >= 198);
}

TEST_CASE("training solves xor") {
  std::vector<std::vector<double>> x = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  std::vector<int> y = {0, 1, 1, 0};
  TrainConfig cfg;
  cfg.epochs = 400;
  TrainResult r = train(x, y, cfg);
  for (size_t i = 0; i < x.size(); i++)
    CHECK((r.net.forward(x[i]) >= 0.5 ? 1 : 0) == y[i]);
}

TEST_CASE("training is deterministic in the seed") {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  separable_data(60, x, y);
  TrainConfig cfg;
  cfg.epochs = 30;
  TrainResult a = train(x, y, cfg);
  TrainResult b = train(x, y, cfg);
  CHECK(a.loss_curve == b.loss_curve);
  CHECK(a.net.weights == b.net.weights);
  CHECK(a.net.biases == b.net.biases);
  cfg.seed = 43;
  TrainResult c = train(x, y, cfg);
  CHECK(a.loss_curve != c.loss_curve);
}

TEST_CASE("training validates its inputs") {
  CHECK_THROWS_AS(train({}, {}, TrainConfig{}), std::invalid_argument);
  CHECK_THROWS_AS(train({{1.0}}, {2}, TrainConfig{}), std::invalid_argument);
  CHECK_THROWS_AS(train({{1.0}, {1.0, 2.0}}, {0, 1}, TrainConfig{}),
                  std::invalid_argument);
}

TEST_CASE("a model applies mask, scaler and net in order") {
  Model m;
  m.mask = {1};
  m.scaler.mean = {1.0};
  m.scaler.std = {2.0};
  m.net.layers = {1, 1};
  m.net.weights = {{2.0}};
  m.net.biases = {{0.5}};
  FeatureVector f{};
  f[0] = 99;  // masked away
  f[1] = 3;   // standardizes to 1
  double expect = 1.0 / (1.0 + std::exp(-2.5));
  CHECK(m.predict_raw(f) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("model files round-trip bit-exactly") {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  separable_data(50, x, y);
  // train on two features pulled through a nontrivial mask and scaler
  Model m;
  m.mask = {0, 5};
  m.scaler.mean = {0.1, -0.2};
  m.scaler.std = {1.5, 0.5};
  m.threshold = 1e-4;
  TrainConfig cfg;
  cfg.epochs = 10;
  m.net = train(x, y, cfg).net;

  auto path = std::filesystem::temp_directory_path() / "sopt_model_test.txt";
  save_model(path.string(), m);
  Model back = load_model(path.string());
  std::filesystem::remove(path);

  CHECK(back.mask == m.mask);
  CHECK(back.scaler.mean == m.scaler.mean);
  CHECK(back.scaler.std == m.scaler.std);
  CHECK(back.threshold == m.threshold);
  CHECK(back.net.layers == m.net.layers);
  CHECK(back.net.weights == m.net.weights);  // decimal form parses back exactly
  CHECK(back.net.biases == m.net.biases);

  FeatureVector f{};
  f[0] = 0.7;
  f[5] = -1.3;
  CHECK(m.predict_raw(f) == back.predict_raw(f));
}

TEST_CASE("model loading rejects malformed files") {
  auto path = std::filesystem::temp_directory_path() / "sopt_bad_model.txt";
  atomic_write(path.string(), "not-a-model 9\n");
  CHECK_THROWS_AS(load_model(path.string()), std::runtime_error);
  atomic_write(path.string(), "sopt-mlp 1\nlayers 2 1 1\nmask 9 0\n");
  CHECK_THROWS_AS(load_model(path.string()), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("metrics macro-average both classes") {
  Metrics m = compute_metrics({1, 1, 0, 0}, {1, 0, 0, 0});
  CHECK(m.accuracy == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(m.precision == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(11.0 / 15.0).epsilon(1e-12));

  // empty denominators score zero instead of dividing
  Metrics z = compute_metrics({0, 0}, {0, 0});
  CHECK(z.accuracy == 1.0);
  CHECK(z.precision == 0.5);
  CHECK(z.recall == 0.5);

  CHECK_THROWS_AS(compute_metrics({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(compute_metrics({1}, {1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(compute_metrics({2}, {1}), std::invalid_argument);
}

TEST_CASE("roc curves run from (0,0) to (1,1) monotonically") {
  std::vector<RocPoint> curve = roc_curve({0, 1}, {0.3, 0.7});
  REQUIRE(curve.size() == 4);
  CHECK(curve[0].threshold == 1.0);
  CHECK(curve[0].fpr == 0.0);
  CHECK(curve[0].tpr == 0.0);
  CHECK(curve[1].tpr == 1.0);
  CHECK(curve[1].fpr == 0.0);
  CHECK(curve[2].fpr == 1.0);
  CHECK(curve[3].threshold == 0.0);
  CHECK(curve[3].fpr == 1.0);
  CHECK(curve[3].tpr == 1.0);

  // saturated scores still pin the endpoints
  std::vector<RocPoint> sat = roc_curve({0, 1, 1, 0}, {0.0, 1.0, 0.5, 0.25});
  CHECK(sat.front().fpr == 0.0);
  CHECK(sat.front().tpr == 0.0);
  CHECK(sat.back().fpr == 1.0);
  CHECK(sat.back().tpr == 1.0);
  for (size_t i = 1; i < sat.size(); i++) {
    CHECK(sat[i].fpr >= sat[i - 1].fpr);
    CHECK(sat[i].tpr >= sat[i - 1].tpr);
  }

  CHECK_THROWS_AS(roc_curve({1, 1}, {0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(roc_curve({0, 1}, {0.5, 1.6}), std::invalid_argument);
}
