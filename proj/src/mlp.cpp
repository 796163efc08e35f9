#include "sopt/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sopt/io.hpp"

namespace sopt {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// Cross-entropy straight from the logit; never forms log(0).
double bce_from_logit(double z, int y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

void check_training_data(const std::vector<std::vector<double>>& x,
                         const std::vector<int>& y) {
  if (x.empty()) throw std::invalid_argument("train: empty input");
  if (x.size() != y.size())
    throw std::invalid_argument("train: input/label count mismatch");
  for (const auto& row : x)
    if (row.size() != x[0].size())
      throw std::invalid_argument("train: ragged input matrix");
  for (int l : y)
    if (l != 0 && l != 1) throw std::invalid_argument("train: labels must be 0 or 1");
}

struct Grads {
  std::vector<std::vector<double>> w, b;

  explicit Grads(const Net& net) {
    for (size_t l = 0; l < net.weights.size(); l++) {
      w.emplace_back(net.weights[l].size(), 0.0);
      b.emplace_back(net.biases[l].size(), 0.0);
    }
  }
  void zero() {
    for (auto& v : w) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
  }
};

// Mean loss over the batch; gradients of that mean accumulate into g.
double backprop(const Net& net, const std::vector<std::vector<double>>& x,
                const std::vector<int>& y, const std::vector<size_t>& batch,
                Grads& g) {
  size_t depth = net.weights.size();
  std::vector<std::vector<double>> act(depth + 1);
  std::vector<std::vector<double>> delta(depth);
  double loss = 0;
  double inv = 1.0 / batch.size();
  for (size_t bi : batch) {
    act[0] = x[bi];
    for (size_t l = 0; l < depth; l++) {
      int rows = net.layers[l + 1], cols = net.layers[l];
      act[l + 1].assign(rows, 0.0);
      for (int r = 0; r < rows; r++) {
        double z = net.biases[l][r];
        const double* wr = &net.weights[l][static_cast<size_t>(r) * cols];
        for (int c = 0; c < cols; c++) z += wr[c] * act[l][c];
        act[l + 1][r] = l + 1 < depth ? std::tanh(z) : z;  // output stays a logit
      }
    }
    double z = act[depth][0];
    loss += bce_from_logit(z, y[bi]) * inv;

    delta[depth - 1] = {sigmoid(z) - y[bi]};
    for (size_t l = depth - 1; l-- > 0;) {
      int rows = net.layers[l + 1], below = net.layers[l + 2];
      delta[l].assign(rows, 0.0);
      for (int r = 0; r < rows; r++) {
        double s = 0;
        for (int d = 0; d < below; d++)
          s += net.weights[l + 1][static_cast<size_t>(d) * rows + r] * delta[l + 1][d];
        double a = act[l + 1][r];
        delta[l][r] = s * (1.0 - a * a);
      }
    }
    for (size_t l = 0; l < depth; l++) {
      int rows = net.layers[l + 1], cols = net.layers[l];
      for (int r = 0; r < rows; r++) {
        double d = delta[l][r] * inv;
        g.b[l][r] += d;
        double* gw = &g.w[l][static_cast<size_t>(r) * cols];
        for (int c = 0; c < cols; c++) gw[c] += d * act[l][c];
      }
    }
  }
  return loss;
}

double mean_loss(const Net& net, const std::vector<std::vector<double>>& x,
                 const std::vector<int>& y) {
  double loss = 0;
  for (size_t i = 0; i < x.size(); i++)
    loss += bce_from_logit(net.logit(x[i]), y[i]);
  return loss / x.size();
}

}  // namespace

Net Net::init(const std::vector<int>& layers, Rng& rng) {
  if (layers.size() < 2) throw std::invalid_argument("Net: need at least two layers");
  for (int s : layers)
    if (s < 1) throw std::invalid_argument("Net: layer sizes must be positive");
  Net net;
  net.layers = layers;
  for (size_t l = 0; l + 1 < layers.size(); l++) {
    int fan_in = layers[l], fan_out = layers[l + 1];
    double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::vector<double> w(static_cast<size_t>(fan_in) * fan_out);
    for (double& v : w) v = rng.uniform(-limit, limit);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(fan_out, 0.0);
  }
  return net;
}

double Net::logit(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != layers[0])
    throw std::invalid_argument("Net: input dimension mismatch");
  if (layers.back() != 1)
    throw std::logic_error("Net: logit needs a single output");
  std::vector<double> cur = x, next;
  for (size_t l = 0; l < weights.size(); l++) {
    int rows = layers[l + 1], cols = layers[l];
    next.assign(rows, 0.0);
    for (int r = 0; r < rows; r++) {
      double z = biases[l][r];
      const double* wr = &weights[l][static_cast<size_t>(r) * cols];
      for (int c = 0; c < cols; c++) z += wr[c] * cur[c];
      next[r] = l + 1 < weights.size() ? std::tanh(z) : z;
    }
    cur.swap(next);
  }
  return cur[0];
}

double Net::forward(const std::vector<double>& x) const { return sigmoid(logit(x)); }

size_t Net::parameter_count() const {
  size_t n = 0;
  for (size_t l = 0; l < weights.size(); l++) n += weights[l].size() + biases[l].size();
  return n;
}

TrainResult train(const std::vector<std::vector<double>>& x,
                  const std::vector<int>& y, const TrainConfig& cfg) {
  check_training_data(x, y);
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (cfg.epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");

  std::vector<int> layers;
  layers.push_back(static_cast<int>(x[0].size()));
  layers.insert(layers.end(), cfg.hidden.begin(), cfg.hidden.end());
  layers.push_back(1);

  Rng rng(cfg.seed);
  TrainResult result;
  result.net = Net::init(layers, rng);
  Net& net = result.net;

  Grads g(net), m(net), v(net);
  m.zero();
  v.zero();
  long t = 0;
  size_t n = x.size();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; i++) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; epoch++) {
    rng.shuffle(order);
    double epoch_loss = 0;
    for (size_t start = 0; start < n; start += cfg.batch_size) {
      size_t end = std::min(n, start + cfg.batch_size);
      std::vector<size_t> batch(order.begin() + start, order.begin() + end);
      g.zero();
      double batch_loss = backprop(net, x, y, batch, g);
      epoch_loss += batch_loss * batch.size() / n;
      t++;
      double c1 = 1.0 - std::pow(cfg.beta1, t);
      double c2 = 1.0 - std::pow(cfg.beta2, t);
      for (size_t l = 0; l < net.weights.size(); l++) {
        auto step = [&](std::vector<double>& p, std::vector<double>& gm,
                        std::vector<double>& gv, const std::vector<double>& gg) {
          for (size_t i = 0; i < p.size(); i++) {
            gm[i] = cfg.beta1 * gm[i] + (1 - cfg.beta1) * gg[i];
            gv[i] = cfg.beta2 * gv[i] + (1 - cfg.beta2) * gg[i] * gg[i];
            p[i] -= cfg.learning_rate * (gm[i] / c1) / (std::sqrt(gv[i] / c2) + cfg.adam_eps);
          }
        };
        step(net.weights[l], m.w[l], v.w[l], g.w[l]);
        step(net.biases[l], m.b[l], v.b[l], g.b[l]);
      }
    }
    if (!std::isfinite(epoch_loss))
      throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch));
    result.loss_curve.push_back(epoch_loss);
  }
  return result;
}

double gradient_check(const Net& net, const std::vector<std::vector<double>>& x,
                      const std::vector<int>& y) {
  check_training_data(x, y);
  Grads g(net);
  g.zero();
  std::vector<size_t> all(x.size());
  for (size_t i = 0; i < all.size(); i++) all[i] = i;
  backprop(net, x, y, all, g);

  const double h = 1e-5;
  double worst = 0;
  Net probe = net;
  auto sweep = [&](std::vector<double>& params, const std::vector<double>& analytic) {
    for (size_t i = 0; i < params.size(); i++) {
      double keep = params[i];
      params[i] = keep + h;
      double up = mean_loss(probe, x, y);
      params[i] = keep - h;
      double down = mean_loss(probe, x, y);
      params[i] = keep;
      double numeric = (up - down) / (2 * h);
      double rel = std::abs(analytic[i] - numeric) /
                   std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric));
      worst = std::max(worst, rel);
    }
  };
  for (size_t l = 0; l < probe.weights.size(); l++) {
    sweep(probe.weights[l], g.w[l]);
    sweep(probe.biases[l], g.b[l]);
  }
  return worst;
}

double Model::predict_raw(const FeatureVector& f) const {
  std::vector<double> v;
  v.reserve(mask.size());
  for (int m : mask) v.push_back(f.at(m));
  return net.forward(scaler.transform(v));
}

namespace {

constexpr const char* kModelMagic = "sopt-mlp 1";

void emit_vector(std::ostream& os, const char* tag, const std::vector<double>& v) {
  os << tag << ' ' << v.size();
  for (double d : v) os << ' ' << format_double(d);
  os << '\n';
}

std::vector<double> read_vector(std::istream& is, const std::string& tag) {
  std::string got;
  size_t n;
  if (!(is >> got >> n) || got != tag)
    throw std::runtime_error("model file: expected '" + tag + "' section");
  std::vector<double> v(n);
  for (double& d : v)
    if (!(is >> d)) throw std::runtime_error("model file: truncated '" + tag + "'");
  return v;
}

}  // namespace

void save_model(const std::string& path, const Model& m) {
  std::ostringstream os;
  os << kModelMagic << '\n';
  os << "layers " << m.net.layers.size();
  for (int s : m.net.layers) os << ' ' << s;
  os << '\n';
  os << "mask " << m.mask.size();
  for (int i : m.mask) os << ' ' << i;
  os << '\n';
  emit_vector(os, "scaler_mean", m.scaler.mean);
  emit_vector(os, "scaler_std", m.scaler.std);
  os << "threshold " << format_double(m.threshold) << '\n';
  for (size_t l = 0; l < m.net.weights.size(); l++) {
    std::string wl = "weights" + std::to_string(l);
    std::string bl = "biases" + std::to_string(l);
    emit_vector(os, wl.c_str(), m.net.weights[l]);
    emit_vector(os, bl.c_str(), m.net.biases[l]);
  }
  atomic_write(path, os.str());
}

Model load_model(const std::string& path) {
  std::istringstream is(read_file(path));
  std::string magic;
  std::getline(is, magic);
  if (magic != kModelMagic)
    throw std::runtime_error("model file: bad header '" + magic + "'");
  Model m;
  std::string tag;
  size_t n;
  if (!(is >> tag >> n) || tag != "layers" || n < 2)
    throw std::runtime_error("model file: bad layers section");
  m.net.layers.resize(n);
  for (int& s : m.net.layers)
    if (!(is >> s) || s < 1) throw std::runtime_error("model file: bad layer size");
  if (m.net.layers.back() != 1)
    throw std::runtime_error("model file: output layer must have size 1");
  if (!(is >> tag >> n) || tag != "mask")
    throw std::runtime_error("model file: bad mask section");
  m.mask.resize(n);
  for (int& i : m.mask)
    if (!(is >> i) || i < 0 || i >= kFeatureCount)
      throw std::runtime_error("model file: mask index out of range");
  m.scaler.mean = read_vector(is, "scaler_mean");
  m.scaler.std = read_vector(is, "scaler_std");
  if (!(is >> tag >> m.threshold) || tag != "threshold")
    throw std::runtime_error("model file: bad threshold section");
  for (size_t l = 0; l + 1 < m.net.layers.size(); l++) {
    auto w = read_vector(is, "weights" + std::to_string(l));
    auto b = read_vector(is, "biases" + std::to_string(l));
    size_t want = static_cast<size_t>(m.net.layers[l]) * m.net.layers[l + 1];
    if (w.size() != want || b.size() != static_cast<size_t>(m.net.layers[l + 1]))
      throw std::runtime_error("model file: layer " + std::to_string(l) +
                               " dimension mismatch");
    m.net.weights.push_back(std::move(w));
    m.net.biases.push_back(std::move(b));
  }
  size_t in = m.net.layers[0];
  if (m.mask.size() != in || m.scaler.mean.size() != in || m.scaler.std.size() != in)
    throw std::runtime_error("model file: mask/scaler/input dimension mismatch");
  return m;
}

Metrics compute_metrics(const std::vector<int>& y, const std::vector<int>& predicted) {
  if (y.empty() || y.size() != predicted.size())
    throw std::invalid_argument("compute_metrics: bad input sizes");
  double tp = 0, tn = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < y.size(); i++) {
    if (y[i] != 0 && y[i] != 1)
      throw std::invalid_argument("compute_metrics: labels must be 0 or 1");
    if (predicted[i] != 0 && predicted[i] != 1)
      throw std::invalid_argument("compute_metrics: predictions must be 0 or 1");
    if (y[i] == 1)
      (predicted[i] == 1 ? tp : fn)++;
    else
      (predicted[i] == 0 ? tn : fp)++;
  }
  auto ratio = [](double num, double den) { return den > 0 ? num / den : 0.0; };
  double p1 = ratio(tp, tp + fp), p0 = ratio(tn, tn + fn);
  double r1 = ratio(tp, tp + fn), r0 = ratio(tn, tn + fp);
  double f1 = ratio(2 * p1 * r1, p1 + r1), f0 = ratio(2 * p0 * r0, p0 + r0);
  Metrics m;
  m.accuracy = (tp + tn) / y.size();
  m.precision = (p0 + p1) / 2;
  m.recall = (r0 + r1) / 2;
  m.f1 = (f0 + f1) / 2;
  return m;
}

std::vector<RocPoint> roc_curve(const std::vector<int>& y,
                                const std::vector<double>& scores) {
  if (y.empty() || y.size() != scores.size())
    throw std::invalid_argument("roc_curve: bad input sizes");
  double pos = 0, neg = 0;
  for (int l : y) {
    if (l != 0 && l != 1) throw std::invalid_argument("roc_curve: labels must be 0 or 1");
    (l ? pos : neg)++;
  }
  if (pos == 0 || neg == 0)
    throw std::invalid_argument("roc_curve: need both classes present");
  // Clamping keeps the sentinel thresholds strict: nothing ties 1 from above
  // or escapes 0 from below, so the endpoints land on (0,0) and (1,1).
  const double kEdge = 1e-12;
  std::vector<double> s(scores.size());
  for (size_t i = 0; i < scores.size(); i++) {
    if (!(scores[i] >= 0.0 && scores[i] <= 1.0))
      throw std::invalid_argument("roc_curve: scores must lie in [0, 1]");
    s[i] = std::clamp(scores[i], kEdge, 1.0 - kEdge);
  }
  std::set<double, std::greater<>> thresholds(s.begin(), s.end());
  thresholds.insert(1.0);
  thresholds.insert(0.0);
  std::vector<RocPoint> curve;
  curve.reserve(thresholds.size());
  for (double t : thresholds) {
    double tp = 0, fp = 0;
    for (size_t i = 0; i < s.size(); i++)
      if (s[i] >= t) (y[i] ? tp : fp)++;
    curve.push_back({t, fp / neg, tp / pos});
  }
  return curve;
}

}  // namespace sopt
