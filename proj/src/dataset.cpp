#include "sopt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sopt/rng.hpp"

namespace sopt {

std::vector<DatasetRow> generate_rows(
    const std::vector<std::pair<std::string, LhsPattern>>& patterns,
    const GenerateConfig& cfg, GenerateStats* stats) {
  std::vector<DatasetRow> rows;
  GenerateStats local;
  for (const auto& [name, lhs] : patterns) {
    local.lhs_count++;
    auto candidates = enumerate_candidates(lhs, cfg.synth, cfg.costs);
    auto lhs_deadline =
        std::chrono::steady_clock::now() + cfg.oracle.per_lhs_time_limit;
    for (size_t i = 0; i < candidates.size(); i++) {
      local.candidates++;
      auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
          lhs_deadline - std::chrono::steady_clock::now());
      Verdict v;  // defaults to Unknown once the pattern budget is spent
      if (remaining.count() > 0) {
        OracleConfig oc = cfg.oracle;
        oc.per_candidate_timeout = std::min(oc.per_candidate_timeout, remaining);
        v = check_equivalence(lhs, candidates[i], oc);
      }
      if (v.kind == VerdictKind::Unknown) {
        local.unknown_dropped++;
        continue;
      }
      DatasetRow row;
      row.features = extract(lhs, candidates[i], cfg.features);
      row.label = v.kind == VerdictKind::Equivalent ? 1 : 0;
      row.sampled = v.sampled;
      row.lhs_id = name;
      row.rhs_id = "c" + std::to_string(i);
      rows.push_back(std::move(row));
    }
  }
  if (stats) *stats = local;
  return rows;
}

CsvTable rows_to_csv(const std::vector<DatasetRow>& rows) {
  CsvTable t;
  for (auto name : kFeatureNames) t.header.emplace_back(name);
  t.header.insert(t.header.end(), {"label", "sampled", "lhs_id", "rhs_id"});
  for (const auto& r : rows) {
    std::vector<std::string> cells;
    cells.reserve(kFeatureCount + 4);
    for (double f : r.features) cells.push_back(format_double(f));
    cells.push_back(std::to_string(r.label));
    cells.push_back(r.sampled ? "1" : "0");
    cells.push_back(r.lhs_id);
    cells.push_back(r.rhs_id);
    t.rows.push_back(std::move(cells));
  }
  return t;
}

std::vector<DatasetRow> rows_from_csv(const CsvTable& table) {
  std::vector<int> fcol(kFeatureCount);
  for (int i = 0; i < kFeatureCount; i++) {
    fcol[i] = table.column(std::string(kFeatureNames[i]));
    if (fcol[i] < 0)
      throw std::runtime_error("dataset csv missing column " +
                               std::string(kFeatureNames[i]));
  }
  int lcol = table.column("label");
  int scol = table.column("sampled");
  int lhcol = table.column("lhs_id");
  int rhcol = table.column("rhs_id");
  if (lcol < 0 || scol < 0 || lhcol < 0 || rhcol < 0)
    throw std::runtime_error("dataset csv missing a bookkeeping column");
  std::vector<DatasetRow> rows;
  rows.reserve(table.rows.size());
  for (const auto& cells : table.rows) {
    DatasetRow r;
    for (int i = 0; i < kFeatureCount; i++) r.features[i] = std::stod(cells[fcol[i]]);
    r.label = std::stoi(cells[lcol]);
    r.sampled = cells[scol] != "0";
    r.lhs_id = cells[lhcol];
    r.rhs_id = cells[rhcol];
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (size_t i = 0; i < a.size(); i++) {
    double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

// k-means++ seeding followed by Lloyd iterations, capped at 100 rounds.
std::vector<std::vector<double>> kmeans(const std::vector<std::vector<double>>& x,
                                        int k, Rng& rng) {
  size_t n = x.size();
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  centroids.push_back(x[rng.below(n)]);
  // d2 holds each point's distance to its nearest centroid so far; folding in
  // only the newest centroid keeps seeding O(k*n) instead of O(k^2*n)
  std::vector<double> d2(n);
  for (size_t i = 0; i < n; i++) d2[i] = sq_dist(x[i], centroids[0]);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0;
    for (size_t i = 0; i < n; i++) total += d2[i];
    size_t pick;
    if (total <= 0) {
      pick = rng.below(n);  // all points coincide with a centroid
    } else {
      double target = rng.unit() * total;
      double acc = 0;
      pick = n - 1;
      for (size_t i = 0; i < n; i++) {
        acc += d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    }
    centroids.push_back(x[pick]);
    for (size_t i = 0; i < n; i++)
      d2[i] = std::min(d2[i], sq_dist(x[i], centroids.back()));
  }

  std::vector<int> assign(n, -1);
  const size_t dims = x[0].size();
  for (int round = 0; round < 100; round++) {
    bool changed = false;
    for (size_t i = 0; i < n; i++) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      const double* p = x[i].data();
      for (int c = 0; c < k; c++) {
        // partial sums only grow, so bailing at bd cannot change the argmin
        const double* q = centroids[c].data();
        double d = 0;
        for (size_t j = 0; j < dims; j++) {
          double diff = p[j] - q[j];
          d += diff * diff;
          if (d >= bd) break;
        }
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<std::vector<double>> sums(k, std::vector<double>(x[0].size(), 0));
    std::vector<int> counts(k, 0);
    for (size_t i = 0; i < n; i++) {
      counts[assign[i]]++;
      for (size_t j = 0; j < x[i].size(); j++) sums[assign[i]][j] += x[i][j];
    }
    for (int c = 0; c < k; c++) {
      if (counts[c] == 0) continue;  // empty cluster keeps its old centroid
      for (size_t j = 0; j < sums[c].size(); j++)
        centroids[c][j] = sums[c][j] / counts[c];
    }
  }
  return centroids;
}

}  // namespace

std::vector<DatasetRow> balance_cluster_centroids(
    const std::vector<DatasetRow>& rows, uint64_t seed) {
  std::vector<const DatasetRow*> by_class[2];
  for (const auto& r : rows) {
    if (r.label != 0 && r.label != 1)
      throw std::invalid_argument("balance: labels must be 0 or 1");
    by_class[r.label].push_back(&r);
  }
  int minority = by_class[0].size() <= by_class[1].size() ? 0 : 1;
  int majority = 1 - minority;
  size_t k = by_class[minority].size();
  if (k == 0 || by_class[majority].size() <= k) return rows;

  // Cluster in standardized space so no single wide-range feature dominates
  // the geometry, then map centroids back.
  std::vector<std::vector<double>> maj;
  maj.reserve(by_class[majority].size());
  for (const DatasetRow* r : by_class[majority])
    maj.emplace_back(r->features.begin(), r->features.end());
  Scaler scaler = Scaler::fit(maj);
  for (auto& v : maj) v = scaler.transform(v);

  Rng rng(seed);
  auto centroids = kmeans(maj, static_cast<int>(k), rng);

  std::vector<DatasetRow> out;
  out.reserve(2 * k);
  for (const DatasetRow* r : by_class[minority]) out.push_back(*r);
  for (size_t c = 0; c < centroids.size(); c++) {
    DatasetRow r;
    for (int j = 0; j < kFeatureCount; j++)
      r.features[j] = centroids[c][j] * scaler.std[j] + scaler.mean[j];
    r.label = majority;
    r.sampled = false;
    r.lhs_id = "centroid";
    r.rhs_id = "k" + std::to_string(c);
    out.push_back(std::move(r));
  }
  return out;
}

SplitResult stratified_split(const std::vector<DatasetRow>& rows,
                             double train_ratio, uint64_t seed) {
  if (train_ratio < 0 || train_ratio > 1)
    throw std::invalid_argument("split: train_ratio must be in [0, 1]");
  std::vector<size_t> by_class[2];
  for (size_t i = 0; i < rows.size(); i++) {
    int l = rows[i].label;
    if (l != 0 && l != 1) throw std::invalid_argument("split: labels must be 0 or 1");
    by_class[l].push_back(i);
  }
  SplitResult out;
  Rng rng(seed);
  for (int c = 0; c < 2; c++) {
    auto& idx = by_class[c];
    rng.shuffle(idx);
    size_t take = static_cast<size_t>(std::llround(train_ratio * idx.size()));
    for (size_t i = 0; i < idx.size(); i++)
      (i < take ? out.train : out.test).push_back(rows[idx[i]]);
  }
  return out;
}

std::vector<double> mutual_information(const std::vector<DatasetRow>& rows,
                                       int bins) {
  if (bins < 1) throw std::invalid_argument("mutual_information: bins must be >= 1");
  size_t n = rows.size();
  std::vector<double> mi(kFeatureCount, 0.0);
  if (n == 0) return mi;
  double ny[2] = {0, 0};
  for (const auto& r : rows) ny[r.label ? 1 : 0]++;
  for (int f = 0; f < kFeatureCount; f++) {
    double lo = rows[0].features[f], hi = lo;
    for (const auto& r : rows) {
      lo = std::min(lo, r.features[f]);
      hi = std::max(hi, r.features[f]);
    }
    if (hi == lo) continue;  // constant feature carries no information
    std::vector<std::array<double, 2>> joint(bins, {0, 0});
    double width = (hi - lo) / bins;
    for (const auto& r : rows) {
      int b = static_cast<int>((r.features[f] - lo) / width);
      b = std::clamp(b, 0, bins - 1);
      joint[b][r.label ? 1 : 0]++;
    }
    double s = 0;
    for (int b = 0; b < bins; b++) {
      double nb = joint[b][0] + joint[b][1];
      for (int y = 0; y < 2; y++) {
        double c = joint[b][y];
        if (c == 0) continue;
        s += (c / n) * std::log(c * n / (nb * ny[y]));
      }
    }
    mi[f] = std::max(0.0, s);  // guard tiny negative rounding residue
  }
  return mi;
}

std::vector<int> select_k_best(const std::vector<double>& scores, int k) {
  if (k < 0) throw std::invalid_argument("select_k_best: k must be >= 0");
  std::vector<int> idx(scores.size());
  for (size_t i = 0; i < idx.size(); i++) idx[i] = static_cast<int>(i);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  if (static_cast<size_t>(k) < idx.size()) idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Scaler Scaler::fit(const std::vector<std::vector<double>>& x) {
  if (x.empty()) throw std::invalid_argument("Scaler::fit: empty matrix");
  size_t d = x[0].size();
  Scaler s;
  s.mean.assign(d, 0.0);
  s.std.assign(d, 0.0);
  for (const auto& row : x)
    for (size_t j = 0; j < d; j++) s.mean[j] += row[j];
  for (size_t j = 0; j < d; j++) s.mean[j] /= x.size();
  for (const auto& row : x)
    for (size_t j = 0; j < d; j++) {
      double t = row[j] - s.mean[j];
      s.std[j] += t * t;
    }
  for (size_t j = 0; j < d; j++) {
    s.std[j] = std::sqrt(s.std[j] / x.size());
    if (s.std[j] == 0) s.std[j] = 1;
  }
  return s;
}

std::vector<double> Scaler::transform(const std::vector<double>& v) const {
  if (v.size() != mean.size())
    throw std::invalid_argument("Scaler::transform: dimension mismatch");
  std::vector<double> out(v.size());
  for (size_t j = 0; j < v.size(); j++) out[j] = (v[j] - mean[j]) / std[j];
  return out;
}

std::vector<std::vector<double>> feature_matrix(
    const std::vector<DatasetRow>& rows, const std::vector<int>& mask) {
  for (int m : mask)
    if (m < 0 || m >= kFeatureCount)
      throw std::invalid_argument("feature_matrix: mask index out of range");
  std::vector<std::vector<double>> x;
  x.reserve(rows.size());
  for (const auto& r : rows) {
    std::vector<double> v;
    v.reserve(mask.size());
    for (int m : mask) v.push_back(r.features[m]);
    x.push_back(std::move(v));
  }
  return x;
}

std::vector<int> label_vector(const std::vector<DatasetRow>& rows) {
  std::vector<int> y;
  y.reserve(rows.size());
  for (const auto& r : rows) y.push_back(r.label);
  return y;
}

}  // namespace sopt
