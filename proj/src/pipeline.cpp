#include "sopt/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <stdexcept>

#include "sopt/features.hpp"

namespace sopt {

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Baseline: return "baseline";
    case Strategy::QuickCheck: return "quickcheck";
    case Strategy::PrediPrune: return "prediprune";
    case Strategy::PrediPruneQuickCheck: return "prediprune_quickcheck";
  }
  throw std::logic_error("strategy_name: bad enum value");
}

std::optional<Strategy> strategy_from_name(const std::string& name) {
  for (Strategy s : kAllStrategies)
    if (name == strategy_name(s)) return s;
  if (name == "combined") return Strategy::PrediPruneQuickCheck;
  return std::nullopt;
}

namespace {

constexpr char kCacheMagic[8] = {'S', 'O', 'P', 'T', 'C', 'A', 'C', '1'};

uint64_t fnv1a(uint64_t h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t cache_key(const std::string& lhs_text, const std::string& rhs_text,
                   const OracleConfig& cfg) {
  uint64_t h = 0xcbf29ce484222325ull;
  h = fnv1a(h, lhs_text);
  h = fnv1a(h, "\x1f");
  h = fnv1a(h, rhs_text);
  h = fnv1a(h, "\x1f");
  h = fnv1a(h, cfg.key_string());
  return h;
}

uint32_t crc32(const std::string& data) {
  static const auto table = [] {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; i++) {
      uint32_t c = i;
      for (int k = 0; k < 8; k++) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  uint32_t c = 0xffffffffu;
  for (unsigned char b : data) c = table[(c ^ b) & 0xff] ^ (c >> 8);
  return c ^ 0xffffffffu;
}

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; i++) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; i++) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct ByteReader {
  const std::string& data;
  size_t pos = 0;

  bool need(size_t n) const { return data.size() - pos >= n; }
  uint32_t u32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; i++)
      v |= static_cast<uint32_t>(static_cast<unsigned char>(data[pos++])) << (8 * i);
    return v;
  }
  uint64_t u64() {
    uint64_t v = 0;
    for (int i = 0; i < 8; i++)
      v |= static_cast<uint64_t>(static_cast<unsigned char>(data[pos++])) << (8 * i);
    return v;
  }
};

constexpr uint8_t kTagNotEquivalent = 1;  // bit 0: kind
constexpr uint8_t kTagSampled = 4;        // bit 2
constexpr uint8_t kTagHasCounterexample = 8;

std::string encode_body(uint64_t key, const Verdict& v) {
  std::string body;
  put_u64(body, key);
  uint8_t tag = v.kind == VerdictKind::NotEquivalent ? kTagNotEquivalent : 0;
  if (v.sampled) tag |= kTagSampled;
  if (v.counterexample) tag |= kTagHasCounterexample;
  body.push_back(static_cast<char>(tag));
  if (v.counterexample) {
    const InputAssignment& a = *v.counterexample;
    put_u32(body, static_cast<uint32_t>(a.values.size()));
    for (auto& [id, val] : a.values) {
      put_u32(body, static_cast<uint32_t>(id));
      put_u32(body, val);
    }
    put_u32(body, static_cast<uint32_t>(a.phi_selectors.size()));
    for (auto& [id, sel] : a.phi_selectors) {
      put_u32(body, static_cast<uint32_t>(id));
      put_u32(body, static_cast<uint32_t>(sel));
    }
  }
  return body;
}

}  // namespace

CacheStore CacheStore::open(const std::string& path) {
  CacheStore store;
  store.path_ = path;
  namespace fs = std::filesystem;
  if (fs::exists(path) && fs::file_size(path) > 0) {
    std::string data = read_file(path);
    if (data.size() < sizeof(kCacheMagic) ||
        std::memcmp(data.data(), kCacheMagic, sizeof(kCacheMagic)) != 0)
      throw std::runtime_error("cache file has a bad header: " + path);
    ByteReader r{data, sizeof(kCacheMagic)};
    size_t valid = r.pos;
    while (r.need(4)) {
      size_t record_start = r.pos;
      uint32_t len = r.u32();
      if (len < 9 || !r.need(static_cast<size_t>(len) + 4)) {
        r.pos = record_start;  // torn tail from an interrupted append
        break;
      }
      std::string body = data.substr(r.pos, len);
      r.pos += len;
      uint32_t want = r.u32();
      if (crc32(body) != want)
        throw std::runtime_error("cache record checksum mismatch: " + path);
      ByteReader br{body, 0};
      uint64_t key = br.u64();
      uint8_t tag = static_cast<uint8_t>(body[br.pos++]);
      Verdict v;
      v.kind = (tag & kTagNotEquivalent) ? VerdictKind::NotEquivalent
                                         : VerdictKind::Equivalent;
      v.sampled = (tag & kTagSampled) != 0;
      if (tag & kTagHasCounterexample) {
        InputAssignment a;
        if (!br.need(4)) throw std::runtime_error("cache record truncated: " + path);
        uint32_t nv = br.u32();
        for (uint32_t i = 0; i < nv; i++) {
          if (!br.need(8)) throw std::runtime_error("cache record truncated: " + path);
          int id = static_cast<int>(br.u32());
          a.values[id] = br.u32();
        }
        if (!br.need(4)) throw std::runtime_error("cache record truncated: " + path);
        uint32_t ns = br.u32();
        for (uint32_t i = 0; i < ns; i++) {
          if (!br.need(8)) throw std::runtime_error("cache record truncated: " + path);
          int id = static_cast<int>(br.u32());
          a.phi_selectors[id] = static_cast<int>(br.u32());
        }
        v.counterexample = std::move(a);
      }
      store.entries_[key] = std::move(v);
      valid = r.pos;
    }
    if (valid < data.size()) fs::resize_file(path, valid);
  } else {
    std::ofstream fresh(path, std::ios::binary | std::ios::trunc);
    if (!fresh) throw std::runtime_error("cannot create cache file: " + path);
    fresh.write(kCacheMagic, sizeof(kCacheMagic));
  }
  store.out_.open(path, std::ios::binary | std::ios::app);
  if (!store.out_) throw std::runtime_error("cannot open cache file: " + path);
  return store;
}

std::optional<Verdict> CacheStore::get(const std::string& lhs_text,
                                       const std::string& rhs_text,
                                       const OracleConfig& cfg) const {
  if (!enabled()) return std::nullopt;
  auto it = entries_.find(cache_key(lhs_text, rhs_text, cfg));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void CacheStore::put(const std::string& lhs_text, const std::string& rhs_text,
                     const OracleConfig& cfg, const Verdict& verdict) {
  if (!enabled()) return;
  if (verdict.kind == VerdictKind::Unknown) return;
  uint64_t key = cache_key(lhs_text, rhs_text, cfg);
  if (entries_.count(key)) return;
  entries_[key] = verdict;
  std::string body = encode_body(key, verdict);
  std::string record;
  put_u32(record, static_cast<uint32_t>(body.size()));
  record += body;
  put_u32(record, crc32(body));
  out_.write(record.data(), static_cast<std::streamsize>(record.size()));
  out_.flush();
  if (!out_) throw std::runtime_error("cache append failed: " + path_);
}

OptimizeResult optimize_lhs(const LhsPattern& lhs, Strategy strategy,
                            const PipelineConfig& cfg, const Model* model,
                            CacheStore* cache) {
  bool use_probes = strategy == Strategy::QuickCheck ||
                    strategy == Strategy::PrediPruneQuickCheck;
  bool use_model = strategy == Strategy::PrediPrune ||
                   strategy == Strategy::PrediPruneQuickCheck;
  if (use_model && !model)
    throw std::invalid_argument("optimize_lhs: strategy needs a model");

  OptimizeResult res;
  res.lhs_cost = block_cost(lhs, cfg.costs);
  res.best_cost = res.lhs_cost;

  auto candidates = enumerate_candidates(lhs, cfg.synth, cfg.costs);
  res.generated = static_cast<long>(candidates.size());

  // Candidates arrive sorted by cost, so the improvements form a prefix and
  // the first verified equivalence is the best one available.
  size_t viable = 0;
  while (viable < candidates.size() &&
         block_cost(candidates[viable], cfg.costs) < res.lhs_cost)
    viable++;
  res.skipped += static_cast<long>(candidates.size() - viable);
  candidates.resize(viable);

  if (use_probes && !candidates.empty()) {
    auto probes = probe_vectors(lhs, cfg.quickcheck_probes, cfg.oracle.seed);
    std::vector<uint32_t> lhs_values;
    lhs_values.reserve(probes.size());
    for (const auto& p : probes) lhs_values.push_back(eval(lhs, p));
    std::vector<RhsCandidate> kept;
    kept.reserve(candidates.size());
    for (auto& cand : candidates) {
      bool agree = true;
      for (size_t i = 0; i < probes.size() && agree; i++)
        agree = eval(cand, probes[i]) == lhs_values[i];
      if (agree)
        kept.push_back(std::move(cand));
      else
        res.pruned_quickcheck++;
    }
    candidates.swap(kept);
  }

  if (use_model && !candidates.empty()) {
    std::vector<RhsCandidate> kept;
    kept.reserve(candidates.size());
    for (auto& cand : candidates) {
      double score = model->predict_raw(extract(lhs, cand, cfg.features));
      if (score >= model->threshold)
        kept.push_back(std::move(cand));
      else
        res.pruned_model++;
    }
    candidates.swap(kept);
  }

  std::string lhs_text = print_block(lhs);
  auto lhs_deadline =
      std::chrono::steady_clock::now() + cfg.oracle.per_lhs_time_limit;
  for (size_t i = 0; i < candidates.size(); i++) {
    std::string rhs_text = print_block(candidates[i]);
    Verdict v;
    bool hit = false;
    if (cache) {
      if (auto got = cache->get(lhs_text, rhs_text, cfg.oracle)) {
        v = *got;
        hit = true;
        res.cache_hits++;
      }
    }
    if (!hit) {
      res.oracle_calls++;
      auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
          lhs_deadline - std::chrono::steady_clock::now());
      if (remaining.count() > 0) {
        OracleConfig oc = cfg.oracle;
        oc.per_candidate_timeout = std::min(oc.per_candidate_timeout, remaining);
        v = check_equivalence(lhs, candidates[i], oc);
      }
      if (cache && v.kind != VerdictKind::Unknown)
        cache->put(lhs_text, rhs_text, cfg.oracle, v);
    }
    if (v.kind == VerdictKind::Unknown) res.unknown++;
    if (v.kind == VerdictKind::Equivalent) {
      res.best_cost = block_cost(candidates[i], cfg.costs);
      res.best = std::move(candidates[i]);
      res.skipped += static_cast<long>(candidates.size() - i - 1);
      break;
    }
  }
  return res;
}

StrategyReport run_strategy(
    const std::vector<std::pair<std::string, LhsPattern>>& patterns,
    Strategy strategy, const PipelineConfig& cfg, const Model* model,
    CacheStore* cache) {
  StrategyReport rep;
  rep.strategy = strategy;
  auto start = std::chrono::steady_clock::now();
  for (const auto& [name, lhs] : patterns) {
    OptimizeResult r = optimize_lhs(lhs, strategy, cfg, model, cache);
    rep.lhs_count++;
    if (r.best) rep.optimized++;
    rep.generated += r.generated;
    rep.skipped += r.skipped;
    rep.pruned_quickcheck += r.pruned_quickcheck;
    rep.pruned_model += r.pruned_model;
    rep.oracle_calls += r.oracle_calls;
    rep.cache_hits += r.cache_hits;
    rep.unknown += r.unknown;
    rep.cost_before += r.lhs_cost;
    rep.cost_after += r.best_cost;
  }
  rep.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

CsvTable reports_to_csv(const std::vector<StrategyReport>& reports) {
  CsvTable t;
  t.header = {"strategy",     "lhs_count",   "optimized",
              "generated",    "skipped",     "pruned_quickcheck",
              "pruned_model", "oracle_calls", "cache_hits",
              "unknown",      "cost_before", "cost_after",
              "cost_decrease", "wall_time_s"};
  for (const auto& r : reports) {
    t.rows.push_back({strategy_name(r.strategy), std::to_string(r.lhs_count),
                      std::to_string(r.optimized), std::to_string(r.generated),
                      std::to_string(r.skipped), std::to_string(r.pruned_quickcheck),
                      std::to_string(r.pruned_model), std::to_string(r.oracle_calls),
                      std::to_string(r.cache_hits), std::to_string(r.unknown),
                      std::to_string(r.cost_before), std::to_string(r.cost_after),
                      std::to_string(r.cost_decrease()), format_double(r.wall_time_s)});
  }
  return t;
}

void mark_pareto_front(std::vector<ParetoPoint>& points) {
  for (auto& p : points) {
    p.on_front = true;
    for (const auto& q : points) {
      bool no_worse = q.oracle_calls <= p.oracle_calls &&
                      q.cost_decrease >= p.cost_decrease;
      bool better = q.oracle_calls < p.oracle_calls ||
                    q.cost_decrease > p.cost_decrease;
      if (no_worse && better) {
        p.on_front = false;
        break;
      }
    }
  }
}

std::vector<std::pair<std::string, LhsPattern>> load_corpus(
    const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    throw std::runtime_error("corpus directory not found: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".sir")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<std::pair<std::string, LhsPattern>> out;
  out.reserve(files.size());
  for (const auto& f : files) {
    try {
      Block b = parse_block(read_file(f.string()));
      b.role = BlockRole::Lhs;
      out.emplace_back(f.stem().string(), std::move(b));
    } catch (const ParseError& e) {
      throw std::runtime_error(f.string() + ":" + std::to_string(e.line()) + ":" +
                               std::to_string(e.col()) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace sopt
