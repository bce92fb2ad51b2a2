#pragma once

// Subcommand implementations for the mink tool. Each command writes to the
// given stream and returns the process exit code.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli/cache.hpp"
#include "minkowski/minkowski.hpp"

namespace mink {

namespace mk = minkowski;

enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kUsageError = 2, kUnconverged = 3 };

class usage_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Settings: flags > MINK_* environment > defaults
// ---------------------------------------------------------------------------

inline constexpr double kDefaultTargetWidth = 1e-9;
inline constexpr double kDefaultRelativeWidth = 1e-5;

struct Settings {
  unsigned threads = mk::default_thread_count();
  double target_width = kDefaultTargetWidth;
  std::optional<std::string> cache_path;
  bool timing = false;
};

inline double parse_positive(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || !(v > 0) || !std::isfinite(v))
    throw usage_error(what + " must be a positive number, got '" + text + "'");
  return v;
}

inline unsigned parse_threads(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (text.empty() || *end != '\0' || v < 1 || v > 4096) throw usage_error(what + " must be in [1, 4096]");
  return static_cast<unsigned>(v);
}

inline Settings resolve_settings(std::optional<unsigned> threads_flag, std::optional<double> width_flag,
                                 std::optional<std::string> cache_flag, bool timing) {
  Settings s;
  if (const char* env = std::getenv("MINK_THREADS"); env && *env) s.threads = parse_threads(env, "MINK_THREADS");
  if (const char* env = std::getenv("MINK_TARGET_WIDTH"); env && *env)
    s.target_width = parse_positive(env, "MINK_TARGET_WIDTH");
  if (const char* env = std::getenv("MINK_CACHE"); env && *env) s.cache_path = env;
  if (threads_flag) s.threads = *threads_flag;
  if (width_flag) s.target_width = *width_flag;
  if (cache_flag) s.cache_path = *cache_flag;
  s.timing = timing;
  return s;
}

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

/// Shortest-safe round-trip representation.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json enclosure_json(const mk::Enclosure& e) { return json{{"lo", e.lo}, {"hi", e.hi}}; }

inline mk::Enclosure enclosure_from_json(const json& j) { return {j.at("lo").get<double>(), j.at("hi").get<double>()}; }

/// RFC 4180 field quoting.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

// ---------------------------------------------------------------------------
// Published table
// ---------------------------------------------------------------------------

struct PublishedRow {
  int L;
  const char* m;
  const char* mstar;
};

inline const std::vector<PublishedRow>& published_table() {
  static const std::vector<PublishedRow> rows = {
      {1, "0.5000000000", "2.643125297"},        {2, "0.2909264764", "2.577573745"},
      {3, "0.1863897146", "2.533204605"},        {4, "0.1269922584", "2.509329792"},
      {5, "0.09016445494", "2.496320715"},       {6, "0.06592816257", "2.488147649"},
      {7, "0.04929431046", "2.481940613"},       {8, "0.03751871185", "2.476544438"},
      {9, "0.02897962203", "2.471583746"},       {10, "0.02266585817", "2.466982861"},
      {11, "0.01792085923", "2.462750421"},      {12, "0.01430468951", "2.458897371"},
      {20, "0.003008686707", "2.438565967"},     {30, "0.0006211064464", "2.425096683"},
      {40, "0.0001622371309", "2.416702495"},    {50, "0.00004937221843", "2.410831724"},
      {100, "0.0000004445933003", "2.395743861"},
  };
  return rows;
}

inline const PublishedRow* published_row(int L) {
  for (const auto& r : published_table())
    if (r.L == L) return &r;
  return nullptr;
}

/// A truncated decimal v with k places stands for a value in [v, v + 10^-k].
inline mk::Enclosure truncated_decimal(const std::string& text) {
  const auto dot = text.find('.');
  const int places = dot == std::string::npos ? 0 : static_cast<int>(text.size() - dot - 1);
  const double v = std::strtod(text.c_str(), nullptr);
  return {mk::next_down(v), mk::next_up(v + std::pow(10.0, -places), 2)};
}

/// "1-12,20,30" -> {1..12, 20, 30}; empty string -> no rows.
inline std::vector<unsigned> parse_rows(const std::string& text) {
  std::vector<unsigned> rows;
  std::stringstream ss(text);
  std::string item;
  auto number = [&](const std::string& s) {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0' || v < 0 || v > 100000) throw usage_error("bad row '" + s + "' in --rows");
    return static_cast<unsigned>(v);
  };
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      rows.push_back(number(item));
    } else {
      const unsigned a = number(item.substr(0, dash)), b = number(item.substr(dash + 1));
      if (a > b) throw usage_error("bad range '" + item + "' in --rows");
      for (unsigned L = a; L <= b; ++L) rows.push_back(L);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Moment records
// ---------------------------------------------------------------------------

inline json record_json(const mk::MomentRecord& r) {
  json j;
  j["kind"] = r.kind;
  j["L"] = r.L;
  j["method"] = r.method;
  j["mode"] = r.mode;
  j["target_width"] = r.target_width;
  j["max_depth"] = r.max_depth;
  if (r.kind == "M") j["cutoff"] = r.cutoff;
  j["value"] = enclosure_json(r.value);
  j["width"] = r.value.width();
  j["leaves"] = r.leaves;
  j["converged"] = r.converged;
  j["wall_time"] = r.wall_time;
  return j;
}

inline mk::MomentRecord record_from_json(const json& j) {
  mk::MomentRecord r;
  r.kind = j.at("kind").get<std::string>();
  r.L = j.at("L").get<int>();
  r.method = j.at("method").get<std::string>();
  r.mode = j.at("mode").get<std::string>();
  r.target_width = j.at("target_width").get<double>();
  r.max_depth = j.at("max_depth").get<int>();
  r.cutoff = j.value("cutoff", 0);
  r.value = enclosure_from_json(j.at("value"));
  r.leaves = j.at("leaves").get<std::uint64_t>();
  r.converged = j.at("converged").get<bool>();
  r.wall_time = j.value("wall_time", 0.0);
  return r;
}

/// Printed form: wall_time only on request so output is reproducible byte for byte.
inline json printable(json j, bool timing) {
  if (!timing) j.erase("wall_time");
  return j;
}

/// Looks up `key` in the cache, or computes a record (carrying the key fields) and appends it.
template <class Compute>
json cached(const Settings& s, const json& key, Compute&& compute) {
  auto fresh = [&] {
    json rec = compute();
    for (const auto& [name, value] : key.items()) rec[name] = value;
    return rec;
  };
  if (!s.cache_path) return fresh();
  Cache cache(*s.cache_path);
  if (auto hit = cache.find(key)) return *hit;
  json rec = fresh();
  cache.append(rec);
  return rec;
}

// ---------------------------------------------------------------------------
// qmark
// ---------------------------------------------------------------------------

inline int cmd_qmark(const std::string& text, bool F_mode, std::ostream& out) {
  mk::Rational x;
  try {
    x = mk::parse_rational(text);
  } catch (const std::exception& e) {
    throw usage_error("malformed fraction '" + text + "': " + e.what());
  }
  if (x.is_infinite()) throw usage_error("argument must be finite");
  if (!F_mode && x > mk::Rational(1)) throw usage_error("?(x) is defined here for x in [0, 1]; use --F for F(x)");
  const mk::DyadicRational v = F_mode ? mk::F_exact(x) : mk::qmark_exact(x);
  out << v.str() << '\n' << fmt(v.to_double()) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// moment
// ---------------------------------------------------------------------------

struct MomentArgs {
  int L = 0;
  std::optional<double> target_width;
  std::optional<double> relative_width;
  std::string method = "stieltjes";
  std::string mode = "adaptive";
  std::string kind = "m";
  int max_depth = mk::kMaxTreeDepth;
  std::optional<int> cutoff;
  int generation = 24;
};

/// Smallest cutoff whose certified tail is under a quarter of the target.
inline unsigned default_cutoff(unsigned L, double target) {
  for (unsigned N = 1; N < 4000; ++N)
    if (mk::moment_M_tail(L, N).width() <= target / 4) return N;
  throw usage_error("no cutoff below 4000 meets the target width");
}

inline json moment_json(const MomentArgs& a, const Settings& s) {
  if (a.L < 0) throw usage_error("L must be >= 0");
  if (a.max_depth < 1 || a.max_depth > mk::kMaxTreeDepth) throw usage_error("--depth must be in [1, 40]");
  const double target = a.target_width.value_or(s.target_width);

  if (a.method == "tree") {
    if (a.kind != "m") throw usage_error("--method tree only estimates m_L");
    json key{{"kind", "m"}, {"L", a.L}, {"method", "tree"}, {"generation", a.generation}};
    return cached(s, key, [&] {
      const auto e = mk::generation_estimate(a.L, a.generation, {}, s.threads);
      json j = key;
      j["estimate_cf_form"] = e.value_cf_form;
      j["estimate_tree_form"] = e.value_tree_form;
      j["node_count"] = e.node_count;
      j["converged"] = true;
      return j;
    });
  }
  if (a.method != "stieltjes") throw usage_error("--method must be stieltjes or tree");
  if (a.mode != "adaptive" && a.mode != "uniform") throw usage_error("--mode must be adaptive or uniform");

  mk::MomentOptions opt;
  opt.mode = a.mode == "uniform" ? mk::QuadratureMode::uniform_depth : mk::QuadratureMode::adaptive;
  opt.max_depth = a.max_depth;
  opt.threads = s.threads;

  json key{{"kind", a.kind}, {"L", a.L}, {"method", "stieltjes"}, {"mode", a.mode}, {"max_depth", a.max_depth}};
  if (a.kind == "m") {
    if (a.relative_width) {
      key["relative_width"] = *a.relative_width;
      return cached(s, key, [&] {
        return record_json(mk::moment_m_relative(static_cast<unsigned>(a.L), *a.relative_width, opt));
      });
    }
    key["target_width"] = target;
    return cached(s, key, [&] { return record_json(mk::moment_m(static_cast<unsigned>(a.L), target, opt)); });
  }
  if (a.kind == "M") {
    if (a.relative_width) throw usage_error("--relative-width applies to m_L only");
    const unsigned N = a.cutoff ? static_cast<unsigned>(*a.cutoff) : default_cutoff(static_cast<unsigned>(a.L), target);
    if (a.cutoff && *a.cutoff < 1) throw usage_error("--cutoff must be >= 1");
    key["target_width"] = target;
    key["cutoff"] = N;
    return cached(s, key, [&] { return record_json(mk::moment_M(static_cast<unsigned>(a.L), N, target, opt)); });
  }
  throw usage_error("--kind must be m or M");
}

inline int cmd_moment(const MomentArgs& a, const Settings& s, std::ostream& out) {
  const json rec = moment_json(a, s);
  out << printable(rec, s.timing).dump() << '\n';
  return rec.value("converged", false) ? kOk : kUnconverged;
}

// ---------------------------------------------------------------------------
// table
// ---------------------------------------------------------------------------

struct TableRow {
  int L = 0;
  mk::Enclosure m, mstar, predictor;
  double relative_deviation = 0;  // (predictor - m) / m at the midpoints
  bool converged = true;
  bool has_reference = false;
  bool matches_reference = true;        // m intersects [v, v + last place]
  bool mstar_matches_reference = true;  // same for m*
};

struct TableOptions {
  std::vector<unsigned> rows;
  double absolute_width = kDefaultTargetWidth;  // rows with L <= 12
  double relative_width = kDefaultRelativeWidth;  // rows with L > 12
  double c0_width = 1e-8;
};

inline constexpr unsigned kAbsoluteRowsUpTo = 12;

/// c0 at the given width, through the cache when one is configured.
inline mk::Enclosure c0_cached(double width, const Settings& s) {
  const json key{{"kind", "constant"}, {"name", "c0"}, {"target_width", width}};
  const json rec = cached(s, key, [&] {
    mk::MomentOptions opt;
    opt.threads = s.threads;
    const auto c = mk::c0(width, opt);
    return json{{"value", enclosure_json(c)}, {"converged", c.width() <= width}};
  });
  return enclosure_from_json(rec.at("value"));
}

inline std::vector<TableRow> compute_table(const TableOptions& t, const Settings& s) {
  std::vector<TableRow> rows;
  if (t.rows.empty()) return rows;
  mk::MomentOptions opt;
  opt.threads = s.threads;

  // Small rows share one pass; the batch composition is part of the cache key.
  std::vector<unsigned> small;
  for (unsigned L : t.rows)
    if (L <= kAbsoluteRowsUpTo && std::find(small.begin(), small.end(), L) == small.end()) small.push_back(L);
  std::sort(small.begin(), small.end());
  std::map<unsigned, mk::MomentRecord> records;
  if (!small.empty()) {
    json key{{"kind", "m-batch"}, {"L", small}, {"method", "stieltjes"}, {"mode", "adaptive"},
             {"target_width", t.absolute_width}, {"max_depth", mk::kMaxTreeDepth}};
    const json rec = cached(s, key, [&] {
      const auto batch = mk::moment_m_batch(small, std::vector<double>(small.size(), t.absolute_width), opt);
      json j;
      j["records"] = json::array();
      for (const auto& r : batch) j["records"].push_back(record_json(r));
      return j;
    });
    for (const auto& r : rec.at("records")) {
      const auto m = record_from_json(r);
      records[static_cast<unsigned>(m.L)] = m;
    }
  }
  for (unsigned L : t.rows) {
    if (records.count(L)) continue;
    json key{{"kind", "m"}, {"L", L}, {"method", "stieltjes"}, {"mode", "adaptive"},
             {"max_depth", mk::kMaxTreeDepth}, {"relative_width", t.relative_width}};
    records[L] = record_from_json(cached(s, key, [&] { return record_json(mk::moment_m_relative(L, t.relative_width, opt)); }));
  }

  const mk::Enclosure c0 = c0_cached(t.c0_width, s);
  for (unsigned L : t.rows) {
    const auto& rec = records.at(L);
    TableRow row;
    row.L = static_cast<int>(L);
    row.m = rec.value;
    row.converged = rec.converged;
    if (L == 0) {
      row.mstar = row.predictor = mk::Enclosure::exact(std::nan(""));
      row.relative_deviation = std::nan("");
    } else {
      row.mstar = mk::mstar(L, row.m);
      row.predictor = mk::predictor(L, c0);
      row.relative_deviation = (row.predictor.mid() - row.m.mid()) / row.m.mid();
    }
    if (const auto* ref = published_row(row.L)) {
      row.has_reference = true;
      row.matches_reference = row.m.intersects(truncated_decimal(ref->m));
      row.mstar_matches_reference = row.mstar.intersects(truncated_decimal(ref->mstar));
    }
    rows.push_back(row);
  }
  return rows;
}

inline int cmd_table(const TableOptions& t, const std::string& format, const Settings& s, std::ostream& out) {
  if (format != "csv" && format != "json") throw usage_error("--format must be csv or json");
  const auto rows = compute_table(t, s);
  bool ok = true, converged = true;
  if (format == "csv")
    out << "L,m_lo,m_hi,mstar_lo,mstar_hi,predictor,relative_deviation,reference,reference_ok,mstar_reference_ok\n";
  for (const auto& r : rows) {
    ok = ok && r.matches_reference;
    converged = converged && r.converged;
    const auto* ref = published_row(r.L);
    if (format == "csv") {
      out << r.L << ',' << fmt(r.m.lo) << ',' << fmt(r.m.hi) << ',' << fmt(r.mstar.lo) << ',' << fmt(r.mstar.hi) << ','
          << fmt(r.predictor.mid()) << ',' << fmt(r.relative_deviation) << ',' << csv_field(ref ? ref->m : "") << ','
          << (r.has_reference ? (r.matches_reference ? "yes" : "no") : "") << ','
          << (r.has_reference ? (r.mstar_matches_reference ? "yes" : "no") : "") << '\n';
    } else {
      json j;
      j["L"] = r.L;
      j["m"] = enclosure_json(r.m);
      j["mstar"] = enclosure_json(r.mstar);
      j["predictor"] = enclosure_json(r.predictor);
      j["relative_deviation"] = r.relative_deviation;
      j["converged"] = r.converged;
      if (r.has_reference) {
        j["reference"] = ref->m;
        j["reference_ok"] = r.matches_reference;
        j["mstar_reference"] = ref->mstar;
        j["mstar_reference_ok"] = r.mstar_matches_reference;
      }
      out << j.dump() << '\n';
    }
  }
  if (!ok) return kVerificationFailed;
  return converged ? kOk : kUnconverged;
}

// ---------------------------------------------------------------------------
// constants
// ---------------------------------------------------------------------------

inline int cmd_constants(const Settings& s, std::ostream& out) {
  const double w = s.target_width;
  const json key{{"kind", "constants"}, {"target_width", w}};
  const json rec = cached(s, key, [&] {
    mk::MomentOptions opt;
    opt.threads = s.threads;
    const auto e = mk::exp2_moments(w / 1.8, opt);
    const auto I = e.values[0];
    const auto c0 = mk::detail::c0_from_exp2_mean(I);
    const auto c1 = mk::detail::c1_from_exp2_moments(e.values[0], e.values[1]);
    json j;
    j["exp2_mean"] = enclosure_json(I);
    j["c0"] = enclosure_json(c0);
    j["c1"] = enclosure_json(c1);
    j["leading_coefficient"] = enclosure_json(mk::leading_coefficient(c0));
    j["C"] = enclosure_json(mk::constants::C());
    j["converged"] = c0.width() <= w && c1.width() <= w;
    j["wall_time"] = e.seconds;
    return j;
  });
  out << printable(rec, s.timing).dump() << '\n';
  return rec.at("converged").get<bool>() ? kOk : kUnconverged;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string suite = "all";
  int samples = 10000;
  std::uint64_t seed = 1;
};

class Report {
 public:
  explicit Report(std::ostream& out) : out_(out) {}
  void check(const std::string& suite, const std::string& name, bool pass, json detail = json::object()) {
    json j{{"suite", suite}, {"check", name}, {"pass", pass}};
    if (!detail.empty()) j["detail"] = std::move(detail);
    out_ << j.dump() << '\n';
    (pass ? passed_ : failed_)++;
  }
  int finish() {
    out_ << json{{"summary", {{"passed", passed_}, {"failed", failed_}}}}.dump() << '\n';
    return failed_ == 0 ? kOk : kVerificationFailed;
  }

 private:
  std::ostream& out_;
  int passed_ = 0, failed_ = 0;
};

/// Random rationals p/q with p in [0, max], q in [1, max], reduced.
inline std::vector<mk::Rational> random_rationals(int count, std::uint64_t max, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> num(0, max), den(1, max);
  std::vector<mk::Rational> xs;
  xs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const auto p = num(rng);
    xs.emplace_back(p, den(rng));
  }
  return xs;
}

/// Random Stern-Brocot intervals reached by random walks of length <= max_depth from [0, inf].
inline std::vector<mk::SternBrocotInterval> random_intervals(int count, int max_depth, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> depth(0, max_depth);
  std::bernoulli_distribution side;
  std::vector<mk::SternBrocotInterval> out;
  for (int i = 0; i < count; ++i) {
    auto iv = mk::SternBrocotInterval::whole_line();
    for (int d = depth(rng); d > 0; --d) {
      const auto [l, r] = mk::sb_refine(iv);
      iv = side(rng) ? r : l;
    }
    out.push_back(iv);
  }
  return out;
}

inline void verify_distr(const VerifyArgs& a, Report& report) {
  const std::string suite = "distr";
  report.check(suite, "qmark(1/2) = 1/2", mk::qmark_exact(mk::Rational(1, 2)) == mk::DyadicRational::pow2_neg(1));
  report.check(suite, "qmark(1/3) = 1/4", mk::qmark_exact(mk::Rational(1, 3)) == mk::DyadicRational::pow2_neg(2));
  report.check(suite, "qmark(2/3) = 3/4",
               mk::qmark_exact(mk::Rational(2, 3)) == mk::DyadicRational(mk::BigInt(3), 2));
  int bad = 0;
  for (const auto& x : random_rationals(a.samples, 10000, a.seed))
    if (!mk::verify_distr(x).is_zero()) ++bad;
  report.check(suite, "functional equation and reflection residuals are zero", bad == 0,
               {{"samples", a.samples}, {"nonzero", bad}});
  int wrong = 0;
  const int intervals = std::max(1, a.samples / 10);
  for (const auto& iv : random_intervals(intervals, 30, a.seed))
    if (mk::F_endpoint(iv.right) - mk::F_endpoint(iv.left) != mk::DyadicRational::pow2_neg(iv.depth)) ++wrong;
  report.check(suite, "F-measure of Stern-Brocot intervals is 2^-depth", wrong == 0,
               {{"samples", intervals}, {"wrong", wrong}});
}

inline void verify_identities(const Settings& s, Report& report) {
  const std::string suite = "identities";
  mk::MomentOptions opt;
  opt.threads = s.threads;
  constexpr int kMax = 20;
  std::vector<unsigned> Ls;
  for (unsigned L = 0; L <= kMax; ++L) Ls.push_back(L);
  const auto recs = mk::moment_m_batch(Ls, std::vector<double>(Ls.size(), 1e-8), opt);
  mk::MomentVector m{{}, mk::MomentKind::m};
  for (const auto& r : recs) m.values.push_back(r.value);
  int bad = 0;
  double widest = 0;
  for (int L = 0; L <= kMax; ++L) {
    const auto res = mk::reflect_residual(m, L);
    if (!res.contains(0.0)) ++bad;
    widest = std::max(widest, res.width());
  }
  report.check(suite, "reflection residuals contain 0 for L <= 20", bad == 0, {{"failures", bad}, {"widest", widest}});
  const auto M = mk::M_from_m(m);
  const auto M2 = mk::moment_M(2, default_cutoff(2, 1e-7), 1e-7, opt);
  report.check(suite, "M_from_m(2) intersects quadrature M_2", M[2].intersects(M2.value),
               {{"M_from_m", enclosure_json(M[2])}, {"quadrature", enclosure_json(M2.value)}});
  const auto c0 = mk::c0(1e-8, opt);
  const auto r5 = mk::M_ratio(M, c0, 5), r20 = mk::M_ratio(M, c0, 20);
  report.check(suite, "|ratio(20) - 1| < |ratio(5) - 1|", std::fabs(r20.mid() - 1) < std::fabs(r5.mid() - 1),
               {{"ratio5", enclosure_json(r5)}, {"ratio20", enclosure_json(r20)}});
}

inline void verify_laplace(const Settings& s, Report& report) {
  const std::string suite = "laplace";
  mk::MomentOptions opt;
  opt.threads = s.threads;
  const auto c0 = mk::c0(1e-8, opt);
  for (int L : {10, 100}) {
    const auto rep = mk::g_r_split(L, 1e-12, c0);
    const auto m = mk::moment_m_relative(static_cast<unsigned>(L), 1e-6, opt);
    const double rel = std::fabs(rep.m_L_reconstructed - m.value.mid()) / m.value.mid();
    report.check(suite, "split identity at L = " + std::to_string(L), rel <= 1e-5,
                 {{"reconstructed", rep.m_L_reconstructed}, {"m", enclosure_json(m.value)}, {"relative_error", rel}});
  }
  const auto sd = mk::saddle(1e4);
  const double a = sd.alpha * std::sqrt(1e4) / std::pow(sd.c, 1.5);
  report.check(suite, "alpha sqrt(L) / c^(3/2) near 1 at L = 1e4", std::fabs(a - 1) <= 1e-2, {{"value", a}});
  report.check(suite, "C = e^(-2 sqrt(log 2))",
               std::fabs(mk::constants::C().mid() - 0.189169995269) <= 1e-12, {{"C", enclosure_json(mk::constants::C())}});
}

inline int cmd_verify(const VerifyArgs& a, const Settings& s, std::ostream& out) {
  static const std::set<std::string> suites{"distr", "identities", "laplace", "all"};
  if (!suites.count(a.suite)) throw usage_error("--suite must be distr, identities, laplace or all");
  if (a.samples < 1) throw usage_error("--samples must be positive");
  Report report(out);
  if (a.suite == "distr" || a.suite == "all") verify_distr(a, report);
  if (a.suite == "identities" || a.suite == "all") verify_identities(s, report);
  if (a.suite == "laplace" || a.suite == "all") verify_laplace(s, report);
  return report.finish();
}

// ---------------------------------------------------------------------------
// plot-data
// ---------------------------------------------------------------------------

/// The first count - 2 Stern-Brocot nodes inside (0, 1) in breadth-first order plus both endpoints, sorted.
inline std::vector<mk::Rational> stern_brocot_samples(int count) {
  std::vector<mk::Rational> xs{mk::Rational(0), mk::Rational(1)};
  std::vector<mk::SternBrocotInterval> level{mk::SternBrocotInterval::unit()};
  while (static_cast<int>(xs.size()) < count) {
    std::vector<mk::SternBrocotInterval> next;
    for (const auto& iv : level) {
      if (static_cast<int>(xs.size()) == count) break;
      xs.push_back(iv.split_point());
      const auto [l, r] = mk::sb_refine(iv);
      next.push_back(l);
      next.push_back(r);
    }
    level = std::move(next);
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

struct PlotArgs {
  std::string what = "qmark";
  int samples = 65;
};

inline int cmd_plot_data(const PlotArgs& a, const Settings& s, std::ostream& out) {
  if (a.samples < 2) throw usage_error("--samples must be >= 2");
  if (a.what == "qmark") {
    out << "x,qmark,x_decimal,qmark_decimal\n";
    for (const auto& x : stern_brocot_samples(a.samples)) {
      const auto v = mk::qmark_exact(x);
      out << x.str() << ',' << v.str() << ',' << fmt(x.to_double()) << ',' << fmt(v.to_double()) << '\n';
    }
    return kOk;
  }
  if (a.what == "psi") {
    out << "x,psi_lo,psi_hi\n";
    for (const auto& x : stern_brocot_samples(a.samples)) {
      const auto v = mk::psi_enclosure(x);
      out << x.str() << ',' << fmt(v.lo) << ',' << fmt(v.hi) << '\n';
    }
    return kOk;
  }
  if (a.what == "mstar") {
    TableOptions t;
    for (const auto& r : published_table())
      if (static_cast<int>(t.rows.size()) < a.samples) t.rows.push_back(static_cast<unsigned>(r.L));
    t.absolute_width = s.target_width;
    out << "L,mstar_lo,mstar_hi\n";
    for (const auto& r : compute_table(t, s)) out << r.L << ',' << fmt(r.mstar.lo) << ',' << fmt(r.mstar.hi) << '\n';
    return kOk;
  }
  throw usage_error("--what must be qmark, psi or mstar");
}

}  // namespace mink
