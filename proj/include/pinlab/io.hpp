#pragma once

// Run configuration (flat key=value), law specifications, and the CSV /
// JSON / manifest writers.

#include <boost/uuid/detail/sha1.hpp>
#include <json.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "pinlab/excursion_law.hpp"
#include "pinlab/slowly_varying.hpp"

namespace pinlab {

inline constexpr const char* kToolVersion = "0.1.0";

/// Bad configuration or command line; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// number formatting and parsing

/// Shortest decimal that round-trips, independent of locale.
inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline std::string fmt(std::int64_t x) { return std::to_string(x); }

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline double parse_double(std::string_view key, const std::string& v) {
  double x = 0;
  const auto s = trim(v);
  auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(x))
    throw UsageError("invalid number for '" + std::string(key) + "': " + v);
  return x;
}

inline std::int64_t parse_int(std::string_view key, const std::string& v) {
  const auto s = trim(v);
  std::int64_t x = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec == std::errc() && r.ptr == s.data() + s.size()) return x;
  // accept integral values written as 1e4 or 2^13
  if (auto caret = s.find('^'); caret != std::string::npos) {
    const double b = parse_double(key, s.substr(0, caret));
    const double e = parse_double(key, s.substr(caret + 1));
    const double p = std::pow(b, e);
    if (p == std::floor(p) && p < 9e18) return static_cast<std::int64_t>(p);
  } else {
    const double d = parse_double(key, s);
    if (d == std::floor(d) && std::abs(d) < 9e18) return static_cast<std::int64_t>(d);
  }
  throw UsageError("invalid integer for '" + std::string(key) + "': " + v);
}

template <typename T, typename F>
std::vector<T> parse_list(std::string_view key, const std::string& v, F&& one) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(one(key, item));
  }
  if (out.empty()) throw UsageError("empty list for '" + std::string(key) + "'");
  return out;
}

// ---------------------------------------------------------------------------
// law specifications

namespace detail {

struct SpecCall {
  std::string name;
  std::vector<std::string> positional;
  std::map<std::string, std::string> named;
};

// name(arg, key=value, key=nested(...)); one nesting level
inline SpecCall parse_call(std::string_view text) {
  const auto s = trim(text);
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')')
    throw UsageError("malformed law spec '" + s + "': expected name(...)");
  SpecCall call;
  call.name = trim(std::string_view(s).substr(0, open));
  const std::string body = s.substr(open + 1, s.size() - open - 2);
  std::vector<std::string> parts;
  int depth = 0;
  std::string cur;
  for (char ch : body) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (depth != 0) throw UsageError("unbalanced parentheses in law spec '" + s + "'");
  if (!trim(cur).empty() || !parts.empty()) parts.push_back(cur);
  for (const auto& p : parts) {
    const auto t = trim(p);
    const auto eq = t.find('=');
    if (eq == std::string::npos) call.positional.push_back(t);
    else call.named[trim(std::string_view(t).substr(0, eq))] = trim(std::string_view(t).substr(eq + 1));
  }
  return call;
}

inline void reject_unknown(const SpecCall& c, std::initializer_list<const char*> known) {
  for (const auto& [k, v] : c.named) {
    bool ok = false;
    for (const char* name : known) ok = ok || k == name;
    if (!ok) throw UsageError("unknown key '" + k + "' in " + c.name + "(...)");
  }
}

}  // namespace detail

inline SlowlyVarying parse_phi(const std::string& text) {
  const auto c = detail::parse_call(text);
  if (c.positional.size() != 1 || !c.named.empty())
    throw UsageError("phi spec takes one argument: const(a) or logpow(a)");
  const double a = parse_double("phi", c.positional[0]);
  try {
    if (c.name == "const") return SlowlyVarying::constant(a);
    if (c.name == "logpow") return SlowlyVarying::log_power(a);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  throw UsageError("unknown phi kind '" + c.name + "' (const or logpow)");
}

/// heavy(c=1.5, phi=const(1.0), p_inf=0.0[, n_table=65536]) | geometric(p[, p_inf=x]) |
/// deterministic(k[, p_inf=x])
inline ExcursionLaw parse_law(const std::string& text) {
  const auto c = detail::parse_call(text);
  auto named_or = [&](const char* k, double dflt) {
    auto it = c.named.find(k);
    return it == c.named.end() ? dflt : parse_double(k, it->second);
  };
  try {
    if (c.name == "heavy") {
      detail::reject_unknown(c, {"c", "phi", "p_inf", "n_table"});
      if (!c.positional.empty()) throw UsageError("heavy(...) takes named arguments only");
      if (!c.named.count("c")) throw UsageError("heavy(...) needs c=");
      const auto phi = c.named.count("phi") ? parse_phi(c.named.at("phi")) : SlowlyVarying::constant(1.0);
      const auto n_table = c.named.count("n_table")
                               ? static_cast<std::size_t>(parse_int("n_table", c.named.at("n_table")))
                               : ExcursionLaw::kDefaultTable;
      return ExcursionLaw::heavy(named_or("c", 0), phi, named_or("p_inf", 0.0), n_table);
    }
    if (c.name == "geometric") {
      detail::reject_unknown(c, {"p", "p_inf"});
      const double p = c.positional.size() == 1 ? parse_double("p", c.positional[0]) : named_or("p", -1);
      return ExcursionLaw::geometric(p, named_or("p_inf", 0.0));
    }
    if (c.name == "deterministic") {
      detail::reject_unknown(c, {"k", "p_inf"});
      const auto k = c.positional.size() == 1 ? parse_int("k", c.positional[0])
                                              : parse_int("k", c.named.count("k") ? c.named.at("k") : "0");
      return ExcursionLaw::deterministic(k, named_or("p_inf", 0.0));
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  throw UsageError("unknown law '" + c.name + "' (heavy, geometric, deterministic)");
}

// ---------------------------------------------------------------------------
// run configuration

struct RunConfig {
  std::string law = "heavy(c=1.5, phi=const(1), p_inf=0)";
  std::optional<double> beta;
  std::optional<double> delta;
  std::optional<double> u;
  std::optional<std::int64_t> N;
  std::vector<std::int64_t> N_grid;
  std::int64_t replicas = 64;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::int64_t threads = 0;
  double theta_c = 0.5;
  double A = 1.0;
  std::vector<double> delta_grid;
  std::vector<double> beta_grid;
  std::vector<double> u_grid;
  std::int64_t m_cap = 10'000'000;
  std::int64_t k_max = 100000;
  std::int64_t pairs = 10000;
  bool enforce_min_N = true;

  /// Delta from whichever of delta / u was given.
  double delta_value() const {
    if (!beta) throw UsageError("missing required field 'beta'");
    if (delta) return *delta;
    if (u) return *u + *beta / 2;
    throw UsageError("missing required field 'delta' (or 'u')");
  }
  double u_value() const { return delta_value() - *beta / 2; }
};

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "law",     "beta",   "delta", "u",          "N",          "N_grid",     "replicas",
      "seed",    "out_dir", "threads", "theta_c", "A",          "delta_grid", "beta_grid",
      "u_grid",  "m_cap",  "k_max", "pairs",      "enforce_min_N"};
  return keys;
}

inline bool parse_bool(std::string_view key, const std::string& v) {
  const auto s = trim(v);
  if (s == "1" || s == "true" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "no") return false;
  throw UsageError("invalid boolean for '" + std::string(key) + "': " + v);
}

/// Builds a validated RunConfig from key -> value pairs.
inline RunConfig config_from_map(const std::map<std::string, std::string>& kv) {
  RunConfig c;
  for (const auto& [k, v] : kv) {
    if (k == "law") c.law = trim(v);
    else if (k == "beta") c.beta = parse_double(k, v);
    else if (k == "delta") c.delta = parse_double(k, v);
    else if (k == "u") c.u = parse_double(k, v);
    else if (k == "N") c.N = parse_int(k, v);
    else if (k == "N_grid") c.N_grid = parse_list<std::int64_t>(k, v, parse_int);
    else if (k == "replicas") c.replicas = parse_int(k, v);
    else if (k == "seed") c.seed = static_cast<std::uint64_t>(parse_int(k, v));
    else if (k == "out_dir") c.out_dir = trim(v);
    else if (k == "threads") c.threads = parse_int(k, v);
    else if (k == "theta_c") c.theta_c = parse_double(k, v);
    else if (k == "A") c.A = parse_double(k, v);
    else if (k == "delta_grid") c.delta_grid = parse_list<double>(k, v, parse_double);
    else if (k == "beta_grid") c.beta_grid = parse_list<double>(k, v, parse_double);
    else if (k == "u_grid") c.u_grid = parse_list<double>(k, v, parse_double);
    else if (k == "m_cap") c.m_cap = parse_int(k, v);
    else if (k == "k_max") c.k_max = parse_int(k, v);
    else if (k == "pairs") c.pairs = parse_int(k, v);
    else if (k == "enforce_min_N") c.enforce_min_N = parse_bool(k, v);
    else throw UsageError("unknown key '" + k + "'");
  }
  if (c.delta && c.u) throw UsageError("both 'delta' and 'u' given; specify exactly one");
  if (c.beta && !(*c.beta > 0)) throw UsageError("'beta' must be > 0");
  if (c.N && *c.N < 1) throw UsageError("'N' must be >= 1");
  for (auto n : c.N_grid)
    if (n < 1) throw UsageError("'N_grid' entries must be >= 1");
  if (c.replicas < 2) throw UsageError("'replicas' must be >= 2");
  if (c.threads < 0) throw UsageError("'threads' must be >= 0");
  if (!(c.theta_c > 0 && c.theta_c < 1)) throw UsageError("'theta_c' must lie in (0, 1)");
  if (!(c.A > 0)) throw UsageError("'A' must be > 0");
  if (c.m_cap < 1) throw UsageError("'m_cap' must be >= 1");
  if (c.k_max < 1) throw UsageError("'k_max' must be >= 1");
  if (c.pairs < 100) throw UsageError("'pairs' must be >= 100");
  for (double b : c.beta_grid)
    if (!(b > 0)) throw UsageError("'beta_grid' entries must be > 0");
  parse_law(c.law);  // validates
  return c;
}

/// key = value lines; '#' starts a comment.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    kv[trim(std::string_view(line).substr(0, eq))] = trim(std::string_view(line).substr(eq + 1));
  }
  return kv;
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F&& f) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + f(xs[i]);
  return s;
}

/// Canonical key = value text; config_from_map(read) of it reproduces the config.
inline std::string to_config_text(const RunConfig& c) {
  std::ostringstream o;
  auto d = [](double x) { return fmt(x); };
  auto i = [](std::int64_t x) { return fmt(x); };
  o << "law = " << c.law << "\n";
  if (c.beta) o << "beta = " << fmt(*c.beta) << "\n";
  if (c.delta) o << "delta = " << fmt(*c.delta) << "\n";
  if (c.u) o << "u = " << fmt(*c.u) << "\n";
  if (c.N) o << "N = " << *c.N << "\n";
  if (!c.N_grid.empty()) o << "N_grid = " << join(c.N_grid, i) << "\n";
  o << "replicas = " << c.replicas << "\n";
  o << "seed = " << c.seed << "\n";
  o << "out_dir = " << c.out_dir << "\n";
  o << "threads = " << c.threads << "\n";
  o << "theta_c = " << fmt(c.theta_c) << "\n";
  o << "A = " << fmt(c.A) << "\n";
  if (!c.delta_grid.empty()) o << "delta_grid = " << join(c.delta_grid, d) << "\n";
  if (!c.beta_grid.empty()) o << "beta_grid = " << join(c.beta_grid, d) << "\n";
  if (!c.u_grid.empty()) o << "u_grid = " << join(c.u_grid, d) << "\n";
  o << "m_cap = " << c.m_cap << "\n";
  o << "k_max = " << c.k_max << "\n";
  o << "pairs = " << c.pairs << "\n";
  o << "enforce_min_N = " << (c.enforce_min_N ? "true" : "false") << "\n";
  return o.str();
}

inline std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[trim(std::string_view(line).substr(0, eq))] = trim(std::string_view(line).substr(eq + 1));
  }
  return kv;
}

/// SHA-1 of the canonical config in git's blob form ("blob <len>\0<text>").
/// out_dir and threads do not affect results and are left out.
inline std::string config_hash(RunConfig c) {
  c.out_dir.clear();
  c.threads = 0;
  const std::string body = to_config_text(c);
  const std::string head = "blob " + std::to_string(body.size()) + std::string(1, '\0');
  boost::uuids::detail::sha1 h;
  h.process_bytes(head.data(), head.size());
  h.process_bytes(body.data(), body.size());
  boost::uuids::detail::sha1::digest_type dg;
  h.get_digest(dg);
  char buf[41];
  for (int i = 0; i < 5; ++i) std::snprintf(buf + 8 * i, 9, "%08x", dg[i]);
  return std::string(buf, 40);
}

// ---------------------------------------------------------------------------
// writers

using CsvField = std::variant<double, std::int64_t, std::string>;

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

  void row(std::vector<CsvField> fields) {
    if (fields.size() != header_.size()) throw std::logic_error("CsvWriter: row width mismatch");
    rows_.push_back(std::move(fields));
  }

  std::string str() const {
    std::string s;
    for (std::size_t i = 0; i < header_.size(); ++i) s += (i ? "," : "") + header_[i];
    s += "\n";
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) s += ",";
        std::visit([&](const auto& v) {
          using V = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<V, std::string>) s += v;
          else s += fmt(v);
        }, r[i]);
      }
      s += "\n";
    }
    return s;
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << str();
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<CsvField>> rows_;
};

using Json = nlohmann::json;  // std::map objects: keys come out sorted

inline void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

/// JSON-safe number: NaN and infinities become null.
inline Json jnum(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

struct Manifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> timings;
  std::vector<std::string> warnings;

  Json to_json() const {
    Json j;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["tool_version"] = kToolVersion;
    Json t = Json::object();
    for (const auto& [name, secs] : timings) t[name] = secs;
    j["wall_seconds"] = t;
    j["warnings"] = warnings;
    return j;
  }
};

}  // namespace pinlab
