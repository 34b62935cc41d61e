#include "qwalk/cli/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace qwalk::cli {

std::size_t WalkGrid::steps(double tau) const {
  if (j_steps) return *j_steps;
  const double j = *t_final / (tau * epsilon);
  const double r = std::round(j);
  if (std::abs(j - r) > 1e-9 * std::max(1.0, r)) {
    throw ConfigError("grid.t_final is not a whole number of steps tau*epsilon");
  }
  return static_cast<std::size_t>(r);
}

namespace {

struct Entry {
  std::string value;
  std::size_t line = 0;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Strip a trailing comment that is not inside double quotes.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& v, std::size_t line) {
  if (!v.empty() && v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') {
      throw ConfigError("line " + std::to_string(line) + ": unterminated string");
    }
    return v.substr(1, v.size() - 2);
  }
  return v;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Reader {
 public:
  Reader(std::map<std::string, Entry> entries, std::filesystem::path source)
      : entries_(std::move(entries)), source_(std::move(source)) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    auto it = entries_.find(key);
    std::string where = source_.string();
    if (it != entries_.end()) where += ":" + std::to_string(it->second.line);
    throw ConfigError(where + ": " + key + ": " + what);
  }

  void require(const std::string& key) const {
    if (!has(key)) {
      throw ConfigError(source_.string() + ": missing required key '" + key + "'");
    }
  }

  std::string text(const std::string& key) const { return entries_.at(key).value; }

  double real(const std::string& key) const {
    try {
      const Expr e = Expr::parse(text(key));
      if (!e.is_constant()) fail(key, "expected a number, got an expression of t or x");
      return e.eval(0.0, 0.0);
    } catch (const ExprSyntaxError& err) {
      fail(key, std::string("not a number (") + err.what() + ")");
    } catch (const ExprDomainError& err) {
      fail(key, err.what());
    }
  }

  double real(const std::string& key, double fallback) const {
    return has(key) ? real(key) : fallback;
  }

  long long integer(const std::string& key, const std::string& raw) const {
    long long v = 0;
    const auto* end = raw.data() + raw.size();
    const auto res = std::from_chars(raw.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) fail(key, "expected an integer, got '" + raw + "'");
    return v;
  }

  long long integer(const std::string& key) const { return integer(key, text(key)); }

  std::size_t count(const std::string& key, const std::string& raw) const {
    const long long v = integer(key, raw);
    if (v < 0) fail(key, "must be non-negative");
    return static_cast<std::size_t>(v);
  }

  std::size_t count(const std::string& key) const { return count(key, text(key)); }

  std::vector<std::size_t> counts(const std::string& key) const {
    std::vector<std::size_t> out;
    for (const auto& s : split_list(text(key))) out.push_back(count(key, s));
    if (out.empty()) fail(key, "empty list");
    return out;
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : split_list(text(key))) {
      try {
        const Expr e = Expr::parse(s);
        if (!e.is_constant()) fail(key, "list entries must be numbers");
        out.push_back(e.eval(0.0, 0.0));
      } catch (const ExprSyntaxError& err) {
        fail(key, std::string("not a number (") + err.what() + ")");
      }
    }
    if (out.empty()) fail(key, "empty list");
    return out;
  }

  Expr expression(const std::string& key) const {
    try {
      return Expr::parse(text(key));
    } catch (const ExprSyntaxError& err) {
      fail(key, std::string("expression error at offset ") +
                    std::to_string(err.offset()) + ": " + err.what());
    }
  }

 private:
  std::map<std::string, Entry> entries_;
  std::filesystem::path source_;
};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "jet.p", "jet.alpha", "jet.beta", "jet.delta", "jet.tau", "jet.lambda",
      "jet.theta_bar", "jet.xi_bar", "jet.zeta",
      "grid.n_sites", "grid.j_steps", "grid.t_final", "grid.x0", "grid.epsilon",
      "initial.center", "initial.width", "initial.wavenumber",
      "initial.w_minus_re", "initial.w_minus_im", "initial.w_plus_re",
      "initial.w_plus_im",
      "ladder.eps", "ladder.t_physical", "ladder.reference",
      "domain.x0", "domain.length",
      "hadamard.steps",
      "continuum.n_sites", "continuum.x0", "continuum.length",
      "continuum.t_final", "continuum.cfl",
      "gauge.generator", "gauge.alpha",
      "checks", "output.dir", "output.snapshot_every",
      "tol.probability", "tol.order_lo", "tol.order_hi", "tol.kg_order",
      "tol.gauge_order", "tol.gauge_final", "tol.conservation_drift",
      "tol.lagrangian_gap", "tol.lagrangian_order", "tol.variational", "tol.variational_order",
      "tol.hadamard_factor", "tol.theta_min"};
  return keys;
}

std::map<std::string, Entry> tokenize(const std::string& text,
                                      const std::filesystem::path& source) {
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string body = trim(strip_comment(raw));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = source.string() + ":" + std::to_string(line);
    if (eq == std::string::npos) {
      throw ConfigError(where + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = unquote(trim(std::string_view(body).substr(eq + 1)), line);
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (known_keys().count(key) == 0) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
    if (value.empty()) throw ConfigError(where + ": " + key + ": empty value");
    if (!entries.emplace(key, Entry{value, line}).second) {
      throw ConfigError(where + ": duplicate key '" + key + "'");
    }
  }
  return entries;
}

}  // namespace

Scenario parse_scenario(const std::string& text,
                        const std::filesystem::path& source) {
  const Reader r(tokenize(text, source), source);
  Scenario s;
  s.source = source;

  for (const char* key : {"jet.p", "jet.tau", "jet.lambda", "jet.theta_bar",
                          "jet.xi_bar", "jet.zeta", "grid.n_sites"}) {
    r.require(key);
  }
  WalkJet& jet = s.jet;
  const long long p = r.integer("jet.p");
  if (p != 0 && p != 1) r.fail("jet.p", "must be 0 or 1");
  jet.p = static_cast<int>(p);
  jet.alpha = r.real("jet.alpha", 1.0);
  jet.beta = r.real("jet.beta", 1.0);
  jet.delta = r.real("jet.delta", 1.0);
  jet.tau = r.real("jet.tau");
  jet.lambda = r.real("jet.lambda");
  jet.theta_bar = r.expression("jet.theta_bar");
  jet.xi_bar = r.expression("jet.xi_bar");
  jet.zeta = r.expression("jet.zeta");
  try {
    jet.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source.string() + ": " + e.what());
  }

  s.grid.n_sites = r.count("grid.n_sites");
  if (s.grid.n_sites < 2) r.fail("grid.n_sites", "must be at least 2");
  const bool has_j = r.has("grid.j_steps");
  const bool has_t = r.has("grid.t_final");
  if (has_j == has_t) {
    throw ConfigError(source.string() +
                      ": exactly one of 'grid.j_steps' and 'grid.t_final' is required");
  }
  if (has_j) s.grid.j_steps = r.count("grid.j_steps");
  if (has_t) {
    s.grid.t_final = r.real("grid.t_final");
    if (!(*s.grid.t_final >= 0.0)) r.fail("grid.t_final", "must be non-negative");
  }
  s.grid.epsilon = r.real("grid.epsilon", 0.01);
  if (!(s.grid.epsilon > 0.0)) r.fail("grid.epsilon", "must be positive");
  const double dx = jet.lambda * std::pow(s.grid.epsilon, jet.delta);
  s.grid.x0 = r.real("grid.x0", -0.5 * static_cast<double>(s.grid.n_sites) * dx);
  if (has_t) {
    try {
      (void)s.grid.steps(jet.tau);
    } catch (const ConfigError& e) {
      r.fail("grid.t_final", e.what());
    }
  }

  InitialProfile& in = s.initial;
  in.center = r.real("initial.center", 0.0);
  in.width = r.real("initial.width", 0.25);
  in.wavenumber = r.real("initial.wavenumber", 0.0);
  in.w_minus = {r.real("initial.w_minus_re", 1.0), r.real("initial.w_minus_im", 0.0)};
  in.w_plus = {r.real("initial.w_plus_re", 0.0), r.real("initial.w_plus_im", 0.0)};
  try {
    in.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source.string() + ": initial: " + e.what());
  }

  s.ladder = EpsilonLadder::standard();
  if (r.has("ladder.eps")) s.ladder.eps = r.reals("ladder.eps");
  s.ladder.t_physical = r.real("ladder.t_physical", 1.0);
  if (r.has("ladder.reference")) {
    const std::string ref = r.text("ladder.reference");
    if (ref == "analytic") {
      s.ladder.reference = Reference::analytic;
      s.reference_auto = false;
    } else if (ref == "fine_continuum") {
      s.ladder.reference = Reference::fine_continuum;
      s.reference_auto = false;
    } else if (ref != "auto") {
      r.fail("ladder.reference", "expected analytic, fine_continuum or auto");
    }
  }
  if (s.reference_auto) {
    s.ladder.reference = has_transport_reference(jet) ? Reference::analytic
                                                      : Reference::fine_continuum;
  }
  try {
    (void)s.ladder.steps(jet.tau);
  } catch (const std::invalid_argument& e) {
    r.fail(r.has("ladder.eps") ? "ladder.eps" : "ladder.t_physical", e.what());
  }

  s.domain.length = r.real("domain.length", 8.0);
  if (!(s.domain.length > 0.0)) r.fail("domain.length", "must be positive");
  s.domain.x0 = r.real("domain.x0", -0.5 * s.domain.length);

  if (r.has("hadamard.steps")) s.hadamard_steps = r.counts("hadamard.steps");

  s.continuum.n_sites = {128, 256, 512, 1024};
  if (r.has("continuum.n_sites")) s.continuum.n_sites = r.counts("continuum.n_sites");
  for (std::size_t i = 0; i < s.continuum.n_sites.size(); ++i) {
    if (s.continuum.n_sites[i] < 5 ||
        (i > 0 && s.continuum.n_sites[i] <= s.continuum.n_sites[i - 1])) {
      r.fail("continuum.n_sites", "must be increasing and at least 5");
    }
  }
  s.continuum.domain.length = r.real("continuum.length", 2.0 * std::numbers::pi);
  if (!(s.continuum.domain.length > 0.0)) r.fail("continuum.length", "must be positive");
  s.continuum.domain.x0 = r.real("continuum.x0", -0.5 * s.continuum.domain.length);
  s.continuum.t_final = r.real("continuum.t_final", 1.0);
  if (!(s.continuum.t_final > 0.0)) r.fail("continuum.t_final", "must be positive");
  s.continuum.cfl = r.real("continuum.cfl", 0.5);
  if (!(s.continuum.cfl > 0.0 && s.continuum.cfl <= 1.0)) {
    r.fail("continuum.cfl", "must lie in (0, 1]");
  }

  if (r.has("gauge.generator")) {
    const long long j = r.integer("gauge.generator");
    if (j < 1 || j > 3) r.fail("gauge.generator", "must be 1, 2 or 3");
    s.gauge_generator = static_cast<int>(j);
  }
  s.gauge_alpha = r.has("gauge.alpha") ? r.expression("gauge.alpha")
                                       : Expr::parse("0.5*sin(x - t)");

  if (r.has("checks")) {
    for (const auto& c : split_list(r.text("checks"))) {
      if (std::find(kCheckNames.begin(), kCheckNames.end(), c) == kCheckNames.end()) {
        r.fail("checks", "unknown check '" + c + "'");
      }
      s.checks.push_back(c);
    }
  } else {
    s.checks = kCheckNames;
  }
  if (r.has("output.dir")) s.output_dir = r.text("output.dir");
  if (r.has("output.snapshot_every")) s.snapshot_every = r.count("output.snapshot_every");

  Tolerances& t = s.tol;
  const std::pair<const char*, double*> tols[] = {
      {"tol.probability", &t.probability},
      {"tol.order_lo", &t.order_lo},
      {"tol.order_hi", &t.order_hi},
      {"tol.kg_order", &t.kg_order},
      {"tol.gauge_order", &t.gauge_order},
      {"tol.gauge_final", &t.gauge_final},
      {"tol.conservation_drift", &t.conservation_drift},
      {"tol.lagrangian_gap", &t.lagrangian_gap},
      {"tol.lagrangian_order", &t.lagrangian_order},
      {"tol.variational", &t.variational},
      {"tol.variational_order", &t.variational_order},
      {"tol.hadamard_factor", &t.hadamard_factor},
      {"tol.theta_min", &t.theta_min}};
  for (const auto& [key, slot] : tols) *slot = r.real(key, *slot);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open file (not found?)");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

}  // namespace qwalk::cli
