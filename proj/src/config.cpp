#include "warpstab/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "warpstab/errors.hpp"
#include "warpstab/format.hpp"

namespace warpstab {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<double> parse_plain(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

// Accepts plain numbers and simple fractions such as 9/64.
std::optional<double> parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  const auto slash = s.find('/');
  if (slash == std::string::npos) return parse_plain(s);
  auto num = parse_plain(trim(std::string_view(s).substr(0, slash)));
  auto den = parse_plain(trim(std::string_view(s).substr(slash + 1)));
  if (!num || !den || *den == 0.0) return std::nullopt;
  return *num / *den;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_number(v[i]);
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, const std::string& source) {
  KeyValueConfig cfg;
  cfg.source_ = source;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    cfg.entries_[key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::optional<std::string> KeyValueConfig::find(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key) const {
  auto v = find(key);
  if (!v) throw ConfigError(source_ + ": missing key '" + key + "'");
  return *v;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key) const {
  const std::string s = get_string(key);
  auto v = parse_number(s);
  if (!v) throw ConfigError(source_ + ": key '" + key + "' is not a number: '" + s + "'");
  return *v;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int KeyValueConfig::get_int(const std::string& key) const {
  const double v = get_double(key);
  if (v != static_cast<double>(static_cast<int>(v))) throw ConfigError(source_ + ": key '" + key + "' must be an integer");
  return static_cast<int>(v);
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const { return has(key) ? get_int(key) : fallback; }

std::vector<std::string> KeyValueConfig::get_strings(const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(get_string(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& item : get_strings(key)) {
    auto v = parse_number(item);
    if (!v) throw ConfigError(source_ + ": list '" + key + "' has a non-numeric entry '" + item + "'");
    out.push_back(*v);
  }
  return out;
}

void KeyValueConfig::set(const std::string& key, double value) { entries_[key] = format_number(value); }

void KeyValueConfig::merge(const KeyValueConfig& other) {
  for (const auto& [k, v] : other.entries_) entries_[k] = v;
}

std::string KeyValueConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

// ---- manifold specs --------------------------------------------------------

namespace {

Sampled read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read warping table " + path);
  Sampled s;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& ch : line)
      if (ch == ',' || ch == '\t' || ch == ';') ch = ' ';
    std::istringstream ls(line);
    std::string a, b;
    if (!(ls >> a)) continue;
    if (!(ls >> b)) throw ConfigError(path + ": expected two columns");
    auto x = parse_number(a), y = parse_number(b);
    if (!x || !y) {
      if (s.r.empty()) continue;  // header row
      throw ConfigError(path + ": non-numeric row '" + line + "'");
    }
    s.r.push_back(*x);
    s.rho.push_back(*y);
  }
  return s;
}

WarpingFunction warping_from_config(const KeyValueConfig& cfg) {
  const std::string kind = cfg.get_string("warping.kind");
  WarpingFunction::Kind k;
  if (kind == "power") {
    k = Power{cfg.get_double("warping.coefficient", 1.0), cfg.get_double("warping.exponent")};
  } else if (kind == "power_log") {
    k = PowerTimesLog{cfg.get_double("warping.exponent"), cfg.get_double("warping.log_power")};
  } else if (kind == "sinh") {
    k = Sinh{};
  } else if (kind == "cosh") {
    k = Cosh{};
  } else if (kind == "linear") {
    k = Linear{cfg.get_double("warping.slope"), cfg.get_double("warping.intercept", 0.0)};
  } else if (kind == "constant") {
    k = Constant{cfg.get_double("warping.value", 1.0)};
  } else if (kind == "sampled") {
    if (cfg.has("warping.file"))
      k = read_table(cfg.get_string("warping.file"));
    else
      k = Sampled{cfg.get_doubles("warping.r"), cfg.get_doubles("warping.rho")};
  } else {
    throw ConfigError("unknown warping.kind '" + kind + "'");
  }
  WarpingFunction w(std::move(k));
  const std::string refl = cfg.get_string("warping.reflected", "false");
  if (refl == "true") return w.reflect();
  if (refl != "false") throw ConfigError("warping.reflected must be true or false");
  return w;
}

}  // namespace

WarpedProductSpec spec_from_config(const KeyValueConfig& cfg) {
  try {
    const int n = cfg.get_int("n");
    const std::string iv_name = cfg.get_string("interval", "half_line");
    Interval iv;
    if (iv_name == "half_line")
      iv = HalfLine{};
    else if (iv_name == "full_line")
      iv = FullLine{};
    else if (iv_name == "segment")
      iv = Segment{cfg.get_double("segment.b"), cfg.get_double("segment.c")};
    else
      throw ConfigError("unknown interval '" + iv_name + "'");

    const std::string fk = cfg.get_string("fiber.kind", "sphere");
    FiberSpec fiber;
    if (fk == "sphere")
      fiber = FiberSpec::round_sphere(n - 1, cfg.get_double("fiber.radius", 1.0));
    else if (fk == "custom")
      fiber = FiberSpec::custom(n - 1, cfg.get_double("fiber.scalar_curvature"), cfg.get_double("fiber.area"));
    else
      throw ConfigError("unknown fiber.kind '" + fk + "'");

    return WarpedProductSpec(iv, n, fiber, warping_from_config(cfg));
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("invalid manifold: ") + e.what());
  }
}

KeyValueConfig spec_to_config(const WarpedProductSpec& spec) {
  KeyValueConfig cfg;
  cfg.set("n", std::to_string(spec.n));
  if (spec.is_half_line()) cfg.set("interval", "half_line");
  if (spec.is_full_line()) cfg.set("interval", "full_line");
  if (const auto* s = std::get_if<Segment>(&spec.interval)) {
    cfg.set("interval", "segment");
    cfg.set("segment.b", s->b);
    cfg.set("segment.c", s->c);
  }
  if (spec.fiber.is_round_sphere()) {
    cfg.set("fiber.kind", "sphere");
    cfg.set("fiber.radius", *spec.fiber.sphere_radius);
  } else {
    cfg.set("fiber.kind", "custom");
    cfg.set("fiber.scalar_curvature", spec.fiber.scalar_curvature);
    cfg.set("fiber.area", spec.fiber.area);
  }
  const auto& k = spec.warping.kind();
  cfg.set("warping.kind", spec.warping.name());
  if (const auto* p = std::get_if<Power>(&k)) {
    cfg.set("warping.coefficient", p->coefficient);
    cfg.set("warping.exponent", p->exponent);
  } else if (const auto* p = std::get_if<PowerTimesLog>(&k)) {
    cfg.set("warping.exponent", p->exponent);
    cfg.set("warping.log_power", p->log_power);
  } else if (const auto* l = std::get_if<Linear>(&k)) {
    cfg.set("warping.slope", l->slope);
    cfg.set("warping.intercept", l->intercept);
  } else if (const auto* c = std::get_if<Constant>(&k)) {
    cfg.set("warping.value", c->value);
  } else if (const auto* s = std::get_if<Sampled>(&k)) {
    cfg.set("warping.r", join(s->r));
    cfg.set("warping.rho", join(s->rho));
  }
  if (spec.warping.reflected()) cfg.set("warping.reflected", "true");
  return cfg;
}

}  // namespace warpstab
