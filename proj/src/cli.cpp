#include "warpstab/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "warpstab/certificates.hpp"
#include "warpstab/cones.hpp"
#include "warpstab/config.hpp"
#include "warpstab/errors.hpp"
#include "warpstab/format.hpp"
#include "warpstab/spectrum.hpp"
#include "warpstab/thresholds.hpp"

namespace warpstab::cli {

namespace {

using nlohmann::json;

struct Options {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  std::string format = "csv";
  double tol = 1e-10;
  unsigned threads = 1;
  std::string replay_path;  // certify --replay, or the record for `replay`
};

struct Output {
  std::string csv;
  json summary = json::object();
  int code = kOk;
  std::optional<json> certificate;
};

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { add(header); }
  void add(const std::vector<std::string>& row) {
    if (row.size() != width_) throw InternalError("CSV row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) body_ += ',';
      const std::string& f = row[i];
      if (f.find_first_of(",\"\n") == std::string::npos) {
        body_ += f;
      } else {
        body_ += '"';
        for (char ch : f) body_ += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        body_ += '"';
      }
    }
    body_ += '\n';
  }
  const std::string& str() const { return body_; }

 private:
  std::size_t width_;
  std::string body_;
};

std::string num(double x) { return format_number(x); }

std::vector<double> geometric(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2) throw ConfigError("geometric grid needs 0 < lo < hi and >= 2 points");
  std::vector<double> out;
  for (int i = 0; i < points; ++i) out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1)));
  return out;
}

std::vector<double> a_values(const KeyValueConfig& cfg) {
  std::vector<double> v;
  if (cfg.has("a.grid"))
    v = cfg.get_doubles("a.grid");
  else if (cfg.has("a"))
    v.push_back(cfg.get_double("a"));
  else
    throw ConfigError("missing key 'a' or 'a.grid'");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw ConfigError("a values must be finite");
    if (i && !(v[i] > v[i - 1])) throw ConfigError("a.grid must be strictly increasing");
  }
  if (v.empty()) throw ConfigError("empty a.grid");
  return v;
}

bool get_bool(const KeyValueConfig& cfg, const std::string& key, bool fallback) {
  const std::string s = cfg.get_string(key, fallback ? "true" : "false");
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError("key '" + key + "' must be true or false");
}

QuadratureSpec quad_of(const Options& o) {
  QuadratureSpec q;
  q.relative_tolerance = o.tol;
  q.validate();
  return q;
}

std::string thresholds_crossed(const WarpedProductSpec& spec, double a) {
  std::vector<std::pair<std::string, double>> t{{"yamabe", catalog::yamabe(spec.n)}, {"kawai_end", catalog::kawai_end(spec.n)}};
  if (const auto* p = std::get_if<Power>(&spec.warping.kind()); p && p->exponent > 1.0 && !spec.warping.reflected())
    t.insert(t.begin() + 1, {"h", catalog::h(spec.n, p->exponent)});
  std::string out;
  for (const auto& [name, v] : t)
    if (a > v) out += (out.empty() ? "" : ";") + name + "(" + num(v) + ")";
  return out.empty() ? "none" : out;
}

// ---- commands ------------------------------------------------------------------

Output cmd_curvature(const KeyValueConfig& cfg, const Options&) {
  const auto spec = spec_from_config(cfg);
  std::vector<double> grid;
  const bool explicit_grid = cfg.has("r.grid");
  if (explicit_grid)
    grid = cfg.get_doubles("r.grid");
  else
    grid = geometric(cfg.get_double("r.min", 0.1), cfg.get_double("r.max", 100.0), cfg.get_int("r.points", 32));
  const auto [lo, hi] = spec.open_range();
  Csv csv({"r", "rho", "rho_p", "rho_pp", "S"});
  std::size_t rows = 0;
  for (double r : grid) {
    if (!(r > lo && r < hi)) {
      if (explicit_grid) throw ConfigError("r = " + num(r) + " outside the admissible range of " + spec.describe());
      continue;
    }
    const RhoValues v = eval_rho(spec, r);
    csv.add({num(r), num(v.rho), num(v.d1), num(v.d2), num(scalar_curvature(spec, spec.warping.local(r)))});
    ++rows;
  }
  if (rows == 0) throw ConfigError("no grid point inside the admissible range");
  Output o;
  o.csv = csv.str();
  o.summary["rows"] = rows;
  return o;
}

Output cmd_classify(const KeyValueConfig& cfg, const Options& opt) {
  const auto spec = spec_from_config(cfg);
  ClassifyOptions co;
  co.numeric = get_bool(cfg, "classify.numeric", true);
  co.quad = quad_of(opt);
  co.threads = opt.threads;
  Csv csv({"a", "status", "provenance", "thresholds_crossed"});
  json counts = json::object();
  for (double a : a_values(cfg)) {
    const auto v = classify(spec, a, co);
    csv.add({num(a), status_name(v.status), v.provenance(), thresholds_crossed(spec, a)});
    counts[status_name(v.status)] = counts.value(status_name(v.status), 0) + 1;
  }
  Output o;
  o.csv = csv.str();
  o.summary["counts"] = counts;
  return o;
}

std::vector<double> default_diagram_a() {
  std::vector<double> v;
  for (int k = 1; k <= 20; ++k) v.push_back(0.025 * k);
  return v;
}
std::vector<double> default_diagram_alpha() {
  std::vector<double> v;
  for (int k = 1; k <= 20; ++k) v.push_back(1.0 + 0.25 * k);
  return v;
}

Output cmd_diagram(const KeyValueConfig& cfg, const Options& opt) {
  const int n = cfg.get_int("n", 3);
  const auto as = cfg.has("a.grid") ? cfg.get_doubles("a.grid") : default_diagram_a();
  const auto alphas = cfg.has("alpha.grid") ? cfg.get_doubles("alpha.grid") : default_diagram_alpha();
  for (double al : alphas)
    if (!(al >= 1.0)) throw ConfigError("diagram needs alpha >= 1");
  const auto cells = diagram(n, as, alphas, opt.threads);
  Csv csv({"alpha", "a", "cell", "provenance"});
  json counts = json::object();
  for (const auto& c : cells) {
    csv.add({num(c.alpha), num(c.a), cell_name(c.cell), c.theorem.empty() ? "no theorem applies" : "theorem:" + c.theorem});
    counts[cell_name(c.cell)] = counts.value(cell_name(c.cell), 0) + 1;
  }
  Output o;
  o.csv = csv.str();
  o.summary["n"] = n;
  o.summary["counts"] = counts;
  return o;
}

Output cmd_hcurve(const KeyValueConfig& cfg, const Options&) {
  const int n = cfg.get_int("n", 3);
  const auto grid = cfg.has("zeta.grid")
                        ? cfg.get_doubles("zeta.grid")
                        : geometric(cfg.get_double("zeta.min", 1.0 + 1e-4), cfg.get_double("zeta.max", 1e6), cfg.get_int("zeta.points", 64));
  std::vector<HCurvePoint> pts;
  try {
    pts = h_curve(n, grid);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  Csv csv({"zeta", "h"});
  for (const auto& p : pts) csv.add({num(p.zeta), num(p.h)});
  Output o;
  o.csv = csv.str();
  o.summary["yamabe"] = catalog::yamabe(n);
  o.summary["kawai_end"] = catalog::kawai_end(n);
  return o;
}

SearchBudget budget_of(const KeyValueConfig& cfg, const Options& opt) {
  SearchBudget b;
  if (cfg.has("certify.kawai_q")) b.kawai_q = cfg.get_doubles("certify.kawai_q");
  if (cfg.has("certify.kawai_r")) b.kawai_r = cfg.get_doubles("certify.kawai_r");
  if (cfg.has("certify.poly_r")) b.poly_r = cfg.get_doubles("certify.poly_r");
  if (cfg.has("certify.betas")) b.betas = cfg.get_doubles("certify.betas");
  if (cfg.has("certify.cone_r")) b.cone_r = cfg.get_doubles("certify.cone_r");
  const std::string mode = cfg.get_string("certify.xi_mode", "as_printed");
  if (mode == "pointwise")
    b.xi_mode = XiRampMode::Pointwise;
  else if (mode != "as_printed")
    throw ConfigError("certify.xi_mode must be as_printed or pointwise");
  b.threads = opt.threads;
  return b;
}

json read_first_json_line(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::string line;
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": not a JSON record: " + e.what());
  }
}

Output cmd_certify_replay(const Options& opt) {
  json j = read_first_json_line(opt.replay_path);
  if (j.value("type", "") == "result_record") {
    if (!j.contains("certificate")) throw ConfigError(opt.replay_path + ": record carries no certificate");
    j = j["certificate"];
  }
  const auto cert = InstabilityCertificate::from_json(j);
  const double q = cert.reevaluate(quad_of(opt));
  const double slack = 1e-6 * std::max(std::abs(cert.q_value), 1e-8 * cert.magnitude);
  const bool confirmed = q < 0.0 && std::abs(q - cert.q_value) <= slack;
  Csv csv({"a", "params", "q_recorded", "q_replayed", "status"});
  csv.add({num(cert.a), describe(cert.params), num(cert.q_value), num(q), confirmed ? "confirmed" : "mismatch"});
  Output o;
  o.csv = csv.str();
  o.summary["confirmed"] = confirmed;
  o.code = confirmed ? kOk : kNumericFailure;
  return o;
}

Output cmd_certify(const KeyValueConfig& cfg, const Options& opt) {
  if (!opt.replay_path.empty()) return cmd_certify_replay(opt);
  const auto spec = spec_from_config(cfg);
  std::vector<FamilyKind> families = default_families();
  if (cfg.has("certify.families")) {
    families.clear();
    try {
      for (const auto& name : cfg.get_strings("certify.families")) families.push_back(family_from_name(name));
    } catch (const PreconditionError& e) {
      throw ConfigError(e.what());
    }
  }
  Csv csv({"a", "status", "params", "q", "rayleigh", "critical_a", "magnitude"});
  Output o;
  const double a = cfg.get_double("a");
  const auto found = search_instability(spec, a, families, budget_of(cfg, opt), quad_of(opt));
  if (const auto* c = std::get_if<InstabilityCertificate>(&found)) {
    csv.add({num(a), "certificate", describe(c->params), num(c->q_value), num(c->rayleigh),
             c->critical_a ? num(*c->critical_a) : "none", num(c->magnitude)});
    o.certificate = c->to_json();
  } else {
    const auto& nf = std::get<NotFound>(found);
    csv.add({num(a), "not_found", nf.best_params ? describe(*nf.best_params) : "none", num(nf.best_q), num(nf.best_rayleigh),
             "none", "none"});
    o.summary["candidates"] = nf.candidates;
    o.summary["skipped"] = nf.skipped;
  }
  o.csv = csv.str();
  return o;
}

GridKind grid_of(const std::string& s) {
  if (s == "uniform") return GridKind::Uniform;
  if (s == "log") return GridKind::Logarithmic;
  throw ConfigError("domain.grid must be uniform or log");
}

Output cmd_eig(const KeyValueConfig& cfg, const Options&) {
  const auto spec = spec_from_config(cfg);
  const double a = cfg.get_double("a", 0.0);
  Discretization d;
  d.b = cfg.get_double("domain.b");
  d.c = cfg.get_double("domain.c");
  const int N = cfg.get_int("domain.N", 2048);
  if (N < 16) throw ConfigError("domain.N must be >= 16");
  d.N = static_cast<std::size_t>(N);
  d.grid = grid_of(cfg.get_string("domain.grid", "uniform"));
  EigenOptions eo;
  eo.grid_doubling = get_bool(cfg, "eig.doubling", true);
  EigenResult r;
  try {
    r = first_eigenvalue(spec, a, d, eo);
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  Output o;
  if (get_bool(cfg, "eig.vector", false)) {
    Csv csv({"r", "u"});
    for (std::size_t i = 0; i < r.nodes.size(); ++i) csv.add({num(r.nodes[i]), num(r.eigenvector[i])});
    o.csv = csv.str();
  } else {
    Csv csv({"b", "c", "N", "grid", "lambda1", "lambda2", "lambda1_fine", "richardson", "residual"});
    csv.add({num(d.b), num(d.c), std::to_string(d.N), grid_name(d.grid), num(r.lambda1), num(r.lambda2), num(r.lambda1_fine),
             num(r.richardson), num(r.residual)});
    o.csv = csv.str();
  }
  o.summary["lambda1"] = r.lambda1;
  return o;
}

Output cmd_scan(const KeyValueConfig& cfg, const Options& opt) {
  const auto spec = spec_from_config(cfg);
  const double a = cfg.get_double("a");
  std::vector<ScanStep> trace;
  const auto outcome = stability_scan(spec, a, default_schedule(spec), opt.threads, &trace);
  Csv csv({"b", "c", "N", "grid", "lambda1", "tolerance", "negative"});
  for (const auto& s : trace) {
    const double tol = negativity_tolerance(s.domain);
    csv.add({num(s.domain.b), num(s.domain.c), std::to_string(s.domain.N), grid_name(s.domain.grid), num(s.lambda1), num(tol),
             s.lambda1 < -tol ? "true" : "false"});
  }
  Output o;
  o.csv = csv.str();
  o.summary["outcome"] = std::holds_alternative<UnstableOn>(outcome) ? "unstable_on" : "no_negative_found";
  return o;
}

Output cmd_cone(const KeyValueConfig& cfg, const Options&) {
  ConeSpec cone;
  cone.n = cfg.get_int("cone.n", 8);
  if (cfg.has("cone.fiber_factor")) cone.fiber_norm_integral = cfg.get_double("cone.fiber_factor");
  std::vector<double> Rs;
  if (cfg.has("cone.R.grid")) {
    Rs = cfg.get_doubles("cone.R.grid");
  } else {
    for (int k = 1; k <= 12; ++k) Rs.push_back(std::pow(10.0, k));
  }
  Csv csv({"n", "a", "R", "Q", "slope", "coefficient"});
  json slopes = json::array();
  try {
    cone.validate();
    for (double a : a_values(cfg)) {
      const auto rows = cone_sweep(cone, a, Rs);
      for (const auto& r : rows)
        csv.add({std::to_string(cone.n), num(a), num(r.R), num(r.Q), num(r.slope), num(slope_coefficient(cone.n, a))});
      slopes.push_back({{"a", a}, {"slope", rows.back().slope}, {"coefficient", slope_coefficient(cone.n, a)}});
    }
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  Output o;
  o.csv = csv.str();
  o.summary["slopes"] = slopes;
  return o;
}

Output dispatch(const std::string& cmd, const KeyValueConfig& cfg, const Options& opt) {
  if (cmd == "curvature") return cmd_curvature(cfg, opt);
  if (cmd == "classify") return cmd_classify(cfg, opt);
  if (cmd == "diagram") return cmd_diagram(cfg, opt);
  if (cmd == "hcurve") return cmd_hcurve(cfg, opt);
  if (cmd == "certify") return cmd_certify(cfg, opt);
  if (cmd == "eig") return cmd_eig(cfg, opt);
  if (cmd == "scan") return cmd_scan(cfg, opt);
  if (cmd == "cone") return cmd_cone(cfg, opt);
  throw ConfigError("unknown command '" + cmd + "'");
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json make_record(const std::string& cmd, const KeyValueConfig& cfg, const Options& opt, const Output& out) {
  json r;
  r["type"] = "result_record";
  r["tool"] = "warpstab";
  r["version"] = kVersion;
  r["timestamp"] = utc_timestamp();
  r["command"] = cmd;
  json c = json::object();
  for (const auto& [k, v] : cfg.entries()) c[k] = v;
  r["config"] = c;
  r["options"] = {{"tol", opt.tol}, {"threads", opt.threads}, {"replay", opt.replay_path}};
  r["csv"] = out.csv;
  r["summary"] = out.summary;
  r["exit_code"] = out.code;
  if (out.certificate) r["certificate"] = *out.certificate;
  return r;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << text;
  if (!f) throw ConfigError("failed writing " + p.string());
}

int emit(const std::string& cmd, const KeyValueConfig& cfg, const Options& opt, const Output& out, std::ostream& os) {
  const json record = make_record(cmd, cfg, opt, out);
  if (!opt.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(opt.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + opt.out_dir + ": " + ec.message());
    const std::filesystem::path dir(opt.out_dir);
    write_file(dir / (cmd + ".csv"), out.csv);
    write_file(dir / (cmd + ".jsonl"), record.dump() + "\n");
    if (out.certificate) write_file(dir / "certificate.json", out.certificate->dump() + "\n");
  } else if (opt.format == "record") {
    os << record.dump() << '\n';
  } else {
    os << out.csv;
  }
  return out.code;
}

Output cmd_replay(const Options& opt, json& recorded) {
  recorded = read_first_json_line(opt.replay_path);
  if (recorded.value("type", "") != "result_record") throw ConfigError(opt.replay_path + ": not a result record");
  KeyValueConfig cfg;
  try {
    for (const auto& [k, v] : recorded.at("config").items()) cfg.set(k, v.get<std::string>());
    Options o;
    o.tol = recorded.at("options").at("tol").get<double>();
    o.threads = recorded.at("options").at("threads").get<unsigned>();
    o.replay_path = recorded.at("options").value("replay", "");
    return dispatch(recorded.at("command").get<std::string>(), cfg, o);
  } catch (const json::exception& e) {
    throw ConfigError(opt.replay_path + ": malformed record: " + e.what());
  }
}

}  // namespace

std::string csv_body_of_record(const std::string& json_line) { return json::parse(json_line).at("csv").get<std::string>(); }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stability of L_a = Laplacian - a S on warped products and minimal cones", "warpstab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Options opt;
  app.add_option("--config", opt.config_path, "key = value configuration file");
  app.add_option("--set", opt.sets, "override a config key (key=value), repeatable");
  app.add_option("--out", opt.out_dir, "write <command>.csv and <command>.jsonl into this directory");
  app.add_option("--format", opt.format, "stdout format")->check(CLI::IsMember({"csv", "record"}));
  app.add_option("--tol", opt.tol, "quadrature relative tolerance")->check(CLI::PositiveNumber);
  app.add_option("--threads", opt.threads, "worker threads")->check(CLI::Range(1u, 256u));

  const std::vector<std::pair<std::string, std::string>> cmds{
      {"curvature", "tabulate rho, rho', rho'' and S on an r grid"},
      {"classify", "verdict per a: theorem, certificate, spectrum, or undetermined"},
      {"diagram", "(alpha, a) stability diagram for rho = r^alpha from the theorem catalog"},
      {"hcurve", "tabulate the threshold map h(n, zeta)"},
      {"certify", "search for an instability certificate (or --replay one)"},
      {"eig", "first Dirichlet eigenvalue on one domain"},
      {"scan", "first eigenvalues on the default nested domains"},
      {"cone", "reduced minimal-cone form and its log R slope"},
      {"replay", "rerun a result record and compare CSV bodies"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : cmds) {
    subs[name] = app.add_subcommand(name, help);
    subs[name]->fallthrough();
  }
  subs["certify"]->add_option("--replay", opt.replay_path, "certificate or record file to re-evaluate");
  subs["replay"]->add_option("record", opt.replay_path, "result record (.jsonl)")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  std::string cmd;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) cmd = name;

  try {
    if (cmd == "replay") {
      json recorded;
      const Output fresh = cmd_replay(opt, recorded);
      const std::string before = recorded.at("csv").get<std::string>();
      const bool same = before == fresh.csv;
      Csv csv({"record", "command", "status"});
      csv.add({opt.replay_path, recorded.at("command").get<std::string>(), same ? "identical" : "differs"});
      Output o;
      o.csv = csv.str();
      o.code = same ? kOk : kNumericFailure;
      if (!same) err << "replay: CSV body differs from the record\n";
      KeyValueConfig none;
      return emit("replay", none, opt, o, out);
    }
    KeyValueConfig cfg;
    if (!opt.config_path.empty()) cfg = KeyValueConfig::load(opt.config_path);
    for (const auto& s : opt.sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
      cfg.merge(KeyValueConfig::parse(s, "--set"));
    }
    const Output o = dispatch(cmd, cfg, opt);
    return emit(cmd, cfg, opt, o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const PreconditionError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  }
}

}  // namespace warpstab::cli
