#include <dsc/cli.hpp>
#include <dsc/io.hpp>
#include <dsc/models.hpp>

#include "CLI11.hpp"

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace dsc::cli {

namespace {

using json = nlohmann::json;
using models::ConfigError;
using Excite = Excitation<double>;

constexpr int kDefaultMaxSteps = 10000;

/// Raw flag values; unset means "take it from the config file or default".
struct Options {
  std::optional<std::string> config;
  std::optional<std::string> model;
  std::optional<std::string> op;
  std::optional<std::string> excite;
  std::optional<std::string> alpha;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> support;
  std::optional<int> steps;
  std::optional<int> max_steps;
  std::optional<int> index;
  std::optional<int> dim;
  std::optional<int> trials;
  std::optional<double> amplitude;
  std::optional<double> rho;
  std::optional<double> a;
  std::optional<double> b;
  std::optional<double> c;
  std::optional<double> tol_rel;
  std::optional<double> tol_abs;
  std::optional<double> domain_linf;
  std::optional<double> tau;
  std::optional<double> lambda;
  bool allow_active = false;
  std::optional<json> model_object;  // inline model from a config file
  std::optional<json> alpha_object;
};

std::shared_ptr<spdlog::logger> logger() {
  auto log = spdlog::get("dsc");
  if (!log) log = spdlog::stderr_color_mt("dsc");
  return log;
}

void configure_logging() {
  const char* env = std::getenv("DSC_LOG");
  const std::string level = env ? env : "error";
  auto log = logger();
  if (level == "error") log->set_level(spdlog::level::err);
  else if (level == "info") log->set_level(spdlog::level::info);
  else if (level == "debug") log->set_level(spdlog::level::debug);
  else throw ConfigError("DSC_LOG", "expected error, info or debug, got '" + level + "'");
}

// ---- config files -------------------------------------------------------

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Line where `"key"` first appears, for diagnostics.
std::optional<std::size_t> line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  if (pos == std::string::npos) return std::nullopt;
  return line_of_offset(text, pos);
}

class ConfigFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class T>
T get_field(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key, "has the wrong type");
  }
}

/// Fills unset options from a JSON config. Flags given on the command line
/// win over the file.
void merge_config(Options& o, const std::string& path, bool random_probes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigFileError(path + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& ex) {
    const auto line = line_of_offset(text, ex.byte > 0 ? ex.byte - 1 : 0);
    throw ConfigFileError(fmt::format("{}:{}: parse error: {}", path, line, ex.what()));
  }
  if (!j.is_object()) throw ConfigFileError(path + ":1: top level must be an object");

  std::string current;
  try {
    for (const auto& [key, value] : j.items()) {
      current = key;
      if (key == "model") {
        if (value.is_string()) {
          if (!o.model) o.model = value.get<std::string>();
        } else if (value.is_object()) {
          if (!o.model) o.model_object = value;
        } else {
          throw ConfigError("model", "expected a zoo name or a model object");
        }
      } else if (key == "operator") {
        if (!o.op) o.op = get_field<std::string>(j, key);
      } else if (key == "excitation") {
        if (value.is_string()) {
          if (!o.excite) o.excite = value.get<std::string>();
        } else if (value.is_object()) {
          for (const auto& [ek, ev] : value.items()) {
            current = "excitation." + ek;
            if (ek == "kind") {
              if (!o.excite) o.excite = get_field<std::string>(value, ek);
            } else if (ek == "path") {
              if (!o.excite) o.excite = "csv:" + get_field<std::string>(value, ek);
            } else if (ek == "seed") {
              if (!o.seed) o.seed = get_field<std::uint64_t>(value, ek);
            } else if (ek == "support") {
              if (!o.support) o.support = get_field<int>(value, ek);
            } else if (ek == "amplitude") {
              if (!o.amplitude) o.amplitude = get_field<double>(value, ek);
            } else if (ek == "index") {
              if (!o.index) o.index = get_field<int>(value, ek);
            } else {
              throw ConfigError(current, "unknown key");
            }
          }
          if (value.contains("kind") && value.contains("path")) throw ConfigError("excitation", "give kind or path, not both");
        } else {
          throw ConfigError("excitation", "expected a string or an object");
        }
      } else if (key == "alpha") {
        if (value.is_string()) {
          if (!o.alpha) o.alpha = value.get<std::string>();
        } else {
          if (!o.alpha) o.alpha_object = value;
        }
      } else if (key == "tolerance") {
        if (!value.is_object()) throw ConfigError("tolerance", "expected an object with rel and abs");
        for (const auto& [tk, tv] : value.items()) {
          current = "tolerance." + tk;
          if (tk == "rel") {
            if (!o.tol_rel) o.tol_rel = get_field<double>(value, tk);
          } else if (tk == "abs") {
            if (!o.tol_abs) o.tol_abs = get_field<double>(value, tk);
          } else {
            throw ConfigError(current, "unknown key");
          }
        }
      } else if (key == "seed") {
        if (!o.seed) o.seed = get_field<std::uint64_t>(j, key);
      } else if (key == "steps") {
        if (!o.steps) o.steps = get_field<int>(j, key);
      } else if (key == "max_steps") {
        if (!o.max_steps) o.max_steps = get_field<int>(j, key);
      } else if (key == "support") {
        if (!o.support) o.support = get_field<int>(j, key);
      } else if (key == "trials") {
        if (!o.trials) o.trials = get_field<int>(j, key);
      } else if (key == "dim") {
        if (!o.dim) o.dim = get_field<int>(j, key);
      } else if (key == "tau") {
        if (!o.tau) o.tau = get_field<double>(j, key);
      } else if (key == "lambda") {
        if (!o.lambda) o.lambda = get_field<double>(j, key);
      } else if (key == "rho") {
        if (!o.rho) o.rho = get_field<double>(j, key);
      } else if (key == "domain_linf") {
        if (!o.domain_linf) o.domain_linf = get_field<double>(j, key);
      } else if (key == "allow_active") {
        o.allow_active = o.allow_active || get_field<bool>(j, key);
      } else if (key == "out") {
        if (!o.out) o.out = get_field<std::string>(j, key);
      } else {
        throw ConfigError(key, "unknown key");
      }
    }
    const bool random_excitation = o.excite && *o.excite == "random";
    if ((random_probes || random_excitation) && !o.seed)
      throw ConfigError("seed", "randomized runs read from a config file need an explicit seed");
  } catch (const ConfigError& ex) {
    const auto leaf = ex.field().substr(ex.field().find_last_of('.') + 1);
    const auto line = line_of_key(text, leaf);
    throw ConfigFileError(fmt::format("{}:{}: {}", path, line ? std::to_string(*line) : "?", ex.what()));
  }
}

// ---- resolution ---------------------------------------------------------

struct Subject {
  std::optional<models::Model> model;
  std::optional<CausalOperator<double>> op;
  StateSpace<double> space{1};
  TimeGrid grid;
  models::AlphaSpec alpha;
  std::string name;
  bool nonnegative = false;
};

int positive(std::optional<int> v, int fallback, const char* field) {
  const int x = v.value_or(fallback);
  if (x < 1) throw ConfigError(field, "must be >= 1");
  return x;
}

Tolerance resolve_tolerance(const Options& o, double default_rel) {
  Tolerance tol{o.tol_rel.value_or(default_rel), o.tol_abs.value_or(1e-12)};
  if (!(tol.rel > 0.0)) throw ConfigError("tol-rel", "must be > 0");
  if (!(tol.abs > 0.0)) throw ConfigError("tol-abs", "must be > 0");
  return tol;
}

models::AlphaSpec resolve_alpha(const Options& o, models::AlphaSpec base) {
  if (o.alpha_object) {
    base = models::parse_alpha(*o.alpha_object, "alpha");
  } else if (o.alpha) {
    const std::string& name = *o.alpha;
    json j;
    if (name == "norm") j = {{"kind", "norm"}};
    else if (name == "norm2") j = {{"kind", "norm_power"}, {"p", 2.0}};
    else if (name == "linear_sum") j = {{"kind", "linear_sum"}};
    else if (name == "quadratic_form") j = {{"kind", "quadratic_form"}};
    else throw ConfigError("alpha", "expected norm, norm2, linear_sum or quadratic_form, got '" + name + "'");
    base = models::parse_alpha(j, "alpha");
  }
  if (o.a) base.a = *o.a;
  if (o.b) base.b = *o.b;
  if (o.c) base.c = *o.c;
  return base;
}

void check_alpha(const StateSpace<double>& space, const models::AlphaSpec& spec) {
  try {
    (void)models::make_functional(space, spec);
  } catch (const InvalidInput& ex) {
    throw ConfigError("alpha", ex.what());
  }
}

Subject resolve_subject(const Options& o) {
  const int picks = int(o.model.has_value()) + int(o.model_object.has_value()) + int(o.op.has_value());
  if (picks == 0) throw ConfigError("model", "give --model or --operator");
  if (picks > 1) throw ConfigError("model", "--model and --operator are mutually exclusive");

  Subject s;
  if (o.model || o.model_object) {
    json cfg = o.model ? models::zoo_config(*o.model) : *o.model_object;
    if (o.rho) {
      if (cfg.value("kind", "") != "shunt_mesh") throw ConfigError("rho", "only shunt meshes have a boundary coefficient");
      cfg["rho"] = *o.rho;
    }
    if (o.tau) cfg["tau"] = *o.tau;
    models::Model m = models::model_from_json(cfg, o.allow_active);
    s.space = m.space();
    s.grid = m.grid();
    s.alpha = resolve_alpha(o, m.alpha_spec());
    check_alpha(s.space, s.alpha);
    s.name = m.name();
    s.nonnegative = m.nonnegative_states();
    s.model = std::move(m);
  } else {
    if (o.rho) throw ConfigError("rho", "only model runs take a boundary coefficient");
    const double tau = o.tau.value_or(1.0);
    if (!(tau > 0.0)) throw ConfigError("tau", "must be > 0");
    s.grid = TimeGrid(tau);
    s.space = StateSpace<double>(positive(o.dim, 2, "dim"));
    try {
      s.op = models::named_operator(*o.op, s.space, s.grid, o.lambda.value_or(1.0));
    } catch (const InvalidInput& ex) {
      throw ConfigError("operator", ex.what());
    }
    s.space = s.op->space();
    s.grid = s.op->grid();
    s.alpha = resolve_alpha(o, models::AlphaSpec{});
    check_alpha(s.space, s.alpha);
    s.name = *o.op;
  }
  return s;
}

Excite make_excitation(const Options& o, const Subject& s) {
  const std::string kind = o.excite.value_or("impulse");
  const double amp = o.amplitude.value_or(1.0);
  if (!std::isfinite(amp)) throw ConfigError("amplitude", "must be finite");

  if (kind == "none") return Excite::none(s.grid, s.space);
  if (kind == "impulse") {
    const Eigen::Index idx = o.index ? *o.index : (s.model ? s.model->default_impulse_index() : 0);
    if (idx < 0 || idx >= s.space.dim()) throw ConfigError("index", "outside the state dimension");
    const int n = positive(o.support, 1, "support");
    Signal<double> sig(s.grid, s.space);
    Eigen::VectorXd v = s.space.zero();
    v(idx) = amp;
    sig.set(0, v);
    return Excite(std::move(sig), n);
  }
  if (kind == "random") {
    const int n = positive(o.support, 4, "support");
    auto rng = trial_rng(o.seed.value_or(kDefaultSeed), 0);
    Signal<double> sig(s.grid, s.space);
    for (int j = 0; j < n; ++j)
      sig.set(2 * HalfStep(j), detail::random_vector(s.space, rng, s.nonnegative) * amp);
    return Excite(std::move(sig), n);
  }
  if (kind.rfind("csv:", 0) == 0) {
    const std::string path = kind.substr(4);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("excite", "cannot open '" + path + "'");
    Signal<double> sig = [&] {
      try {
        return io::read_signal_csv(in, s.grid, s.space);
      } catch (const InvalidInput& ex) {
        throw ConfigError("excite", path + ": " + ex.what());
      }
    }();
    const int n = o.support ? positive(o.support, 1, "support")
                            : std::max(1, static_cast<int>(sig.last().value_or(0) / 2) + 1);
    try {
      return Excite(std::move(sig), n);
    } catch (const InvalidInput& ex) {
      throw ConfigError("excite", path + ": " + ex.what());
    }
  }
  throw ConfigError("excite", "expected impulse, random, none or csv:PATH, got '" + kind + "'");
}

Domain<double> make_domain(const Options& o) {
  if (!o.domain_linf) return {};
  const double bound = *o.domain_linf;
  if (!(bound > 0.0)) throw ConfigError("domain-linf", "must be > 0");
  return pointwise_domain<double>([bound](const Eigen::VectorXd& v) { return v.lpNorm<Eigen::Infinity>() <= bound; });
}

std::string out_dir(const Options& o) { return o.out.value_or("dsc_out"); }

std::string join(const std::string& dir, const std::string& file) { return (std::filesystem::path(dir) / file).string(); }

template <class Writer>
void write_csv(const std::string& path, Writer&& w) {
  std::ostringstream os;
  w(os);
  io::write_file(path, os.str());
}

void write_json(const std::string& path, const json& j) { io::write_file(path, j.dump(2) + "\n"); }

// ---- run ----------------------------------------------------------------

int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
  const Subject s = resolve_subject(o);
  const int steps = positive(o.steps, 1000, "steps");
  const int cap = positive(o.max_steps, kDefaultMaxSteps, "max-steps");
  if (steps > cap) throw ConfigError("steps", fmt::format("{} exceeds the horizon cap {} (raise --max-steps)", steps, cap));
  const Tolerance tol = resolve_tolerance(o, 1e-9);
  const Excite e = make_excitation(o, s);
  if (steps < e.support_steps()) throw ConfigError("steps", "horizon is shorter than the excitation support");
  const auto alpha = models::make_functional(s.space, s.alpha);
  const Domain<double> domain = make_domain(o);
  const std::string dir = out_dir(o);
  auto log = logger();
  log->info("run {}: {} steps, N = {}, out = {}", s.name, steps, e.support_steps(), dir);

  std::optional<IteratedProcess<double>> p;
  if (s.model) {
    const auto maps = s.model->maps();
    const DscTrace<double> tr = run_dsc(maps, e, 2 * HalfStep(steps));
    if (const auto k = switching_violation(tr)) {
      err << "internal error: switching constraint violated at half step " << *k << '\n';
      return kFail;
    }
    write_csv(join(dir, "trace.csv"), [&](std::ostream& os) { io::write_trace_csv(os, tr); });
    p = domain ? iterate(composed_step_operator(maps), e, steps, domain) : as_iterated(tr, maps, e);
  } else {
    p = iterate(*s.op, e, steps, domain);
    write_csv(join(dir, "process.csv"), [&](std::ostream& os) { io::write_signal_csv(os, p->g); });
  }
  write_csv(join(dir, "excitation.csv"), [&](std::ostream& os) { io::write_signal_csv(os, e.signal()); });
  write_json(join(dir, "excitation.json"), io::signal_sidecar(e.signal()));

  StabilityReport report;
  std::string bound_error;
  try {
    report = verify_stability(*p, alpha, tol);
  } catch (const InconsistentBound& ex) {
    bound_error = ex.what();
    report.verdict = Verdict::fail;
    report.constants = alpha.constants();
    report.support_steps = e.support_steps();
    report.tau = s.grid.tau();
    report.tolerance = tol;
    report.bound = std::nan("");
  }
  write_csv(join(dir, "stability.csv"), [&](std::ostream& os) { io::write_stability_csv(os, report); });
  json summary = io::stability_summary(report);
  summary["subject"] = s.name;
  summary["steps"] = steps;
  if (!bound_error.empty()) summary["error"] = bound_error;
  write_json(join(dir, "stability.json"), summary);

  if (p->op.memory()) {
    const auto energy = energy_trace(*p, alpha);
    write_csv(join(dir, "energy.csv"), [&](std::ostream& os) { io::write_energy_csv(os, energy, s.grid); });
  }

  out << fmt::format("run {}: {} (bound {}, sup |g| {}, N = {}, steps = {})\n", s.name, verdict_name(report.verdict),
                     io::format_number(report.bound), io::format_number(report.sup_norm), report.support_steps, steps);
  if (report.first_crossing)
    out << fmt::format("first bound crossing at k = {} (t = {})\n", *report.first_crossing,
                       io::format_number(s.grid.time(*report.first_crossing)));
  if (!bound_error.empty()) out << bound_error << '\n';
  return report.passed() ? kPass : kFail;
}

// ---- check --------------------------------------------------------------

struct Target {
  std::string label;
  CausalOperator<double> op;
};

std::vector<Target> check_targets(const Subject& s) {
  if (!s.model) return {{s.name, *s.op}};
  const auto maps = s.model->maps();
  return {{"F_C", lift_connection(maps.connection)},
          {"F_R", lift_reflection(maps.reflection)},
          {"composed", composed_step_operator(maps)}};
}

CheckReport<double> check_equivalence(const Subject& s, const Excite& e, int steps, Tolerance tol) {
  if (!s.model) throw ConfigError("model", "equivalence compares the paired and composed engines of a model");
  const auto maps = s.model->maps();
  const DscTrace<double> tr = run_dsc(maps, e, 2 * HalfStep(steps));
  const auto p = iterate(composed_step_operator(maps), e, steps);
  const Signal<double> h2 = recover_h2(maps, e, tr.h1);

  CheckReport<double> r{"equivalence", s.name, Verdict::pass, std::size_t(steps), tol, 0, std::nullopt};
  auto compare = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b, HalfStep k, const char* what) {
    const double diff = s.space.norm(a - b);
    const double allowed = tol.allowed(std::max(s.space.norm(a), s.space.norm(b)));
    if (diff <= allowed) return true;
    CheckWitness<double> w;
    w.time = k;
    w.lhs = diff;
    w.rhs = allowed;
    w.margin = allowed - diff;
    w.probe = e.signal();
    w.detail = what;
    r.verdict = Verdict::fail;
    r.witness = std::move(w);
    return false;
  };
  if (const auto k = switching_violation(tr)) {
    compare(tr.h1.at(*k), tr.h1.at(*k - 1), *k, "switching constraint violated");
    return r;
  }
  for (HalfStep k = 0; k <= 2 * HalfStep(steps); k += 2)
    if (!compare(tr.h1.at(k), p.g.at(k), k, "paired h1 differs from the composed full-step process")) return r;
  for (HalfStep k = 0; k <= 2 * HalfStep(steps); ++k)
    if (!compare(tr.h2.at(k), h2.at(k), k, "recovered h2 differs from the paired h2 strand")) return r;
  return r;
}

int cmd_check(const std::string& which, const Options& o, std::ostream& out) {
  const Subject s = resolve_subject(o);
  const std::uint64_t seed = o.seed.value_or(kDefaultSeed);
  const auto trials = static_cast<std::size_t>(positive(o.trials, 100, "trials"));
  const std::string dir = out_dir(o);
  std::vector<CheckReport<double>> reports;

  if (which == "causality") {
    const int steps = positive(o.steps, 64, "steps");
    const Tolerance tol = resolve_tolerance(o, 1e-9);
    for (const auto& t : check_targets(s)) {
      auto r = check_causality(t.op, trials, Window{0, 2 * HalfStep(steps)}, tol, seed);
      r.subject = s.name + ":" + t.label;
      reports.push_back(std::move(r));
    }
  } else if (which == "passivity") {
    const int steps = positive(o.steps, 64, "steps");
    const Tolerance tol = resolve_tolerance(o, 1e-9);
    const auto alpha = models::make_functional(s.space, s.alpha);
    for (const auto& t : check_targets(s)) {
      ProbeOptions po;
      po.seed = seed;
      po.nonnegative = s.nonnegative;
      const auto probes = standard_probes(s.space, s.grid, t.op.input(), trials, po);
      auto r = check_passivity(t.op, alpha, probes, Window{0, 2 * HalfStep(steps)}, tol, seed);
      r.subject = s.name + ":" + t.label;
      reports.push_back(std::move(r));
    }
  } else if (which == "delimiting") {
    const Tolerance tol = resolve_tolerance(o, 1e-9);
    const auto alpha = models::make_functional(s.space, s.alpha);
    auto r = check_delimiting(alpha, standard_samples(s.space, trials, seed, s.nonnegative), tol, seed);
    r.subject = s.name + ":" + alpha.label();
    reports.push_back(std::move(r));
  } else if (which == "equivalence") {
    const int steps = positive(o.steps, 200, "steps");
    const Tolerance tol = resolve_tolerance(o, 1e-12);
    reports.push_back(check_equivalence(s, make_excitation(o, s), steps, tol));
  } else {
    throw ConfigError("check", "expected causality, passivity, delimiting or equivalence, got '" + which + "'");
  }

  const bool pass = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.passed(); });
  json doc;
  doc["check"] = which;
  doc["subject"] = s.name;
  doc["verdict"] = pass ? "pass" : "fail";
  doc["reports"] = json::array();
  for (const auto& r : reports) doc["reports"].push_back(io::check_report_json(r));
  write_json(join(dir, "check_" + which + ".json"), doc);

  for (const auto& r : reports) {
    out << fmt::format("check {} {}: {} ({} trials)\n", which, r.subject, verdict_name(r.verdict), r.trials);
    if (!r.witness) continue;
    const auto& w = *r.witness;
    out << fmt::format("  witness: trial {}, k = {}, lhs {}, rhs {}: {}\n", w.trial, w.time, io::format_number(w.lhs),
                       io::format_number(w.rhs), w.detail);
  }
  const auto failing = std::find_if(reports.begin(), reports.end(), [](const auto& r) { return !r.passed(); });
  if (failing != reports.end() && failing->witness) {
    const auto& w = *failing->witness;
    if (w.probe) write_csv(join(dir, "witness.csv"), [&](std::ostream& os) { io::write_signal_csv(os, *w.probe); });
    if (w.perturbed)
      write_csv(join(dir, "witness_perturbed.csv"), [&](std::ostream& os) { io::write_signal_csv(os, *w.perturbed); });
    out << "  witness written to " << join(dir, "witness.csv") << '\n';
  }
  return pass ? kPass : kFail;
}

// ---- demo ---------------------------------------------------------------

int cmd_demo(const Options& base, std::ostream& out, std::ostream& err) {
  int worst = kPass;
  for (const auto& m : models::model_zoo()) {
    Options o;
    o.model = m.name();
    o.steps = base.steps.value_or(200);
    o.out = join(out_dir(base), m.name());
    worst = std::max(worst, cmd_run(o, out, err));
    worst = std::max(worst, cmd_check("equivalence", o, out));
  }
  return worst;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON config file; flags override its values");
  cmd->add_option("--model", o.model, "model zoo entry");
  cmd->add_option("--operator", o.op, "named full-step operator");
  cmd->add_option("--excite", o.excite, "impulse | random | none | csv:PATH");
  cmd->add_option("--seed", o.seed, "seed for randomized excitations and probes");
  cmd->add_option("--support", o.support, "excitation support N in full steps");
  cmd->add_option("--amplitude", o.amplitude, "excitation amplitude");
  cmd->add_option("--index", o.index, "impulse component");
  cmd->add_option("--steps", o.steps, "horizon in full steps");
  cmd->add_option("--max-steps", o.max_steps, "horizon cap");
  cmd->add_option("--rho", o.rho, "boundary coefficient of shunt meshes");
  cmd->add_flag("--allow-active", o.allow_active, "admit |rho| > 1 (negative controls)");
  cmd->add_option("--alpha", o.alpha, "norm | norm2 | linear_sum | quadratic_form");
  cmd->add_option("--a", o.a, "delimiting constant a");
  cmd->add_option("--b", o.b, "delimiting constant b");
  cmd->add_option("--c", o.c, "delimiting constant c");
  cmd->add_option("--tol-rel", o.tol_rel, "relative tolerance");
  cmd->add_option("--tol-abs", o.tol_abs, "absolute tolerance floor");
  cmd->add_option("--domain-linf", o.domain_linf, "existence guard: partial sums must satisfy |s|_inf <= value");
  cmd->add_option("--tau", o.tau, "time step");
  cmd->add_option("--dim", o.dim, "state dimension for operator runs");
  cmd->add_option("--lambda", o.lambda, "gain of scaled-delay");
  cmd->add_option("--trials", o.trials, "checker trials");
  cmd->add_option("--out", o.out, "output directory");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual scattering channel engine and stability checks"};
  app.require_subcommand(1);
  Options run_opts;
  Options check_opts;
  Options demo_opts;
  std::string which;
  auto* run = app.add_subcommand("run", "run a model or operator and verify the stability bound");
  add_common(run, run_opts);
  auto* check = app.add_subcommand("check", "causality, passivity, delimiting or equivalence check");
  check->add_option("which", which, "causality | passivity | delimiting | equivalence")->required();
  add_common(check, check_opts);
  auto* demo = app.add_subcommand("demo", "run every bundled model");
  demo->add_option("--out", demo_opts.out, "output directory");
  demo->add_option("--steps", demo_opts.steps, "horizon in full steps");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kPass : kConfigError;
  }

  try {
    configure_logging();
    if (run->parsed()) {
      if (run_opts.config) merge_config(run_opts, *run_opts.config, false);
      return cmd_run(run_opts, out, err);
    }
    if (check->parsed()) {
      if (check_opts.config) {
        const bool random = which == "causality" || which == "passivity" || which == "delimiting";
        merge_config(check_opts, *check_opts.config, random);
      }
      return cmd_check(which, check_opts, out);
    }
    return cmd_demo(demo_opts, out, err);
  } catch (const ConfigFileError& ex) {
    err << "error: " << ex.what() << '\n';
    return kConfigError;
  } catch (const ConfigError& ex) {
    err << "error: " << ex.what() << '\n';
    return kConfigError;
  } catch (const ExistenceFailure<double>& ex) {
    err << "error: " << ex.what() << '\n';
    return kExistenceFailure;
  } catch (const InvalidInput& ex) {
    err << "error: " << ex.what() << '\n';
    return kConfigError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kFail;
  }
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace dsc::cli
