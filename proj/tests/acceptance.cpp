// One PASS/FAIL line per acceptance criterion; nonzero exit if any fails.

#include <dsc/cli.hpp>
#include <dsc/models.hpp>

#include <fmt/format.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace dsc;
using Vec = Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Vec random_vec(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return Vec::NullaryExpr(n, [&] { return u(rng); });
}

Excitation<double> random_excitation(std::mt19937_64& rng, const StateSpace<double>& sp, TimeGrid g, int n) {
  Signal<double> s(g, sp);
  for (int j = 0; j < n; ++j) s.set(2 * j, random_vec(rng, sp.dim()));
  return Excitation<double>(std::move(s), n);
}

Signal<double> random_signal(std::mt19937_64& rng, const StateSpace<double>& sp, TimeGrid g, Lattice l) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Signal<double> f(g, sp);
  for (HalfStep k = ceil_to_lattice(-8, l); k < 30; k += lattice_step(l))
    if (u(rng) < 0.7) f.set(k, random_vec(rng, sp.dim()));
  return f;
}

// -- 1 ----------------------------------------------------------------------

Outcome bound_suite() {
  const auto t0 = Clock::now();
  const TimeGrid g;
  const StateSpace<double> sp(2);
  struct Entry {
    std::string label;
    CausalOperator<double> op;
    DelimitingFunctional<double> alpha;
  };
  std::vector<Entry> zoo;
  auto add_named = [&](const std::string& name, double lambda = 1.0) {
    auto op = models::named_operator(name, sp, g, lambda);
    zoo.push_back({name == "scaled-delay" ? fmt::format("scaled-delay({})", lambda) : name, op,
                   DelimitingFunctional<double>::norm(sp)});
  };
  add_named("delay");
  for (double lambda : {0.5, 0.9, 1.0}) add_named("scaled-delay", lambda);
  add_named("average");
  add_named("rotation-delay");
  for (const std::string m : {"identity2", "shunt1", "saturating2"}) {
    const auto model = models::model_from_json(models::zoo_config(m));
    zoo.push_back({"composed:" + m, composed_step_operator(model.maps()), model.functional()});
  }

  std::mt19937_64 rng(20040608);
  std::uniform_int_distribution<int> support(1, 8);
  const Tolerance tol{1e-9, 1e-12};
  std::size_t runs = 0;
  for (const auto& z : zoo) {
    for (int trial = 0; trial < 50; ++trial) {
      const auto e = random_excitation(rng, z.op.space(), g, support(rng));
      const auto r = verify_stability(iterate(z.op, e, 200), z.alpha, tol);
      ++runs;
      if (!r.passed())
        return {false, fmt::format("{} trial {}: sup {} > bound {}", z.label, trial, r.sup_norm, r.bound)};
    }
  }
  const double secs = seconds_since(t0);
  return {zoo.size() >= 6 && secs < 60.0,
          fmt::format("{} operators x 50 excitations ({} runs, 200 steps each) in {:.2f} s", zoo.size(), runs, secs)};
}

// -- 2 ----------------------------------------------------------------------

Outcome tightness() {
  const StateSpace<double> sp(3);
  const TimeGrid g(0.5);
  const auto e = Excitation<double>::impulse(g, sp, Vec::Unit(3, 1));
  const auto r = verify_stability(iterate(delay_operator<double>(sp, g), e, 100), DelimitingFunctional<double>::norm(sp));
  const double gap = std::abs(r.sup_norm - r.bound);
  return {r.passed() && gap <= 1e-12, fmt::format("sup |g| = {}, bound = {}, gap {:.3g}", r.sup_norm, r.bound, gap)};
}

// -- 3 ----------------------------------------------------------------------

Outcome negative_controls() {
  const StateSpace<double> sp(2);
  const TimeGrid g;
  const auto gain = scaled_delay<double>(sp, g, 1.1);
  ProbeOptions po;
  po.seed = 20040608;
  const auto probes = standard_probes(sp, g, Lattice::I, 100, po);
  const auto pass = check_passivity(gain, DelimitingFunctional<double>::norm_power(sp, 2.0), probes, Window{0, 100}, Tolerance{});
  if (pass.passed() || !pass.witness) return {false, "scaled delay 1.1 passed the passivity check"};
  const auto& w = *pass.witness;
  // first time the response carries mass
  const auto response = gain.apply(*w.probe, Window{0, 100});
  HalfStep first_mass = -1;
  for (const auto& [k, v] : response)
    if (!v.isZero()) {
      first_mass = k;
      break;
    }

  const auto e = Excitation<double>::impulse(g, sp, Vec::Ones(2));
  const auto grow = verify_stability(iterate(gain, e, 50), DelimitingFunctional<double>::norm(sp));

  const auto causal = check_causality(lookahead_operator<double>(sp, g), 100, Window{0, 40}, Tolerance{}, 20040608);

  const bool ok = w.time == first_mass && !grow.passed() && grow.first_crossing && *grow.first_crossing <= 100 &&
                  !causal.passed() && causal.witness && causal.witness->trial < 100;
  return {ok, fmt::format("passivity witness at k = {} (first mass at k = {}); bound crossed at k = {}; lookahead "
                          "witness at trial {}",
                          w.time, first_mass, grow.first_crossing.value_or(-1),
                          causal.witness ? static_cast<long>(causal.witness->trial) : -1L)};
}

// -- 4 ----------------------------------------------------------------------

Outcome equivalence() {
  const int steps = 1000;
  double worst = 0.0;
  std::string worst_model;
  std::mt19937_64 rng(20040608);
  for (const auto& m : models::model_zoo()) {
    const auto maps = m.maps();
    Signal<double> s(m.grid(), m.space());
    s.set(0, Vec::Unit(m.dim(), m.default_impulse_index()));
    for (int j = 1; j < 4; ++j) {
      Vec v = random_vec(rng, m.dim());
      if (m.nonnegative_states()) v = v.cwiseAbs();
      s.set(2 * j, v);
    }
    const Excitation<double> e(s, 4);
    const auto tr = run_dsc(maps, e, 2 * steps);
    const auto p = iterate(composed_step_operator(maps), e, steps);
    for (HalfStep k = 0; k <= 2 * steps; k += 2) {
      const Vec a = tr.h1.at(k);
      const Vec b = p.g.at(k);
      const double scale = std::max({a.norm(), b.norm(), 1e-300});
      const double rel = (a - b).norm() / scale;
      if (!(a - b).isZero() && rel > worst) {
        worst = rel;
        worst_model = m.name();
      }
    }
  }
  return {worst <= 1e-12, fmt::format("{} models, {} steps, worst relative gap {:.3g}{}", models::model_zoo().size(),
                                      steps, worst, worst_model.empty() ? "" : " (" + worst_model + ")")};
}

// -- 5 ----------------------------------------------------------------------

Outcome mesh_suite() {
  const auto t0 = Clock::now();
  const int steps = 1000;
  std::string detail;
  bool ok = true;
  for (double rho : {1.0, 0.5}) {
    const models::ShuntNodeMesh mesh(16, 16, rho);
    const auto maps = models::build_mesh_maps(mesh);
    Vec v = Vec::Zero(mesh.dim());
    v(mesh.index(models::Port::east, 8, 8)) = 1.0;
    const auto e = Excitation<double>::impulse(maps.grid(), maps.space(), v);
    const auto tr = run_dsc(maps, e, 2 * steps);
    const auto p = as_iterated(tr, maps, e);
    const auto alpha = DelimitingFunctional<double>::norm_power(maps.space(), 2.0);
    const auto energy = energy_trace(p, alpha);

    // excitation ends at k = 2N; the held window then covers only g
    const HalfStep settled = 2 * e.support_steps();
    double worst_rise = 0.0;
    double at_end_of_excitation = 0.0;
    std::size_t drops = 0, flats = 0;
    for (std::size_t i = 1; i < energy.size(); ++i) {
      if (energy[i - 1].first < settled) continue;
      if (energy[i - 1].first == settled) at_end_of_excitation = energy[i - 1].second;
      const double prev = energy[i - 1].second;
      const double rise = (energy[i].second - prev) / std::max(prev, 1e-300);
      worst_rise = std::max(worst_rise, rise);
      (energy[i].second < prev ? drops : flats) += 1;
    }
    const double final_energy = energy.back().second;

    const auto norm_alpha = DelimitingFunctional<double>::norm(maps.space());
    const auto report = verify_stability(p, norm_alpha);
    double sup_h1 = 0.0;
    for (HalfStep k = settled; k <= 2 * steps; ++k) sup_h1 = std::max(sup_h1, tr.h1.at(k).norm());

    const bool monotone = worst_rise <= 1e-10;
    const bool bounded = report.passed() && sup_h1 <= report.bound * (1 + 1e-12);
    const bool decays = rho == 1.0 || final_energy < at_end_of_excitation;
    ok = ok && monotone && bounded && decays;
    detail += fmt::format("rho {}: E {} -> {}, worst rise {:.2g}, {} drops / {} flat steps, sup |h1| {} vs bound {}; ", rho,
                          at_end_of_excitation, final_energy, worst_rise, drops, flats, sup_h1, report.bound);
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 30.0;
  return {ok, detail + fmt::format("{:.2f} s", secs)};
}

// -- 6 ----------------------------------------------------------------------

Outcome invariants() {
  const int trials = 100;
  std::mt19937_64 rng(20040608);
  std::size_t nb = 0, trunc = 0, shifts = 0, causal = 0, switching = 0;
  const TimeGrid g;
  const StateSpace<double> sp(3);

  for (int t = 0; t < trials; ++t) {
    const PropagatingField<double> z{random_vec(rng, 3), random_vec(rng, 3)};
    const auto nz = node_boundary(z);
    const auto back = node_boundary(nz);
    nb += back.incident == z.incident && back.outgoing == z.outgoing &&
          std::abs(pair_norm(sp, nz) - pair_norm(sp, z)) <= 1e-15 * pair_norm(sp, z);
  }

  std::uniform_int_distribution<HalfStep> cut(-10, 32);
  for (int t = 0; t < trials; ++t) {
    const auto f = random_signal(rng, sp, g, t % 2 ? Lattice::I : Lattice::J);
    const HalfStep c = cut(rng), d = cut(rng);
    const auto once = truncate(f, c);
    trunc += truncate(once, c).equals(once) && truncate(once, d).equals(truncate(f, std::min(c, d)));
  }

  std::uniform_int_distribution<HalfStep> off(-9, 9);
  for (int t = 0; t < trials; ++t) {
    const auto f = random_signal(rng, sp, g, Lattice::I);
    const HalfStep r = off(rng), s = off(rng);
    shifts += shift(shift(f, r), s).equals(shift(f, r + s)) && shift(shift(f, r), -r).equals(f);
  }

  std::uniform_int_distribution<int> len(1, 4);
  for (int t = 0; t < trials; ++t) {
    auto kernel = [&] {
      std::vector<Eigen::MatrixXd> k(static_cast<std::size_t>(len(rng)));
      for (auto& m : k) m = Eigen::MatrixXd::NullaryExpr(3, 3, [&] { return random_vec(rng, 1)(0); });
      return convolution_operator<double>(sp, g, k);
    };
    const auto op = compose(kernel(), kernel());
    causal += check_causality(op, 5, Window{0, 24}, Tolerance{}, std::uint64_t(t)).passed();
  }

  for (int t = 0; t < trials; ++t) {
    const auto maps = t % 2 ? models::model_from_json(models::zoo_config("shunt4")).maps() : models::identity_maps(3, g);
    std::uniform_int_distribution<int> n(1, 5);
    const auto e = random_excitation(rng, maps.space(), g, n(rng));
    switching += !switching_violation(run_dsc(maps, e, 60)).has_value();
  }

  const bool ok = nb == trials && trunc == trials && shifts == trials && causal == trials && switching == trials;
  return {ok, fmt::format("nb {}/{}, truncate {}/{}, shift {}/{}, composition causality {}/{}, switching {}/{}", nb,
                          trials, trunc, trials, shifts, trials, causal, trials, switching, trials)};
}

// -- 7 ----------------------------------------------------------------------

Outcome squared_norm_bound() {
  const StateSpace<double> sp(4);
  const TimeGrid g(0.25);
  const auto alpha = DelimitingFunctional<double>::norm_power(sp, 2.0).with_constants({0.0, 1.0, 0.5});
  const Vec v = (Vec(4) << 0.5, -1.5, 2.0, 0.25).finished();
  const auto e = Excitation<double>::impulse(g, sp, v);
  double worst_gap = 0.0, worst_slack = INFINITY;
  for (const double lambda : {1.0, 0.9, 0.5}) {
    const auto r = verify_stability(iterate(scaled_delay<double>(sp, g, lambda), e, 200), alpha);
    worst_gap = std::max(worst_gap, std::abs(r.bound - v.norm()));
    if (!r.passed()) return {false, fmt::format("lambda {}: trace exceeds the bound", lambda)};
    for (const auto& row : r.rows) worst_slack = std::min(worst_slack, row.margin);
  }
  return {worst_gap <= 1e-12 && worst_slack >= -1e-12,
          fmt::format("|e(0)| = {}, worst |bound - |e(0)|| = {:.3g}, min margin {:.3g}", v.norm(), worst_gap, worst_slack)};
}

// -- 8 ----------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism() {
  const fs::path root = fs::current_path() / "acceptance_determinism";
  fs::remove_all(root);
  std::size_t files = 0;
  for (const std::vector<std::string>& base :
       {std::vector<std::string>{"run", "--model", "shunt4", "--excite", "random", "--seed", "424242", "--support", "6",
                                 "--steps", "300"},
        std::vector<std::string>{"run", "--operator", "rotation-delay", "--excite", "random", "--seed", "7", "--support",
                                 "8", "--steps", "300"}}) {
    std::vector<fs::path> dirs;
    for (int rep = 0; rep < 2; ++rep) {
      auto args = base;
      const auto dir = root / fmt::format("{}_{}", base[2], rep);
      args.insert(args.end(), {"--out", dir.string()});
      std::ostringstream out, err;
      if (cli::run_cli(args, out, err) != cli::kPass) return {false, "run failed: " + err.str()};
      dirs.push_back(dir);
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      if (entry.path().extension() != ".csv") continue;
      const auto twin = dirs[1] / entry.path().filename();
      if (!fs::exists(twin) || slurp(entry.path()) != slurp(twin))
        return {false, fmt::format("{} differs between repeated runs", entry.path().filename().string())};
      ++files;
    }
  }
  fs::remove_all(root);
  return {files >= 6, fmt::format("{} CSV files byte-identical across repeated runs", files)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"bound suite over passive operators", bound_suite},
      {"tightness of the bound for a pure delay", tightness},
      {"negative controls", negative_controls},
      {"paired and composed engines agree", equivalence},
      {"16x16 shunt mesh energy and bound", mesh_suite},
      {"structural invariants", invariants},
      {"squared-norm bound equals |e(0)|", squared_norm_bound},
      {"deterministic CSV output", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    failed += !o.ok;
    std::cout << fmt::format("{} [{}] {}: {}\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail);
  }
  std::cout << fmt::format("{}/{} criteria passed\n", criteria.size() - std::size_t(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
