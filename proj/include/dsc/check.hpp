#pragma once

// Probe-based checkers for causality, alpha-passivity and the delimiting
// estimate. Every check is deterministic in its seed; a failing report
// carries a witness that reproduces the violation.

#include <dsc/functional.hpp>
#include <dsc/operator.hpp>

#include <algorithm>
#include <cstdint>
#include <exception>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dsc {

/// allowed(scale) = max(abs, rel * scale).
struct Tolerance {
  double rel = 1e-9;
  double abs = 1e-12;

  double allowed(double scale) const { return std::max(abs, rel * std::abs(scale)); }
};

enum class Verdict { pass, fail };

inline const char* verdict_name(Verdict v) { return v == Verdict::pass ? "pass" : "fail"; }

template <class Scalar>
struct CheckWitness {
  using Vector = typename StateSpace<Scalar>::Vector;

  std::size_t trial = 0;
  HalfStep time = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  std::optional<Signal<Scalar>> probe;
  std::optional<Signal<Scalar>> perturbed;
  std::optional<Vector> sample;
  std::string detail;
};

template <class Scalar>
struct CheckReport {
  std::string check;
  std::string subject;
  Verdict verdict = Verdict::pass;
  std::size_t trials = 0;
  Tolerance tolerance;
  std::uint64_t seed = 0;
  std::optional<CheckWitness<Scalar>> witness;

  bool passed() const { return verdict == Verdict::pass; }
};

/// Per-trial generator, independent of trial order.
inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

namespace detail {

template <class Scalar>
Scalar draw(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  if constexpr (Eigen::NumTraits<Scalar>::IsComplex) {
    using Real = typename Eigen::NumTraits<Scalar>::Real;
    const double re = u(rng);
    const double im = u(rng);
    return Scalar(Real(re), Real(im));
  } else {
    return Scalar(u(rng));
  }
}

template <class Scalar>
typename StateSpace<Scalar>::Vector random_vector(const StateSpace<Scalar>& space, std::mt19937_64& rng,
                                                  bool nonnegative) {
  typename StateSpace<Scalar>::Vector v(space.dim());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = draw<Scalar>(rng, nonnegative ? 0.0 : -1.0, 1.0);
  return v;
}

}  // namespace detail

struct ProbeOptions {
  std::uint64_t seed = 0;
  int max_support_steps = 16;
  bool nonnegative = false;
  bool include_impulses = true;
  HalfStep origin = 0;
};

/// Unit impulses along each basis direction at the origin, followed by
/// random probes with components uniform in [-1, 1] ([0, 1] when
/// nonnegative) and support lengths 1..max_support_steps.
template <class Scalar>
std::vector<Signal<Scalar>> standard_probes(const StateSpace<Scalar>& space, TimeGrid grid, Lattice lattice,
                                            std::size_t count, const ProbeOptions& opts) {
  std::vector<Signal<Scalar>> probes;
  probes.reserve(count);
  const HalfStep start = ceil_to_lattice(opts.origin, lattice);
  const HalfStep step = lattice_step(lattice);
  if (opts.include_impulses) {
    for (Eigen::Index i = 0; i < space.dim() && probes.size() < count; ++i) {
      Signal<Scalar> s(grid, space);
      auto v = space.zero();
      v(i) = Scalar(1);
      s.set(start, v);
      probes.push_back(std::move(s));
    }
  }
  for (std::size_t trial = probes.size(); trial < count; ++trial) {
    auto rng = trial_rng(opts.seed, trial);
    std::uniform_int_distribution<int> len(1, std::max(1, opts.max_support_steps));
    const int n = len(rng);
    Signal<Scalar> s(grid, space);
    for (int j = 0; j < n; ++j) s.set(start + j * step, detail::random_vector(space, rng, opts.nonnegative));
    probes.push_back(std::move(s));
  }
  return probes;
}

/// Random state vectors spanning several orders of magnitude.
template <class Scalar>
std::vector<typename StateSpace<Scalar>::Vector> standard_samples(const StateSpace<Scalar>& space, std::size_t count,
                                                                   std::uint64_t seed, bool nonnegative = false) {
  std::vector<typename StateSpace<Scalar>::Vector> out;
  out.reserve(count + 1);
  out.push_back(space.zero());
  for (std::size_t i = 0; out.size() < count; ++i) {
    auto rng = trial_rng(seed, i);
    std::uniform_real_distribution<double> decade(-3.0, 3.0);
    const double scale = std::pow(10.0, decade(rng));
    out.push_back(detail::random_vector(space, rng, nonnegative) * Scalar(scale));
  }
  return out;
}

/// Probes f and future-perturbed copies f' (equal on s <= t) and requires
/// F f(t) == F f'(t) up to tolerance. The first `dim` trials use unit
/// impulses.
template <class Scalar>
CheckReport<Scalar> check_causality(const CausalOperator<Scalar>& op, std::size_t trials, Window horizon,
                                    Tolerance tol, std::uint64_t seed) {
  if (trials < 1) throw InvalidInput("check_causality: trials must be >= 1");
  if (horizon.begin == kBeforeAll || horizon.end == kAfterAll || horizon.end <= horizon.begin)
    throw InvalidInput("check_causality: horizon must be a finite nonempty window");

  CheckReport<Scalar> report{"causality", op.name(), Verdict::pass, trials, tol, seed, std::nullopt};
  const auto& space = op.space();
  const Lattice in = op.input();
  const Lattice out = op.output();
  const HalfStep in_step = lattice_step(in);
  const HalfStep first_in = ceil_to_lattice(horizon.begin, in);
  const HalfStep first_out = ceil_to_lattice(horizon.begin, out);
  const HalfStep n_out = std::max<HalfStep>(1, (horizon.end - first_out + lattice_step(out) - 1) / lattice_step(out));
  const HalfStep n_in = std::max<HalfStep>(1, (horizon.end - first_in + in_step - 1) / in_step);

  for (std::size_t trial = 0; trial < trials; ++trial) {
    auto rng = trial_rng(seed, trial);
    Signal<Scalar> f(op.grid(), space);
    if (trial < static_cast<std::size_t>(space.dim())) {
      auto v = space.zero();
      v(static_cast<Eigen::Index>(trial)) = Scalar(1);
      f.set(first_in, v);
    } else {
      std::uniform_int_distribution<HalfStep> start_d(0, n_in - 1);
      std::uniform_int_distribution<int> len_d(1, 16);
      const HalfStep start = first_in + start_d(rng) * in_step;
      const int len = len_d(rng);
      for (int j = 0; j < len && start + j * in_step < horizon.end; ++j)
        f.set(start + j * in_step, detail::random_vector(space, rng, false));
    }
    std::uniform_int_distribution<HalfStep> t_d(0, n_out - 1);
    const HalfStep t = first_out + t_d(rng) * lattice_step(out);

    Signal<Scalar> g = truncate(f, t);
    for (HalfStep s = ceil_to_lattice(t + 1, in); s < horizon.end; s += in_step)
      g.set(s, f.at(s) + detail::random_vector(space, rng, false) +
                   StateSpace<Scalar>::Vector::Constant(space.dim(), Scalar(2)));

    CheckWitness<Scalar> w;
    w.trial = trial;
    w.time = t;
    w.probe = f;
    w.perturbed = g;
    try {
      const auto a = op(History<Scalar>(f), t);
      const auto b = op(History<Scalar>(g), t);
      const double diff = double(space.norm(a - b));
      const double allowed = tol.allowed(std::max(double(space.norm(a)), double(space.norm(b))));
      if (diff > allowed) {
        w.lhs = diff;
        w.rhs = allowed;
        w.margin = allowed - diff;
        w.detail = "output at t depends on samples after t";
        report.verdict = Verdict::fail;
        report.witness = std::move(w);
        return report;
      }
    } catch (const std::exception& ex) {
      w.detail = std::string("operator threw: ") + ex.what();
      w.margin = -1.0;
      report.verdict = Verdict::fail;
      report.witness = std::move(w);
      return report;
    }
  }
  return report;
}

/// Cumulative alpha-passivity: for every probe f and every half step s in
/// the horizon, mu_sum(F f, alpha, (-inf, s]) must not exceed
/// mu_sum(f, alpha, (-inf, s]). F f is computed on the horizon, which should
/// start at or before the probe supports. The witness time is the first s
/// at which the response sum overtakes.
template <class Scalar>
CheckReport<Scalar> check_passivity(const CausalOperator<Scalar>& op, const DelimitingFunctional<Scalar>& alpha,
                                    const std::vector<Signal<Scalar>>& excitations, Window horizon, Tolerance tol,
                                    std::uint64_t seed = 0) {
  if (excitations.empty()) throw InvalidInput("check_passivity: no excitations");
  if (horizon.begin == kBeforeAll || horizon.end == kAfterAll || horizon.end <= horizon.begin)
    throw InvalidInput("check_passivity: horizon must be a finite nonempty window");

  CheckReport<Scalar> report{"passivity", op.name(), Verdict::pass, excitations.size(), tol, seed, std::nullopt};
  const double weight = op.grid().weight();

  for (std::size_t i = 0; i < excitations.size(); ++i) {
    const auto& f = excitations[i];
    CheckWitness<Scalar> w;
    w.trial = i;
    w.probe = f;
    try {
      const Signal<Scalar> response = op.apply(f, horizon);
      double lhs = 0.0;
      double rhs = double(mu_sum(f, alpha, Window::before(horizon.begin)));
      for (HalfStep s = horizon.begin; s < horizon.end; ++s) {
        if (response.contains(s)) lhs += weight * double(alpha(response.at(s)));
        if (f.contains(s)) rhs += weight * double(alpha(f.at(s)));
        const double allowed = tol.allowed(std::max(lhs, rhs));
        if (lhs > rhs + allowed) {
          w.time = s;
          w.lhs = lhs;
          w.rhs = rhs;
          w.margin = rhs + allowed - lhs;
          w.perturbed = response;
          w.detail = "cumulative alpha of the response exceeds that of the probe";
          report.verdict = Verdict::fail;
          report.witness = std::move(w);
          return report;
        }
      }
    } catch (const std::exception& ex) {
      w.detail = std::string("operator threw: ") + ex.what();
      w.margin = -1.0;
      report.verdict = Verdict::fail;
      report.witness = std::move(w);
      return report;
    }
  }
  return report;
}

/// ||z|| <= a + b * alpha(z)^c on every sample.
template <class Scalar>
CheckReport<Scalar> check_delimiting(const DelimitingFunctional<Scalar>& alpha,
                                     const std::vector<typename StateSpace<Scalar>::Vector>& samples, Tolerance tol,
                                     std::uint64_t seed = 0) {
  CheckReport<Scalar> report{"delimiting", alpha.label(), Verdict::pass, samples.size(), tol, seed, std::nullopt};
  const auto& c = alpha.constants();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& z = samples[i];
    const double value = double(alpha(z));
    const double lhs = double(alpha.space().norm(z));
    const double rhs = c.envelope(value);
    const double allowed = tol.allowed(std::max(lhs, rhs));
    if (value < 0.0 || lhs > rhs + allowed) {
      CheckWitness<Scalar> w;
      w.trial = i;
      w.lhs = lhs;
      w.rhs = rhs;
      w.margin = rhs + allowed - lhs;
      w.sample = z;
      w.detail = value < 0.0 ? "alpha is negative at the sample" : "norm exceeds a + b * alpha^c";
      report.verdict = Verdict::fail;
      report.witness = std::move(w);
      return report;
    }
  }
  return report;
}

}  // namespace dsc
