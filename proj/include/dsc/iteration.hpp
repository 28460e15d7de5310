#pragma once

// Iterated passive causal process g(t + tau) = F[e + g](t), its a priori
// stability bound, and the existence guard on the partial sums s_n.

#include <dsc/check.hpp>
#include <dsc/functional.hpp>
#include <dsc/operator.hpp>

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsc {

/// A partial sum s_n left the admissible set E.
template <class Scalar>
class ExistenceFailure : public std::runtime_error {
 public:
  ExistenceFailure(int step, Signal<Scalar> partial)
      : std::runtime_error("existence guard: partial sum s_" + std::to_string(step) + " is outside the domain"),
        step_(step), partial_(std::move(partial)) {}

  int step() const { return step_; }
  const Signal<Scalar>& partial() const { return partial_; }

 private:
  int step_;
  Signal<Scalar> partial_;
};

/// The integral difference under the bound is negative beyond round-off:
/// F is not passive for alpha, or the process is inconsistent.
class InconsistentBound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class Scalar>
using Domain = std::function<bool(const Signal<Scalar>&)>;

/// Domain predicate that accepts a signal iff every stored sample does.
template <class Scalar, class Pred>
Domain<Scalar> pointwise_domain(Pred pred) {
  return [pred = std::move(pred)](const Signal<Scalar>& s) {
    for (const auto& [k, v] : s)
      if (!pred(v)) return false;
    return true;
  };
}

template <class Scalar>
struct IteratedProcess {
  Signal<Scalar> g;
  CausalOperator<Scalar> op;
  Excitation<Scalar> excitation;
  int steps_run = 0;

  /// e + g.
  Signal<Scalar> drive() const { return excitation.signal() + g; }
  HalfStep last() const { return 2 * static_cast<HalfStep>(steps_run); }
};

namespace detail {

template <class Scalar>
void require_full_step(const CausalOperator<Scalar>& op, const Excitation<Scalar>& e) {
  if (op.input() != Lattice::I || op.output() != Lattice::I)
    throw InvalidInput("iterate: operator '" + op.name() + "' must map the full-step lattice I to itself");
  if (!(op.space() == e.space())) throw InvalidInput("iterate: operator and excitation live in different spaces");
  if (!(op.grid() == e.grid())) throw InvalidInput("iterate: operator and excitation use different grids");
}

/// s_n(t) = e(t) + F[s_{n-1}](t - tau) on the full-step points of [0, last].
template <class Scalar>
Signal<Scalar> next_partial_sum(const CausalOperator<Scalar>& op, const Excitation<Scalar>& e,
                                const Signal<Scalar>& prev, HalfStep last) {
  Signal<Scalar> s = e.signal();
  for (HalfStep t = 2; t <= last; t += 2) {
    auto v = op.evaluate(prev, t - 2);
    s.set(t, e.signal().at(t) + v);
  }
  return s;
}

}  // namespace detail

/// Runs g(t + tau) = F[e + g](t) for t = 0, tau, ..., (n_steps - 1) tau with
/// g = 0 for t <= 0. F only ever sees e + g cut off at t. With a domain, the
/// partial sums s_0 = e, ..., s_{N-1} are checked before the step that needs
/// them.
template <class Scalar>
IteratedProcess<Scalar> iterate(const CausalOperator<Scalar>& op, const Excitation<Scalar>& e, int n_steps,
                                const Domain<Scalar>& domain = {}) {
  detail::require_full_step(op, e);
  if (n_steps < 1) throw InvalidInput("iterate: n_steps must be >= 1");

  const HalfStep last = 2 * static_cast<HalfStep>(n_steps);
  Signal<Scalar> g(e.grid(), e.space());
  Signal<Scalar> drive(e.grid(), e.space());
  std::optional<Signal<Scalar>> partial;
  g.set(0, e.space().zero());

  for (int n = 0; n < n_steps; ++n) {
    if (domain && n < e.support_steps()) {
      partial = n == 0 ? e.signal() : detail::next_partial_sum(op, e, *partial, last);
      if (!domain(*partial)) throw ExistenceFailure<Scalar>(n, *partial);
    }
    const HalfStep t = 2 * static_cast<HalfStep>(n);
    drive.set(t, e.signal().at(t) + g.at(t));
    g.set(t + 2, op.evaluate(drive, t));
  }
  return IteratedProcess<Scalar>{std::move(g), op, e, n_steps};
}

/// a + b * ((1/tau) * int_[0, N tau) alpha(e + g) - alpha(g) dmu)^c.
///
/// A slightly negative integral difference (within tolerance) is clamped to
/// zero; anything below that throws InconsistentBound.
template <class Scalar>
double bound_value(const IteratedProcess<Scalar>& p, const DelimitingFunctional<Scalar>& alpha,
                   Tolerance tol = {}) {
  const int n = p.excitation.support_steps();
  if (p.steps_run + 1 < n) throw InvalidInput("bound_value: process does not cover [0, N tau)");
  const Window w{0, p.excitation.support_end()};
  const double with_e = double(mu_sum(p.drive(), alpha, w));
  const double without_e = double(mu_sum(p.g, alpha, w));
  double diff = with_e - without_e;
  if (diff < 0.0) {
    if (-diff > tol.allowed(std::max(std::abs(with_e), std::abs(without_e))))
      throw InconsistentBound("bound_value: integral difference " + std::to_string(diff) + " is negative");
    diff = 0.0;
  }
  const auto& c = alpha.constants();
  return c.envelope(diff / p.excitation.grid().tau());
}

/// Triangle-inequality form of the bound for alpha = ||.||:
/// (1/tau) * int_[0, N tau) ||e|| dmu.
template <class Scalar>
double excitation_norm_bound(const Excitation<Scalar>& e) {
  const auto& space = e.space();
  const auto norm = [&space](const typename StateSpace<Scalar>::Vector& z) { return space.norm(z); };
  return double(mu_sum(e.signal(), norm, Window{0, e.support_end()})) / e.grid().tau();
}

struct StabilityRow {
  HalfStep k = 0;
  double t = 0.0;
  double norm_g = 0.0;
  double bound = 0.0;
  double margin = 0.0;
};

struct StabilityReport {
  std::vector<StabilityRow> rows;
  double bound = 0.0;
  DelimitingConstants constants;
  Verdict verdict = Verdict::pass;
  int support_steps = 1;
  double tau = 1.0;
  double sup_norm = 0.0;
  std::optional<HalfStep> first_crossing;
  Tolerance tolerance;

  bool passed() const { return verdict == Verdict::pass; }
};

/// Checks ||g(t)|| <= bound for every computed t >= N tau.
template <class Scalar>
StabilityReport verify_stability(const IteratedProcess<Scalar>& p, const DelimitingFunctional<Scalar>& alpha,
                                 Tolerance tol = {}) {
  StabilityReport r;
  r.bound = bound_value(p, alpha, tol);
  r.constants = alpha.constants();
  r.support_steps = p.excitation.support_steps();
  r.tau = p.excitation.grid().tau();
  r.tolerance = tol;
  const double allowed = tol.allowed(r.bound);
  const auto& space = p.excitation.space();
  for (auto [it, hi] = p.g.range(Window{p.excitation.support_end(), kAfterAll}); it != hi; ++it) {
    StabilityRow row;
    row.k = it->first;
    row.t = p.excitation.grid().time(it->first);
    row.norm_g = double(space.norm(it->second));
    row.bound = r.bound;
    row.margin = r.bound - row.norm_g;
    r.sup_norm = std::max(r.sup_norm, row.norm_g);
    if (row.norm_g > r.bound + allowed && !r.first_crossing) {
      r.first_crossing = row.k;
      r.verdict = Verdict::fail;
    }
    r.rows.push_back(row);
  }
  return r;
}

/// Energy held in the recursion state at full step k: the alpha-content of
/// e + g over the operator's memory window [k - memory, k], i.e. the samples
/// the future of the process still depends on.
template <class Scalar>
double held_energy(const IteratedProcess<Scalar>& p, const DelimitingFunctional<Scalar>& alpha, HalfStep k) {
  const auto depth = p.op.memory();
  if (!depth) throw InvalidInput("held_energy: operator has unbounded memory");
  return double(mu_sum(p.drive(), alpha, Window{k - *depth, k + 1})) / p.excitation.grid().tau();
}

/// held_energy at every computed full step.
template <class Scalar>
std::vector<std::pair<HalfStep, double>> energy_trace(const IteratedProcess<Scalar>& p,
                                                      const DelimitingFunctional<Scalar>& alpha) {
  const auto depth = p.op.memory();
  if (!depth) throw InvalidInput("energy_trace: operator has unbounded memory");
  const Signal<Scalar> x = p.drive();
  std::vector<double> a;
  for (HalfStep k = 0; k <= p.last(); k += 2) a.push_back(x.contains(k) ? double(alpha(x.at(k))) : 0.0);
  std::vector<std::pair<HalfStep, double>> out;
  const HalfStep span = *depth / 2;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = i > std::size_t(span) ? i - std::size_t(span) : 0; j <= i; ++j) acc += a[j];
    out.emplace_back(2 * static_cast<HalfStep>(i), acc);
  }
  return out;
}

}  // namespace dsc
