#include "doctest.h"

#include <dsc/check.hpp>
#include <dsc/operator.hpp>

#include <complex>
#include <random>

using namespace dsc;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace {

Signal<double> random_signal(std::mt19937_64& rng, const StateSpace<double>& sp, TimeGrid g, Lattice l,
                             HalfStep lo = -6, HalfStep hi = 30) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Signal<double> f(g, sp);
  for (HalfStep k = ceil_to_lattice(lo, l); k < hi; k += lattice_step(l)) {
    if (u(rng) < -0.4) continue;
    Vec v(sp.dim());
    for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = u(rng);
    f.set(k, v);
  }
  return f;
}

CausalOperator<double> random_convolution(std::mt19937_64& rng, const StateSpace<double>& sp, TimeGrid g) {
  std::uniform_int_distribution<int> len(1, 4);
  std::vector<Mat> kernel(static_cast<std::size_t>(len(rng)));
  for (auto& k : kernel) {
    k = Mat(sp.dim(), sp.dim());
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (Eigen::Index i = 0; i < k.size(); ++i) k.data()[i] = u(rng);
  }
  return convolution_operator<double>(sp, g, kernel);
}

bool same_on(const Signal<double>& a, const Signal<double>& b, HalfStep lo, HalfStep hi, double tol = 1e-12) {
  for (HalfStep k = lo; k < hi; ++k)
    if ((a.at(k) - b.at(k)).norm() > tol * (1.0 + a.at(k).norm())) return false;
  return true;
}

}  // namespace

TEST_CASE("convolution kernels") {
  const StateSpace<double> sp(2);
  const TimeGrid g(0.5);
  std::mt19937_64 rng(1);
  const auto f = random_signal(rng, sp, g, Lattice::I);
  const Window w{0, 30};

  const auto zero = convolution_operator<double>(sp, g, {Mat::Zero(2, 2)});
  for (const auto& [k, v] : zero.apply(f, w)) CHECK(v.isZero());

  const auto delta = convolution_operator<double>(sp, g, {Mat::Identity(2, 2) / g.tau()});
  CHECK(same_on(delta.apply(f, w), truncate(f, 29), 0, 30));

  const auto delay = convolution_operator<double>(sp, g, {Mat::Zero(2, 2), Mat::Identity(2, 2) / g.tau()});
  CHECK(same_on(delay.apply(f, w), shift(f, -2), 0, 30));
  CHECK(delay.memory() == 2);
  CHECK_THROWS_AS(convolution_operator<double>(sp, g, {}), InvalidInput);
  CHECK_THROWS_AS(convolution_operator<double>(sp, g, {Mat::Zero(3, 3)}), InvalidInput);
}

TEST_CASE("shift operators") {
  const StateSpace<double> sp(1);
  const TimeGrid g;
  CHECK_THROWS_AS(shift_operator<double>(sp, g, Lattice::I, 1), InvalidInput);
  const auto t = shift_operator<double>(sp, g, Lattice::I, -1);
  CHECK(t.input() == Lattice::I);
  CHECK(t.output() == Lattice::J);
  Signal<double> f(g, sp);
  f.set(4, Vec::Constant(1, 7.0));
  CHECK(t.evaluate(f, 5)(0) == 7.0);
  CHECK(t.evaluate(f, 3)(0) == 0.0);
}

TEST_CASE("compose with an identity passthrough behaves as F") {
  const StateSpace<double> sp(3);
  const TimeGrid g;
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f_op = random_convolution(rng, sp, g);
    const auto f = random_signal(rng, sp, g, Lattice::I);
    const auto id = identity_operator<double>(sp, g);
    const Window w{0, 30};
    CHECK(same_on(compose(id, f_op).apply(f, w), f_op.apply(f, w), 0, 30));
    CHECK(same_on(compose(f_op, id).apply(f, w), f_op.apply(f, w), 0, 30));
  }
}

TEST_CASE("two half-gain delays compose to a quarter-gain double delay") {
  const StateSpace<double> sp(2);
  const TimeGrid g(0.25);
  const auto half = scaled_delay<double>(sp, g, 0.5);
  const auto both = compose(half, half);
  CHECK(both.memory() == 4);
  const auto expect =
      convolution_operator<double>(sp, g, {Mat::Zero(2, 2), Mat::Zero(2, 2), Mat::Identity(2, 2) * (0.25 / g.tau())});
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_signal(rng, sp, g, Lattice::I);
    CHECK(same_on(both.apply(f, {0, 40}), expect.apply(f, {0, 40}), 0, 40));
  }
}

TEST_CASE("compose rejects mismatched lattices and spaces") {
  const TimeGrid g;
  const auto on_i = delay_operator<double>(StateSpace<double>(2), g);
  const auto to_j = shift_operator<double>(StateSpace<double>(2), g, Lattice::I, -1);
  CHECK_THROWS_AS(compose(on_i, to_j), InvalidInput);
  CHECK_THROWS_AS(compose(on_i, delay_operator<double>(StateSpace<double>(3), g)), InvalidInput);
  CHECK_NOTHROW(compose(shift_operator<double>(StateSpace<double>(2), g, Lattice::J, -1), to_j));
}

TEST_CASE("composition is causal and respects its declared memory (property, 120 trials)") {
  const StateSpace<double> sp(2);
  const TimeGrid g;
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<HalfStep> pick_t(0, 14);
  for (int trial = 0; trial < 120; ++trial) {
    const auto fg = compose(random_convolution(rng, sp, g), random_convolution(rng, sp, g));
    const auto f = random_signal(rng, sp, g, Lattice::I);
    const HalfStep t = 2 * pick_t(rng);

    // causality: output at t ignores samples after t
    CHECK((fg(History<double>(f), t) - fg(History<double>(truncate(f, t)), t)).norm() <= 1e-12);

    // memory: samples older than t - memory do not matter either
    Signal<double> recent(g, sp);
    for (const auto& [k, v] : f)
      if (k >= t - *fg.memory()) recent.set(k, v);
    CHECK((fg.evaluate(f, t) - fg.evaluate(recent, t)).norm() <= 1e-12);

    if (trial < 50) CHECK(check_causality(fg, 20, Window{0, 30}, Tolerance{}, std::uint64_t(trial)).passed());
  }
}

TEST_CASE("pointwise and lookahead operators") {
  const StateSpace<double> sp(2);
  const TimeGrid g;
  const auto twice = pointwise_operator<double>("twice", sp, g, Lattice::J, [](const Vec& v, HalfStep) { return 2 * v; });
  Signal<double> f(g, sp);
  f.set(3, Vec::Ones(2));
  CHECK(twice.evaluate(f, 3) == Vec::Constant(2, 2.0));
  CHECK(twice.memory() == 0);
  const auto look = lookahead_operator<double>(sp, g);
  CHECK_FALSE(look.memory().has_value());
  f.set(2, Vec::Ones(2));
  f.set(4, Vec::Ones(2));
  CHECK(look(History<double>(f), 2) == Vec::Ones(2));
  CHECK(look.evaluate(f, 2).isZero());
}

TEST_CASE("operator output dimension is checked") {
  const StateSpace<double> sp(2);
  const CausalOperator<double> bad("bad", sp, TimeGrid{}, {Lattice::I, Lattice::I, 0},
                                   [](const History<double>&, HalfStep) { return Vec::Zero(3); });
  Signal<double> f(TimeGrid{}, sp);
  CHECK_THROWS_AS(bad.evaluate(f, 0), InvalidInput);
}

TEST_CASE("complex convolution") {
  using C = std::complex<double>;
  const StateSpace<C> sp(2);
  const TimeGrid g;
  Eigen::MatrixXcd rot(2, 2);
  rot << C(0, 1), C(0, 0), C(0, 0), C(0, -1);
  const auto op = convolution_operator<C>(sp, g, {Eigen::MatrixXcd::Zero(2, 2), rot});
  Signal<C> f(g, sp);
  Eigen::VectorXcd v(2);
  v << C(1, 0), C(0, 2);
  f.set(0, v);
  const auto out = op.evaluate(f, 2);
  CHECK(std::abs(out(0) - C(0, 1)) < 1e-15);
  CHECK(std::abs(out(1) - C(2, 0)) < 1e-15);
  CHECK(check_causality(op, 30, Window{0, 20}, Tolerance{}, 5).passed());
}
