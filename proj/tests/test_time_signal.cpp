#include "doctest.h"

#include <dsc/functional.hpp>
#include <dsc/time_signal.hpp>

#include <complex>
#include <random>

using namespace dsc;
using Vec = Eigen::VectorXd;

namespace {

Signal<double> random_signal(std::mt19937_64& rng, const StateSpace<double>& sp, TimeGrid g, int max_len = 12) {
  std::uniform_int_distribution<int> len(0, max_len);
  std::uniform_int_distribution<HalfStep> pos(-20, 20);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Signal<double> f(g, sp);
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    Vec v(sp.dim());
    for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = u(rng);
    f.set(pos(rng), v);
  }
  return f;
}

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace

TEST_CASE("lattices split the half-step grid") {
  for (HalfStep k = -7; k <= 7; ++k) {
    CHECK(on_lattice(k, Lattice::I) != on_lattice(k, Lattice::J));
    CHECK(on_lattice(k, Lattice::H));
    CHECK(ceil_to_lattice(k, Lattice::I) >= k);
    CHECK(on_lattice(ceil_to_lattice(k, Lattice::J), Lattice::J));
    CHECK(on_lattice(floor_to_lattice(k, Lattice::I), Lattice::I));
    CHECK(floor_to_lattice(k, Lattice::I) <= k);
  }
  CHECK(shifted(Lattice::I, -1) == Lattice::J);
  CHECK(shifted(Lattice::J, -3) == Lattice::I);
  CHECK(shifted(Lattice::I, -2) == Lattice::I);
}

TEST_CASE("time grid") {
  CHECK_THROWS_AS(TimeGrid(0.0), InvalidInput);
  CHECK_THROWS_AS(TimeGrid(-1.0), InvalidInput);
  const TimeGrid g(0.5);
  CHECK(g.time(3) == doctest::Approx(0.75));
  CHECK(g.weight() == 0.5);
  CHECK(g.offset_from_time(-0.5) == -2);
  CHECK(g.offset_from_time(0.25) == 1);
  CHECK_THROWS_AS(g.offset_from_time(0.1), InvalidInput);
}

TEST_CASE("state space norms") {
  const Vec z = vec({3, -4});
  CHECK(StateSpace<double>(2).norm(z) == doctest::Approx(5));
  CHECK(StateSpace<double>(2, NormKind::l1).norm(z) == doctest::Approx(7));
  CHECK(StateSpace<double>(2, NormKind::linf).norm(z) == doctest::Approx(4));
  CHECK(StateSpace<double>::weighted(vec({1, 0.25})).norm(z) == doctest::Approx(std::sqrt(9.0 + 4.0)));
  CHECK_THROWS_AS(StateSpace<double>::weighted(vec({1, 0})), InvalidInput);
  CHECK(StateSpace<double>(2).norm(Vec::Zero(2)) == 0.0);
}

TEST_CASE("signals are sparse with implicit zero") {
  const StateSpace<double> sp(2);
  Signal<double> f(TimeGrid{}, sp);
  CHECK(f.at(5) == Vec::Zero(2));
  f.set(4, vec({1, 2}));
  CHECK(f.at(4) == vec({1, 2}));
  CHECK(f.first() == 4);
  CHECK_THROWS_AS(f.set(0, vec({1, 2, 3})), InvalidInput);
  Signal<double> other(TimeGrid(2.0), sp);
  CHECK_THROWS_AS(f + other, InvalidInput);
}

TEST_CASE("truncate examples") {
  const StateSpace<double> sp(2);
  const TimeGrid g;
  Signal<double> d(g, sp);
  d.set(0, vec({1, 1}));
  CHECK(truncate(d, -2).empty());
  CHECK(truncate(d, kAfterAll).equals(d));

  const StateSpace<double> s1(1);
  Signal<double> f(g, s1);
  f.set(0, vec({1}));
  f.set(2, vec({2}));
  f.set(4, vec({3}));
  const auto t = truncate(f, 2);
  CHECK(t.at(0)(0) == 1);
  CHECK(t.at(2)(0) == 2);
  CHECK(t.at(4)(0) == 0);
}

TEST_CASE("truncate is idempotent and matches the History view (property, 200 trials)") {
  const StateSpace<double> sp(3);
  const TimeGrid g(0.7);
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<HalfStep> cut(-25, 25);
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = random_signal(rng, sp, g);
    const HalfStep t = cut(rng);
    const HalfStep s = cut(rng);
    const auto once = truncate(f, t);
    CHECK(truncate(once, t).equals(once));
    CHECK(truncate(once, s).equals(truncate(f, std::min(s, t))));
    const History<double> h(f, t);
    for (HalfStep k = -25; k <= 25; ++k) CHECK(h.at(k) == once.at(k));
  }
}

TEST_CASE("shift examples") {
  const StateSpace<double> sp(2);
  Signal<double> d(TimeGrid{}, sp);
  d.set(0, vec({5, 6}));
  CHECK(shift(d, 0).equals(d));
  const auto moved = shift(d, -2);
  CHECK(moved.at(2) == vec({5, 6}));
  CHECK(moved.size() == 1);
  CHECK(shift_by_time(d, -1.0).equals(moved));
}

TEST_CASE("shift group law (property, 200 trials)") {
  const StateSpace<double> sp(2);
  const TimeGrid g;
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<HalfStep> off(-9, 9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = random_signal(rng, sp, g);
    const HalfStep r = off(rng);
    const HalfStep s = off(rng);
    CHECK(shift(shift(f, r), s).equals(shift(f, r + s)));
    CHECK(shift(shift(f, r), -r).equals(f));
  }
}

TEST_CASE("mu_sum") {
  const StateSpace<double> sp(2);
  const TimeGrid g(0.5);
  const auto sq = DelimitingFunctional<double>::norm_power(sp, 2.0);
  Signal<double> zero(g, sp);
  CHECK(mu_sum(zero, sq, Window::all()) == 0.0);
  Signal<double> d(g, sp);
  d.set(0, vec({3, 4}));
  CHECK(mu_sum(d, sq, Window{0, 2}) == doctest::Approx(12.5));
  CHECK(mu_sum(d, sq, Window{1, 2}) == 0.0);
}

TEST_CASE("l^p norms from mu_sum agree with direct summation (100 trials)") {
  const StateSpace<double> sp(3);
  const TimeGrid g(0.25);
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = random_signal(rng, sp, g);
    const double p = 1.0 + double(trial % 4);
    const auto alpha = DelimitingFunctional<double>::norm_power(sp, p);
    double direct = 0.0;
    for (const auto& [k, v] : f) direct += g.tau() * std::pow(v.norm(), p);
    CHECK(std::pow(mu_sum(f, alpha, Window::all()), 1.0 / p) ==
          doctest::Approx(std::pow(direct, 1.0 / p)).epsilon(1e-12));
  }
}

TEST_CASE("excitations live on I within [0, N tau)") {
  const StateSpace<double> sp(1);
  const TimeGrid g;
  Signal<double> s(g, sp);
  s.set(2, vec({1}));
  CHECK_NOTHROW(Excitation<double>(s, 2));
  CHECK_THROWS_AS(Excitation<double>(s, 1), InvalidInput);
  CHECK_THROWS_AS(Excitation<double>(s, 0), InvalidInput);
  Signal<double> odd(g, sp);
  odd.set(1, vec({1}));
  CHECK_THROWS_AS(Excitation<double>(odd, 4), InvalidInput);
  Signal<double> neg(g, sp);
  neg.set(-2, vec({1}));
  CHECK_THROWS_AS(Excitation<double>(neg, 4), InvalidInput);
}

TEST_CASE("complex scalars") {
  using C = std::complex<double>;
  const StateSpace<C> sp(2);
  Signal<C> f(TimeGrid{}, sp);
  Eigen::VectorXcd v(2);
  v << C(3, 4), C(0, 0);
  f.set(0, v);
  CHECK(sp.norm(f.at(0)) == doctest::Approx(5));
  CHECK(shift(f, -2).at(2) == v);
  const auto sq = DelimitingFunctional<C>::norm_power(sp, 2.0);
  CHECK(mu_sum(f, sq, Window::all()) == doctest::Approx(25));
}
