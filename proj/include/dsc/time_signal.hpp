#pragma once

// Discrete half-step time axis, state spaces and finitely supported signals.
//
// Time is carried as an integer half-step index k (time k*tau/2). Even indices
// form the full-step lattice I, odd indices the staggered lattice J, and the
// union is H. Every grid point carries the point measure tau.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace dsc {

/// Rejected caller input (dimension mismatch, off-grid offsets, bad constants).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using HalfStep = std::int64_t;

inline constexpr HalfStep kBeforeAll = std::numeric_limits<HalfStep>::min();
inline constexpr HalfStep kAfterAll = std::numeric_limits<HalfStep>::max();

enum class Lattice { I, J, H };

constexpr HalfStep lattice_step(Lattice l) { return l == Lattice::H ? 1 : 2; }

constexpr bool on_lattice(HalfStep k, Lattice l) {
  switch (l) {
    case Lattice::I: return k % 2 == 0;
    case Lattice::J: return k % 2 != 0;
    case Lattice::H: return true;
  }
  return false;
}

/// Lattice of t + offset for t on `l`.
constexpr Lattice shifted(Lattice l, HalfStep offset) {
  if (l == Lattice::H || offset % 2 == 0) return l;
  return l == Lattice::I ? Lattice::J : Lattice::I;
}

constexpr HalfStep ceil_to_lattice(HalfStep k, Lattice l) {
  return on_lattice(k, l) ? k : k + 1;
}

constexpr HalfStep floor_to_lattice(HalfStep k, Lattice l) {
  return on_lattice(k, l) ? k : k - 1;
}

inline const char* lattice_name(Lattice l) {
  switch (l) {
    case Lattice::I: return "I";
    case Lattice::J: return "J";
    case Lattice::H: return "H";
  }
  return "?";
}

/// Uniform half-step grid with step tau; the measure puts weight tau on
/// every point.
class TimeGrid {
 public:
  explicit TimeGrid(double tau = 1.0) : tau_(tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidInput("TimeGrid: tau must be positive and finite");
  }

  double tau() const { return tau_; }
  double half_step() const { return 0.5 * tau_; }
  double weight() const { return tau_; }
  double time(HalfStep k) const { return static_cast<double>(k) * half_step(); }
  static bool in_I(HalfStep k) { return on_lattice(k, Lattice::I); }
  static bool in_J(HalfStep k) { return on_lattice(k, Lattice::J); }

  /// Converts a time offset into half steps; rejects offsets that are not an
  /// integer multiple of tau/2.
  HalfStep offset_from_time(double s) const {
    const double q = s / half_step();
    const double r = std::round(q);
    if (!std::isfinite(q) || std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q)))
      throw InvalidInput("time offset " + std::to_string(s) + " is not a multiple of tau/2");
    return static_cast<HalfStep>(r);
  }

  bool operator==(const TimeGrid&) const = default;

 private:
  double tau_;
};

enum class NormKind { l2, l1, linf, weighted_l2 };

inline const char* norm_name(NormKind k) {
  switch (k) {
    case NormKind::l2: return "l2";
    case NormKind::l1: return "l1";
    case NormKind::linf: return "linf";
    case NormKind::weighted_l2: return "weighted_l2";
  }
  return "?";
}

/// Finite-dimensional normed space L over Scalar.
template <class Scalar>
class StateSpace {
 public:
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

  explicit StateSpace(Eigen::Index dim, NormKind kind = NormKind::l2) : dim_(dim), kind_(kind) {
    if (dim < 1) throw InvalidInput("StateSpace: dimension must be >= 1");
    if (kind == NormKind::weighted_l2) throw InvalidInput("StateSpace: weighted_l2 needs weights");
  }

  static StateSpace weighted(RealVector weights) {
    if (weights.size() < 1) throw InvalidInput("StateSpace: empty weights");
    if ((weights.array() <= Real(0)).any() || !weights.allFinite())
      throw InvalidInput("StateSpace: weights must be strictly positive");
    StateSpace s(weights.size());
    s.kind_ = NormKind::weighted_l2;
    s.weights_ = std::move(weights);
    return s;
  }

  Eigen::Index dim() const { return dim_; }
  NormKind kind() const { return kind_; }
  const RealVector& weights() const { return weights_; }

  Vector zero() const { return Vector::Zero(dim_); }

  template <class Derived>
  Real norm(const Eigen::MatrixBase<Derived>& z) const {
    switch (kind_) {
      case NormKind::l2: return z.norm();
      case NormKind::l1: return z.template lpNorm<1>();
      case NormKind::linf: return z.template lpNorm<Eigen::Infinity>();
      case NormKind::weighted_l2: return std::sqrt((weights_.array() * z.array().abs2()).sum());
    }
    return Real(0);
  }

  bool operator==(const StateSpace& o) const {
    return dim_ == o.dim_ && kind_ == o.kind_ && weights_.size() == o.weights_.size() &&
           (weights_.size() == 0 || weights_ == o.weights_);
  }

 private:
  Eigen::Index dim_;
  NormKind kind_;
  RealVector weights_;
};

/// Half-open window [begin, end) of half-step indices; kBeforeAll / kAfterAll
/// act as -inf / +inf.
struct Window {
  HalfStep begin = kBeforeAll;
  HalfStep end = kAfterAll;

  static Window all() { return {}; }
  static Window before(HalfStep t) { return {kBeforeAll, t}; }
  static Window full_steps(HalfStep first_step, HalfStep past_last_step) {
    return {2 * first_step, 2 * past_last_step};
  }
  bool contains(HalfStep k) const { return k >= begin && k < end; }
};

/// Finitely supported map from half-step indices to state vectors, zero
/// outside the stored support.
template <class Scalar>
class Signal {
 public:
  using Space = StateSpace<Scalar>;
  using Vector = typename Space::Vector;
  using Real = typename Space::Real;
  using Storage = std::map<HalfStep, Vector>;

  Signal(TimeGrid grid, Space space) : grid_(grid), space_(std::move(space)), zero_(space_.zero()) {}

  const TimeGrid& grid() const { return grid_; }
  const Space& space() const { return space_; }

  const Vector& at(HalfStep k) const {
    auto it = values_.find(k);
    return it == values_.end() ? zero_ : it->second;
  }

  template <class Derived>
  void set(HalfStep k, const Eigen::MatrixBase<Derived>& v) {
    if (v.size() != space_.dim()) throw InvalidInput("Signal::set: dimension mismatch");
    values_.insert_or_assign(k, Vector(v));
  }

  const Vector& zero() const { return zero_; }
  bool contains(HalfStep k) const { return values_.count(k) != 0; }
  bool empty() const { return values_.empty(); }
  std::size_t size() const { return values_.size(); }
  const Storage& values() const { return values_; }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  std::optional<HalfStep> first() const {
    if (values_.empty()) return std::nullopt;
    return values_.begin()->first;
  }
  std::optional<HalfStep> last() const {
    if (values_.empty()) return std::nullopt;
    return values_.rbegin()->first;
  }

  /// Stored points inside w, as an iterator range.
  auto range(Window w) const {
    auto lo = w.begin == kBeforeAll ? values_.begin() : values_.lower_bound(w.begin);
    auto hi = w.end == kAfterAll ? values_.end() : values_.lower_bound(w.end);
    return std::pair{lo, hi};
  }

  void require_compatible(const Signal& o, const char* what) const {
    if (!(grid_ == o.grid_) || !(space_ == o.space_))
      throw InvalidInput(std::string(what) + ": signals live on different grids or spaces");
  }

  friend Signal operator+(const Signal& a, const Signal& b) {
    a.require_compatible(b, "Signal +");
    Signal out = a;
    for (const auto& [k, v] : b.values_) {
      auto it = out.values_.find(k);
      if (it == out.values_.end()) out.values_.emplace(k, v);
      else it->second += v;
    }
    return out;
  }

  friend Signal operator-(const Signal& a, const Signal& b) {
    Signal neg = b;
    for (auto& [k, v] : neg.values_) v = -v;
    return a + neg;
  }

  /// Pointwise equality over the union of supports (implicit zeros included).
  bool equals(const Signal& o) const {
    if (!(grid_ == o.grid_) || !(space_ == o.space_)) return false;
    for (const auto& [k, v] : values_)
      if (v != o.at(k)) return false;
    for (const auto& [k, v] : o.values_)
      if (v != at(k)) return false;
    return true;
  }

 private:
  TimeGrid grid_;
  Space space_;
  Vector zero_;
  Storage values_;
};

/// Read-only view of a signal cut off after `cutoff`: the characteristic
/// function chi_{s <= cutoff} applied without copying.
template <class Scalar>
class History {
 public:
  using Vector = typename Signal<Scalar>::Vector;

  explicit History(const Signal<Scalar>& s, HalfStep cutoff = kAfterAll) : signal_(&s), cutoff_(cutoff) {}

  const Vector& at(HalfStep k) const { return k > cutoff_ ? zero() : signal_->at(k); }
  const Vector& zero() const { return signal_->zero(); }
  HalfStep cutoff() const { return cutoff_; }
  const TimeGrid& grid() const { return signal_->grid(); }
  const StateSpace<Scalar>& space() const { return signal_->space(); }
  const Signal<Scalar>& signal() const { return *signal_; }

  /// First stored index at or before the cutoff.
  std::optional<HalfStep> first() const {
    auto f = signal_->first();
    if (!f || *f > cutoff_) return std::nullopt;
    return f;
  }

  History truncated(HalfStep t) const { return History(*signal_, std::min(t, cutoff_)); }

 private:
  const Signal<Scalar>* signal_;
  HalfStep cutoff_;
};

/// chi_{s <= t} f.
template <class Scalar>
Signal<Scalar> truncate(const Signal<Scalar>& f, HalfStep t) {
  if (t == kAfterAll) return f;
  Signal<Scalar> out(f.grid(), f.space());
  for (auto [it, hi] = f.range(Window::before(t + 1)); it != hi; ++it) out.set(it->first, it->second);
  return out;
}

/// (T_s f)(t) = f(t + s), s in half steps.
template <class Scalar>
Signal<Scalar> shift(const Signal<Scalar>& f, HalfStep s) {
  Signal<Scalar> out(f.grid(), f.space());
  for (const auto& [k, v] : f) out.set(k - s, v);
  return out;
}

/// Shift by a time offset; the offset must be an integer multiple of tau/2.
template <class Scalar>
Signal<Scalar> shift_by_time(const Signal<Scalar>& f, double offset) {
  return shift(f, f.grid().offset_from_time(offset));
}

/// tau * sum of alpha(f(s)) over the stored points s in w. Implicit zero
/// samples contribute alpha(0), which every built-in functional sets to 0.
template <class Scalar, class Alpha>
typename Signal<Scalar>::Real mu_sum(const Signal<Scalar>& f, const Alpha& alpha, Window w) {
  using Real = typename Signal<Scalar>::Real;
  Real acc(0);
  for (auto [it, hi] = f.range(w); it != hi; ++it) acc += static_cast<Real>(alpha(it->second));
  return static_cast<Real>(f.grid().weight()) * acc;
}

/// Excitation e supported on [0, N tau) of the full-step lattice I.
template <class Scalar>
class Excitation {
 public:
  using Vector = typename Signal<Scalar>::Vector;

  Excitation(Signal<Scalar> signal, int support_steps) : signal_(std::move(signal)), steps_(support_steps) {
    if (steps_ < 1) throw InvalidInput("Excitation: N must be >= 1");
    for (const auto& [k, v] : signal_) {
      if (k < 0 || k >= 2 * static_cast<HalfStep>(steps_))
        throw InvalidInput("Excitation: sample at half step " + std::to_string(k) + " outside [0, N tau)");
      if (!on_lattice(k, Lattice::I))
        throw InvalidInput("Excitation: sample at half step " + std::to_string(k) + " is not on the full-step lattice");
    }
  }

  static Excitation impulse(TimeGrid grid, StateSpace<Scalar> space, const Vector& v) {
    Signal<Scalar> s(grid, std::move(space));
    s.set(0, v);
    return Excitation(std::move(s), 1);
  }

  static Excitation none(TimeGrid grid, StateSpace<Scalar> space) {
    return Excitation(Signal<Scalar>(grid, std::move(space)), 1);
  }

  const Signal<Scalar>& signal() const { return signal_; }
  int support_steps() const { return steps_; }
  HalfStep support_end() const { return 2 * static_cast<HalfStep>(steps_); }
  const TimeGrid& grid() const { return signal_.grid(); }
  const StateSpace<Scalar>& space() const { return signal_.space(); }

 private:
  Signal<Scalar> signal_;
  int steps_;
};

}  // namespace dsc
