#pragma once

// Causal operators: maps from an input history to a value at time t.
//
// The rule of an operator receives a History view. Engines always hand it a
// history cut off at t, so a well-behaved rule cannot see the future; the
// checkers call the raw rule with the full signal to catch rules that try.

#include <dsc/time_signal.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace dsc {

template <class Scalar>
class CausalOperator {
 public:
  using Space = StateSpace<Scalar>;
  using Vector = typename Space::Vector;
  using Hist = History<Scalar>;
  using Rule = std::function<Vector(const Hist&, HalfStep)>;

  /// Lattices the operator reads and writes, and the largest lag (in half
  /// steps) it reads: apply(f, t) depends on f on [t - memory, t] only.
  /// std::nullopt means unbounded memory.
  struct Shape {
    Lattice input = Lattice::I;
    Lattice output = Lattice::I;
    std::optional<HalfStep> memory;
  };

  CausalOperator(std::string name, Space space, TimeGrid grid, Shape shape, Rule rule)
      : name_(std::move(name)), space_(std::move(space)), grid_(grid), shape_(shape),
        rule_(std::make_shared<const Rule>(std::move(rule))) {
    if (shape_.memory && *shape_.memory < 0) throw InvalidInput("CausalOperator: negative memory depth");
  }

  /// Raw evaluation on whatever history is supplied.
  Vector operator()(const Hist& h, HalfStep t) const {
    Vector v = (*rule_)(h, t);
    if (v.size() != space_.dim())
      throw InvalidInput("operator '" + name_ + "' returned a vector of dimension " + std::to_string(v.size()));
    return v;
  }

  /// F f (t) evaluated on chi_{s<=t} f.
  Vector evaluate(const Signal<Scalar>& f, HalfStep t) const { return (*this)(Hist(f, t), t); }
  Vector evaluate(const Hist& h, HalfStep t) const { return (*this)(h.truncated(t), t); }

  /// F f on every output-lattice point of a finite window.
  Signal<Scalar> apply(const Signal<Scalar>& f, Window w) const {
    if (w.begin == kBeforeAll || w.end == kAfterAll) throw InvalidInput("apply: window must be finite");
    Signal<Scalar> out(grid_, space_);
    const HalfStep step = lattice_step(shape_.output);
    for (HalfStep t = ceil_to_lattice(w.begin, shape_.output); t < w.end; t += step) out.set(t, evaluate(f, t));
    return out;
  }

  const std::string& name() const { return name_; }
  const Space& space() const { return space_; }
  const TimeGrid& grid() const { return grid_; }
  const Shape& shape() const { return shape_; }
  Lattice input() const { return shape_.input; }
  Lattice output() const { return shape_.output; }
  std::optional<HalfStep> memory() const { return shape_.memory; }

  CausalOperator renamed(std::string name) const {
    CausalOperator op = *this;
    op.name_ = std::move(name);
    return op;
  }

 private:
  std::string name_;
  Space space_;
  TimeGrid grid_;
  Shape shape_;
  std::shared_ptr<const Rule> rule_;
};

/// outer . inner. The inner operator is evaluated on truncated histories at
/// every point of the outer operator's input lattice that the outer may read.
/// Without a memory bound on the outer operator, evaluation starts at the
/// first stored sample of the history, so inner must map the zero history to
/// zero.
template <class Scalar>
CausalOperator<Scalar> compose(const CausalOperator<Scalar>& outer, const CausalOperator<Scalar>& inner) {
  if (!(outer.space() == inner.space())) throw InvalidInput("compose: state space mismatch");
  if (!(outer.grid() == inner.grid())) throw InvalidInput("compose: time grid mismatch");
  if (outer.input() != inner.output())
    throw InvalidInput(std::string("compose: outer reads lattice ") + lattice_name(outer.input()) +
                       " but inner writes " + lattice_name(inner.output()));

  std::optional<HalfStep> memory;
  if (outer.memory() && inner.memory()) memory = *outer.memory() + *inner.memory();

  const Lattice mid = inner.output();
  auto rule = [outer, inner, mid](const History<Scalar>& h, HalfStep t) {
    const HalfStep step = lattice_step(mid);
    const HalfStep hi = floor_to_lattice(t, mid);
    HalfStep lo = hi + step;
    if (outer.memory()) {
      lo = ceil_to_lattice(t - *outer.memory(), mid);
    } else if (auto first = h.first()) {
      lo = ceil_to_lattice(*first, mid);
    }
    Signal<Scalar> inner_out(h.grid(), h.space());
    for (HalfStep s = lo; s <= hi; s += step) inner_out.set(s, inner.evaluate(h, s));
    return outer(History<Scalar>(inner_out, t), t);
  };
  return CausalOperator<Scalar>(outer.name() + " o " + inner.name(), outer.space(), outer.grid(),
                                {inner.input(), outer.output(), memory}, std::move(rule));
}

/// Shift T_s: (T_s f)(t) = f(t + s), offset s <= 0 in half steps. An odd
/// offset moves between the lattices I and J.
template <class Scalar>
CausalOperator<Scalar> shift_operator(const StateSpace<Scalar>& space, TimeGrid grid, Lattice input,
                                      HalfStep offset) {
  if (offset > 0) throw InvalidInput("shift_operator: positive offsets read the future");
  auto rule = [offset](const History<Scalar>& h, HalfStep t) { return h.at(t + offset); };
  return CausalOperator<Scalar>("T(" + std::to_string(offset) + "/2)", space, grid,
                                {input, shifted(input, offset), -offset}, std::move(rule));
}

/// Discrete convolution: F f(t) = tau * sum_j K_j f(t - j * step).
template <class Scalar>
CausalOperator<Scalar> convolution_operator(const StateSpace<Scalar>& space, TimeGrid grid,
                                            std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> kernel,
                                            Lattice lattice = Lattice::I, std::string name = "convolution") {
  if (kernel.empty()) throw InvalidInput("convolution_operator: empty kernel");
  for (const auto& k : kernel)
    if (k.rows() != space.dim() || k.cols() != space.dim())
      throw InvalidInput("convolution_operator: kernel matrix does not match the state dimension");
  const HalfStep step = lattice_step(lattice);
  const HalfStep depth = static_cast<HalfStep>(kernel.size() - 1) * step;
  const Scalar tau(grid.tau());
  auto rule = [kernel = std::move(kernel), step, tau](const History<Scalar>& h, HalfStep t) {
    typename StateSpace<Scalar>::Vector acc = h.zero();
    for (std::size_t j = 0; j < kernel.size(); ++j) acc.noalias() += kernel[j] * h.at(t - HalfStep(j) * step);
    return typename StateSpace<Scalar>::Vector(tau * acc);
  };
  return CausalOperator<Scalar>(std::move(name), space, grid, {lattice, lattice, depth}, std::move(rule));
}

/// lambda * T_{-tau}: a one-step delay with gain.
template <class Scalar>
CausalOperator<Scalar> scaled_delay(const StateSpace<Scalar>& space, TimeGrid grid, Scalar lambda,
                                    Lattice lattice = Lattice::I) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Matrix id = Matrix::Identity(space.dim(), space.dim());
  std::vector<Matrix> kernel{Matrix::Zero(space.dim(), space.dim()), id * (lambda / Scalar(grid.tau()))};
  std::ostringstream name;
  name << "scaled_delay(" << lambda << ")";
  return convolution_operator<Scalar>(space, grid, std::move(kernel), lattice, name.str());
}

template <class Scalar>
CausalOperator<Scalar> delay_operator(const StateSpace<Scalar>& space, TimeGrid grid, Lattice lattice = Lattice::I) {
  return scaled_delay<Scalar>(space, grid, Scalar(1), lattice).renamed("delay");
}

template <class Scalar>
CausalOperator<Scalar> zero_operator(const StateSpace<Scalar>& space, TimeGrid grid, Lattice lattice = Lattice::I) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  return convolution_operator<Scalar>(space, grid, {Matrix::Zero(space.dim(), space.dim())}, lattice, "zero");
}

template <class Scalar>
CausalOperator<Scalar> identity_operator(const StateSpace<Scalar>& space, TimeGrid grid,
                                         Lattice lattice = Lattice::I) {
  return shift_operator<Scalar>(space, grid, lattice, 0).renamed("identity");
}

/// Memoryless rule applied to the current sample.
template <class Scalar, class Fn>
CausalOperator<Scalar> pointwise_operator(std::string name, const StateSpace<Scalar>& space, TimeGrid grid,
                                          Lattice lattice, Fn fn) {
  auto rule = [fn = std::move(fn)](const History<Scalar>& h, HalfStep t) {
    return typename StateSpace<Scalar>::Vector(fn(h.at(t), t));
  };
  return CausalOperator<Scalar>(std::move(name), space, grid, {lattice, lattice, HalfStep(0)}, std::move(rule));
}

/// Anti-causal fixture: F f(t) = f(t + step). Only useful as a negative
/// control for check_causality.
template <class Scalar>
CausalOperator<Scalar> lookahead_operator(const StateSpace<Scalar>& space, TimeGrid grid,
                                          Lattice lattice = Lattice::I) {
  const HalfStep step = lattice_step(lattice);
  auto rule = [step](const History<Scalar>& h, HalfStep t) { return h.at(t + step); };
  return CausalOperator<Scalar>("lookahead", space, grid, {lattice, lattice, std::nullopt}, std::move(rule));
}

}  // namespace dsc
