#pragma once

// Dual scattering channel processes: propagating-field pairs, the
// node-boundary map, lifting of connection/reflection rules to causal
// operators, and the paired half-step recursion with its composed full-step
// equivalent.
//
// Half-step bookkeeping: index k is time k*tau/2; the incident strand h1 is
// updated on J -> I transitions and held across I -> J, the outgoing strand
// h2 the other way round:
//
//   t in I:  h(t + tau/2) = ( h1(t),  T F_R T [e + h1](t) )
//   t in J:  h(t + tau/2) = ( T F_C T [h2](t),  h2(t) )
//
// with T = T_{-tau/2}. Read literally, each branch evaluates its conjugated
// operator at t, which lags the new sample by a full step. The equivalent
// full-step recursion for h1 on I is therefore
//
//   h1(t + tau) = F_C T_{-3tau/2} F_R T_{-tau/2} [e + h1](t),
//
// a conjugation by delays only, so it stays causal and passive whenever F_C
// and F_R are.

#include <dsc/iteration.hpp>
#include <dsc/operator.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace dsc {

template <class Scalar>
struct PropagatingField {
  using Vector = typename StateSpace<Scalar>::Vector;
  Vector incident;
  Vector outgoing;
};

/// (z_in, z_out) -> (z_out, z_in).
template <class Scalar>
PropagatingField<Scalar> node_boundary(const PropagatingField<Scalar>& z) {
  return {z.outgoing, z.incident};
}

enum class PairNorm { tilde, sum, max };

/// Norm on P = P_in x P_out. `tilde` is sqrt(|a|^2 + |b|^2); `sum` and `max`
/// are equivalent alternatives.
template <class Scalar>
double pair_norm(const StateSpace<Scalar>& space, const PropagatingField<Scalar>& z,
                 PairNorm kind = PairNorm::tilde) {
  const double a = double(space.norm(z.incident));
  const double b = double(space.norm(z.outgoing));
  switch (kind) {
    case PairNorm::tilde: return std::hypot(a, b);
    case PairNorm::sum: return a + b;
    case PairNorm::max: return std::max(a, b);
  }
  return 0.0;
}

/// Connection rule C (outgoing history on I -> incident value) and reflection
/// rule R (incident history on J -> outgoing value).
template <class Scalar>
struct ScatteringMapPair {
  CausalOperator<Scalar> connection;
  CausalOperator<Scalar> reflection;

  ScatteringMapPair(CausalOperator<Scalar> c, CausalOperator<Scalar> r)
      : connection(std::move(c)), reflection(std::move(r)) {
    if (connection.input() != Lattice::I || connection.output() != Lattice::I)
      throw InvalidInput("ScatteringMapPair: connection must act on the lattice I");
    if (reflection.input() != Lattice::J || reflection.output() != Lattice::J)
      throw InvalidInput("ScatteringMapPair: reflection must act on the lattice J");
    if (!(connection.space() == reflection.space()))
      throw InvalidInput("ScatteringMapPair: connection and reflection use different spaces");
    if (!(connection.grid() == reflection.grid()))
      throw InvalidInput("ScatteringMapPair: connection and reflection use different grids");
  }

  const StateSpace<Scalar>& space() const { return connection.space(); }
  const TimeGrid& grid() const { return connection.grid(); }
};

/// F_C f(t) = nb(C(t, f)): the incident value produced by C is carried back
/// to the common channel space through the node-boundary map.
template <class Scalar>
CausalOperator<Scalar> lift_connection(const CausalOperator<Scalar>& c) {
  auto rule = [c](const History<Scalar>& h, HalfStep t) {
    PropagatingField<Scalar> z{c(h, t), h.zero()};
    return node_boundary(z).outgoing;
  };
  return CausalOperator<Scalar>("F_C[" + c.name() + "]", c.space(), c.grid(), c.shape(), std::move(rule));
}

/// F_R g(t) = nb(R(t, g)).
template <class Scalar>
CausalOperator<Scalar> lift_reflection(const CausalOperator<Scalar>& r) {
  auto rule = [r](const History<Scalar>& h, HalfStep t) {
    PropagatingField<Scalar> z{h.zero(), r(h, t)};
    return node_boundary(z).incident;
  };
  return CausalOperator<Scalar>("F_R[" + r.name() + "]", r.space(), r.grid(), r.shape(), std::move(rule));
}

/// T_{-tau/2} F_R T_{-tau/2}: maps incident signals on I to I.
template <class Scalar>
CausalOperator<Scalar> conjugated_reflection(const ScatteringMapPair<Scalar>& maps) {
  const auto& sp = maps.space();
  const auto& gr = maps.grid();
  return compose(shift_operator<Scalar>(sp, gr, Lattice::J, -1),
                 compose(lift_reflection(maps.reflection), shift_operator<Scalar>(sp, gr, Lattice::I, -1)));
}

/// T_{-tau/2} F_C T_{-tau/2}: maps outgoing signals on J to J.
template <class Scalar>
CausalOperator<Scalar> conjugated_connection(const ScatteringMapPair<Scalar>& maps) {
  const auto& sp = maps.space();
  const auto& gr = maps.grid();
  return compose(shift_operator<Scalar>(sp, gr, Lattice::I, -1),
                 compose(lift_connection(maps.connection), shift_operator<Scalar>(sp, gr, Lattice::J, -1)));
}

/// Full-step operator on I reproducing the h1 strand of run_dsc:
/// F_C o T_{-3tau/2} o F_R o T_{-tau/2}.
template <class Scalar>
CausalOperator<Scalar> composed_step_operator(const ScatteringMapPair<Scalar>& maps) {
  const auto& sp = maps.space();
  const auto& gr = maps.grid();
  return compose(lift_connection(maps.connection),
                 compose(shift_operator<Scalar>(sp, gr, Lattice::J, -3),
                         compose(lift_reflection(maps.reflection), shift_operator<Scalar>(sp, gr, Lattice::I, -1))))
      .renamed("composed[" + maps.connection.name() + ", " + maps.reflection.name() + "]");
}

/// Paired process h = (h1, h2) on H; h1 holds incident, h2 outgoing values.
template <class Scalar>
struct DscTrace {
  Signal<Scalar> h1;
  Signal<Scalar> h2;
  HalfStep half_steps = 0;

  const TimeGrid& grid() const { return h1.grid(); }

  /// h1 restricted to I.
  Signal<Scalar> incident_view() const { return parity_view(h1, Lattice::I); }
  /// h2 restricted to J.
  Signal<Scalar> outgoing_view() const { return parity_view(h2, Lattice::J); }

  static Signal<Scalar> parity_view(const Signal<Scalar>& s, Lattice l) {
    Signal<Scalar> out(s.grid(), s.space());
    for (const auto& [k, v] : s)
      if (on_lattice(k, l)) out.set(k, v);
    return out;
  }
};

/// First half step violating h1(J point) = h1(preceding I point) or
/// h2(I point) = h2(preceding J point), if any.
template <class Scalar>
std::optional<HalfStep> switching_violation(const DscTrace<Scalar>& tr) {
  for (HalfStep k = 1; k <= tr.half_steps; ++k) {
    if (on_lattice(k, Lattice::J) && tr.h1.at(k) != tr.h1.at(k - 1)) return k;
    if (on_lattice(k, Lattice::I) && tr.h2.at(k) != tr.h2.at(k - 1)) return k;
  }
  return std::nullopt;
}

/// A connection or reflection rule threw; carries the half step.
class ScattererError : public std::runtime_error {
 public:
  ScattererError(HalfStep k, const std::string& what)
      : std::runtime_error("scatterer failed at half step " + std::to_string(k) + ": " + what), k_(k) {}
  HalfStep half_step() const { return k_; }

 private:
  HalfStep k_;
};

/// Alternates the two branches for k = 0 .. n_half_steps - 1, producing h on
/// [0, n_half_steps]. The excitation enters only the incident channel, as
/// the argument e + h1 of the reflection branch.
template <class Scalar>
DscTrace<Scalar> run_dsc(const ScatteringMapPair<Scalar>& maps, const Excitation<Scalar>& e, HalfStep n_half_steps) {
  if (!(maps.space() == e.space()) || !(maps.grid() == e.grid()))
    throw InvalidInput("run_dsc: excitation does not match the scattering maps");
  if (n_half_steps < 1) throw InvalidInput("run_dsc: n_half_steps must be >= 1");

  const auto reflect = conjugated_reflection(maps);
  const auto connect = conjugated_connection(maps);
  const auto zero = e.space().zero();

  DscTrace<Scalar> tr{Signal<Scalar>(e.grid(), e.space()), Signal<Scalar>(e.grid(), e.space()), n_half_steps};
  Signal<Scalar> incident(e.grid(), e.space());  // e + h1 on I
  Signal<Scalar> outgoing(e.grid(), e.space());  // h2 on J
  tr.h1.set(0, zero);
  tr.h2.set(0, zero);

  for (HalfStep k = 0; k < n_half_steps; ++k) {
    try {
      if (on_lattice(k, Lattice::I)) {
        incident.set(k, e.signal().at(k) + tr.h1.at(k));
        tr.h1.set(k + 1, tr.h1.at(k));
        tr.h2.set(k + 1, reflect.evaluate(incident, k));
      } else {
        outgoing.set(k, tr.h2.at(k));
        tr.h1.set(k + 1, connect.evaluate(outgoing, k));
        tr.h2.set(k + 1, tr.h2.at(k));
      }
    } catch (const ScattererError&) {
      throw;
    } catch (const std::exception& ex) {
      throw ScattererError(k, ex.what());
    }
  }
  return tr;
}

/// h2 rebuilt from h1: on J, h2 = T_{-tau} F_R T_{-tau/2} [e + h1]; held on I.
template <class Scalar>
Signal<Scalar> recover_h2(const ScatteringMapPair<Scalar>& maps, const Excitation<Scalar>& e,
                          const Signal<Scalar>& h1) {
  const auto reflect = conjugated_reflection(maps);
  Signal<Scalar> incident(e.grid(), e.space());
  for (const auto& [k, v] : h1)
    if (on_lattice(k, Lattice::I)) incident.set(k, v);
  incident = incident + e.signal();

  Signal<Scalar> h2(e.grid(), e.space());
  h2.set(0, e.space().zero());
  const HalfStep last = h1.last().value_or(0);
  for (HalfStep k = 1; k <= last; ++k) {
    if (on_lattice(k, Lattice::J)) h2.set(k, reflect.evaluate(incident, k - 1));
    else h2.set(k, h2.at(k - 1));
  }
  return h2;
}

/// The h1 strand of a trace viewed as the iterated process of the composed
/// full-step operator.
template <class Scalar>
IteratedProcess<Scalar> as_iterated(const DscTrace<Scalar>& tr, const ScatteringMapPair<Scalar>& maps,
                                    const Excitation<Scalar>& e) {
  return IteratedProcess<Scalar>{tr.incident_view(), composed_step_operator(maps), e,
                                 static_cast<int>(tr.half_steps / 2)};
}

}  // namespace dsc
