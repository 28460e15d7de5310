#pragma once

// Concrete scattering instances: the 2D TLM shunt-node mesh, a
// sub-stochastic diffusion node, a saturating scatterer, and plain identity
// routing. All models use double precision.

#include <dsc/dsc.hpp>
#include <dsc/functional.hpp>

#include "json.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dsc::models {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Maps = ScatteringMapPair<double>;

/// Configuration error with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error("config field '" + field + "': " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// S = 1/2 [[-1,1,1,1],[1,-1,1,1],[1,1,-1,1],[1,1,1,-1]].
Eigen::Matrix4d shunt_matrix();

/// S * incident for a single node; rejects anything but 4 components.
Vector shunt_scatter(const Vector& incident);

enum class Port : int { east = 0, west = 1, north = 2, south = 3 };

class ShuntNodeMesh {
 public:
  ShuntNodeMesh(int width, int height, double rho, Eigen::Matrix4d scattering = shunt_matrix(),
                bool allow_active = false);

  int width() const { return width_; }
  int height() const { return height_; }
  double rho() const { return rho_; }
  bool allow_active() const { return allow_active_; }
  const Eigen::Matrix4d& scattering() const { return scattering_; }
  Eigen::Index nodes() const { return Eigen::Index(width_) * height_; }
  Eigen::Index dim() const { return 4 * nodes(); }

  /// Port-major (structure of arrays) layout.
  Eigen::Index index(Port p, int x, int y) const {
    return Eigen::Index(static_cast<int>(p)) * nodes() + Eigen::Index(y) * width_ + x;
  }

  /// Interface exchange: outgoing pulses to neighbour incident ports, rho at
  /// the outer boundary.
  Vector connect(const Vector& outgoing) const;
  /// Per-node scattering S.
  Vector reflect(const Vector& incident) const;

 private:
  int width_;
  int height_;
  double rho_;
  Eigen::Matrix4d scattering_;
  bool allow_active_;
};

Maps build_mesh_maps(const ShuntNodeMesh& mesh, TimeGrid grid = TimeGrid{});

/// Nonnegative scattering with column sums <= 1.
class DiffusionNode {
 public:
  explicit DiffusionNode(Matrix d);
  const Matrix& matrix() const { return d_; }
  Eigen::Index ports() const { return d_.rows(); }

 private:
  Matrix d_;
};

Maps diffusion_maps(const DiffusionNode& node, TimeGrid grid = TimeGrid{});

/// clip(M z) componentwise at +-threshold, with ||M||_2 <= 1.
class SaturatingScatterer {
 public:
  SaturatingScatterer(Matrix m, double threshold);
  const Matrix& matrix() const { return m_; }
  double threshold() const { return s_; }
  Vector scatter(const Vector& z) const;

 private:
  Matrix m_;
  double s_;
};

inline double clip(double x, double s) { return std::copysign(std::min(std::abs(x), s), x); }

Maps saturating_maps(const SaturatingScatterer& s, TimeGrid grid = TimeGrid{});

Maps identity_maps(Eigen::Index dim, TimeGrid grid = TimeGrid{});

/// Functional kind plus optional overrides of its default witness constants.
struct AlphaSpec {
  AlphaKind kind = AlphaKind::norm;
  double p = 1.0;
  Vector weights;
  std::optional<double> a;
  std::optional<double> b;
  std::optional<double> c;
};

DelimitingFunctional<double> make_functional(const StateSpace<double>& space, const AlphaSpec& spec);
AlphaSpec parse_alpha(const nlohmann::json& j, const std::string& field = "alpha");
nlohmann::json alpha_to_json(const AlphaSpec& spec);

struct IdentityRouting {
  Eigen::Index dim = 1;
};

class Model {
 public:
  using Params = std::variant<IdentityRouting, ShuntNodeMesh, DiffusionNode, SaturatingScatterer>;

  Model(std::string name, TimeGrid grid, Params params, AlphaSpec alpha);

  const std::string& name() const { return name_; }
  std::string kind() const;
  const TimeGrid& grid() const { return grid_; }
  const Params& params() const { return params_; }
  const AlphaSpec& alpha_spec() const { return alpha_; }

  StateSpace<double> space() const { return StateSpace<double>(dim()); }
  Eigen::Index dim() const;
  Maps maps() const;
  DelimitingFunctional<double> functional() const { return make_functional(space(), alpha_); }
  /// Centre node, east port for meshes; component 0 otherwise.
  Eigen::Index default_impulse_index() const;
  /// Whether the model's functional is meant for nonnegative states.
  bool nonnegative_states() const;

  nlohmann::json to_json() const;

 private:
  std::string name_;
  TimeGrid grid_;
  Params params_;
  AlphaSpec alpha_;
};

/// Parses a model config: kind, dimensions, rho, row-major matrices, alpha.
/// `allow_active` admits |rho| > 1 and non-contractive S for negative controls.
Model model_from_json(const nlohmann::json& j, bool allow_active = false);

/// Models bundled in data/model_zoo.json.
const std::vector<Model>& model_zoo();
const nlohmann::json& model_zoo_json();
/// Zoo config by name; throws ConfigError when unknown.
const nlohmann::json& zoo_config(std::string_view name);

/// Full-step operators on I by name: zero, identity, delay, scaled-delay
/// (gain `lambda`), average, rotation-delay, lookahead, and composed:MODEL
/// (the composed step operator of a zoo model, which fixes its own space).
CausalOperator<double> named_operator(std::string_view name, const StateSpace<double>& space, TimeGrid grid,
                                      double lambda = 1.0);
std::vector<std::string> operator_names();

}  // namespace dsc::models
