#include <dsc/models.hpp>

#include "zoo_data.hpp"

#include <cmath>
#include <sstream>

namespace dsc::models {

namespace {

constexpr double kContractionSlack = 1e-12;

double spectral_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

Matrix parse_matrix(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ConfigError(field, "expected a nonempty list of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) throw ConfigError(field, "expected rows as lists of numbers");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ConfigError(field + "[" + std::to_string(r) + "]", "row length differs from the first row");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& x = row[static_cast<std::size_t>(c)];
      if (!x.is_number()) throw ConfigError(field + "[" + std::to_string(r) + "][" + std::to_string(c) + "]", "not a number");
      m(r, c) = x.get<double>();
    }
  }
  return m;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class T>
T required(const nlohmann::json& j, const char* key, const std::string& prefix) {
  const std::string field = prefix.empty() ? key : prefix + "." + key;
  if (!j.contains(key)) throw ConfigError(field, "missing");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(field, "has the wrong type");
  }
}

template <class T>
T optional_field(const nlohmann::json& j, const char* key, T fallback, const std::string& prefix) {
  if (!j.contains(key)) return fallback;
  return required<T>(j, key, prefix);
}

}  // namespace

Eigen::Matrix4d shunt_matrix() {
  Eigen::Matrix4d s = Eigen::Matrix4d::Constant(0.5);
  s.diagonal().setConstant(-0.5);
  return s;
}

Vector shunt_scatter(const Vector& incident) {
  if (incident.size() != 4) throw InvalidInput("shunt_scatter: expected 4 port values, got " + std::to_string(incident.size()));
  return shunt_matrix() * incident;
}

ShuntNodeMesh::ShuntNodeMesh(int width, int height, double rho, Eigen::Matrix4d scattering, bool allow_active)
    : width_(width), height_(height), rho_(rho), scattering_(scattering), allow_active_(allow_active) {
  if (width < 1 || height < 1) throw InvalidInput("ShuntNodeMesh: width and height must be >= 1");
  if (!std::isfinite(rho) || !scattering.allFinite()) throw InvalidInput("ShuntNodeMesh: non-finite parameters");
  if (!allow_active) {
    if (std::abs(rho) > 1.0) throw InvalidInput("ShuntNodeMesh: |rho| > 1 requires allow_active");
    if (spectral_norm(scattering) > 1.0 + kContractionSlack)
      throw InvalidInput("ShuntNodeMesh: scattering matrix is not a contraction");
  }
}

Vector ShuntNodeMesh::connect(const Vector& o) const {
  Vector in(dim());
  // horizontal edges
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      in(index(Port::east, x, y)) =
          x + 1 < width_ ? o(index(Port::west, x + 1, y)) : rho_ * o(index(Port::east, x, y));
      in(index(Port::west, x, y)) = x > 0 ? o(index(Port::east, x - 1, y)) : rho_ * o(index(Port::west, x, y));
    }
  }
  // vertical edges
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      in(index(Port::north, x, y)) =
          y + 1 < height_ ? o(index(Port::south, x, y + 1)) : rho_ * o(index(Port::north, x, y));
      in(index(Port::south, x, y)) = y > 0 ? o(index(Port::north, x, y - 1)) : rho_ * o(index(Port::south, x, y));
    }
  }
  return in;
}

Vector ShuntNodeMesh::reflect(const Vector& in) const {
  const Eigen::Index n = nodes();
  Vector out(dim());
  for (Eigen::Index node = 0; node < n; ++node) {
    const Eigen::Vector4d v(in(node), in(n + node), in(2 * n + node), in(3 * n + node));
    const Eigen::Vector4d r = scattering_ * v;
    for (int p = 0; p < 4; ++p) out(p * n + node) = r(p);
  }
  return out;
}

Maps build_mesh_maps(const ShuntNodeMesh& mesh, TimeGrid grid) {
  const StateSpace<double> space(mesh.dim());
  auto c = pointwise_operator<double>("mesh_connect", space, grid, Lattice::I,
                                      [mesh](const Vector& o, HalfStep) { return mesh.connect(o); });
  auto r = pointwise_operator<double>("mesh_scatter", space, grid, Lattice::J,
                                      [mesh](const Vector& i, HalfStep) { return mesh.reflect(i); });
  return Maps(std::move(c), std::move(r));
}

DiffusionNode::DiffusionNode(Matrix d) : d_(std::move(d)) {
  if (d_.rows() < 1 || d_.rows() != d_.cols()) throw InvalidInput("DiffusionNode: matrix must be square");
  if (!d_.allFinite() || (d_.array() < 0.0).any()) throw InvalidInput("DiffusionNode: entries must be nonnegative");
  if ((d_.colwise().sum().array() > 1.0 + kContractionSlack).any())
    throw InvalidInput("DiffusionNode: column sums must not exceed 1");
}

Maps diffusion_maps(const DiffusionNode& node, TimeGrid grid) {
  const StateSpace<double> space(node.ports());
  auto c = identity_operator<double>(space, grid, Lattice::I).renamed("route");
  Matrix d = node.matrix();
  auto r = pointwise_operator<double>("diffuse", space, grid, Lattice::J,
                                      [d](const Vector& i, HalfStep) { return Vector(d * i); });
  return Maps(std::move(c), std::move(r));
}

SaturatingScatterer::SaturatingScatterer(Matrix m, double threshold) : m_(std::move(m)), s_(threshold) {
  if (m_.rows() < 1 || m_.rows() != m_.cols()) throw InvalidInput("SaturatingScatterer: matrix must be square");
  if (!(threshold > 0.0) || !std::isfinite(threshold)) throw InvalidInput("SaturatingScatterer: threshold must be > 0");
  if (!m_.allFinite() || spectral_norm(m_) > 1.0 + kContractionSlack)
    throw InvalidInput("SaturatingScatterer: inner matrix must have operator norm <= 1");
}

Vector SaturatingScatterer::scatter(const Vector& z) const {
  const double s = s_;
  return (m_ * z).unaryExpr([s](double x) { return clip(x, s); });
}

Maps saturating_maps(const SaturatingScatterer& s, TimeGrid grid) {
  const StateSpace<double> space(s.matrix().rows());
  auto c = identity_operator<double>(space, grid, Lattice::I).renamed("route");
  auto r = pointwise_operator<double>("saturate", space, grid, Lattice::J,
                                      [s](const Vector& i, HalfStep) { return s.scatter(i); });
  return Maps(std::move(c), std::move(r));
}

Maps identity_maps(Eigen::Index dim, TimeGrid grid) {
  const StateSpace<double> space(dim);
  return Maps(identity_operator<double>(space, grid, Lattice::I).renamed("route"),
              identity_operator<double>(space, grid, Lattice::J).renamed("pass"));
}

DelimitingFunctional<double> make_functional(const StateSpace<double>& space, const AlphaSpec& spec) {
  const auto base = [&]() -> DelimitingFunctional<double> {
    switch (spec.kind) {
      case AlphaKind::norm: return DelimitingFunctional<double>::norm(space);
      case AlphaKind::norm_power: return DelimitingFunctional<double>::norm_power(space, spec.p);
      case AlphaKind::quadratic_form:
        return DelimitingFunctional<double>::quadratic_form(
            space, spec.weights.size() ? spec.weights : Vector::Ones(space.dim()));
      case AlphaKind::linear_sum: return DelimitingFunctional<double>::linear_sum(space);
      case AlphaKind::custom: break;
    }
    throw InvalidInput("make_functional: custom functionals cannot be built from a config");
  }();
  DelimitingConstants c = base.constants();
  if (spec.a) c.a = *spec.a;
  if (spec.b) c.b = *spec.b;
  if (spec.c) c.c = *spec.c;
  return base.with_constants(c);
}

AlphaSpec parse_alpha(const nlohmann::json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  AlphaSpec spec;
  const auto kind = required<std::string>(j, "kind", field);
  if (kind == "norm") {
    spec.kind = AlphaKind::norm;
  } else if (kind == "norm_power") {
    spec.kind = AlphaKind::norm_power;
    spec.p = required<double>(j, "p", field);
    if (!(spec.p > 0.0) || !std::isfinite(spec.p)) throw ConfigError(field + ".p", "must be > 0");
  } else if (kind == "quadratic_form") {
    spec.kind = AlphaKind::quadratic_form;
    if (j.contains("weights")) {
      const auto w = required<std::vector<double>>(j, "weights", field);
      spec.weights = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
      if ((spec.weights.array() <= 0.0).any()) throw ConfigError(field + ".weights", "must be positive");
    }
  } else if (kind == "linear_sum") {
    spec.kind = AlphaKind::linear_sum;
  } else {
    throw ConfigError(field + ".kind", "unknown functional '" + kind + "'");
  }
  for (const char* key : {"a", "b", "c"}) {
    if (!j.contains(key)) continue;
    const double v = required<double>(j, key, field);
    if (key[0] == 'a') spec.a = v;
    else if (key[0] == 'b') spec.b = v;
    else spec.c = v;
  }
  DelimitingConstants probe{spec.a.value_or(0.0), spec.b.value_or(1.0), spec.c.value_or(1.0)};
  try {
    probe.validate();
  } catch (const InvalidInput& ex) {
    throw ConfigError(field, ex.what());
  }
  for (const auto& [key, value] : j.items())
    if (key != "kind" && key != "p" && key != "weights" && key != "a" && key != "b" && key != "c")
      throw ConfigError(field + "." + key, "unknown key");
  return spec;
}

nlohmann::json alpha_to_json(const AlphaSpec& spec) {
  nlohmann::json j;
  j["kind"] = alpha_kind_name(spec.kind);
  if (spec.kind == AlphaKind::norm_power) j["p"] = spec.p;
  if (spec.kind == AlphaKind::quadratic_form && spec.weights.size())
    j["weights"] = std::vector<double>(spec.weights.data(), spec.weights.data() + spec.weights.size());
  if (spec.a) j["a"] = *spec.a;
  if (spec.b) j["b"] = *spec.b;
  if (spec.c) j["c"] = *spec.c;
  return j;
}

Model::Model(std::string name, TimeGrid grid, Params params, AlphaSpec alpha)
    : name_(std::move(name)), grid_(grid), params_(std::move(params)), alpha_(std::move(alpha)) {}

std::string Model::kind() const {
  struct V {
    std::string operator()(const IdentityRouting&) const { return "identity_routing"; }
    std::string operator()(const ShuntNodeMesh&) const { return "shunt_mesh"; }
    std::string operator()(const DiffusionNode&) const { return "diffusion"; }
    std::string operator()(const SaturatingScatterer&) const { return "saturating"; }
  };
  return std::visit(V{}, params_);
}

Eigen::Index Model::dim() const {
  struct V {
    Eigen::Index operator()(const IdentityRouting& p) const { return p.dim; }
    Eigen::Index operator()(const ShuntNodeMesh& p) const { return p.dim(); }
    Eigen::Index operator()(const DiffusionNode& p) const { return p.ports(); }
    Eigen::Index operator()(const SaturatingScatterer& p) const { return p.matrix().rows(); }
  };
  return std::visit(V{}, params_);
}

Maps Model::maps() const {
  const TimeGrid g = grid_;
  struct V {
    TimeGrid g;
    Maps operator()(const IdentityRouting& p) const { return identity_maps(p.dim, g); }
    Maps operator()(const ShuntNodeMesh& p) const { return build_mesh_maps(p, g); }
    Maps operator()(const DiffusionNode& p) const { return diffusion_maps(p, g); }
    Maps operator()(const SaturatingScatterer& p) const { return saturating_maps(p, g); }
  };
  return std::visit(V{g}, params_);
}

Eigen::Index Model::default_impulse_index() const {
  if (const auto* mesh = std::get_if<ShuntNodeMesh>(&params_))
    return mesh->index(Port::east, mesh->width() / 2, mesh->height() / 2);
  return 0;
}

bool Model::nonnegative_states() const { return std::holds_alternative<DiffusionNode>(params_); }

nlohmann::json Model::to_json() const {
  nlohmann::json j;
  j["name"] = name_;
  j["kind"] = kind();
  j["tau"] = grid_.tau();
  if (const auto* p = std::get_if<IdentityRouting>(&params_)) {
    j["dim"] = p->dim;
  } else if (const auto* mesh = std::get_if<ShuntNodeMesh>(&params_)) {
    j["width"] = mesh->width();
    j["height"] = mesh->height();
    j["rho"] = mesh->rho();
    j["scattering"] = matrix_to_json(mesh->scattering());
  } else if (const auto* d = std::get_if<DiffusionNode>(&params_)) {
    j["matrix"] = matrix_to_json(d->matrix());
  } else if (const auto* s = std::get_if<SaturatingScatterer>(&params_)) {
    j["matrix"] = matrix_to_json(s->matrix());
    j["threshold"] = s->threshold();
  }
  j["alpha"] = alpha_to_json(alpha_);
  return j;
}

Model model_from_json(const nlohmann::json& j, bool allow_active) {
  if (!j.is_object()) throw ConfigError("model", "expected an object");
  const auto name = optional_field<std::string>(j, "name", "custom", "model");
  const auto kind = required<std::string>(j, "kind", "model");
  const double tau = optional_field<double>(j, "tau", 1.0, "model");
  if (!(tau > 0.0)) throw ConfigError("model.tau", "must be > 0");
  const TimeGrid grid(tau);
  if (!j.contains("alpha")) throw ConfigError("model.alpha", "missing");
  const AlphaSpec alpha = parse_alpha(j.at("alpha"), "model.alpha");

  try {
    if (kind == "identity_routing") {
      const auto dim = required<int>(j, "dim", "model");
      if (dim < 1) throw ConfigError("model.dim", "must be >= 1");
      return Model(name, grid, IdentityRouting{dim}, alpha);
    }
    if (kind == "shunt_mesh") {
      const auto w = required<int>(j, "width", "model");
      const auto h = required<int>(j, "height", "model");
      if (w < 1) throw ConfigError("model.width", "must be >= 1");
      if (h < 1) throw ConfigError("model.height", "must be >= 1");
      const double rho = required<double>(j, "rho", "model");
      if (std::abs(rho) > 1.0 && !allow_active)
        throw ConfigError("model.rho", "|rho| > 1 is an active boundary; pass --allow-active for negative controls");
      Eigen::Matrix4d s = shunt_matrix();
      if (j.contains("scattering")) {
        const Matrix m = parse_matrix(j.at("scattering"), "model.scattering");
        if (m.rows() != 4 || m.cols() != 4) throw ConfigError("model.scattering", "must be 4x4");
        s = m;
      }
      return Model(name, grid, ShuntNodeMesh(w, h, rho, s, allow_active), alpha);
    }
    if (kind == "diffusion") {
      if (!j.contains("matrix")) throw ConfigError("model.matrix", "missing");
      return Model(name, grid, DiffusionNode(parse_matrix(j.at("matrix"), "model.matrix")), alpha);
    }
    if (kind == "saturating") {
      if (!j.contains("matrix")) throw ConfigError("model.matrix", "missing");
      const double s = required<double>(j, "threshold", "model");
      return Model(name, grid, SaturatingScatterer(parse_matrix(j.at("matrix"), "model.matrix"), s), alpha);
    }
  } catch (const InvalidInput& ex) {
    throw ConfigError("model", ex.what());
  }
  throw ConfigError("model.kind", "unknown model kind '" + kind + "'");
}

const nlohmann::json& model_zoo_json() {
  static const nlohmann::json zoo = nlohmann::json::parse(kModelZooJson);
  return zoo;
}

const std::vector<Model>& model_zoo() {
  static const std::vector<Model> zoo = [] {
    std::vector<Model> out;
    for (const auto& m : model_zoo_json().at("models")) out.push_back(model_from_json(m));
    return out;
  }();
  return zoo;
}

const nlohmann::json& zoo_config(std::string_view name) {
  for (const auto& m : model_zoo_json().at("models"))
    if (m.at("name").get<std::string>() == name) return m;
  std::ostringstream known;
  for (const auto& m : model_zoo_json().at("models")) known << ' ' << m.at("name").get<std::string>();
  throw ConfigError("model", "unknown model '" + std::string(name) + "' (known:" + known.str() + ")");
}

std::vector<std::string> operator_names() {
  std::vector<std::string> names{"zero",          "identity",       "delay",    "scaled-delay",
                                 "average",       "rotation-delay", "lookahead"};
  for (const auto& m : model_zoo_json().at("models")) names.push_back("composed:" + m.at("name").get<std::string>());
  return names;
}

CausalOperator<double> named_operator(std::string_view name, const StateSpace<double>& space, TimeGrid grid,
                                      double lambda) {
  const Eigen::Index n = space.dim();
  if (name == "zero") return zero_operator<double>(space, grid);
  if (name == "identity") return identity_operator<double>(space, grid);
  if (name == "delay") return delay_operator<double>(space, grid);
  if (name == "scaled-delay") return scaled_delay<double>(space, grid, lambda);
  if (name == "lookahead") return lookahead_operator<double>(space, grid);
  if (name == "average") {
    const Matrix half = Matrix::Identity(n, n) * (0.5 / grid.tau());
    return convolution_operator<double>(space, grid, {Matrix::Zero(n, n), half, half}, Lattice::I, "average");
  }
  if (name == "rotation-delay") {
    if (n < 2) throw InvalidInput("rotation-delay needs at least 2 components");
    Matrix r = Matrix::Identity(n, n);
    r(0, 0) = 0.8;
    r(0, 1) = -0.6;
    r(1, 0) = 0.6;
    r(1, 1) = 0.8;
    return convolution_operator<double>(space, grid, {Matrix::Zero(n, n), r / grid.tau()}, Lattice::I,
                                        "rotation_delay");
  }
  if (name.substr(0, 9) == "composed:") {
    Model m = model_from_json(zoo_config(name.substr(9)));
    return composed_step_operator(m.maps()).renamed(std::string(name));
  }
  std::string known;
  for (const auto& k : operator_names()) known += " " + k;
  throw ConfigError("operator", "unknown operator '" + std::string(name) + "' (known:" + known + ")");
}

}  // namespace dsc::models
