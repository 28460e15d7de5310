#include <dsc/io.hpp>

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace dsc::io {

namespace {

void write_header(std::ostream& os, const char* prefix, Eigen::Index dim) {
  os << prefix;
  for (Eigen::Index i = 0; i < dim; ++i) os << ",c" << i;
  os << '\n';
}

void write_components(std::ostream& os, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ',' << format_number(v(i));
}

std::string signal_text(const Signal<double>& s) {
  std::ostringstream os;
  write_signal_csv(os, s);
  return os.str();
}

nlohmann::json number_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

std::string format_number(double x) { return fmt::format("{:.17g}", x); }

void write_signal_csv(std::ostream& os, const Signal<double>& s) {
  write_header(os, "k,t", s.space().dim());
  for (const auto& [k, v] : s) {
    os << k << ',' << format_number(s.grid().time(k));
    write_components(os, v);
    os << '\n';
  }
}

Signal<double> read_signal_csv(std::istream& is, TimeGrid grid, const StateSpace<double>& space) {
  Signal<double> s(grid, space);
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&line_no](const std::string& msg) {
    throw InvalidInput("signal CSV line " + std::to_string(line_no) + ": " + msg);
  };
  if (!std::getline(is, line)) throw InvalidInput("signal CSV: empty input");
  ++line_no;
  {
    std::istringstream header(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(header, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2 || cells[0] != "k" || cells[1] != "t") fail("header must start with k,t");
    if (static_cast<Eigen::Index>(cells.size()) - 2 != space.dim())
      fail("expected " + std::to_string(space.dim()) + " components, header has " + std::to_string(cells.size() - 2));
  }
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (static_cast<Eigen::Index>(cells.size()) != space.dim() + 2)
      fail("wrong number of columns (" + std::to_string(cells.size()) + ")");
    HalfStep k = 0;
    Eigen::VectorXd v(space.dim());
    {
      const auto& c = cells[0];
      const auto [end, ec] = std::from_chars(c.data(), c.data() + c.size(), k);
      if (ec != std::errc{} || end != c.data() + c.size()) fail("bad half-step index '" + c + "'");
    }
    for (Eigen::Index i = 0; i < space.dim(); ++i) {
      const auto& c = cells[static_cast<std::size_t>(i) + 2];
      double x = 0.0;
      const auto [end, ec] = std::from_chars(c.data(), c.data() + c.size(), x);
      if ((ec != std::errc{} && ec != std::errc::result_out_of_range) || end != c.data() + c.size() || c.empty())
        fail("bad number '" + c + "'");
      if (ec == std::errc::result_out_of_range) x = std::strtod(c.c_str(), nullptr);  // subnormal or overflow
      if (!std::isfinite(x)) fail("non-finite number '" + c + "'");
      v(i) = x;
    }
    if (s.contains(k)) fail("duplicate half-step index " + std::to_string(k));
    s.set(k, v);
  }
  return s;
}

nlohmann::json signal_sidecar(const Signal<double>& s) {
  nlohmann::json j;
  j["tau"] = s.grid().tau();
  j["n"] = s.space().dim();
  j["norm"] = norm_name(s.space().kind());
  return j;
}

void write_trace_csv(std::ostream& os, const DscTrace<double>& tr) {
  write_header(os, "k,t,channel,parity", tr.h1.space().dim());
  for (HalfStep k = 0; k <= tr.half_steps; ++k) {
    const char* parity = on_lattice(k, Lattice::I) ? "I" : "J";
    const std::string t = format_number(tr.grid().time(k));
    os << k << ',' << t << ",in," << parity;
    write_components(os, tr.h1.at(k));
    os << '\n' << k << ',' << t << ",out," << parity;
    write_components(os, tr.h2.at(k));
    os << '\n';
  }
}

void write_stability_csv(std::ostream& os, const StabilityReport& r) {
  os << "t,norm_g,bound,margin\n";
  for (const auto& row : r.rows)
    os << format_number(row.t) << ',' << format_number(row.norm_g) << ',' << format_number(row.bound) << ','
       << format_number(row.margin) << '\n';
}

nlohmann::json stability_summary(const StabilityReport& r) {
  nlohmann::json j;
  j["verdict"] = verdict_name(r.verdict);
  j["constants"] = {{"a", r.constants.a}, {"b", r.constants.b}, {"c", r.constants.c}};
  j["N"] = r.support_steps;
  j["tau"] = r.tau;
  j["bound"] = number_or_null(r.bound);
  j["sup_norm"] = number_or_null(r.sup_norm);
  j["rows"] = r.rows.size();
  j["tolerance"] = {{"rel", r.tolerance.rel}, {"abs", r.tolerance.abs}};
  if (r.first_crossing) {
    j["first_crossing"] = {{"k", *r.first_crossing}, {"t", static_cast<double>(*r.first_crossing) * 0.5 * r.tau}};
  } else {
    j["first_crossing"] = nullptr;
  }
  return j;
}

void write_energy_csv(std::ostream& os, const std::vector<std::pair<HalfStep, double>>& energy, TimeGrid grid) {
  os << "k,t,energy\n";
  for (const auto& [k, e] : energy) os << k << ',' << format_number(grid.time(k)) << ',' << format_number(e) << '\n';
}

nlohmann::json check_report_json(const CheckReport<double>& r) {
  nlohmann::json j;
  j["check"] = r.check;
  j["subject"] = r.subject;
  j["verdict"] = verdict_name(r.verdict);
  j["trials"] = r.trials;
  j["tolerance"] = {{"rel", r.tolerance.rel}, {"abs", r.tolerance.abs}};
  j["seed"] = r.seed;
  if (r.witness) {
    const auto& w = *r.witness;
    nlohmann::json wj;
    wj["trial"] = w.trial;
    wj["k"] = w.time;
    wj["lhs"] = number_or_null(w.lhs);
    wj["rhs"] = number_or_null(w.rhs);
    wj["margin"] = number_or_null(w.margin);
    wj["detail"] = w.detail;
    if (w.probe) wj["probe_csv"] = signal_text(*w.probe);
    if (w.perturbed) wj["perturbed_csv"] = signal_text(*w.perturbed);
    if (w.sample) wj["sample"] = std::vector<double>(w.sample->data(), w.sample->data() + w.sample->size());
    j["witness"] = std::move(wj);
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

void write_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace dsc::io
