#pragma once

// CSV traces and JSON summaries. Numbers are written with 17 significant
// digits so a read-back reproduces every double exactly.

#include <dsc/check.hpp>
#include <dsc/dsc.hpp>
#include <dsc/iteration.hpp>

#include "json.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace dsc::io {

std::string format_number(double x);

/// `k,t,c0,...,c{n-1}`, one row per stored sample in index order.
void write_signal_csv(std::ostream& os, const Signal<double>& s);
/// Inverse of write_signal_csv. Errors name the offending line.
Signal<double> read_signal_csv(std::istream& is, TimeGrid grid, const StateSpace<double>& space);

/// {tau, n, norm}.
nlohmann::json signal_sidecar(const Signal<double>& s);

/// `k,t,channel,parity,c0,...`: h1 rows as `in`, h2 rows as `out`.
void write_trace_csv(std::ostream& os, const DscTrace<double>& tr);

/// `t,norm_g,bound,margin`.
void write_stability_csv(std::ostream& os, const StabilityReport& r);
nlohmann::json stability_summary(const StabilityReport& r);

/// `k,t,energy`.
void write_energy_csv(std::ostream& os, const std::vector<std::pair<HalfStep, double>>& energy, TimeGrid grid);

/// Verdict, trials, tolerance, seed; on failure the witness with its
/// signals embedded as Signal CSV text.
nlohmann::json check_report_json(const CheckReport<double>& r);

/// Writes `text` to `path`, creating parent directories.
void write_file(const std::string& path, const std::string& text);

}  // namespace dsc::io
