#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dsuedhi/dnl.hpp"
#include "dsuedhi/equilibrium.hpp"
#include "dsuedhi/metrics.hpp"
#include "dsuedhi/network.hpp"
#include "dsuedhi/paths.hpp"

namespace dsuedhi::io {

/// Shortest text that parses back to exactly `v`.
std::string format_double(double v);
/// Whole-string parse; throws ParseError (with `line`) on trailing garbage.
double parse_double(std::string_view s, std::size_t line, std::string_view field);
std::size_t parse_index(std::string_view s, std::size_t line, std::string_view field);

/// Comma-separated rows. Blank lines and lines starting with '#' are
/// skipped; fields are trimmed. The first remaining row is the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // 1-based source line of each row
};

/// Every row must have as many fields as the header, otherwise a ParseError
/// "line N: expected K fields" is raised.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

// Inputs.

/// Columns: id, tail, head, length_m, free_speed_mps, backward_wave_speed_mps,
/// capacity_veh_per_s, jam_density_veh_per_m.
std::vector<LinkRecord> read_links(std::istream& in);
/// Columns: origin, destination, demand_instant, demand_forecast,
/// target_arrival_s, optionally followed by demand_total.
std::vector<DemandRecord> read_demand(std::istream& in);
std::vector<LinkRecord> read_links_file(const std::string& path);
std::vector<DemandRecord> read_demand_file(const std::string& path);

// Paths: path_id, od, links (space separated link ids).

void write_paths(std::ostream& out, const Network& net, const PathSet& paths);
/// Reads paths written by write_paths (or by hand) for `net`.
PathSet read_paths(std::istream& in, const Network& net);

// Equilibrium departures: od, path_id, t_index, h_I, h_F.

void write_equilibrium(std::ostream& out, const Network& net, const PathSet& paths,
                       const ClassDepartures& h);
ClassDepartures read_equilibrium(std::istream& in, const Network& net, const PathSet& paths,
                                 std::size_t intervals);

// Convergence trace: k, residual, beta, alpha.

void write_trace(std::ostream& out, const std::vector<IterationRecord>& trace);
std::vector<IterationRecord> read_trace(std::istream& in);

// Accuracy: class, od, path_id, t_index, itt_s, rtt_s, rel_diff, departures.

void write_accuracy(std::ostream& out, const Network& net, const AccuracyReport& report);
std::vector<AccuracyRecord> read_accuracy(std::istream& in, const Network& net);

// Cumulative curves at every simulation step: link_id, t, N_up, N_dn.

struct CurveRow {
  std::string link;
  double t = 0.0;
  double up = 0.0;
  double dn = 0.0;
};
void write_curves(std::ostream& out, const Network& net, const LoadingResult& loading);
std::vector<CurveRow> read_curves(std::istream& in);

// Forecasts: provision, path_id, t_index, forecast_s.

struct ForecastRow {
  std::size_t provision = 0;
  std::size_t path = 0;
  std::size_t t = 0;
  double forecast = 0.0;
};
void write_forecasts(std::ostream& out, const std::vector<ForecastInfo>& forecasts);
std::vector<ForecastRow> read_forecasts(std::istream& in);

/// Looks up an OD by its "origin>destination" label; ParseError if unknown.
std::size_t od_index(const Network& net, std::string_view label, std::size_t line);

}  // namespace dsuedhi::io
