#include "dsuedhi/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "dsuedhi/error.hpp"

namespace dsuedhi::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.emplace_back(trim(line.substr(pos, comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return in;
}

void expect_header(const CsvTable& t, const std::vector<std::string_view>& want) {
  if (t.header.size() < want.size()) {
    throw ParseError(0, "header must start with " + std::string(want.front()));
  }
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (t.header[i] != want[i]) {
      throw ParseError(0, "unexpected column '" + t.header[i] + "', expected '" +
                              std::string(want[i]) + "'");
    }
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

double parse_double(std::string_view s, std::size_t line, std::string_view field) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != end) {
    throw ParseError(line, "invalid number '" + std::string(s) + "' for " + std::string(field));
  }
  return v;
}

std::size_t parse_index(std::string_view s, std::size_t line, std::string_view field) {
  std::size_t v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != end) {
    throw ParseError(line, "invalid integer '" + std::string(s) + "' for " + std::string(field));
  }
  return v;
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string raw;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line;
    const auto s = trim(raw);
    if (s.empty() || s.front() == '#') continue;
    auto fields = split(s);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw ParseError(line, "expected " + std::to_string(t.header.size()) + " fields");
    }
    t.rows.push_back(std::move(fields));
    t.lines.push_back(line);
  }
  if (!have_header) throw ParseError(0, "missing header row");
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  auto in = open(path);
  return read_csv(in);
}

std::vector<LinkRecord> read_links(std::istream& in) {
  const auto t = read_csv(in);
  expect_header(t, {"id", "tail", "head", "length_m", "free_speed_mps",
                    "backward_wave_speed_mps", "capacity_veh_per_s", "jam_density_veh_per_m"});
  if (t.header.size() != 8) throw ParseError(0, "link file must have 8 columns");
  std::vector<LinkRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const auto ln = t.lines[i];
    out.push_back({r[0], r[1], r[2], parse_double(r[3], ln, "length_m"),
                   parse_double(r[4], ln, "free_speed_mps"),
                   parse_double(r[5], ln, "backward_wave_speed_mps"),
                   parse_double(r[6], ln, "capacity_veh_per_s"),
                   parse_double(r[7], ln, "jam_density_veh_per_m")});
  }
  return out;
}

std::vector<DemandRecord> read_demand(std::istream& in) {
  const auto t = read_csv(in);
  expect_header(t, {"origin", "destination", "demand_instant", "demand_forecast",
                    "target_arrival_s"});
  const bool with_total = t.header.size() == 6 && t.header[5] == "demand_total";
  if (t.header.size() != 5 && !with_total) {
    throw ParseError(0, "demand file must have 5 columns, or 6 ending in demand_total");
  }
  std::vector<DemandRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const auto ln = t.lines[i];
    DemandRecord d{r[0], r[1], parse_double(r[2], ln, "demand_instant"),
                   parse_double(r[3], ln, "demand_forecast"),
                   parse_double(r[4], ln, "target_arrival_s"), std::nullopt};
    if (with_total) d.demand_total = parse_double(r[5], ln, "demand_total");
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<LinkRecord> read_links_file(const std::string& path) {
  auto in = open(path);
  return read_links(in);
}

std::vector<DemandRecord> read_demand_file(const std::string& path) {
  auto in = open(path);
  return read_demand(in);
}

std::size_t od_index(const Network& net, std::string_view label, std::size_t line) {
  for (std::size_t w = 0; w < net.ods().size(); ++w) {
    if (net.od_label(w) == label) return w;
  }
  throw ParseError(line, "unknown OD pair '" + std::string(label) + "'");
}

void write_paths(std::ostream& out, const Network& net, const PathSet& paths) {
  out << "path_id,od,links\n";
  for (std::size_t p = 0; p < paths.size(); ++p) {
    out << p << ',' << net.od_label(paths[p].od) << ',';
    for (std::size_t i = 0; i < paths[p].links.size(); ++i) {
      if (i) out << ' ';
      out << net.link(paths[p].links[i]).id;
    }
    out << '\n';
  }
}

PathSet read_paths(std::istream& in, const Network& net) {
  const auto t = read_csv(in);
  expect_header(t, {"path_id", "od", "links"});
  std::vector<Path> paths;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const auto ln = t.lines[i];
    const auto w = od_index(net, r[1], ln);
    std::vector<std::size_t> links;
    std::istringstream ids(r[2]);
    std::string id;
    while (ids >> id) {
      const auto a = net.find_link(id);
      if (!a) throw ParseError(ln, "unknown link '" + id + "'");
      links.push_back(*a);
    }
    if (links.empty()) throw ParseError(ln, "path without links");
    paths.push_back(make_path(net, w, std::move(links)));
  }
  return PathSet(net, std::move(paths));
}

void write_equilibrium(std::ostream& out, const Network& net, const PathSet& paths,
                       const ClassDepartures& h) {
  out << "od,path_id,t_index,h_I,h_F\n";
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto label = net.od_label(paths[p].od);
    for (std::size_t t = 0; t < h.instant.cols(); ++t) {
      out << label << ',' << p << ',' << t << ',' << format_double(h.instant(p, t)) << ','
          << format_double(h.forecast(p, t)) << '\n';
    }
  }
}

ClassDepartures read_equilibrium(std::istream& in, const Network& net, const PathSet& paths,
                                 std::size_t intervals) {
  const auto t = read_csv(in);
  expect_header(t, {"od", "path_id", "t_index", "h_I", "h_F"});
  ClassDepartures h{Matrix(paths.size(), intervals), Matrix(paths.size(), intervals)};
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const auto ln = t.lines[i];
    const auto w = od_index(net, r[0], ln);
    const auto p = parse_index(r[1], ln, "path_id");
    const auto k = parse_index(r[2], ln, "t_index");
    if (p >= paths.size() || paths[p].od != w) throw ParseError(ln, "path does not match OD");
    if (k >= intervals) throw ParseError(ln, "interval out of range");
    h.instant(p, k) = parse_double(r[3], ln, "h_I");
    h.forecast(p, k) = parse_double(r[4], ln, "h_F");
  }
  return h;
}

void write_trace(std::ostream& out, const std::vector<IterationRecord>& trace) {
  out << "k,residual,beta,alpha\n";
  for (const auto& r : trace) {
    out << r.k << ',' << format_double(r.residual) << ',' << format_double(r.beta) << ','
        << format_double(r.alpha) << '\n';
  }
}

std::vector<IterationRecord> read_trace(std::istream& in) {
  const auto t = read_csv(in);
  expect_header(t, {"k", "residual", "beta", "alpha"});
  std::vector<IterationRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const auto ln = t.lines[i];
    out.push_back({parse_index(r[0], ln, "k"), parse_double(r[1], ln, "residual"),
                   parse_double(r[2], ln, "beta"), parse_double(r[3], ln, "alpha")});
  }
  return out;
}

void write_accuracy(std::ostream& out, const Network& net, const AccuracyReport& report) {
  out << "class,od,path_id,t_index,itt_s,rtt_s,rel_diff,departures\n";
  for (const auto& r : report.records) {
    out << to_string(r.cls) << ',' << net.od_label(r.od) << ',' << r.path << ',' << r.t << ','
        << format_double(r.itt) << ',' << format_double(r.rtt) << ','
        << format_double(r.rel_diff) << ',' << format_double(r.departures) << '\n';
  }
}

std::vector<AccuracyRecord> read_accuracy(std::istream& in, const Network& net) {
  const auto t = read_csv(in);
  expect_header(t, {"class", "od", "path_id", "t_index", "itt_s", "rtt_s", "rel_diff",
                    "departures"});
  std::vector<AccuracyRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const auto ln = t.lines[i];
    AccuracyRecord a;
    if (r[0] == "instant") {
      a.cls = InfoClass::Instant;
    } else if (r[0] == "forecast") {
      a.cls = InfoClass::Forecast;
    } else {
      throw ParseError(ln, "unknown class '" + r[0] + "'");
    }
    a.od = od_index(net, r[1], ln);
    a.path = parse_index(r[2], ln, "path_id");
    a.t = parse_index(r[3], ln, "t_index");
    a.itt = parse_double(r[4], ln, "itt_s");
    a.rtt = parse_double(r[5], ln, "rtt_s");
    a.rel_diff = parse_double(r[6], ln, "rel_diff");
    a.departures = parse_double(r[7], ln, "departures");
    out.push_back(a);
  }
  return out;
}

void write_curves(std::ostream& out, const Network& net, const LoadingResult& loading) {
  out << "link_id,t,N_up,N_dn\n";
  for (std::size_t a = 0; a < net.links().size(); ++a) {
    const auto up = loading.upstream(a);
    const auto dn = loading.downstream(a);
    for (std::size_t k = 0; k < up.values.size(); ++k) {
      out << net.link(a).id << ',' << format_double(loading.step() * static_cast<double>(k))
          << ',' << format_double(up.values[k]) << ',' << format_double(dn.values[k]) << '\n';
    }
  }
}

std::vector<CurveRow> read_curves(std::istream& in) {
  const auto t = read_csv(in);
  expect_header(t, {"link_id", "t", "N_up", "N_dn"});
  std::vector<CurveRow> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const auto ln = t.lines[i];
    out.push_back({r[0], parse_double(r[1], ln, "t"), parse_double(r[2], ln, "N_up"),
                   parse_double(r[3], ln, "N_dn")});
  }
  return out;
}

void write_forecasts(std::ostream& out, const std::vector<ForecastInfo>& forecasts) {
  out << "provision,path_id,t_index,forecast_s\n";
  for (const auto& f : forecasts) {
    for (std::size_t p = 0; p < f.times.rows(); ++p) {
      for (std::size_t c = 0; c < f.times.cols(); ++c) {
        out << f.provision << ',' << p << ',' << f.provision + c << ','
            << format_double(f.times(p, c)) << '\n';
      }
    }
  }
}

std::vector<ForecastRow> read_forecasts(std::istream& in) {
  const auto t = read_csv(in);
  expect_header(t, {"provision", "path_id", "t_index", "forecast_s"});
  std::vector<ForecastRow> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const auto ln = t.lines[i];
    out.push_back({parse_index(r[0], ln, "provision"), parse_index(r[1], ln, "path_id"),
                   parse_index(r[2], ln, "t_index"), parse_double(r[3], ln, "forecast_s")});
  }
  return out;
}

}  // namespace dsuedhi::io
