#ifndef SPECDIFF_CLI_HPP_
#define SPECDIFF_CLI_HPP_

// Command-line front end: density, hankel, sweep, report.
// Exit codes: 0 ok, 1 tolerance failure, 2 bad input or config.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "specdiff/density.hpp"
#include "specdiff/experiments.hpp"
#include "specdiff/fit.hpp"
#include "specdiff/hankel.hpp"
#include "specdiff/report.hpp"

namespace specdiff::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitTolerance = 1;
inline constexpr int kExitInput = 2;

class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    std::istringstream is(item.substr(b));
    is.imbue(std::locale::classic());
    T v{};
    if (!(is >> v) || !(is >> std::ws).eof()) throw InputError(std::string("cannot parse ") + what + ": '" + item + "'");
    out.push_back(v);
  }
  return out;
}

inline std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct Globals {
  bool json = false;
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
};

inline int cmd_density(const std::string& edges_text, std::optional<double> window, std::optional<int> moment,
                       const Globals& g, std::ostream& out) {
  if (window.has_value() == moment.has_value()) throw InputError("density: give exactly one of --window or --moment");
  BandSet bands;
  try {
    bands = BandSet(parse_list<double>(edges_text, "edges"));
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  double value = 0.0;
  std::string quantity;
  try {
    if (window) {
      if (!(*window > 0.0)) throw InputError("density: --window must be positive");
      value = band_count_slope(bands, *window);
      quantity = "band_count_slope";
    } else {
      if (*moment < 1) throw InputError("density: --moment must be >= 1");
      value = delta_m(bands, *moment);
      quantity = "delta_m";
    }
  } catch (const std::domain_error& e) {
    throw InputError(e.what());
  }
  if (g.json) {
    nlohmann::json j;
    j["edges"] = bands.edges();
    j["quantity"] = quantity;
    if (window) j["window"] = *window;
    if (moment) j["moment"] = *moment;
    j["value"] = value;
    out << j.dump() << '\n';
  } else {
    out << quantity << ' ' << (window ? "b=" + fmt6(*window) : "m=" + std::to_string(*moment)) << ' '
        << fmt6(value) << '\n';
  }
  return kExitOk;
}

inline int cmd_hankel(double eps_start, double eps_stop, std::size_t count, const std::string& powers_text,
                      const Globals& g, std::ostream& out) {
  const auto powers = parse_list<int>(powers_text, "powers");
  for (int m : powers)
    if (m < 1) throw InputError("hankel: powers must be >= 1");
  if (!(eps_start > 0.0 && eps_start < 1.0 && eps_stop > 0.0 && eps_stop < 1.0) || eps_stop == eps_start)
    throw InputError("hankel: epsilon range must lie in (0, 1) with distinct ends");
  if (count < 5) throw InputError("hankel: --count must be >= 5");

  std::vector<std::string> header{"epsilon", "log_inv_eps"};
  for (int m : powers) {
    header.push_back("trace_m" + std::to_string(m));
    if (m <= 2) header.push_back("exact_m" + std::to_string(m));
  }
  if (powers.empty()) {
    // nothing to compute
    if (g.json) {
      out << nlohmann::json{{"columns", header}, {"rows", nlohmann::json::array()}, {"slopes", nlohmann::json::array()}}.dump()
          << '\n';
    } else {
      for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
      out << '\n';
    }
    return kExitOk;
  }

  const auto eps = geometric_sequence(eps_start, eps_stop, count);
  const TraceSlopeReport rep = k_eps_trace_slopes(powers, eps);
  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream csv;
  for (std::size_t k = 0; k < header.size(); ++k) csv << (k ? "," : "") << header[k];
  csv << '\n';
  for (std::size_t i = 0; i < eps.size(); ++i) {
    std::vector<double> row{eps[i], std::log(1.0 / eps[i])};
    for (std::size_t q = 0; q < powers.size(); ++q) {
      row.push_back(rep.traces[q][i]);
      if (powers[q] <= 2) row.push_back(k_eps_trace_exact(eps[i], powers[q]));
    }
    for (std::size_t k = 0; k < row.size(); ++k) csv << (k ? "," : "") << format_double(row[k]);
    csv << '\n';
    rows.push_back(row);
  }
  if (g.json) {
    nlohmann::json slopes = nlohmann::json::array();
    for (const auto& s : rep.slopes)
      slopes.push_back({{"m", s.m}, {"fitted", s.fitted}, {"predicted", s.predicted}, {"residual", s.residual}});
    out << nlohmann::json{{"columns", header}, {"rows", rows}, {"slopes", slopes},
                          {"resolution_ok", rep.resolution_ok}}
               .dump()
        << '\n';
  } else {
    out << csv.str();
    for (const auto& s : rep.slopes)
      out << "# slope m=" << s.m << " fitted=" << fmt6(s.fitted) << " predicted=" << fmt6(s.predicted)
          << " residual=" << fmt6(s.residual) << '\n';
    if (!rep.resolution_ok) out << "# warning: grid under-resolves Tr K_eps at the smallest epsilon\n";
  }
  return kExitOk;
}

inline int cmd_sweep(const std::string& config_path, const std::string& output_override, const Globals& g,
                     std::ostream& out, std::ostream& err) {
  SweepConfig cfg = load_sweep_config(config_path);
  if (g.workers) cfg.workers = *g.workers;
  if (g.seed) cfg.seed = *g.seed;
  if (!output_override.empty()) cfg.output = output_override;
  cfg.validate();
  const SweepResult res = run_sweep(cfg);
  if (!cfg.output.empty()) write_sweep_outputs(res, cfg.output);

  for (const auto& p : res.profiles)
    for (const auto& r : p.records)
      if (!r.guard_ok) err << "warning: " << p.profile << " epsilon=" << format_double(r.epsilon)
                           << " flagged by the resolution guard, excluded from fits\n";
  const bool ok = res.all_within_tolerance();
  if (g.json) {
    out << sweep_summary(res).dump() << '\n';
  } else {
    for (const auto& p : res.profiles) {
      for (std::size_t k = 0; k < cfg.windows.size(); ++k) {
        const auto& w = p.windows[k];
        out << (w.deviation <= cfg.tolerance ? "PASS " : "FAIL ") << p.profile << ' ' << cfg.windows[k].label()
            << " fitted=" << fmt6(w.fitted) << " predicted=" << fmt6(w.predicted)
            << " deviation=" << fmt6(w.deviation) << '\n';
      }
      for (std::size_t k = 0; k < cfg.trace_powers.size(); ++k) {
        const auto& t = p.traces[k];
        out << (t.deviation <= cfg.tolerance ? "PASS " : "FAIL ") << p.profile << " trace_m"
            << cfg.trace_powers[k] << " fitted=" << fmt6(t.fitted) << " predicted=" << fmt6(t.predicted)
            << " deviation=" << fmt6(t.deviation) << '\n';
      }
    }
  }
  return ok ? kExitOk : kExitTolerance;
}

inline int cmd_report(const std::string& input, const std::string& svg_path, const Globals& g, std::ostream& out) {
  std::ifstream in(input);
  if (!in) throw InputError("report: cannot open " + input);
  nlohmann::json summary;
  try {
    in >> summary;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("report: input is not valid JSON: ") + e.what());
  }
  std::filesystem::path target = svg_path;
  if (target.empty()) target = std::filesystem::path(input).replace_extension(".svg");
  const std::string svg = render_svg(chart_series(summary));
  std::ofstream(target, std::ios::binary) << svg;
  if (g.json) {
    out << nlohmann::json{{"svg", target.string()}, {"series", chart_series(summary).size()}}.dump() << '\n';
  } else {
    out << render_text(summary);
    out << "svg: " << target.string() << '\n';
  }
  return kExitOk;
}

/// Parses argv and dispatches; never throws.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"specdiff: eigenvalue statistics of smoothed spectral projection differences"};
  app.require_subcommand(1, 1);
  Globals g;
  unsigned workers = 0;
  std::uint64_t seed = 0;
  app.add_flag("--json", g.json, "machine-readable output");
  auto* workers_opt = app.add_option("--workers", workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "seed recorded in outputs");

  auto* density = app.add_subcommand("density", "band-count slopes and trace moments of the limit density");
  std::string edges;
  std::optional<double> window;
  std::optional<int> moment;
  density->add_option("--edges", edges, "comma-separated band edges in (0,1]")->required();
  auto* wopt = density->add_option("--window", window, "lower window end b");
  auto* mopt = density->add_option("--moment", moment, "trace power m");
  wopt->excludes(mopt);

  auto* hankel = app.add_subcommand("hankel", "trace asymptotics of the model Hankel operator");
  double eps_start = 1e-2, eps_stop = 1e-5;
  std::size_t count = 7;
  std::string powers = "1,2";
  hankel->add_option("--eps-start", eps_start);
  hankel->add_option("--eps-stop", eps_stop);
  hankel->add_option("--count", count);
  hankel->add_option("--powers", powers, "comma-separated trace powers (may be empty)");

  auto* sweep = app.add_subcommand("sweep", "epsilon sweep on the rank-one model");
  std::string config, output;
  sweep->add_option("--config", config)->required();
  sweep->add_option("--output", output, "override the config's output directory");

  auto* report = app.add_subcommand("report", "text and SVG report of a sweep summary");
  std::string input, svg;
  report->add_option("--input", input)->required();
  report->add_option("--svg", svg, "SVG path (default: input with .svg extension)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  if (workers_opt->count()) g.workers = workers;
  if (seed_opt->count()) g.seed = seed;

  try {
    if (density->parsed()) return cmd_density(edges, window, moment, g, out);
    if (hankel->parsed()) return cmd_hankel(eps_start, eps_stop, count, powers, g, out);
    if (sweep->parsed()) return cmd_sweep(config, output, g, out, err);
    if (report->parsed()) return cmd_report(input, svg, g, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace specdiff::cli

#endif  // SPECDIFF_CLI_HPP_
