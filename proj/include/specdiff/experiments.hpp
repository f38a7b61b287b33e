#ifndef SPECDIFF_EXPERIMENTS_HPP_
#define SPECDIFF_EXPERIMENTS_HPP_

// ε-sweeps over the rank-one model: eigenvalue counts of D_ε(λ) in windows
// and traces Tr D_ε^m, fitted against |log ε| and compared with the
// predicted slopes ∫_ω μ and Δ_m.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "specdiff/density.hpp"
#include "specdiff/fit.hpp"
#include "specdiff/linalg.hpp"
#include "specdiff/models.hpp"
#include "specdiff/profiles.hpp"

namespace specdiff {

/// Thrown for invalid sweep configurations (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Open interval (lo, hi); either end may be infinite. Must stay away from 0.
struct Window {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double y) const noexcept { return y > lo && y < hi; }

  void validate() const {
    if (!(lo < hi)) throw ConfigError("window " + label() + " is empty");
    if (!(lo > 0.0 || hi < 0.0))
      throw ConfigError("window " + label() + " must not contain 0 in its closure");
  }

  /// Distance from 0 to the window.
  double gap() const noexcept { return lo > 0.0 ? lo : -hi; }

  std::string label() const {
    auto fmt = [](double v) {
      if (std::isinf(v)) return std::string(v > 0 ? "inf" : "-inf");
      std::ostringstream os;
      os << std::setprecision(12) << v;
      return os.str();
    };
    return "(" + fmt(lo) + ";" + fmt(hi) + ")";
  }
};

/// Number of eigenvalues strictly inside ω.
inline std::size_t count_window(std::span<const double> eigenvalues, const Window& w) {
  w.validate();
  return static_cast<std::size_t>(
      std::count_if(eigenvalues.begin(), eigenvalues.end(), [&](double y) { return w.contains(y); }));
}

inline std::size_t count_window(const SelfAdjointMatrix& d, const Window& w) {
  return count_window(d.eigenvalues(), w);
}

/// Tr 𝟙_ω(D) through the functional calculus.
inline std::size_t count_window_by_trace(const SelfAdjointMatrix& d, const Window& w) {
  w.validate();
  const SelfAdjointMatrix p = matrix_function(d, [&](double y) { return w.contains(y) ? 1.0 : 0.0; });
  return static_cast<std::size_t>(std::llround(trace(p.entries())));
}

/// Predicted slope ∫_ω μ for a window.
inline double predicted_window_slope(const BandSet& bands, const Window& w) {
  w.validate();
  // μ is even and supported in (−1, 1)
  const double a = w.lo > 0.0 ? w.lo : -w.hi;
  const double b = w.lo > 0.0 ? w.hi : -w.lo;
  const double upper = b >= 1.0 ? 0.0 : band_count_slope(bands, b);
  return band_count_slope(bands, a) - upper;
}

struct EpsilonGrid {
  double start = 1e-1;
  double stop = 1e-11;
  std::size_t count = 21;

  std::vector<double> values() const { return geometric_sequence(start, stop, count); }
};

struct SweepConfig {
  RankOneParams model;
  double lambda = 0.0;
  std::vector<std::string> profiles{"ARCTAN_HALF"};
  EpsilonGrid epsilon;
  std::vector<Window> windows{{0.4, 1.0}};
  std::vector<int> trace_powers{1, 2, 3};
  std::string output;
  unsigned workers = 1;
  std::uint64_t seed = 0;
  double tolerance = 0.15;
  ResolutionGuard guard;

  void validate() const {
    if (profiles.empty()) throw ConfigError("at least one profile is required");
    for (const auto& p : profiles) {
      try {
        (void)builtin_profile(p);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    try {
      (void)builtin_bump(model.bump);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (!(epsilon.start < 1.0 && epsilon.stop > 0.0 && epsilon.stop < epsilon.start))
      throw ConfigError("epsilon grid must be strictly decreasing inside (0, 1)");
    if (epsilon.count < 3) throw ConfigError("epsilon grid needs at least 3 points");
    if (windows.empty()) throw ConfigError("at least one window is required");
    for (const auto& w : windows) w.validate();
    for (int m : trace_powers)
      if (m < 1) throw ConfigError("trace powers must be >= 1");
    if (!(model.half_width > 0.0)) throw ConfigError("model.L must be positive");
    if (!(std::abs(lambda) < model.half_width)) throw ConfigError("lambda must lie inside (-L, L)");
    if (workers == 0) throw ConfigError("workers must be >= 1");
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  }
};

inline double json_number_or_inf(const nlohmann::json& j, double infinity_sign) {
  if (j.is_null()) return infinity_sign * std::numeric_limits<double>::infinity();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ConfigError("window bound must be a number, null, \"inf\" or \"-inf\"");
  }
  if (!j.is_number()) throw ConfigError("window bound must be a number");
  return j.get<double>();
}

/// Parses the JSON config document; unknown keys are rejected.
inline SweepConfig sweep_config_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> top_keys{
      "model", "lambda", "profiles", "epsilon", "windows", "trace_powers",
      "workers", "seed", "output", "tolerance", "guard"};
  auto check_keys = [](const nlohmann::json& obj, const std::vector<std::string>& allowed,
                       const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
        throw ConfigError("unknown key '" + it.key() + "' in " + where);
  };
  SweepConfig cfg;
  try {
    check_keys(j, top_keys, "config");
    if (j.contains("model")) {
      const auto& m = j.at("model");
      check_keys(m, {"L", "n", "bump", "c", "grid"}, "model");
      cfg.model.half_width = m.value("L", cfg.model.half_width);
      cfg.model.grid_size = m.value("n", cfg.model.grid_size);
      cfg.model.bump = m.value("bump", cfg.model.bump);
      cfg.model.coupling = m.value("c", cfg.model.coupling);
      if (m.contains("grid")) {
        const auto& g = m.at("grid");
        check_keys(g, {"kind", "points_per_panel", "inner_width", "center"}, "model.grid");
        const std::string kind = g.value("kind", std::string("graded"));
        if (kind == "graded")
          cfg.model.grid.kind = GridKind::kGraded;
        else if (kind == "uniform")
          cfg.model.grid.kind = GridKind::kUniform;
        else
          throw ConfigError("model.grid.kind must be 'graded' or 'uniform'");
        cfg.model.grid.points_per_panel = g.value("points_per_panel", cfg.model.grid.points_per_panel);
        cfg.model.grid.inner_width = g.value("inner_width", cfg.model.grid.inner_width);
        cfg.model.grid.center = g.value("center", cfg.model.grid.center);
      }
    }
    cfg.lambda = j.value("lambda", cfg.lambda);
    if (j.contains("profiles")) cfg.profiles = j.at("profiles").get<std::vector<std::string>>();
    if (j.contains("epsilon")) {
      const auto& e = j.at("epsilon");
      check_keys(e, {"start", "stop", "count"}, "epsilon");
      cfg.epsilon.start = e.value("start", cfg.epsilon.start);
      cfg.epsilon.stop = e.value("stop", cfg.epsilon.stop);
      cfg.epsilon.count = e.value("count", cfg.epsilon.count);
    }
    if (j.contains("windows")) {
      cfg.windows.clear();
      for (const auto& w : j.at("windows")) {
        if (!w.is_array() || w.size() != 2) throw ConfigError("each window must be [lo, hi]");
        cfg.windows.push_back({json_number_or_inf(w[0], -1.0), json_number_or_inf(w[1], +1.0)});
      }
    }
    if (j.contains("trace_powers")) cfg.trace_powers = j.at("trace_powers").get<std::vector<int>>();
    cfg.workers = j.value("workers", cfg.workers);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.output = j.value("output", cfg.output);
    cfg.tolerance = j.value("tolerance", cfg.tolerance);
    if (j.contains("guard")) {
      const auto& g = j.at("guard");
      check_keys(g, {"kappa", "precision_factor"}, "guard");
      cfg.guard.kappa = g.value("kappa", cfg.guard.kappa);
      cfg.guard.precision_factor = g.value("precision_factor", cfg.guard.precision_factor);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return sweep_config_from_json(j);
}

struct SweepRecord {
  double epsilon = 0.0;
  double log_inv_eps = 0.0;
  std::vector<std::size_t> counts;  // per window
  std::vector<double> traces;       // per trace power
  bool guard_ok = true;
};

struct SlopeComparison {
  double fitted = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  double predicted = 0.0;
  double deviation = 0.0;  // relative if predicted > 0, absolute otherwise
};

inline double slope_deviation(double fitted, double predicted) {
  return predicted > 0.0 ? std::abs(fitted - predicted) / predicted : std::abs(fitted - predicted);
}

struct ProfileSweep {
  std::string profile;
  std::vector<SweepRecord> records;
  std::vector<SlopeComparison> windows;  // per window
  std::vector<SlopeComparison> traces;   // per trace power
};

struct SweepResult {
  SweepConfig config;
  ScatteringPoint scattering;
  BandSet bands;
  std::vector<ProfileSweep> profiles;

  const ProfileSweep& profile(const std::string& name) const {
    for (const auto& p : profiles)
      if (p.profile == name) return p;
    throw std::out_of_range("no sweep for profile " + name);
  }

  bool all_within_tolerance() const {
    for (const auto& p : profiles) {
      for (const auto& w : p.windows)
        if (!(w.deviation <= config.tolerance)) return false;
      for (const auto& t : p.traces)
        if (!(t.deviation <= config.tolerance)) return false;
    }
    return true;
  }
};

/// Scattering data at λ; a free model (c = 0) has no bands.
inline ScatteringPoint model_scattering(const RankOneModel& model, double lambda) {
  return scattering_point(model, lambda);
}

namespace detail {

template <class Job>
void parallel_for(std::size_t count, unsigned workers, Job&& job) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  const unsigned n = std::min<unsigned>(workers, static_cast<unsigned>(count));
  for (unsigned t = 0; t < n; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

inline SlopeComparison compare_fit(const std::vector<std::pair<double, double>>& pts,
                                   double predicted) {
  SlopeComparison c;
  const LineFit f = slope_fit(pts);
  c.fitted = f.slope;
  c.intercept = f.intercept;
  c.residual = f.residual;
  c.predicted = predicted;
  c.deviation = slope_deviation(f.slope, predicted);
  return c;
}

}  // namespace detail

/// One profile over the ε-grid of `cfg`, on an already-built model.
inline ProfileSweep sweep_profile(const RankOneModel& model, const SweepConfig& cfg,
                                  const BandSet& bands, const std::string& profile_name) {
  const CutoffProfile psi = builtin_profile(profile_name);
  const std::vector<double> eps = cfg.epsilon.values();
  ProfileSweep out;
  out.profile = profile_name;
  out.records.resize(eps.size());
  (void)model.h().eig();  // populate once before fanning out
  detail::parallel_for(eps.size(), cfg.workers, [&](std::size_t i) {
    const DEps d = build_d_eps(model, scale(psi, eps[i]), cfg.lambda, cfg.guard);
    const auto& ev = d.matrix.eigenvalues();
    SweepRecord r;
    r.epsilon = eps[i];
    r.log_inv_eps = std::log(1.0 / eps[i]);
    r.guard_ok = d.guard_ok;
    for (const auto& w : cfg.windows) r.counts.push_back(count_window(ev, w));
    for (int m : cfg.trace_powers) r.traces.push_back(trace_power(ev, m));
    out.records[i] = std::move(r);
  });

  std::vector<const SweepRecord*> clean;
  for (const auto& r : out.records)
    if (r.guard_ok) clean.push_back(&r);
  if (clean.empty())
    throw ConfigError("every epsilon violates the resolution guard; increase model.n or raise epsilon.stop");
  if (clean.size() < 3)
    throw ConfigError("fewer than 3 epsilon values pass the resolution guard; cannot fit slopes");

  for (std::size_t k = 0; k < cfg.windows.size(); ++k) {
    std::vector<std::pair<double, double>> pts;
    for (const auto* r : clean) pts.emplace_back(r->log_inv_eps, static_cast<double>(r->counts[k]));
    out.windows.push_back(detail::compare_fit(pts, predicted_window_slope(bands, cfg.windows[k])));
  }
  for (std::size_t k = 0; k < cfg.trace_powers.size(); ++k) {
    std::vector<std::pair<double, double>> pts;
    for (const auto* r : clean) pts.emplace_back(r->log_inv_eps, r->traces[k]);
    out.traces.push_back(detail::compare_fit(pts, delta_m(bands, cfg.trace_powers[k])));
  }
  return out;
}

inline SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const RankOneModel model(cfg.model);
  SweepResult res;
  res.config = cfg;
  res.scattering = scattering_point(model, cfg.lambda);
  res.bands = res.scattering.bands();
  for (const auto& name : cfg.profiles) res.profiles.push_back(sweep_profile(model, cfg, res.bands, name));
  return res;
}

// ---------------------------------------------------------------------------
// Studies

struct UniversalityReport {
  std::vector<std::pair<std::string, double>> slopes;  // per profile, for one window
  double predicted = 0.0;
  double max_pairwise_deviation = 0.0;  // |s_i − s_j| / max(|s_i|, |s_j|)
};

inline UniversalityReport universality_from(const SweepResult& res, std::size_t window = 0) {
  UniversalityReport rep;
  for (const auto& p : res.profiles) rep.slopes.emplace_back(p.profile, p.windows.at(window).fitted);
  if (!res.profiles.empty()) rep.predicted = res.profiles.front().windows.at(window).predicted;
  for (std::size_t i = 0; i < rep.slopes.size(); ++i)
    for (std::size_t j = i + 1; j < rep.slopes.size(); ++j) {
      const double a = rep.slopes[i].second, b = rep.slopes[j].second;
      const double scale = std::max(std::abs(a), std::abs(b));
      if (scale > 0.0) rep.max_pairwise_deviation = std::max(rep.max_pairwise_deviation, std::abs(a - b) / scale);
    }
  return rep;
}

inline UniversalityReport universality_study(SweepConfig cfg, const std::vector<std::string>& profiles) {
  cfg.profiles = profiles;
  return universality_from(run_sweep(cfg));
}

struct SymmetryReport {
  double slope_plus = 0.0;   // window (b, ∞)
  double slope_minus = 0.0;  // window (−∞, −b)
  double predicted = 0.0;
  double relative_difference = 0.0;  // |s₊ − s₋| / max(|s₊|, |s₋|)
};

inline SymmetryReport symmetry_from(const ProfileSweep& sweep, std::size_t plus_index,
                                    std::size_t minus_index) {
  SymmetryReport rep;
  rep.slope_plus = sweep.windows.at(plus_index).fitted;
  rep.slope_minus = sweep.windows.at(minus_index).fitted;
  rep.predicted = sweep.windows.at(plus_index).predicted;
  const double scale = std::max(std::abs(rep.slope_plus), std::abs(rep.slope_minus));
  rep.relative_difference = scale > 0.0 ? std::abs(rep.slope_plus - rep.slope_minus) / scale : 0.0;
  return rep;
}

inline SymmetryReport symmetry_study(SweepConfig cfg, double b) {
  if (!(b > 0.0)) throw std::invalid_argument("symmetry_study: b must be positive");
  const double inf = std::numeric_limits<double>::infinity();
  cfg.windows = {{b, inf}, {-inf, -b}};
  cfg.profiles.resize(1);
  const SweepResult res = run_sweep(cfg);
  return symmetry_from(res.profiles.front(), 0, 1);
}

struct TraceFormulaReport {
  std::vector<std::pair<double, double>> traces;  // (ε, Tr D_ε) over guard-clean ε
  double limit_estimate = 0.0;
  double minus_xi = 0.0;
  double max_abs_trace = 0.0;
};

/// Assumes Tr D_ε = L + C·ε + o(ε) and Richardson-extrapolates from the two
/// smallest guard-clean ε.
inline TraceFormulaReport trace_formula_from(const SweepResult& res, const ProfileSweep& sweep) {
  const auto& powers = res.config.trace_powers;
  const auto it = std::find(powers.begin(), powers.end(), 1);
  if (it == powers.end()) throw std::invalid_argument("trace_formula: sweep must record m = 1");
  const auto k = static_cast<std::size_t>(it - powers.begin());
  TraceFormulaReport rep;
  rep.minus_xi = -res.scattering.xi;
  for (const auto& r : sweep.records) {
    if (!r.guard_ok) continue;
    rep.traces.emplace_back(r.epsilon, r.traces[k]);
    rep.max_abs_trace = std::max(rep.max_abs_trace, std::abs(r.traces[k]));
  }
  if (rep.traces.size() < 2) throw std::invalid_argument("trace_formula: need two clean epsilons");
  std::sort(rep.traces.begin(), rep.traces.end());
  const auto [e1, t1] = rep.traces[0];
  const auto [e2, t2] = rep.traces[1];
  rep.limit_estimate = (e2 * t1 - e1 * t2) / (e2 - e1);
  std::sort(rep.traces.begin(), rep.traces.end(), std::greater<>());
  return rep;
}

inline TraceFormulaReport trace_formula_study(SweepConfig cfg) {
  if (std::find(cfg.trace_powers.begin(), cfg.trace_powers.end(), 1) == cfg.trace_powers.end())
    cfg.trace_powers.push_back(1);
  cfg.profiles.resize(1);
  const SweepResult res = run_sweep(cfg);
  return trace_formula_from(res, res.profiles.front());
}

struct NegativeControlReport {
  double alpha = 0.0;
  std::vector<double> epsilons;
  std::vector<std::size_t> counts;
  LineFit log_log;  // log count vs log(1/ε)
  LineFit log_law;  // count vs |log ε|
};

/// Counts of ψ(H/ε) in `window` for H = diag(k^{−1/α}), k ≤ n.
inline NegativeControlReport negative_control_study(double alpha, std::span<const double> eps,
                                                    std::size_t n, const CutoffProfile& psi,
                                                    const Window& window) {
  window.validate();
  NegativeControlReport rep;
  rep.alpha = alpha;
  std::vector<std::pair<double, double>> ll, lin;
  for (double e : eps) {
    const std::size_t c = negative_control(alpha, n, psi, e, window.lo, window.hi);
    rep.epsilons.push_back(e);
    rep.counts.push_back(c);
    if (c > 0) ll.emplace_back(std::log(1.0 / e), std::log(static_cast<double>(c)));
    lin.emplace_back(std::log(1.0 / e), static_cast<double>(c));
  }
  rep.log_log = slope_fit(ll);
  rep.log_law = slope_fit(lin);
  return rep;
}

// ---------------------------------------------------------------------------
// Output

inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// CSV rows `epsilon,log_inv_eps,window,count,guard_flag` for one profile.
inline std::string sweep_csv(const SweepResult& res, const ProfileSweep& sweep) {
  std::ostringstream os;
  os << "epsilon,log_inv_eps,window,count,guard_flag\n";
  for (const auto& r : sweep.records)
    for (std::size_t k = 0; k < res.config.windows.size(); ++k)
      os << format_double(r.epsilon) << ',' << format_double(r.log_inv_eps) << ','
         << res.config.windows[k].label() << ',' << r.counts[k] << ',' << (r.guard_ok ? 0 : 1)
         << '\n';
  return os.str();
}

/// Summary document: fitted/predicted slopes, deviations, residuals, plus the
/// per-window count series used by the report command.
inline nlohmann::json sweep_summary(const SweepResult& res) {
  using nlohmann::json;
  json fitted = json::object(), predicted = json::object(), deviations = json::object(),
       residuals = json::object(), intercepts = json::object(), series = json::object();
  for (const auto& p : res.profiles) {
    for (std::size_t k = 0; k < res.config.windows.size(); ++k) {
      const std::string w = res.config.windows[k].label();
      fitted[p.profile][w] = p.windows[k].fitted;
      predicted[w] = p.windows[k].predicted;
      deviations[p.profile][w] = p.windows[k].deviation;
      residuals[p.profile][w] = p.windows[k].residual;
      intercepts[p.profile][w] = p.windows[k].intercept;
      json pts = json::array();
      for (const auto& r : p.records)
        pts.push_back({{"log_inv_eps", r.log_inv_eps}, {"count", r.counts[k]}, {"guard_flag", r.guard_ok ? 0 : 1}});
      series[p.profile][w] = pts;
    }
    for (std::size_t k = 0; k < res.config.trace_powers.size(); ++k) {
      const std::string m = "trace_m" + std::to_string(res.config.trace_powers[k]);
      fitted[p.profile][m] = p.traces[k].fitted;
      predicted[m] = p.traces[k].predicted;
      deviations[p.profile][m] = p.traces[k].deviation;
      residuals[p.profile][m] = p.traces[k].residual;
      intercepts[p.profile][m] = p.traces[k].intercept;
    }
  }
  json j;
  j["fitted_slopes"] = fitted;
  j["predicted_slopes"] = predicted;
  j["deviations"] = deviations;
  j["residuals"] = residuals;
  j["intercepts"] = intercepts;
  j["series"] = series;
  j["tolerance"] = res.config.tolerance;
  j["lambda"] = res.config.lambda;
  j["band_edges"] = res.bands.edges();
  j["a1"] = res.scattering.a1;
  j["xi"] = res.scattering.xi;
  j["seed"] = res.config.seed;
  j["within_tolerance"] = res.all_within_tolerance();
  return j;
}

/// Writes `<dir>/<PROFILE>.csv` for every profile and `<dir>/summary.json`.
inline void write_sweep_outputs(const SweepResult& res, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& p : res.profiles) {
    std::ofstream csv(dir / (p.profile + ".csv"));
    csv << sweep_csv(res, p);
  }
  std::ofstream js(dir / "summary.json");
  js << sweep_summary(res).dump(2) << '\n';
}

}  // namespace specdiff

#endif  // SPECDIFF_EXPERIMENTS_HPP_
