#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qstab/circuit.hpp"
#include "qstab/classifier.hpp"
#include "qstab/error.hpp"
#include "qstab/io.hpp"
#include "qstab/learner.hpp"
#include "qstab/metrics.hpp"
#include "qstab/stabilizer.hpp"

// End-to-end driver shared by the command-line tool and the acceptance suite.
// Each stage reads its inputs from and writes its outputs to one directory:
//
//   simulate   -> alpha.csv, objective.csv, simulate.json
//   stabilize  -> solution.json, beta.csv, beta_clamped.csv
//   learn      -> learner.json
//   classify   -> class_model.json, assignments.csv
//   metrics    -> report.json
//   figures    -> fig_a1_*.csv, fig_a2_*.csv, fig_a3_grid.csv, figures.json

namespace qstab::pipeline {

namespace fs = std::filesystem;
using io::json;

struct CosSqPair {
  double oscillations = 1.0;
  double c = 0.125;
  double c_star = 0.1;
};

struct FigureConfig {
  double runs = 10.0;
  double mean = 0.1;
  bool unit_delta_amplitude = true;  // amp = √2; otherwise amp from [gamma, lambda_max]
  double gamma = 0.0;
  double lambda_max = 0.2;
  std::vector<double> oscillations{1.0, 2.0, 3.0};
  std::size_t delta_points = 10000;
  double curve_step = 0.01;
  std::size_t panels = kDefaultPanels;
  std::vector<CosSqPair> pairs{{1.0, 0.125, 0.1}, {1.0, 0.3, 0.2}, {2.0, 0.5, 0.3}};
  double grid_step = 0.01;
  std::size_t grid_panels = 400;
};

struct PipelineConfig {
  fs::path base_dir = ".";
  std::optional<fs::path> circuit_path;
  std::size_t input_state = 0;
  std::uint64_t seed = 1;
  RunConfig run;
  StabilizerParams stabilizer;
  std::size_t learner_q = 64;
  std::size_t classes = 3;
  double kernel_c = kDefaultKernelC;
  NuMode nu_mode = NuMode::Scaled;
  std::size_t metrics_panels = kDefaultPanels;
  std::string target = "alpha";
  double entry_floor = 1e-6;
  CosSqPair model;
  FigureConfig figures;
};

namespace detail {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("config key '") + key + "': " + e.what());
  }
}

inline void check(bool ok, const std::string& what) { require(ok, ErrorCode::Config, what); }

}  // namespace detail

inline PipelineConfig parse_config(const json& j, const fs::path& base_dir = ".") {
  using detail::check;
  using detail::get_or;
  check(j.is_object(), "config must be a JSON object");
  PipelineConfig c;
  c.base_dir = base_dir;
  if (j.contains("circuit") && !j.at("circuit").is_null()) c.circuit_path = base_dir / get_or<std::string>(j, "circuit", "");
  c.input_state = get_or<std::size_t>(j, "input_state", 0);
  c.seed = get_or<std::uint64_t>(j, "seed", 1);

  const json run = j.value("run", json::object());
  c.run.runs = get_or<std::size_t>(run, "R", c.run.runs);
  c.run.noise_scale = get_or<double>(run, "noise_scale", c.run.noise_scale);
  c.run.ascent_steps = get_or<std::size_t>(run, "ascent_steps", c.run.ascent_steps);
  c.run.learning_rate = get_or<double>(run, "learning_rate", c.run.learning_rate);
  check(c.run.runs >= 3, "run.R must be >= 3");
  check(c.run.noise_scale >= 0.0, "run.noise_scale must be >= 0");

  const json st = j.value("stabilizer", json::object());
  c.stabilizer.kappa = get_or<std::size_t>(st, "kappa", c.stabilizer.kappa);
  if (st.contains("zeta") && !st.at("zeta").is_null()) {
    if (st.at("zeta").is_string()) {
      check(st.at("zeta").get<std::string>() == "auto", "stabilizer.zeta must be a number or \"auto\"");
    } else {
      c.stabilizer.zeta = get_or<double>(st, "zeta", 1.0);
      check(*c.stabilizer.zeta > 0.0, "stabilizer.zeta must be > 0");
    }
  }
  c.stabilizer.c = get_or<double>(st, "c", c.stabilizer.c);
  if (st.contains("m") && !st.at("m").is_null()) c.stabilizer.m = get_or<std::size_t>(st, "m", 1);
  c.stabilizer.orthogonalize = get_or<bool>(st, "orthogonalize", c.stabilizer.orthogonalize);
  check(c.stabilizer.kappa >= 1, "stabilizer.kappa must be >= 1");
  check(c.stabilizer.c >= 0.0, "stabilizer.c must be >= 0");

  const json le = j.value("learner", json::object());
  c.learner_q = get_or<std::size_t>(le, "q", c.learner_q);
  check(c.learner_q >= 2, "learner.q must be >= 2");

  const json cl = j.value("classifier", json::object());
  c.classes = get_or<std::size_t>(cl, "K", c.classes);
  c.kernel_c = get_or<double>(cl, "kernel_c", c.kernel_c);
  const std::string nu = get_or<std::string>(cl, "nu_mode", "scaled");
  check(nu == "scaled" || nu == "renormalized", "classifier.nu_mode must be scaled or renormalized");
  c.nu_mode = nu == "scaled" ? NuMode::Scaled : NuMode::Renormalized;
  check(c.classes >= 2, "classifier.K must be >= 2");
  check(c.kernel_c > 0.0, "classifier.kernel_c must be > 0");

  const json me = j.value("metrics", json::object());
  c.metrics_panels = get_or<std::size_t>(me, "panels", c.metrics_panels);
  c.target = get_or<std::string>(me, "target", c.target);
  c.entry_floor = get_or<double>(me, "entry_floor", c.entry_floor);
  const json model = me.value("model", json::object());
  c.model.oscillations = get_or<double>(model, "N", c.model.oscillations);
  c.model.c = get_or<double>(model, "C", c.model.c);
  c.model.c_star = get_or<double>(model, "C_star", c.model.c_star);
  check(c.metrics_panels >= 100 && c.metrics_panels % 2 == 0, "metrics.panels must be even and >= 100");
  check(c.entry_floor > 0.0, "metrics.entry_floor must be > 0");
  check(c.model.c > 0.0 && c.model.c_star > 0.0 && c.model.oscillations > 0.0, "metrics.model must be positive");

  const json fi = j.value("figures", json::object());
  FigureConfig& f = c.figures;
  f.runs = get_or<double>(fi, "R", f.runs);
  f.mean = get_or<double>(fi, "mean", f.mean);
  const std::string amp_mode = get_or<std::string>(fi, "amplitude_mode", "sqrt2");
  check(amp_mode == "sqrt2" || amp_mode == "range", "figures.amplitude_mode must be sqrt2 or range");
  f.unit_delta_amplitude = amp_mode == "sqrt2";
  f.gamma = get_or<double>(fi, "gamma", f.gamma);
  f.lambda_max = get_or<double>(fi, "lambda_max", f.lambda_max);
  f.oscillations = get_or<std::vector<double>>(fi, "N", f.oscillations);
  f.delta_points = get_or<std::size_t>(fi, "delta_points", f.delta_points);
  f.curve_step = get_or<double>(fi, "curve_step", f.curve_step);
  f.panels = get_or<std::size_t>(fi, "panels", f.panels);
  f.grid_step = get_or<double>(fi, "grid_step", f.grid_step);
  f.grid_panels = get_or<std::size_t>(fi, "grid_panels", f.grid_panels);
  if (fi.contains("pairs")) {
    f.pairs.clear();
    for (const auto& p : fi.at("pairs")) {
      CosSqPair pair;
      pair.oscillations = get_or<double>(p, "N", 1.0);
      pair.c = get_or<double>(p, "C", 0.1);
      pair.c_star = get_or<double>(p, "C_star", 0.1);
      f.pairs.push_back(pair);
    }
  }
  check(f.runs > 1.0, "figures.R must be > 1");
  check(f.delta_points >= 8, "figures.delta_points must be >= 8");
  check(f.curve_step > 0.0 && f.grid_step > 0.0 && f.grid_step <= 1.0, "figure steps must be positive");
  check(f.panels >= 100 && f.panels % 2 == 0, "figures.panels must be even and >= 100");
  check(f.grid_panels >= 100 && f.grid_panels % 2 == 0, "figures.grid_panels must be even and >= 100");
  return c;
}

inline PipelineConfig load_config(const fs::path& path) {
  return parse_config(io::read_json(path), path.has_parent_path() ? path.parent_path() : fs::path("."));
}

inline PauliCircuit load_circuit(const PipelineConfig& cfg) {
  require(cfg.circuit_path.has_value(), ErrorCode::Config, "config has no circuit file");
  return io::circuit_from_json(io::read_json(*cfg.circuit_path));
}

inline StateVector input_state(const PipelineConfig& cfg, const PauliCircuit& circuit) {
  require(cfg.input_state < (std::size_t{1} << circuit.n), ErrorCode::Config, "input_state out of range");
  return StateVector::basis(circuit.n, cfg.input_state);
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

inline json cmd_simulate(const PipelineConfig& cfg, const fs::path& out) {
  const PauliCircuit circuit = load_circuit(cfg);
  const StateVector input = input_state(cfg, circuit);
  RunConfig run = cfg.run;
  run.seed = cfg.seed;
  const GateParamMatrix alpha = generate_alpha(circuit, input, run);
  const std::vector<double> objective = per_run_objective(circuit, input, alpha);

  io::write_gate_params(out / "alpha.csv", alpha);
  std::string csv = "r,objective\n";
  for (std::size_t r = 0; r < objective.size(); ++r)
    csv += std::to_string(r + 1) + "," + io::format_double(objective[r]) + "\n";
  io::write_text(out / "objective.csv", csv);

  json manifest = {{"command", "simulate"},
                   {"seed", cfg.seed},
                   {"n", circuit.n},
                   {"L", circuit.gates()},
                   {"R", alpha.runs()},
                   {"objective", objective},
                   {"files", {"alpha.csv", "objective.csv"}}};
  io::write_json(out / "simulate.json", manifest);
  return manifest;
}

inline json cmd_stabilize(const PipelineConfig& cfg, const fs::path& out,
                          const std::optional<fs::path>& alpha_path = std::nullopt) {
  const GateParamMatrix alpha = io::read_gate_params(alpha_path.value_or(out / "alpha.csv"));
  const StabilizerSolution sol = solve_stabilizer(alpha, cfg.stabilizer);

  if (sol.orthogonalized) {
    const double err = max_abs_diff(sol.s.transpose() * sol.s, Matrix::identity(sol.s.cols()));
    require(err <= 1e-10, ErrorCode::InvariantViolation, "S^T S deviates from I by " + std::to_string(err));
  }
  const Matrix delta_beta = sol.s.transpose() * build_differences(alpha);
  const double chi_direct = delta_beta.frobenius_norm() * delta_beta.frobenius_norm();
  require(std::abs(chi_direct - sol.chi) <= 1e-9 * std::max(1.0, sol.chi), ErrorCode::InvariantViolation,
          "chi trace form disagrees with column-norm sum");

  json manifest = io::solution_to_json(sol, cfg.stabilizer);
  manifest["command"] = "stabilize";
  if (!sol.reduced && cfg.circuit_path) {
    const PauliCircuit circuit = load_circuit(cfg);
    if (circuit.gates() == alpha.gates())
      manifest["objective_gap"] = stabilized_objective_gap(circuit, input_state(cfg, circuit), sol.beta, alpha);
  }
  io::write_json(out / "solution.json", manifest);
  io::write_gate_params(out / "beta.csv", sol.beta);
  io::write_gate_params(out / "beta_clamped.csv", sol.beta_clamped);
  return manifest;
}

inline json cmd_learn(const PipelineConfig& cfg, const fs::path& out,
                      const std::optional<fs::path>& alpha_path = std::nullopt) {
  const GateParamMatrix alpha = io::read_gate_params(alpha_path.value_or(out / "alpha.csv"));
  const Matrix s = io::stabilizer_matrix_from_json(io::read_json(out / "solution.json"));
  const TrainingSet ts = build_training_set(s.rows(), cfg.learner_q, cfg.seed);
  const LearnerOutput result = learn_all(ts, s, alpha);
  json manifest = io::learner_to_json(result);
  io::write_json(out / "learner.json", manifest);
  return manifest;
}

inline json cmd_classify(const PipelineConfig& cfg, const fs::path& out,
                         const std::optional<fs::path>& beta_path = std::nullopt) {
  const GateParamMatrix beta = io::read_gate_params(beta_path.value_or(out / "beta_clamped.csv"));
  const ClassModel model = fit_classes(beta, cfg.classes, cfg.seed, cfg.kernel_c, cfg.nu_mode);
  const std::vector<ClassAssignment> rows = classify_all(model, beta);
  io::write_json(out / "class_model.json", io::class_model_to_json(model));
  io::write_text(out / "assignments.csv", io::assignments_to_csv(rows));
  return {{"command", "classify"}, {"model", io::class_model_to_json(model)}, {"rows", rows.size()}};
}

namespace detail {

inline GateParamMatrix floored(const GateParamMatrix& m, double floor, std::size_t& count) {
  GateParamMatrix out = m;
  for (std::size_t r = 0; r < m.runs(); ++r)
    for (std::size_t l = 0; l < m.gates(); ++l)
      if (out(l, r) < floor) {
        out(l, r) = floor;
        ++count;
      }
  return out;
}

// Per-run mean gate parameter, linearly interpolated between integer runs.
inline auto run_mean_curve(const GateParamMatrix& m) {
  std::vector<double> means(m.runs(), 0.0);
  for (std::size_t r = 0; r < m.runs(); ++r) {
    for (std::size_t l = 0; l < m.gates(); ++l) means[r] += m(l, r);
    means[r] /= static_cast<double>(m.gates());
  }
  return [means](double r) {
    const double x = std::clamp(r - 1.0, 0.0, static_cast<double>(means.size() - 1));
    const auto i = std::min(static_cast<std::size_t>(x), means.size() - 2);
    const double t = x - static_cast<double>(i);
    return (1.0 - t) * means[i] + t * means[i + 1];
  };
}

}  // namespace detail

inline json cmd_metrics(const PipelineConfig& cfg, const fs::path& out,
                        const std::optional<fs::path>& beta_path = std::nullopt) {
  const GateParamMatrix beta = io::read_gate_params(beta_path.value_or(out / "beta_clamped.csv"));
  GateParamMatrix target;
  if (cfg.target == "alpha") {
    target = io::read_gate_params(out / "alpha.csv");
  } else {
    target = io::read_gate_params(cfg.base_dir / cfg.target);
  }
  std::size_t floored = 0;
  const TargetPair pair{detail::floored(beta, cfg.entry_floor, floored),
                        detail::floored(target, cfg.entry_floor, floored)};
  const std::vector<double> curve = entropy_curve(pair);
  const double runs = static_cast<double>(beta.runs());

  json delta_json = nullptr;
  bool unbounded = false;
  if (curve.size() >= 8) {
    const DeltaStability d = delta_stability(curve, run_index_window(runs), runs);
    unbounded = d.unbounded;
    if (!d.unbounded) delta_json = d.delta;
  }

  json per_run = json::array();
  double total = 0.0;
  for (std::size_t r = 0; r < curve.size(); ++r) {
    per_run.push_back({{"r", r + 1}, {"f_D", curve[r]}, {"delta", delta_json}});
    total += curve[r];
  }

  json mu_data = nullptr;
  try {
    mu_data = correlation_mu(detail::run_mean_curve(pair.beta), detail::run_mean_curve(pair.beta_star),
                             run_index_window(runs), cfg.metrics_panels);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroVariance) throw;
  }

  const CosSqModel f = CosSqModel::make(runs, cfg.model.oscillations, cfg.model.c);
  const CosSqModel g = CosSqModel::make(runs, cfg.model.oscillations, cfg.model.c_star);
  const double mu_numeric = correlation_mu([&](double r) { return cos_sq_f(f, r); },
                                           [&](double r) { return cos_sq_f(g, r); }, runs, cfg.metrics_panels);
  json mu_closed = nullptr;
  json discrepancy = nullptr;
  try {
    const double closed = mu_closed_form(cfg.model.c, cfg.model.c_star, cfg.model.oscillations, runs);
    mu_closed = closed;
    discrepancy = std::abs(closed - mu_numeric);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularParameters) throw;
  }

  json report = {{"per_run", per_run},
                 {"D_total", total},
                 {"delta_unbounded", unbounded},
                 {"mu_numeric", mu_numeric},
                 {"mu_closed_form", mu_closed},
                 {"discrepancy", discrepancy},
                 {"mu_model", {{"N", cfg.model.oscillations}, {"C", cfg.model.c}, {"C_star", cfg.model.c_star}, {"R", runs}}},
                 {"mu_data", mu_data},
                 {"target", cfg.target},
                 {"floored_entries", floored}};
  io::write_json(out / "report.json", report);
  return report;
}

inline json cmd_figures(const PipelineConfig& cfg, const fs::path& out) {
  const FigureConfig& fc = cfg.figures;
  const double runs = fc.runs;

  auto sinusoid = [&](double n) {
    return fc.unit_delta_amplitude ? SinusoidModel::with_amplitude(runs, n, kUnitDeltaAmplitude, fc.mean)
                                   : SinusoidModel::from_range(runs, n, fc.gamma, fc.lambda_max);
  };
  auto grid = [](double first, double last, double step) {
    const auto count = static_cast<std::size_t>(std::llround((last - first) / step)) + 1;
    std::vector<double> xs(count);
    for (std::size_t i = 0; i < count; ++i) xs[i] = first + step * static_cast<double>(i);
    return xs;
  };

  // A.1: sinusoid entropy curves and their δ.
  {
    std::string csv = "r";
    for (double n : fc.oscillations) csv += ",N" + io::format_double(n);
    csv += "\n";
    for (double r : grid(1.0, runs, fc.curve_step)) {
      csv += io::format_double(r);
      for (double n : fc.oscillations) csv += "," + io::format_double(sinusoid_f(sinusoid(n), r));
      csv += "\n";
    }
    io::write_text(out / "fig_a1_curves.csv", csv);
  }
  json a1 = json::array();
  {
    std::string csv = "N,amp,Delta,delta_numeric,delta_analytic\n";
    for (double n : fc.oscillations) {
      const SinusoidModel model = sinusoid(n);
      const auto samples =
          sample_window([&](double r) { return sinusoid_f(model, r); }, full_span_window(runs), fc.delta_points);
      const DeltaStability d = delta_stability(samples, full_span_window(runs), runs);
      const double analytic = model.amp > 0.0 ? std::numbers::sqrt2 / (model.amp * n) : 0.0;
      csv += io::format_double(n) + "," + io::format_double(model.amp) + "," +
             io::format_double(d.mean_sq_derivative) + "," + (d.unbounded ? std::string() : io::format_double(d.delta)) +
             "," + io::format_double(analytic) + "\n";
      a1.push_back({{"N", n},
                    {"amp", model.amp},
                    {"Delta", d.mean_sq_derivative},
                    {"delta", d.unbounded ? json(nullptr) : json(d.delta)},
                    {"delta_analytic", analytic}});
    }
    io::write_text(out / "fig_a1_delta.csv", csv);
  }

  // A.2: cos² pairs and their correlation, numeric against closed form.
  json a2 = json::array();
  {
    std::vector<std::pair<CosSqModel, CosSqModel>> models;
    for (const auto& p : fc.pairs)
      models.emplace_back(CosSqModel::make(runs, p.oscillations, p.c), CosSqModel::make(runs, p.oscillations, p.c_star));
    std::string csv = "r";
    for (std::size_t i = 0; i < models.size(); ++i)
      csv += ",f_" + std::to_string(i + 1) + ",f_star_" + std::to_string(i + 1);
    csv += "\n";
    for (double r : grid(0.0, runs, fc.curve_step)) {
      csv += io::format_double(r);
      for (const auto& [f, g] : models) csv += "," + io::format_double(cos_sq_f(f, r)) + "," + io::format_double(cos_sq_f(g, r));
      csv += "\n";
    }
    io::write_text(out / "fig_a2_curves.csv", csv);

    std::string mu_csv = "N,C,C_star,mu_numeric,mu_closed_form,discrepancy\n";
    for (std::size_t i = 0; i < models.size(); ++i) {
      const auto& [f, g] = models[i];
      const auto& p = fc.pairs[i];
      const double numeric = correlation_mu([&](double r) { return cos_sq_f(f, r); },
                                            [&](double r) { return cos_sq_f(g, r); }, runs, fc.panels);
      json closed = nullptr;
      json gap = nullptr;
      std::string closed_cell;
      std::string gap_cell;
      if (std::abs(p.c - p.c_star) >= 1e-9) {
        const double value = mu_closed_form(p.c, p.c_star, p.oscillations, runs);
        closed = value;
        gap = std::abs(value - numeric);
        closed_cell = io::format_double(value);
        gap_cell = io::format_double(std::abs(value - numeric));
      }
      mu_csv += io::format_double(p.oscillations) + "," + io::format_double(p.c) + "," + io::format_double(p.c_star) +
                "," + io::format_double(numeric) + "," + closed_cell + "," + gap_cell + "\n";
      a2.push_back({{"N", p.oscillations},
                    {"C", p.c},
                    {"C_star", p.c_star},
                    {"mu_numeric", numeric},
                    {"mu_closed_form", closed},
                    {"discrepancy", gap}});
    }
    io::write_text(out / "fig_a2_mu.csv", mu_csv);
  }

  // A.3: μ over the (C, C*) grid. C or C* = 0 has no variance and is left
  // empty; the closed form is also empty on the singular diagonal.
  std::size_t grid_rows = 0;
  std::size_t masked = 0;
  {
    const auto cs = grid(0.0, 1.0, fc.grid_step);
    std::string csv = "N,C,C_star,mu_numeric,mu_closed_form\n";
    for (double n : fc.oscillations) {
      for (double c : cs) {
        for (double c_star : cs) {
          ++grid_rows;
          csv += io::format_double(n) + "," + io::format_double(c) + "," + io::format_double(c_star) + ",";
          if (c <= 0.0 || c_star <= 0.0) {
            ++masked;
            csv += ",\n";
            continue;
          }
          const CosSqModel f = CosSqModel::make(runs, n, c);
          const CosSqModel g = CosSqModel::make(runs, n, c_star);
          csv += io::format_double(correlation_mu([&](double r) { return cos_sq_f(f, r); },
                                                  [&](double r) { return cos_sq_f(g, r); }, runs, fc.grid_panels));
          csv += ",";
          if (std::abs(c - c_star) >= 1e-9) {
            csv += io::format_double(mu_closed_form(c, c_star, n, runs));
          } else {
            ++masked;
          }
          csv += "\n";
        }
      }
    }
    io::write_text(out / "fig_a3_grid.csv", csv);
  }

  json manifest = {{"command", "figures"},
                   {"R", runs},
                   {"amplitude_mode", fc.unit_delta_amplitude ? "sqrt2" : "range"},
                   {"a1", a1},
                   {"a2", a2},
                   {"a3", {{"rows", grid_rows}, {"masked_cells", masked}, {"grid_panels", fc.grid_panels}}},
                   {"files",
                    {"fig_a1_curves.csv", "fig_a1_delta.csv", "fig_a2_curves.csv", "fig_a2_mu.csv", "fig_a3_grid.csv"}}};
  io::write_json(out / "figures.json", manifest);
  return manifest;
}

}  // namespace qstab::pipeline
