#include "decoykit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "decoykit/bounds.hpp"
#include "decoykit/channel.hpp"
#include "decoykit/distinguish.hpp"
#include "decoykit/io.hpp"
#include "decoykit/optimize.hpp"
#include "decoykit/rate.hpp"
#include "decoykit/robust.hpp"
#include "decoykit/stats.hpp"

namespace decoykit::cli {

namespace {

struct RatePipelineResult {
  RateReport report;
  SpsBounds sps;
};

// Shared analysis path: observation bounds, decoy programs (optionally under
// intensity uncertainty or a distinguishability preset), then the key length.
RatePipelineResult run_rate_pipeline(const Config& cfg,
                                     const SessionTally& tally,
                                     double uncertainty,
                                     const std::string& q_preset) {
  const ObservationBounds obs =
      observation_bounds(tally, cfg.params.epsilon);
  RatePipelineResult out;
  int extra_bounds = 0;

  if (!q_preset.empty()) {
    if (uncertainty > 0.0)
      throw std::runtime_error(
          "intensity uncertainty cannot be combined with --q-preset");
    DistinguishabilityMatrix q =
        q_preset == "config"
            ? DistinguishabilityMatrix::from_protocol(cfg.protocol,
                                                      cfg.params.k_max)
            : q_preset == "four-laser"
                  ? DistinguishabilityMatrix::four_laser(cfg.protocol,
                                                         cfg.params.k_max)
                  : throw std::runtime_error("unknown --q-preset '" +
                                             q_preset + "'");
    out.sps.p_single = min_single_photon_distinguishable(cfg.protocol, obs, q,
                                                         cfg.params.k_max);
    out.sps.p_dark =
        min_dark_distinguishable(cfg.protocol, obs, q, cfg.params.k_max);
    out.sps.b1_max =
        b1_via_dark_subtraction(tally, out.sps, cfg.params, cfg.protocol);
    extra_bounds = 2;  // error upper bound + dark-error lower bound
  } else if (uncertainty > 0.0) {
    out.sps =
        bounds_under_uncertainty(cfg.protocol, obs, cfg.params, uncertainty);
  } else {
    out.sps = solve_sps_bounds(cfg.protocol, obs, cfg.params.k_max);
  }

  out.report = key_length(tally, out.sps, cfg.params, cfg.protocol);
  out.report.bound_applications =
      4 * static_cast<int>(tally.levels.size()) + extra_bounds;
  return out;
}

std::ostream& open_output(const std::string& path, std::ofstream& file,
                          std::ostream& fallback) {
  if (path.empty() || path == "-") return fallback;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open output file: " + path);
  return file;
}

struct ProtocolSummary {
  double mu_low = 0.0, mu_high = 0.0;
  double p_vacuum = 0.0, p_low = 0.0, p_high = 0.0;
  int high_index = 0;
};

ProtocolSummary summarize(const ProtocolSpec& protocol) {
  ProtocolSummary s;
  int low = -1, high = -1;
  for (std::size_t j = 0; j < protocol.levels.size(); ++j) {
    const auto& lv = protocol.levels[j];
    if (lv.mu <= 0.0) {
      s.p_vacuum = lv.probability;
      continue;
    }
    if (low < 0 || lv.mu < protocol.levels[static_cast<std::size_t>(low)].mu)
      low = static_cast<int>(j);
    if (high < 0 || lv.mu > protocol.levels[static_cast<std::size_t>(high)].mu)
      high = static_cast<int>(j);
  }
  if (low >= 0) {
    s.mu_low = protocol.levels[static_cast<std::size_t>(low)].mu;
    s.p_low = protocol.levels[static_cast<std::size_t>(low)].probability;
  }
  if (high >= 0) {
    s.mu_high = protocol.levels[static_cast<std::size_t>(high)].mu;
    s.p_high = protocol.levels[static_cast<std::size_t>(high)].probability;
    s.high_index = high;
  }
  return s;
}

void require_valid(const Config& cfg) {
  const auto violations = validate(cfg.protocol, cfg.params);
  if (!violations.empty()) {
    std::ostringstream os;
    os << "invalid configuration:";
    for (const auto& v : violations) os << "\n  - " << v;
    throw std::runtime_error(os.str());
  }
}

std::vector<double> sweep_grid(double from, double to, int points, bool log) {
  if (points < 1) throw std::runtime_error("--points must be >= 1");
  std::vector<double> grid;
  if (points == 1) {
    grid.push_back(from);
    return grid;
  }
  if (log && (from <= 0.0 || to <= 0.0))
    throw std::runtime_error("--log needs positive endpoints");
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    grid.push_back(log ? from * std::pow(to / from, t)
                       : from + t * (to - from));
  }
  return grid;
}

void apply_sweep_param(SystemParams& params, const std::string& name,
                       double value) {
  if (name == "epsilon")
    params.epsilon = value;
  else if (name == "n_total")
    params.n_total = value;
  else if (name == "y0")
    params.y0 = value;
  else if (name == "visibility")
    params.visibility = value;
  else if (name == "eta")
    params.eta = value;
  else if (name == "loss_db")
    params.eta = std::pow(10.0, -value / 10.0);
  else if (name == "f_ec")
    params.f_ec = value;
  else if (name == "sift")
    params.sift = value;
  else if (name == "k_max")
    params.k_max = static_cast<int>(std::llround(value));
  else
    throw std::runtime_error("unknown sweep parameter '" + name + "'");
}

// Runs fn(i) for i in [0, count) across up to jobs threads.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(
      static_cast<std::size_t>(std::min(jobs, count)));
  for (int w = 0; w < std::min(jobs, count); ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < count; i += std::min(jobs, count)) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

int cmd_rate(const std::string& config_path, const std::string& tally_path,
             double uncertainty, const std::string& q_preset,
             std::ostream& out) {
  const Config cfg = load_config(config_path);
  require_valid(cfg);
  const SessionTally tally = load_tally(tally_path);
  const auto tally_issues = validate_tally(tally, cfg.protocol, cfg.params);
  if (!tally_issues.empty()) {
    std::ostringstream os;
    os << "invalid tally:";
    for (const auto& v : tally_issues) os << "\n  - " << v;
    throw std::runtime_error(os.str());
  }

  const RatePipelineResult r =
      run_rate_pipeline(cfg, tally, uncertainty, q_preset);

  out << "levels: " << cfg.protocol.levels.size() << "\n";
  out << "bounds applied: " << r.report.bound_applications << "\n";
  out << "b1_max = " << format_double(r.report.b1_max) << "\n";
  for (std::size_t j = 0; j < cfg.protocol.levels.size(); ++j) {
    const auto& lv = r.report.levels[j];
    out << "level " << j << ": mu = "
        << format_double(cfg.protocol.levels[j].mu);
    if (!cfg.protocol.levels[j].encodes_key) {
      out << " (decoy)\n";
      continue;
    }
    if (lv.skipped) {
      out << " (key, no received counts; skipped)\n";
      continue;
    }
    out << " S = " << format_double(lv.single_photons)
        << " D = " << format_double(lv.dark_counts)
        << " EC = " << format_double(lv.ec_cost)
        << " PA = " << format_double(lv.pa_cost)
        << " BER = " << format_double(lv.ber) << "\n";
  }
  out << "f_pa = " << format_double(r.report.f_pa) << "\n";
  if (r.report.clamped) out << "note: raw key-length sum was negative\n";
  out << "K = " << format_double(r.report.key_length) << "\n";
  out << "R = " << format_double(r.report.rate) << "\n";
  return r.report.key_length > 0.0 ? 0 : 2;
}

int cmd_simulate(const std::string& config_path, std::uint64_t seed,
                 bool expected, const std::string& out_path,
                 std::ostream& out) {
  const Config cfg = load_config(config_path);
  require_valid(cfg);
  const ChannelModel channel = ChannelModel::from(cfg.params);
  const SessionTally tally =
      expected ? expected_tally(cfg.protocol, cfg.params, channel)
               : sample_tally(cfg.protocol, cfg.params, channel, seed);
  std::ofstream file;
  write_tally(open_output(out_path, file, out), tally);
  return 0;
}

int cmd_optimize(const std::string& config_path, int levels,
                 const OptimizeOptions& options, const std::string& out_path,
                 std::ostream& out) {
  const Config cfg = load_config(config_path);
  require_valid(cfg);
  const ChannelModel channel = ChannelModel::from(cfg.params);
  const OptimizeResult res =
      optimize_protocol(cfg.params, channel, levels, options);

  out << "rate = " << format_double(res.rate) << "\n";
  for (std::size_t j = 0; j < res.protocol.levels.size(); ++j) {
    const auto& lv = res.protocol.levels[j];
    out << "level " << j << ": mu = " << format_double(lv.mu)
        << " prob = " << format_double(lv.probability)
        << (lv.encodes_key ? " (key)" : " (decoy)") << "\n";
  }
  out << "evaluations = " << res.evaluations << "\n";
  if (!out_path.empty() && out_path != "-") {
    Config optimized = cfg;
    optimized.protocol = res.protocol;
    std::ofstream file;
    write_config(open_output(out_path, file, out), optimized);
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& vary,
              double from, double to, int points, bool log_grid,
              bool reoptimize, int levels, const OptimizeOptions& options,
              double uncertainty, int jobs, const std::string& out_path,
              std::ostream& out) {
  const Config cfg = load_config(config_path);
  require_valid(cfg);
  const std::vector<double> grid = sweep_grid(from, to, points, log_grid);

  std::vector<std::string> rows(grid.size());
  parallel_for(static_cast<int>(grid.size()), jobs, [&](int i) {
    SystemParams params = cfg.params;
    apply_sweep_param(params, vary, grid[static_cast<std::size_t>(i)]);
    const ChannelModel channel = ChannelModel::from(params);

    ProtocolSpec protocol = cfg.protocol;
    if (reoptimize)
      protocol = optimize_protocol(params, channel, levels, options).protocol;

    Config point = cfg;
    point.params = params;
    point.protocol = protocol;
    const SessionTally tally = expected_tally(protocol, params, channel);
    const RatePipelineResult r =
        run_rate_pipeline(point, tally, uncertainty, "");

    const ProtocolSummary s = summarize(protocol);
    std::ostringstream os;
    os << format_double(grid[static_cast<std::size_t>(i)]) << ","
       << format_double(r.report.rate) << ","
       << format_double(r.report.key_length) << "," << format_double(s.mu_low)
       << "," << format_double(s.mu_high) << "," << format_double(s.p_vacuum)
       << "," << format_double(s.p_low) << "," << format_double(s.p_high)
       << "," << format_double(r.sps.b1_max) << ","
       << format_double(
              r.sps.p_single[static_cast<std::size_t>(s.high_index)])
       << ","
       << format_double(r.sps.p_dark[static_cast<std::size_t>(s.high_index)]);
    rows[static_cast<std::size_t>(i)] = os.str();
  });

  std::ofstream file;
  std::ostream& sink = open_output(out_path, file, out);
  sink << vary
       << ",rate,K,mu_low,mu_high,p_vacuum,p_low,p_high,b1_max,P_S_high,"
          "P_D_high\n";
  for (const auto& row : rows) sink << row << "\n";
  return 0;
}

int cmd_detectors(const std::string& config_path, double from_km, double to_km,
                  int points, int levels, const OptimizeOptions& options,
                  int jobs, const std::string& out_path, std::ostream& out) {
  const Config cfg = load_config(config_path);
  require_valid(cfg);
  const std::vector<double> grid = sweep_grid(from_km, to_km, points, false);
  const std::vector<std::string> names = {"snspd", "tes", "apd"};

  std::vector<std::array<double, 3>> rates(grid.size());
  const int total = static_cast<int>(grid.size()) * 3;
  parallel_for(total, jobs, [&](int idx) {
    const int i = idx / 3;
    const int d = idx % 3;
    const DetectorPreset preset = detector_preset(names[static_cast<std::size_t>(d)]);
    const SystemParams params = apply_detector(
        cfg.params, preset, grid[static_cast<std::size_t>(i)]);
    const ChannelModel channel = ChannelModel::from(params);
    const OptimizeResult res =
        optimize_protocol(params, channel, levels, options);
    rates[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)] = res.rate;
  });

  std::ofstream file;
  std::ostream& sink = open_output(out_path, file, out);
  sink << "distance_km,rate_snspd,rate_tes,rate_apd\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    sink << format_double(grid[i]);
    for (int d = 0; d < 3; ++d)
      sink << "," << format_double(rates[i][static_cast<std::size_t>(d)]);
    sink << "\n";
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"decoykit: finite-statistics decoy-state BB84 analysis"};
  app.require_subcommand(1);

  std::string config_path, tally_path, out_path, vary, q_preset;
  double uncertainty = 0.0;
  std::uint64_t seed = 1;
  bool expected = false, log_grid = false, reoptimize = false;
  double from = 0.0, to = 1.0;
  int points = 11, levels = 3, jobs = 1;
  OptimizeOptions opts;

  auto* rate = app.add_subcommand("rate", "key rate from a measured tally");
  rate->add_option("--config", config_path)->required();
  rate->add_option("--tally", tally_path)->required();
  rate->add_option("--intensity-uncertainty", uncertainty);
  rate->add_option("--q-preset", q_preset);

  auto* simulate = app.add_subcommand("simulate", "write a session tally");
  simulate->add_option("--config", config_path)->required();
  simulate->add_option("--seed", seed);
  simulate->add_flag("--expected", expected,
                     "deterministic expectation-mode tally");
  simulate->add_option("--out", out_path);

  auto* optimize = app.add_subcommand("optimize", "search for the best protocol");
  optimize->add_option("--config", config_path)->required();
  optimize->add_option("--levels", levels)->check(CLI::Range(1, 4));
  optimize->add_option("--starts", opts.starts);
  optimize->add_option("--max-evals", opts.max_evals_per_start);
  optimize->add_option("--seed", opts.seed);
  optimize->add_option("--jobs", opts.jobs);
  optimize->add_option("--out", out_path);

  auto* sweep = app.add_subcommand("sweep", "parameter sweep as CSV");
  sweep->add_option("--config", config_path)->required();
  sweep->add_option("--vary", vary)->required();
  sweep->add_option("--from", from)->required();
  sweep->add_option("--to", to)->required();
  sweep->add_option("--points", points);
  sweep->add_flag("--log", log_grid, "log-spaced grid");
  sweep->add_flag("--optimize", reoptimize, "re-optimize at each point");
  sweep->add_option("--levels", levels)->check(CLI::Range(1, 4));
  sweep->add_option("--starts", opts.starts);
  sweep->add_option("--max-evals", opts.max_evals_per_start);
  sweep->add_option("--seed", opts.seed);
  sweep->add_option("--intensity-uncertainty", uncertainty);
  sweep->add_option("--jobs", jobs);
  sweep->add_option("--out", out_path);

  double det_from = 0.0, det_to = 200.0;
  int det_points = 21;
  OptimizeOptions det_opts;
  det_opts.starts = 3;
  det_opts.max_evals_per_start = 250;
  auto* detectors =
      app.add_subcommand("detectors", "rate vs fiber distance per detector");
  detectors->add_option("--config", config_path)->required();
  detectors->add_option("--from", det_from);
  detectors->add_option("--to", det_to);
  detectors->add_option("--points", det_points);
  detectors->add_option("--levels", levels)->check(CLI::Range(1, 4));
  detectors->add_option("--starts", det_opts.starts);
  detectors->add_option("--max-evals", det_opts.max_evals_per_start);
  detectors->add_option("--seed", det_opts.seed);
  detectors->add_option("--jobs", jobs);
  detectors->add_option("--out", out_path);

  std::vector<std::string> argv = args;
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (rate->parsed())
      return cmd_rate(config_path, tally_path, uncertainty, q_preset, out);
    if (simulate->parsed())
      return cmd_simulate(config_path, seed, expected, out_path, out);
    if (optimize->parsed())
      return cmd_optimize(config_path, levels, opts, out_path, out);
    if (sweep->parsed())
      return cmd_sweep(config_path, vary, from, to, points, log_grid,
                       reoptimize, levels, opts, uncertainty, jobs, out_path,
                       out);
    if (detectors->parsed())
      return cmd_detectors(config_path, det_from, det_to, det_points, levels,
                           det_opts, jobs, out_path, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << "error: no subcommand\n";
  return 1;
}

}  // namespace decoykit::cli
