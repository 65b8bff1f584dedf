// Experiment harness for the self-balancing walk, its sparse Komlos variant,
// and the dyadic geometry reductions. Emits reproducible CSV: identical
// command lines with identical seeds produce byte-identical bodies.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sbwalk/baselines.hpp"
#include "sbwalk/dyadic.hpp"
#include "sbwalk/errors.hpp"
#include "sbwalk/geometry.hpp"
#include "sbwalk/harness.hpp"
#include "sbwalk/io.hpp"
#include "sbwalk/komlos.hpp"
#include "sbwalk/rng.hpp"
#include "sbwalk/sources.hpp"
#include "sbwalk/stats.hpp"
#include "sbwalk/walk.hpp"

namespace {

using namespace sbwalk;

struct CommonOpts {
  std::uint64_t seed = 1;
  std::int64_t trials = 1;
  double delta = 0.01;
  std::string output;
  int threads = 1;
  CLI::Option* delta_opt = nullptr;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
  sub->add_option("--seed", opts.seed, "master seed; trial i derives its own");
  sub->add_option("--trials", opts.trials, "independent trials")
      ->check(CLI::PositiveNumber);
  opts.delta_opt = sub->add_option("--delta", opts.delta,
                                   "failure budget in (0,1)");
  sub->add_option("--output", opts.output, "CSV output path (default stdout)");
  sub->add_option("--threads", opts.threads,
                  "worker threads for trial fan-out (0 = hardware)");
}

void emit(const CommonOpts& opts, const std::string& body) {
  if (opts.output.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(opts.output);
    if (!out) throw IoError("cannot open output file: " + opts.output);
    out << body;
  }
}

std::string csv_opt_step(const std::optional<std::int64_t>& step) {
  return step ? std::to_string(*step) : std::string();
}

// --- balance ------------------------------------------------------------------

struct SourceOpts {
  std::string input;  // dense stream file; exclusive with kind
  SourceSpec spec;
  std::int64_t t = 0;
};

void add_source_opts(CLI::App* sub, SourceOpts& opts, bool adaptive_allowed) {
  sub->add_option("--input", opts.input, "dense stream file (\"n t\" header)");
  const std::string kinds = adaptive_allowed
                                ? "repeated-basis|iid|sparse|adaptive"
                                : "repeated-basis|iid|sparse";
  sub->add_option("--source", opts.spec.kind, "source kind: " + kinds);
  sub->add_option("--n", opts.spec.n, "ambient dimension (source mode)");
  sub->add_option("-t,--t", opts.t, "horizon (source mode)");
  sub->add_option("--s", opts.spec.s, "sparsity for sparse/iid-sparse sources");
  sub->add_option("--distribution", opts.spec.distribution,
                  "iid distribution: cube|sphere|sparse");
}

struct BalanceRow {
  std::uint64_t seed = 0;
  bool failed = false;
  std::optional<std::int64_t> fail_step;
  double max_sup = 0.0;
  double max_inner = 0.0;
};

void cmd_balance(const CommonOpts& common, const SourceOpts& source,
                 const std::string& trace_path) {
  std::vector<Eigen::VectorXd> fixed;
  int n = 0;
  std::int64_t t = 0;
  if (!source.input.empty()) {
    DenseStreamFile file = read_dense_stream(source.input);
    n = file.n;
    t = file.t;
    fixed = std::move(file.vectors);
  } else {
    n = source.spec.n;
    t = source.t;
    if (n <= 0 || t <= 0)
      throw ValidationError("balance: need --input, or --source with --n and -t");
  }
  const WalkConfig config = WalkConfig::online(n, t, common.delta);

  auto run_one = [&](std::uint64_t seed) {
    if (!fixed.empty()) {
      VectorListStream stream(fixed);
      return run_balance(stream, config, seed);
    }
    SourceSpec spec = source.spec;
    spec.seed = splitmix64_mix(seed);
    auto src = make_source(spec);
    return run_balance(*src, config, seed);
  };

  auto rows = run_trials(
      common.trials, common.seed, common.threads,
      [&](std::int64_t, std::uint64_t seed) {
        const WalkTrace trace = run_one(seed);
        BalanceRow row;
        row.seed = seed;
        row.failed = trace.failed;
        row.fail_step = trace.fail_step;
        row.max_sup = trace.max_sup_norm();
        row.max_inner = trace.max_inner;
        return row;
      });

  std::ostringstream body;
  body << "# sbwalk balance\n";
  body << "# n=" << n << " t=" << t << " delta=" << format_double(common.delta)
       << " c=" << format_double(config.c) << " trials=" << common.trials
       << " master_seed=" << common.seed << "\n";
  body << "trial,seed,failed,fail_step,max_sup_norm,max_inner,c\n";
  std::size_t failures = 0;
  std::vector<double> sups;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const BalanceRow& row = rows[i];
    failures += row.failed ? 1 : 0;
    sups.push_back(row.max_sup);
    body << i << "," << row.seed << "," << (row.failed ? 1 : 0) << ","
         << csv_opt_step(row.fail_step) << "," << format_double(row.max_sup)
         << "," << format_double(row.max_inner) << ","
         << format_double(config.c) << "\n";
  }
  body << "# summary: failure_fraction,median_max_sup_norm,p95_max_sup_norm\n";
  body << "summary,"
       << format_double(static_cast<double>(failures) /
                        static_cast<double>(rows.size()))
       << "," << format_double(median(sups)) << ","
       << format_double(percentile(sups, 0.95)) << "\n";
  emit(common, body.str());

  if (!trace_path.empty()) {
    const WalkTrace trace = run_one(trial_seed(common.seed, 0));
    std::ofstream out(trace_path);
    if (!out) throw IoError("cannot open trace file: " + trace_path);
    write_trace_csv(out, trace);
  }
}

// --- komlos -------------------------------------------------------------------

void cmd_komlos(const CommonOpts& common, const std::string& matrix_path,
                const std::string& signs_path) {
  if (matrix_path.empty()) throw ValidationError("komlos: --input is required");
  const SparseColumnMatrix A = read_matrix_market(matrix_path);
  double delta = common.delta;
  if (common.delta_opt->count() == 0) {
    const double t = static_cast<double>(A.cols());
    delta = 1.0 / (t * t);
    if (!(delta > 0.0 && delta < 1.0))
      throw ValidationError(
          "komlos: default delta = t^-2 is degenerate for t = 1; pass --delta");
  }

  struct Row {
    KomlosResult result;
    double wall_ms = 0.0;
  };
  auto rows = run_trials(common.trials, common.seed, common.threads,
                         [&](std::int64_t, std::uint64_t seed) {
                           const auto start = std::chrono::steady_clock::now();
                           Row row{run_komlos(A, delta, seed), 0.0};
                           const auto stop = std::chrono::steady_clock::now();
                           row.wall_ms =
                               std::chrono::duration<double, std::milli>(
                                   stop - start)
                                   .count();
                           return row;
                         });

  std::ostringstream body;
  body << "# sbwalk komlos\n";
  body << "# n=" << A.rows() << " t=" << A.cols() << " nnz=" << A.nnz()
       << " delta=" << format_double(delta) << " trials=" << common.trials
       << " master_seed=" << common.seed << "\n";
  body << "# wall_ms is informational and varies run to run\n";
  body << "trial,seed,c,threshold,final_sup_norm,failed_midrun,exceeded_final,"
          "nnz,touched_entries,wall_ms\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const KomlosResult& r = rows[i].result;
    body << i << "," << r.seed << "," << format_double(r.c) << ","
         << format_double(r.threshold) << "," << format_double(r.final_sup_norm)
         << "," << (r.failed_midrun ? 1 : 0) << "," << (r.exceeded_final ? 1 : 0)
         << "," << r.nnz << "," << r.touched_entries << ","
         << format_double(rows[i].wall_ms) << "\n";
  }
  emit(common, body.str());

  if (!signs_path.empty()) write_signs(signs_path, rows.front().result.x);
  std::cout << komlos_summary_json(rows.front().result) << "\n";
}

// --- interval / tusnady ---------------------------------------------------------

struct GeometryOpts {
  int d = 1;
  std::int64_t t = 0;
  std::string dist = "uniform";  // uniform|power
  double power_exponent = 2.0;
  std::string points_path;
  bool offline = false;
  std::int64_t sample_grid = 0;  // >0: empirical grid with this budget
  std::string rule = "balance";
  std::string queries_path;
  std::vector<std::int64_t> sweep;
  std::string export_tracker;
  // single interval query flags
  int query_dim = 0;
  double query_lo = -1.0;
  double query_hi = -1.0;
  std::int64_t query_at = 0;
  CLI::Option* lo_opt = nullptr;
  CLI::Option* hi_opt = nullptr;
};

SigningRule parse_rule(const std::string& name) {
  if (name == "balance") return SigningRule::kBalance;
  if (name == "random") return SigningRule::kRandom;
  throw ValidationError("unknown signing rule: " + name);
}

ProductDistribution make_distribution(const GeometryOpts& opts) {
  if (opts.dist == "uniform") return ProductDistribution::uniform_cube(opts.d);
  if (opts.dist == "power")
    return ProductDistribution::power_cube(opts.d, opts.power_exponent);
  throw ValidationError("unknown distribution: " + opts.dist);
}

std::vector<Eigen::VectorXd> sample_points(const ProductDistribution& dist,
                                           std::int64_t t, std::uint64_t seed) {
  RandomStream rng(splitmix64_mix(seed));
  std::vector<Eigen::VectorXd> points;
  points.reserve(static_cast<std::size_t>(t));
  for (std::int64_t i = 0; i < t; ++i) points.push_back(dist.sample(rng));
  return points;
}

struct GeometryRunInputs {
  std::vector<Eigen::VectorXd> points;  // empty in sampled-online mode
  std::optional<QuantileGrid> grid;     // empty -> oracle grid from dist
};

// Resolve the grid/point configuration shared by interval and box modes.
GeometryRunInputs resolve_inputs(const GeometryOpts& opts,
                                 const ProductDistribution& dist,
                                 std::int64_t t, std::uint64_t grid_seed) {
  GeometryRunInputs inputs;
  if (!opts.points_path.empty()) {
    PointSetFile file = read_points(opts.points_path);
    if (file.d != opts.d)
      throw ValidationError("points file dimension differs from --d");
    if (file.t != t)
      throw ValidationError("points file horizon differs from the requested t");
    inputs.points = std::move(file.points);
    if (opts.offline) {
      inputs.grid = build_quantile_grid_from_points(inputs.points, opts.d);
      return inputs;
    }
  }
  if (opts.sample_grid > 0)
    inputs.grid = build_quantile_grid_sampled(dist, t, opts.sample_grid,
                                              splitmix64_mix(grid_seed ^ 0x67fULL));
  else
    inputs.grid = build_quantile_grid(dist, t);
  return inputs;
}

struct GeometryTrialStats {
  std::uint64_t seed = 0;
  bool failed = false;
  std::optional<std::int64_t> fail_step;
  std::int64_t running_max = 0;  // max member |sum| over the whole run
  std::int64_t disc_at_end = 0;  // member max at the last completed step
  double max_sup_scaled = 0.0;
};

template <typename Result>
GeometryTrialStats summarize_geometry(const Result& result,
                                      std::uint64_t seed) {
  GeometryTrialStats stats;
  stats.seed = seed;
  stats.failed = result.trace.failed;
  stats.fail_step = result.trace.fail_step;
  for (std::int64_t m : result.max_abs_per_step)
    stats.running_max = std::max(stats.running_max, m);
  if (!result.max_abs_per_step.empty())
    stats.disc_at_end = result.max_abs_per_step.back();
  stats.max_sup_scaled = result.trace.max_sup_norm();
  return stats;
}

void cmd_geometry(const CommonOpts& common, const GeometryOpts& opts,
                  bool boxes) {
  if (opts.d <= 0 || opts.d > 4)
    throw ValidationError("geometry: need 1 <= d <= 4");
  const SigningRule rule = parse_rule(opts.rule);
  std::int64_t t = opts.t;
  if (!opts.points_path.empty() && t == 0)
    t = read_points(opts.points_path).t;
  if (t <= 0 && opts.sweep.empty())
    throw ValidationError("geometry: -t (or a points file) is required");
  const ProductDistribution dist = make_distribution(opts);

  std::ostringstream body;
  body << "# sbwalk " << (boxes ? "tusnady" : "interval") << "\n";
  body << "# d=" << opts.d << " delta=" << format_double(common.delta)
       << " rule=" << opts.rule << " trials=" << common.trials
       << " master_seed=" << common.seed << "\n";

  auto run_interval_one = [&](const GeometryRunInputs& inputs, std::int64_t tt,
                              std::uint64_t seed) {
    if (!inputs.points.empty())
      return run_interval_discrepancy(inputs.points, *inputs.grid,
                                      common.delta, seed, rule);
    if (opts.sample_grid > 0)
      return run_interval_discrepancy(sample_points(dist, tt, seed),
                                      *inputs.grid, common.delta, seed, rule);
    return run_interval_discrepancy(dist, tt, common.delta, seed, rule);
  };
  auto run_box_one = [&](const GeometryRunInputs& inputs, std::int64_t tt,
                         std::uint64_t seed) {
    if (!inputs.points.empty())
      return run_tusnady(inputs.points, *inputs.grid, common.delta, seed, rule);
    if (opts.sample_grid > 0)
      return run_tusnady(sample_points(dist, tt, seed), *inputs.grid,
                         common.delta, seed, rule);
    return run_tusnady(dist, tt, common.delta, seed, rule);
  };

  if (!opts.sweep.empty()) {
    // Sweep mode keeps no whole run around, so per-run outputs cannot be
    // served; reject them instead of silently dropping the request.
    const bool single_query =
        !boxes && (opts.lo_opt->count() > 0 || opts.hi_opt->count() > 0);
    if (!opts.export_tracker.empty() || !opts.queries_path.empty() ||
        single_query)
      throw ValidationError(
          "sweep mode reports one summary row per horizon; queries and "
          "tracker export need a single-horizon run");
    body << "# sweep summary: one row per horizon\n";
    body << "sweep_t,trials,failure_fraction,median_running_max,median_disc_at_"
            "t,p95_running_max\n";
    for (std::int64_t tt : opts.sweep) {
      if (tt <= 0) throw ValidationError("sweep horizons must be positive");
      const GeometryRunInputs inputs = resolve_inputs(opts, dist, tt, common.seed);
      auto stats = run_trials(
          common.trials, common.seed, common.threads,
          [&](std::int64_t, std::uint64_t seed) {
            return boxes ? summarize_geometry(run_box_one(inputs, tt, seed), seed)
                         : summarize_geometry(run_interval_one(inputs, tt, seed),
                                              seed);
          });
      std::size_t failures = 0;
      std::vector<double> running, at_end;
      for (const auto& s : stats) {
        failures += s.failed ? 1 : 0;
        running.push_back(static_cast<double>(s.running_max));
        at_end.push_back(static_cast<double>(s.disc_at_end));
      }
      body << tt << "," << stats.size() << ","
           << format_double(static_cast<double>(failures) /
                            static_cast<double>(stats.size()))
           << "," << format_double(median(running)) << ","
           << format_double(median(at_end)) << ","
           << format_double(percentile(running, 0.95)) << "\n";
    }
    emit(common, body.str());
    return;
  }

  const GeometryRunInputs inputs = resolve_inputs(opts, dist, t, common.seed);

  // Trial 0 is kept whole for queries and export; the rest are summarized.
  body << "trial,seed,failed,fail_step,running_max_disc,disc_at_t,max_sup_"
          "scaled\n";
  std::vector<GeometryTrialStats> stats;
  std::optional<IntervalRunResult> first_interval;
  std::optional<BoxRunResult> first_box;
  {
    const std::uint64_t seed0 = trial_seed(common.seed, 0);
    if (boxes) {
      first_box.emplace(run_box_one(inputs, t, seed0));
      stats.push_back(summarize_geometry(*first_box, seed0));
    } else {
      first_interval.emplace(run_interval_one(inputs, t, seed0));
      stats.push_back(summarize_geometry(*first_interval, seed0));
    }
  }
  if (common.trials > 1) {
    auto rest = run_trials(common.trials - 1, common.seed, common.threads,
                           [&](std::int64_t i, std::uint64_t) {
                             const std::uint64_t seed =
                                 trial_seed(common.seed, i + 1);
                             return boxes
                                        ? summarize_geometry(
                                              run_box_one(inputs, t, seed), seed)
                                        : summarize_geometry(
                                              run_interval_one(inputs, t, seed),
                                              seed);
                           });
    stats.insert(stats.end(), rest.begin(), rest.end());
  }
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const auto& s = stats[i];
    body << i << "," << s.seed << "," << (s.failed ? 1 : 0) << ","
         << csv_opt_step(s.fail_step) << "," << s.running_max << ","
         << s.disc_at_end << "," << format_double(s.max_sup_scaled) << "\n";
  }
  {
    std::size_t failures = 0;
    std::vector<double> running;
    for (const auto& s : stats) {
      failures += s.failed ? 1 : 0;
      running.push_back(static_cast<double>(s.running_max));
    }
    body << "# summary: failure_fraction,median_running_max,p95_running_max\n";
    body << "summary,"
         << format_double(static_cast<double>(failures) /
                          static_cast<double>(stats.size()))
         << "," << format_double(median(running)) << ","
         << format_double(percentile(running, 0.95)) << "\n";
  }

  // Queries are answered against trial 0. The brute-force rescan column is
  // filled at t <= 64 (the exactness regime); blank otherwise.
  const bool with_brute = t <= 64;
  const std::vector<Eigen::VectorXd> replay =
      !inputs.points.empty()
          ? inputs.points
          : (with_brute ? sample_points(dist, t, trial_seed(common.seed, 0))
                        : std::vector<Eigen::VectorXd>{});
  if (!boxes) {
    std::vector<IntervalQuery> queries;
    if (!opts.queries_path.empty())
      queries = read_interval_queries(opts.queries_path);
    if (opts.lo_opt->count() > 0 || opts.hi_opt->count() > 0) {
      IntervalQuery q;
      q.dim = opts.query_dim;
      q.lo = opts.query_lo;
      q.hi = opts.query_hi;
      q.at = opts.query_at > 0 ? opts.query_at : t;
      queries.push_back(q);
    }
    if (!queries.empty()) {
      body << "# queries answered against trial 0; brute column at t <= 64\n";
      body << "query,dim,lo,hi,at,disc,brute\n";
      for (std::size_t i = 0; i < queries.size(); ++i) {
        const IntervalQuery& q = queries[i];
        const std::int64_t disc =
            query_interval(first_interval->tracker, q.dim, q.lo, q.hi, q.at);
        body << i << "," << q.dim << "," << format_double(q.lo) << ","
             << format_double(q.hi) << "," << q.at << "," << disc << ",";
        if (with_brute)
          body << count_interval(replay, first_interval->trace.signs, q.dim,
                                 q.lo, q.hi, q.at);
        body << "\n";
      }
    }
  } else {
    std::vector<BoxQuery> queries;
    if (!opts.queries_path.empty())
      queries = read_box_queries(opts.queries_path, opts.d);
    if (!queries.empty()) {
      body << "# queries answered against trial 0; brute column at t <= 64\n";
      body << "query,at,disc,brute\n";
      for (std::size_t i = 0; i < queries.size(); ++i) {
        const BoxQuery& q = queries[i];
        const std::int64_t disc =
            query_box(first_box->tracker, q.lo, q.hi, q.at);
        body << i << "," << q.at << "," << disc << ",";
        if (with_brute)
          body << count_box(first_box->tracker.points(),
                            first_box->tracker.signs(), q.lo, q.hi, q.at);
        body << "\n";
      }
    }
  }
  emit(common, body.str());

  if (!opts.export_tracker.empty()) {
    if (boxes)
      throw ValidationError("tracker export is available in interval mode only");
    std::ofstream out(opts.export_tracker);
    if (!out) throw IoError("cannot open tracker export: " + opts.export_tracker);
    write_tracker_csv(out, first_interval->tracker);
  }
}

// --- compare --------------------------------------------------------------------

void cmd_compare(const CommonOpts& common, const SourceOpts& source,
                 const std::vector<std::string>& algorithms,
                 std::vector<std::int64_t> checkpoints) {
  int n = 0;
  std::int64_t t = 0;
  std::vector<Eigen::VectorXd> fixed;
  if (!source.input.empty()) {
    DenseStreamFile file = read_dense_stream(source.input);
    n = file.n;
    t = file.t;
    fixed = std::move(file.vectors);
  } else {
    n = source.spec.n;
    t = source.t;
    if (n <= 0 || t <= 0)
      throw ValidationError("compare: need --input, or --source with --n and -t");
  }
  for (const auto& name : algorithms)
    if (name != "balance" && name != "random" && name != "greedy")
      throw ValidationError("unknown algorithm: " + name);
  if (algorithms.empty()) throw ValidationError("compare: --algorithms is empty");

  if (checkpoints.empty()) {
    for (std::int64_t s = 1; s < t; s *= 2) checkpoints.push_back(s);
    checkpoints.push_back(t);
  }
  for (std::int64_t s : checkpoints)
    if (s < 1 || s > t) throw ValidationError("checkpoint outside [1, t]");

  const bool adaptive = source.spec.kind == "adaptive" && fixed.empty();
  const WalkConfig config = WalkConfig::online(n, t, common.delta);

  struct TrialOut {
    // per algorithm: sup-norm at each checkpoint (NaN past a failure) and
    // final state summary
    std::vector<std::vector<double>> at_checkpoints;
    std::vector<double> final_l2;
    std::vector<bool> failed;
  };

  auto rows = run_trials(
      common.trials, common.seed, common.threads,
      [&](std::int64_t, std::uint64_t seed) {
        // All algorithms see the same realization of an oblivious source.
        std::vector<Eigen::VectorXd> realized;
        if (!adaptive) {
          if (!fixed.empty()) {
            realized = fixed;
          } else {
            SourceSpec spec = source.spec;
            spec.seed = splitmix64_mix(seed);
            auto src = make_source(spec);
            realized.reserve(static_cast<std::size_t>(t));
            for (std::int64_t i = 0; i < t; ++i)
              realized.push_back(src->next(nullptr));
          }
        }
        TrialOut out;
        for (const std::string& name : algorithms) {
          WalkTrace trace;
          if (adaptive) {
            AdaptiveOrthogonalSource src(n);
            if (name == "balance")
              trace = run_balance(src, config, seed);
            else if (name == "random")
              trace = random_signing(src, t, seed);
            else
              trace = greedy_potential_signing(src, t);
          } else {
            VectorListStream stream(realized);
            if (name == "balance")
              trace = run_balance(stream, config, seed);
            else if (name == "random")
              trace = random_signing(stream, t, seed);
            else
              trace = greedy_potential_signing(stream, t);
          }
          std::vector<double> at;
          for (std::int64_t s : checkpoints)
            at.push_back(s <= trace.steps()
                             ? trace.sup_norms[static_cast<std::size_t>(s - 1)]
                             : std::nan(""));
          out.at_checkpoints.push_back(std::move(at));
          out.final_l2.push_back(trace.final_w.size() ? trace.final_w.norm()
                                                      : std::nan(""));
          out.failed.push_back(trace.failed);
        }
        return out;
      });

  std::ostringstream body;
  body << "# sbwalk compare\n";
  body << "# n=" << n << " t=" << t << " delta=" << format_double(common.delta)
       << " c=" << format_double(config.c) << " trials=" << common.trials
       << " master_seed=" << common.seed << "\n";
  body << "algorithm,step,trials_used,p50_sup_norm,p95_sup_norm\n";
  for (std::size_t a = 0; a < algorithms.size(); ++a) {
    for (std::size_t ci = 0; ci < checkpoints.size(); ++ci) {
      std::vector<double> values;
      for (const auto& row : rows) {
        const double v = row.at_checkpoints[a][ci];
        if (!std::isnan(v)) values.push_back(v);
      }
      body << algorithms[a] << "," << checkpoints[ci] << "," << values.size()
           << ",";
      if (values.empty())
        body << ",";
      else
        body << format_double(median(values)) << ","
             << format_double(percentile(values, 0.95));
      body << "\n";
    }
  }
  body << "# summary: algorithm,failure_fraction,median_final_l2\n";
  for (std::size_t a = 0; a < algorithms.size(); ++a) {
    std::size_t failures = 0;
    std::vector<double> l2;
    for (const auto& row : rows) {
      failures += row.failed[a] ? 1 : 0;
      if (!std::isnan(row.final_l2[a])) l2.push_back(row.final_l2[a]);
    }
    body << "summary," << algorithms[a] << ","
         << format_double(static_cast<double>(failures) /
                          static_cast<double>(rows.size()))
         << "," << (l2.empty() ? std::string() : format_double(median(l2)))
         << "\n";
  }
  emit(common, body.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"self-balancing walk experiments"};
  app.require_subcommand(1);

  // balance
  auto* balance = app.add_subcommand(
      "balance", "run the walk over a vector stream and report sup-norms");
  CommonOpts balance_common;
  SourceOpts balance_source;
  std::string balance_trace;
  add_common(balance, balance_common);
  add_source_opts(balance, balance_source, true);
  balance->add_option("--trace", balance_trace,
                      "write trial 0's per-step trace CSV here");

  // komlos
  auto* komlos = app.add_subcommand(
      "komlos", "sign the columns of a sparse MatrixMarket matrix");
  CommonOpts komlos_common;
  std::string komlos_input, komlos_signs;
  add_common(komlos, komlos_common);
  komlos->add_option("--input", komlos_input, "MatrixMarket coordinate file")
      ->required();
  komlos->add_option("--signs", komlos_signs,
                     "write trial 0's sign vector here (one per line)");

  // interval / tusnady
  auto add_geometry = [&](CLI::App* sub, CommonOpts& common, GeometryOpts& g,
                          bool boxes) {
    add_common(sub, common);
    sub->add_option("-d,--d", g.d, "point dimension (<= 4)");
    sub->add_option("-t,--t", g.t, "number of points");
    sub->add_option("--dist", g.dist, "known distribution: uniform|power");
    sub->add_option("--power-exponent", g.power_exponent,
                    "exponent for --dist power");
    sub->add_option("--points", g.points_path, "point stream file (\"d t\")");
    sub->add_flag("--offline", g.offline,
                  "build quantiles from the point set itself");
    sub->add_option("--sample-grid", g.sample_grid,
                    "empirical grid from this many samples (>= 100*d*t)");
    sub->add_option("--rule", g.rule, "signing rule: balance|random");
    sub->add_option("--queries", g.queries_path, "query list file");
    sub->add_option("--sweep", g.sweep, "comma-separated horizons, one row each")
        ->delimiter(',');
    if (!boxes) {
      sub->add_option("--export-tracker", g.export_tracker,
                      "write the per-member signed sums CSV here");
      sub->add_option("--dim", g.query_dim, "single query: dimension");
      g.lo_opt = sub->add_option("--lo", g.query_lo, "single query: left end");
      g.hi_opt = sub->add_option("--hi", g.query_hi, "single query: right end");
      sub->add_option("--at", g.query_at, "single query: as of step (default t)");
    }
  };
  auto* interval = app.add_subcommand(
      "interval", "online interval discrepancy via the dyadic reduction");
  CommonOpts interval_common;
  GeometryOpts interval_opts;
  add_geometry(interval, interval_common, interval_opts, false);

  auto* tusnady = app.add_subcommand(
      "tusnady", "online axis-parallel box discrepancy via dyadic products");
  CommonOpts tusnady_common;
  GeometryOpts tusnady_opts;
  add_geometry(tusnady, tusnady_common, tusnady_opts, true);

  // compare
  auto* compare = app.add_subcommand(
      "compare", "run several signing algorithms over identical streams");
  CommonOpts compare_common;
  SourceOpts compare_source;
  std::vector<std::string> compare_algorithms{"balance", "random"};
  std::vector<std::int64_t> compare_checkpoints;
  add_common(compare, compare_common);
  add_source_opts(compare, compare_source, true);
  compare->add_option("--algorithms", compare_algorithms,
                      "subset of balance,random,greedy")
      ->delimiter(',');
  compare->add_option("--checkpoints", compare_checkpoints,
                      "steps at which percentiles are reported")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (balance->parsed())
      cmd_balance(balance_common, balance_source, balance_trace);
    else if (komlos->parsed())
      cmd_komlos(komlos_common, komlos_input, komlos_signs);
    else if (interval->parsed())
      cmd_geometry(interval_common, interval_opts, false);
    else if (tusnady->parsed())
      cmd_geometry(tusnady_common, tusnady_opts, true);
    else if (compare->parsed())
      cmd_compare(compare_common, compare_source, compare_algorithms,
                  compare_checkpoints);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
