#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "gcnabft/gcn.hpp"
#include "gcnabft/rng.hpp"

namespace gcnabft {

enum class LayerPhase : std::uint8_t { Phase1, Phase2 };

// Fully resolved injection point. op_index addresses the stream's events in
// deterministic kernel-execution order:
//   Phase1 MacResult:     X = H*W events, then x_r = H*w_r events
//   Phase1 ChecksumAccum: h_c events, then h_c.w_r, then e^T X e (split only)
//   Phase2 MacResult:     H_pre = S*X events
//   Phase2 ChecksumAccum: s_c.x_r events, then e^T H_pre e
struct FaultSite {
  std::size_t layer = 0;
  LayerPhase phase = LayerPhase::Phase1;
  Stream stream = Stream::MacResult;
  std::uint64_t op_index = 0;
  int bit = 0;

  FloatWidth width() const {
    return stream == Stream::ChecksumAccum ? FloatWidth::Double
                                           : FloatWidth::Single;
  }
};

enum class OutcomeCategory : std::uint8_t {
  Detected,
  FalsePositive,
  Silent,
  Benign
};

// How a replay's final logits are compared against the golden run.
// AbsoluteThreshold treats deviations at or below output_tau as clean,
// mirroring the checksum comparison's own noise floor; BitExact treats any
// bit-level deviation as a faulty output.
enum class OutputComparePolicy : std::uint8_t { AbsoluteThreshold, BitExact };

struct CampaignConfig {
  std::uint64_t trials = 0;
  std::uint64_t master_seed = 0;
  std::vector<double> thresholds;
  std::vector<CheckerKind> checkers;
  std::uint64_t faults_per_trial = 1;
  std::uint64_t jobs = 0;  // 0: hardware concurrency
  OutputComparePolicy output_compare = OutputComparePolicy::AbsoluteThreshold;
  double output_tau = 1e-7;

  void validate() const {
    if (trials < 1) throw DimensionMismatch("campaign: trials must be >= 1");
    if (thresholds.empty())
      throw DimensionMismatch("campaign: thresholds must be nonempty");
    for (double t : thresholds)
      if (!(t > 0.0)) throw DimensionMismatch("campaign: tau must be > 0");
    if (checkers.empty())
      throw DimensionMismatch("campaign: checkers must be nonempty");
    if (faults_per_trial < 1)
      throw DimensionMismatch("campaign: faults_per_trial must be >= 1");
    if (!(output_tau >= 0.0))
      throw DimensionMismatch("campaign: output_tau must be >= 0");
  }
};

// ---------------------------------------------------------------------------
// Census: exact per-stream operation populations of one instrumented
// fault-free pass. Event counts (one per multiply-add result or checksum
// update) drive fault placement; op counts feed the cost tables.

struct PhaseCensus {
  std::uint64_t mac_true_events = 0;   // X or H_pre multiply-adds
  std::uint64_t mac_check_events = 0;  // x_r multiply-adds
  std::uint64_t accum_events = 0;      // checksum accumulation updates
  OpCounter true_ops;
  OpCounter check_ops;

  std::uint64_t mac_events() const { return mac_true_events + mac_check_events; }
  std::uint64_t events() const { return mac_events() + accum_events; }
};

struct LayerCensus {
  PhaseCensus phase1;
  PhaseCensus phase2;
};

struct Census {
  CheckerKind checker = CheckerKind::Fused;
  std::vector<LayerCensus> layers;

  std::uint64_t total_events() const {
    std::uint64_t t = 0;
    for (const auto& l : layers) t += l.phase1.events() + l.phase2.events();
    return t;
  }
  std::uint64_t mac_events() const {
    std::uint64_t t = 0;
    for (const auto& l : layers)
      t += l.phase1.mac_events() + l.phase2.mac_events();
    return t;
  }
  std::uint64_t accum_events() const { return total_events() - mac_events(); }
  OpCounter true_ops() const {
    OpCounter t;
    for (const auto& l : layers) t += l.phase1.true_ops + l.phase2.true_ops;
    return t;
  }
  OpCounter check_ops() const {
    OpCounter t;
    for (const auto& l : layers) t += l.phase1.check_ops + l.phase2.check_ops;
    return t;
  }
};

inline LayerCensus layer_census_from(const LayerCheckCounters& c) {
  LayerCensus out;
  out.phase1.mac_true_events = c.x.multiplies;
  out.phase1.mac_check_events = c.x_r.multiplies;
  out.phase1.accum_events =
      c.h_c.additions + c.pred1.additions + c.act1.additions;
  out.phase1.true_ops = c.x;
  out.phase1.check_ops = c.x_r + c.h_c + c.pred1 + c.act1 + c.cmp1;
  out.phase2.mac_true_events = c.h_pre.multiplies;
  out.phase2.accum_events = c.pred2.additions + c.act2.additions;
  out.phase2.true_ops = c.h_pre;
  out.phase2.check_ops = c.pred2 + c.act2 + c.cmp2;
  return out;
}

inline Census census(const GcnModel& model, MatrixView features,
                     CheckerKind checker) {
  std::vector<LayerCheckCounters> counters;
  infer(model, features, checker, 1e-7, counters);
  Census out;
  out.checker = checker;
  out.layers.reserve(counters.size());
  for (const auto& c : counters) out.layers.push_back(layer_census_from(c));
  return out;
}

// ---------------------------------------------------------------------------
// Fault scheduling: a site is drawn uniformly over every counted event of the
// whole inference, so layers/phases/streams are hit proportionally to their
// populations; the bit is uniform over the stream's width.

inline FaultSite schedule_fault(const Census& census, Rng& rng) {
  const std::uint64_t total = census.total_events();
  if (total == 0) throw EmptyPopulation("schedule_fault: no counted events");
  std::uint64_t idx = rng.bounded(total);

  FaultSite site;
  for (std::size_t layer = 0; layer < census.layers.size(); ++layer) {
    const LayerCensus& l = census.layers[layer];
    struct Bucket {
      LayerPhase phase;
      Stream stream;
      std::uint64_t size;
    };
    const Bucket buckets[] = {
        {LayerPhase::Phase1, Stream::MacResult, l.phase1.mac_events()},
        {LayerPhase::Phase1, Stream::ChecksumAccum, l.phase1.accum_events},
        {LayerPhase::Phase2, Stream::MacResult, l.phase2.mac_events()},
        {LayerPhase::Phase2, Stream::ChecksumAccum, l.phase2.accum_events},
    };
    for (const Bucket& b : buckets) {
      if (idx < b.size) {
        site.layer = layer;
        site.phase = b.phase;
        site.stream = b.stream;
        site.op_index = idx;
        site.bit = static_cast<int>(rng.bounded(
            static_cast<std::uint64_t>(width_bits(site.width()))));
        return site;
      }
      idx -= b.size;
    }
  }
  throw EmptyPopulation("schedule_fault: walk exhausted");  // unreachable
}

// ---------------------------------------------------------------------------
// Trial execution

struct GoldenRun {
  DenseMatrix logits{1, 1};
  std::vector<std::size_t> labels;
  std::vector<std::vector<CheckVerdict>> verdicts;
};

inline GoldenRun golden_run(const GcnModel& model, MatrixView features,
                            CheckerKind checker, double tau) {
  std::vector<LayerCheckCounters> counters;
  InferenceResult r = infer(model, features, checker, tau, counters);
  GoldenRun g{std::move(r.logits), {}, std::move(r.verdicts)};
  g.labels = classify(g.logits);
  return g;
}

struct TrialResult {
  std::vector<OutcomeCategory> per_tau;  // aligned with the threshold list
  bool output_differs = false;           // under the configured policy
  bool bit_exact_differs = false;
  double max_logit_delta = 0.0;
  bool critical = false;
  double nodes_affected = 0.0;  // fraction of nodes whose label changed
  bool any_verdict_non_finite = false;
};

namespace detail {

// Hook storage for one replay; spans handed to the kernels must outlive the
// inference call.
struct ArmedHooks {
  std::vector<FaultHook> hooks;
  std::vector<std::vector<FaultHook*>> by_slot;  // layer*4 + slot
  std::vector<LayerHooks> layer_hooks;

  ArmedHooks(std::size_t num_layers, std::span<const FaultSite> sites) {
    hooks.reserve(sites.size());
    by_slot.assign(num_layers * 4, {});
    for (const FaultSite& s : sites) {
      hooks.push_back(FaultHook{s.stream, s.op_index, s.bit});
      std::size_t slot =
          s.layer * 4 + (s.phase == LayerPhase::Phase1 ? 0 : 2) +
          (s.stream == Stream::ChecksumAccum ? 1 : 0);
      by_slot[slot].push_back(&hooks.back());
    }
    layer_hooks.resize(num_layers);
    for (std::size_t l = 0; l < num_layers; ++l) {
      layer_hooks[l].p1_mac = HookSet(by_slot[l * 4 + 0]);
      layer_hooks[l].p1_accum = HookSet(by_slot[l * 4 + 1]);
      layer_hooks[l].p2_mac = HookSet(by_slot[l * 4 + 2]);
      layer_hooks[l].p2_accum = HookSet(by_slot[l * 4 + 3]);
    }
  }
};

}  // namespace detail

// Replays inference with the given fault sites armed and classifies the
// outcome per threshold:
//   Detected:      output faulty and some verdict flagged
//   FalsePositive: output clean and some verdict flagged
//   Silent:        output faulty, no verdict flagged
//   Benign:        output clean, no verdict flagged
// Criticality (label changes) is evaluated on the replayed logits no matter
// what the verdicts say.
inline TrialResult run_trial(const GcnModel& model, MatrixView features,
                             const GoldenRun& golden, CheckerKind checker,
                             std::span<const FaultSite> sites,
                             std::span<const double> thresholds,
                             OutputComparePolicy policy,
                             double output_tau) {
  detail::ArmedHooks armed(model.layers.size(), sites);
  std::vector<LayerCheckCounters> counters;
  InferenceResult replay = infer(model, features, checker,
                                 thresholds.empty() ? 1e-7 : thresholds[0],
                                 counters, &armed.layer_hooks);
  for (const FaultHook& h : armed.hooks)
    if (!h.fired)
      throw IndexOutOfRange(
          "run_trial: fault site op_index exceeds its stream population");

  TrialResult out;
  for (std::size_t k = 0; k < replay.logits.size(); ++k) {
    const double a = replay.logits.data()[k];
    const double b = golden.logits.data()[k];
    if (a != b || std::signbit(a) != std::signbit(b))
      out.bit_exact_differs = true;
    const double d = std::abs(a - b);
    if (std::isnan(a) != std::isnan(b)) {
      out.bit_exact_differs = true;
      out.max_logit_delta = std::numeric_limits<double>::infinity();
    } else if (d > out.max_logit_delta) {
      out.max_logit_delta = d;
    }
  }
  out.output_differs = policy == OutputComparePolicy::BitExact
                           ? out.bit_exact_differs
                           : out.max_logit_delta > output_tau;

  std::vector<std::size_t> labels = classify(replay.logits);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != golden.labels[i]) ++changed;
  out.critical = changed > 0;
  out.nodes_affected =
      static_cast<double>(changed) / static_cast<double>(labels.size());

  out.per_tau.reserve(thresholds.size());
  for (double tau : thresholds) {
    bool flagged = false;
    for (const auto& layer : replay.verdicts)
      for (const auto& v : layer) {
        if (v.non_finite) out.any_verdict_non_finite = true;
        if (flagged_at(v.predicted, v.actual, tau)) flagged = true;
      }
    if (out.output_differs)
      out.per_tau.push_back(flagged ? OutcomeCategory::Detected
                                    : OutcomeCategory::Silent);
    else
      out.per_tau.push_back(flagged ? OutcomeCategory::FalsePositive
                                    : OutcomeCategory::Benign);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Campaign

struct CategoryCounts {
  std::uint64_t detected = 0;
  std::uint64_t false_positive = 0;
  std::uint64_t silent = 0;
  std::uint64_t benign = 0;

  std::uint64_t total() const {
    return detected + false_positive + silent + benign;
  }
  void add(OutcomeCategory c) {
    switch (c) {
      case OutcomeCategory::Detected: ++detected; break;
      case OutcomeCategory::FalsePositive: ++false_positive; break;
      case OutcomeCategory::Silent: ++silent; break;
      case OutcomeCategory::Benign: ++benign; break;
    }
  }
};

struct CheckerCampaignStats {
  CheckerKind kind = CheckerKind::Fused;
  std::vector<CategoryCounts> by_tau;  // aligned with config.thresholds
  std::uint64_t critical_trials = 0;
  double nodes_affected_sum = 0.0;
  std::uint32_t mac_bits_hit = 0;      // bitmask over the 32 single bits
  std::uint64_t accum_bits_hit = 0;    // bitmask over the 64 double bits
  Census census;
  GoldenRun golden;

  double critical_rate(std::uint64_t trials) const {
    return static_cast<double>(critical_trials) / static_cast<double>(trials);
  }
  double mac_bit_coverage() const {
    return static_cast<double>(std::popcount(mac_bits_hit)) / 32.0;
  }
  double accum_bit_coverage() const {
    return static_cast<double>(std::popcount(accum_bits_hit)) / 64.0;
  }
};

struct CampaignReport {
  CampaignConfig config;
  std::vector<CheckerCampaignStats> checkers;
  double critical_fault_rate = 0.0;  // over all (checker, trial) replays
  double avg_nodes_affected = 0.0;
};

namespace detail {

struct TrialRecord {
  std::vector<OutcomeCategory> per_tau;
  bool critical = false;
  double nodes_affected = 0.0;
  std::uint32_t mac_bits = 0;
  std::uint64_t accum_bits = 0;
};

inline TrialRecord run_one(const GcnModel& model, MatrixView features,
                           const CampaignConfig& cfg, const Census& cns,
                           const GoldenRun& golden, CheckerKind checker,
                           std::uint64_t trial) {
  Rng rng = trial_rng(cfg.master_seed, trial);
  std::vector<FaultSite> sites;
  sites.reserve(cfg.faults_per_trial);
  for (std::uint64_t k = 0; k < cfg.faults_per_trial; ++k)
    sites.push_back(schedule_fault(cns, rng));

  TrialResult r = run_trial(model, features, golden, checker, sites,
                            cfg.thresholds, cfg.output_compare, cfg.output_tau);
  TrialRecord rec;
  rec.per_tau = std::move(r.per_tau);
  rec.critical = r.critical;
  rec.nodes_affected = r.nodes_affected;
  for (const FaultSite& s : sites) {
    if (s.stream == Stream::MacResult)
      rec.mac_bits |= std::uint32_t{1} << s.bit;
    else
      rec.accum_bits |= std::uint64_t{1} << s.bit;
  }
  return rec;
}

}  // namespace detail

// Runs the full campaign. The golden pass is computed once; each trial's
// fault sites come from an independent RNG stream keyed by (master_seed,
// trial index), so the report is bit-identical for a fixed config no matter
// how many worker threads execute it.
inline CampaignReport run_campaign(const GcnModel& model, MatrixView features,
                                   const CampaignConfig& config) {
  config.validate();

  CampaignReport report;
  report.config = config;

  for (CheckerKind kind : config.checkers) {
    CheckerCampaignStats stats;
    stats.kind = kind;
    stats.by_tau.assign(config.thresholds.size(), CategoryCounts{});
    stats.census = census(model, features, kind);
    stats.golden = golden_run(model, features, kind, config.thresholds[0]);
    report.checkers.push_back(std::move(stats));
  }

  const std::uint64_t jobs =
      config.jobs ? config.jobs
                  : std::max(1u, std::thread::hardware_concurrency());
  const std::uint64_t workers = std::min<std::uint64_t>(jobs, config.trials);

  for (CheckerCampaignStats& stats : report.checkers) {
    std::vector<detail::TrialRecord> records(config.trials);
    std::exception_ptr worker_error;
    std::mutex error_mutex;
    auto work = [&](std::uint64_t begin, std::uint64_t end) {
      try {
        for (std::uint64_t t = begin; t < end; ++t)
          records[t] = detail::run_one(model, features, config, stats.census,
                                       stats.golden, stats.kind, t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!worker_error) worker_error = std::current_exception();
      }
    };
    if (workers <= 1) {
      work(0, config.trials);
    } else {
      std::vector<std::thread> pool;
      const std::uint64_t chunk = (config.trials + workers - 1) / workers;
      for (std::uint64_t w = 0; w < workers; ++w) {
        std::uint64_t begin = w * chunk;
        std::uint64_t end = std::min(config.trials, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(work, begin, end);
      }
      for (auto& th : pool) th.join();
    }
    if (worker_error) std::rethrow_exception(worker_error);  // no partial report

    // Order-insensitive aggregation, walked in trial order anyway.
    for (const detail::TrialRecord& rec : records) {
      for (std::size_t ti = 0; ti < rec.per_tau.size(); ++ti)
        stats.by_tau[ti].add(rec.per_tau[ti]);
      if (rec.critical) ++stats.critical_trials;
      stats.nodes_affected_sum += rec.nodes_affected;
      stats.mac_bits_hit |= rec.mac_bits;
      stats.accum_bits_hit |= rec.accum_bits;
    }
  }

  std::uint64_t critical = 0;
  double affected = 0.0;
  for (const auto& stats : report.checkers) {
    critical += stats.critical_trials;
    affected += stats.nodes_affected_sum;
  }
  const double replays = static_cast<double>(config.trials) *
                         static_cast<double>(report.checkers.size());
  report.critical_fault_rate = static_cast<double>(critical) / replays;
  report.avg_nodes_affected = affected / replays;
  return report;
}

}  // namespace gcnabft
