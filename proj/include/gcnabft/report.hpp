#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcnabft/dataio.hpp"

namespace gcnabft {

// Reports are built once as a JSON tree; the CSV and aligned-text renderings
// are derived from that same tree through a shared table extraction, so the
// three formats can never drift apart.

namespace report_detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);  // >= 6 significant digits
  return buf;
}

inline std::string cell(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return fmt(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "-";
  return v.dump();
}

struct Table {
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

}  // namespace report_detail

class ReportDocument {
 public:
  ReportDocument(std::string command, nlohmann::json tree,
                 std::vector<report_detail::Table> tables)
      : command_(std::move(command)),
        tree_(std::move(tree)),
        tables_(std::move(tables)) {}

  const std::string& command() const { return command_; }
  const nlohmann::json& tree() const { return tree_; }

  std::string to_json() const { return tree_.dump(2) + "\n"; }

  std::string to_csv() const {
    std::string out;
    for (const auto& t : tables_) {
      out += "# " + t.title + "\n";
      out += join(t.header) + "\n";
      for (const auto& r : t.rows) out += join(r) + "\n";
      out += "\n";
    }
    return out;
  }

  std::string to_text() const {
    std::string out;
    for (const auto& t : tables_) {
      std::vector<std::size_t> width(t.header.size(), 0);
      auto widen = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c)
          width[c] = std::max(width[c], row[c].size());
      };
      widen(t.header);
      for (const auto& r : t.rows) widen(r);

      out += t.title + "\n";
      auto emit = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c) {
          out += row[c];
          if (c + 1 < row.size())
            out += std::string(width[c] - row[c].size() + 2, ' ');
        }
        out += "\n";
      };
      emit(t.header);
      std::vector<std::string> rule;
      for (std::size_t c = 0; c < t.header.size(); ++c)
        rule.push_back(std::string(width[c], '-'));
      emit(rule);
      for (const auto& r : t.rows) emit(r);
      out += "\n";
    }
    return out;
  }

 private:
  static std::string join(const std::vector<std::string>& row) {
    std::string out;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ",";
      out += row[c];
    }
    return out;
  }

  std::string command_;
  nlohmann::json tree_;
  std::vector<report_detail::Table> tables_;
};

// ---------------------------------------------------------------------------
// Shared pieces

inline const char* checker_name(CheckerKind k) {
  return k == CheckerKind::Split ? "split" : "fused";
}

inline const char* phase_name(CheckPhase p) {
  switch (p) {
    case CheckPhase::Phase1: return "phase1";
    case CheckPhase::Phase2: return "phase2";
    default: return "layer_end";
  }
}

inline nlohmann::json dataset_info(const PreparedRun& run,
                                   const std::string& name) {
  nlohmann::json out;
  out["name"] = name;
  out["nodes"] = run.model.num_nodes();
  out["adjacency_nnz"] = run.model.adjacency.matrix.nnz();
  out["feature_rep"] = run.features().is_sparse() ? "sparse" : "dense";
  out["feature_nnz_or_dense"] = run.features().nnz_or_dense();
  nlohmann::json dims = nlohmann::json::array();
  dims.push_back(run.features().cols());
  for (const auto& layer : run.model.layers) dims.push_back(layer.weight.cols());
  out["layer_dims"] = dims;
  return out;
}

// ---------------------------------------------------------------------------
// check command: fault-free verification under both checkers

struct CheckOutcome {
  ReportDocument report;
  bool any_flag = false;
};

inline CheckOutcome build_check_report(const PreparedRun& run,
                                       const std::string& dataset_name,
                                       std::vector<CheckerKind> checkers,
                                       double tau) {
  using nlohmann::json;
  json tree;
  tree["command"] = "check";
  tree["dataset"] = dataset_info(run, dataset_name);
  tree["tau"] = tau;

  bool any_flag = false;
  report_detail::Table table{
      "fault-free checksum verdicts",
      {"checker", "layer", "phase", "predicted", "actual", "abs_diff",
       "flagged"},
      {}};

  json checkers_json = json::array();
  std::vector<std::vector<double>> phase2_predicted;  // per checker, per layer
  for (CheckerKind kind : checkers) {
    std::vector<LayerCheckCounters> counters;
    InferenceResult res =
        infer(run.model, run.features(), kind, tau, counters);
    json verdicts = json::array();
    std::vector<double> predicted2;
    for (std::size_t l = 0; l < res.verdicts.size(); ++l) {
      for (const CheckVerdict& v : res.verdicts[l]) {
        any_flag = any_flag || v.flagged;
        json jv;
        jv["layer"] = l;
        jv["phase"] = phase_name(v.phase);
        jv["predicted"] = v.predicted;
        jv["actual"] = v.actual;
        jv["abs_diff"] = std::abs(v.predicted - v.actual);
        jv["flagged"] = v.flagged;
        jv["non_finite"] = v.non_finite;
        verdicts.push_back(jv);
        table.rows.push_back({checker_name(kind), std::to_string(l),
                              phase_name(v.phase),
                              report_detail::fmt(v.predicted),
                              report_detail::fmt(v.actual),
                              report_detail::fmt(std::abs(v.predicted - v.actual)),
                              v.flagged ? "true" : "false"});
        if (v.phase != CheckPhase::Phase1) predicted2.push_back(v.predicted);
      }
    }
    phase2_predicted.push_back(std::move(predicted2));
    json jc;
    jc["checker"] = checker_name(kind);
    jc["verdicts"] = verdicts;
    checkers_json.push_back(jc);
  }
  tree["checkers"] = checkers_json;

  // When both checkers ran, their layer-end predictions share one
  // computation path and must agree bit-identically.
  bool agree = true;
  if (phase2_predicted.size() == 2) {
    agree = phase2_predicted[0] == phase2_predicted[1];
    tree["fused_split_phase2_agree"] = agree;
    any_flag = any_flag || !agree;
  }
  tree["clean"] = !any_flag;

  return CheckOutcome{ReportDocument("check", std::move(tree), {table}),
                      any_flag};
}

// ---------------------------------------------------------------------------
// campaign command

inline ReportDocument build_campaign_report(const PreparedRun& run,
                                            const std::string& dataset_name,
                                            const CampaignReport& rep) {
  using nlohmann::json;
  json tree;
  tree["command"] = "campaign";
  tree["dataset"] = dataset_info(run, dataset_name);

  json cfg;
  cfg["trials"] = rep.config.trials;
  cfg["master_seed"] = rep.config.master_seed;
  cfg["thresholds"] = rep.config.thresholds;
  json names = json::array();
  for (CheckerKind k : rep.config.checkers) names.push_back(checker_name(k));
  cfg["checkers"] = names;
  cfg["faults_per_trial"] = rep.config.faults_per_trial;
  cfg["output_compare"] =
      rep.config.output_compare == OutputComparePolicy::BitExact
          ? "bitexact"
          : "threshold";
  cfg["output_tau"] = rep.config.output_tau;
  tree["config"] = cfg;

  tree["critical_fault_rate"] = rep.critical_fault_rate;
  tree["avg_nodes_affected"] = rep.avg_nodes_affected;

  report_detail::Table outcome_table{
      "fault outcome rates",
      {"checker", "tau", "detected", "false_pos", "silent", "benign",
       "detected_pct", "false_pos_pct", "silent_pct", "benign_pct"},
      {}};
  report_detail::Table crit_table{
      "fault criticality",
      {"checker", "critical_faults_pct", "avg_nodes_affected_pct",
       "mac_bit_coverage_pct", "accum_bit_coverage_pct"},
      {}};

  const double trials = static_cast<double>(rep.config.trials);
  json checkers_json = json::array();
  for (const CheckerCampaignStats& chk : rep.checkers) {
    json jc;
    jc["checker"] = checker_name(chk.kind);
    jc["critical_fault_rate"] = chk.critical_rate(rep.config.trials);
    jc["avg_nodes_affected"] = chk.nodes_affected_sum / trials;
    jc["mac_bit_coverage"] = chk.mac_bit_coverage();
    jc["accum_bit_coverage"] = chk.accum_bit_coverage();

    json results = json::array();
    for (std::size_t t = 0; t < rep.config.thresholds.size(); ++t) {
      const CategoryCounts& c = chk.by_tau[t];
      json jr;
      jr["tau"] = rep.config.thresholds[t];
      jr["detected"] = c.detected;
      jr["false_positive"] = c.false_positive;
      jr["silent"] = c.silent;
      jr["benign"] = c.benign;
      jr["detected_rate"] = c.detected / trials;
      jr["false_positive_rate"] = c.false_positive / trials;
      jr["silent_rate"] = c.silent / trials;
      jr["benign_rate"] = c.benign / trials;
      results.push_back(jr);

      outcome_table.rows.push_back(
          {checker_name(chk.kind), report_detail::fmt(rep.config.thresholds[t]),
           std::to_string(c.detected), std::to_string(c.false_positive),
           std::to_string(c.silent), std::to_string(c.benign),
           report_detail::fmt(100.0 * c.detected / trials),
           report_detail::fmt(100.0 * c.false_positive / trials),
           report_detail::fmt(100.0 * c.silent / trials),
           report_detail::fmt(100.0 * c.benign / trials)});
    }
    jc["results"] = results;

    json golden;
    golden["labels_checksum"] = [&] {
      std::size_t acc = 1469598103934665603ULL;
      for (std::size_t v : chk.golden.labels) acc = (acc ^ v) * 1099511628211ULL;
      return acc;
    }();
    json gv = json::array();
    for (std::size_t l = 0; l < chk.golden.verdicts.size(); ++l)
      for (const CheckVerdict& v : chk.golden.verdicts[l]) {
        json jv;
        jv["layer"] = l;
        jv["phase"] = phase_name(v.phase);
        jv["predicted"] = v.predicted;
        jv["actual"] = v.actual;
        gv.push_back(jv);
      }
    golden["verdicts"] = gv;
    jc["golden"] = golden;
    checkers_json.push_back(jc);

    crit_table.rows.push_back(
        {checker_name(chk.kind),
         report_detail::fmt(100.0 * chk.critical_rate(rep.config.trials)),
         report_detail::fmt(100.0 * chk.nodes_affected_sum / trials),
         report_detail::fmt(100.0 * chk.mac_bit_coverage()),
         report_detail::fmt(100.0 * chk.accum_bit_coverage())});
  }
  tree["checkers"] = checkers_json;

  // Cost context for the same run: true/check/total ops per checker and the
  // per-layer phase split (true-output ops as the runtime proxy).
  report_detail::Table ops_table{
      "operation totals",
      {"checker", "true_out", "check", "total"},
      {}};
  json op_counts = json::object();
  for (const CheckerCampaignStats& chk : rep.checkers) {
    const std::uint64_t true_ops = chk.census.true_ops().total();
    const std::uint64_t check_ops = chk.census.check_ops().total();
    json jo;
    jo["true_out"] = true_ops;
    jo["check"] = check_ops;
    jo["total"] = true_ops + check_ops;
    op_counts[checker_name(chk.kind)] = jo;
    ops_table.rows.push_back({checker_name(chk.kind), std::to_string(true_ops),
                              std::to_string(check_ops),
                              std::to_string(true_ops + check_ops)});
  }
  tree["op_counts"] = op_counts;

  report_detail::Table share_table{
      "true-output op share per multiplication phase",
      {"layer", "phase1_share", "phase2_share"},
      {}};
  json shares = json::array();
  const Census& cns = rep.checkers.front().census;
  for (std::size_t l = 0; l < cns.layers.size(); ++l) {
    const double p1 = static_cast<double>(cns.layers[l].phase1.true_ops.total());
    const double p2 = static_cast<double>(cns.layers[l].phase2.true_ops.total());
    const double denom = p1 + p2;
    json js;
    js["layer"] = l;
    js["phase1_share"] = denom > 0.0 ? p1 / denom : 0.0;
    js["phase2_share"] = denom > 0.0 ? p2 / denom : 0.0;
    shares.push_back(js);
    share_table.rows.push_back(
        {std::to_string(l), report_detail::fmt(denom > 0.0 ? p1 / denom : 0.0),
         report_detail::fmt(denom > 0.0 ? p2 / denom : 0.0)});
  }
  tree["phase_op_shares"] = shares;

  return ReportDocument("campaign", std::move(tree),
                        {outcome_table, crit_table, ops_table, share_table});
}

// ---------------------------------------------------------------------------
// opcount command

inline ReportDocument build_opcount_report(const PreparedRun& run,
                                           const std::string& dataset_name) {
  using nlohmann::json;
  const Census split = census(run.model, run.features(), CheckerKind::Split);
  const Census fused = census(run.model, run.features(), CheckerKind::Fused);

  json tree;
  tree["command"] = "opcount";
  tree["dataset"] = dataset_info(run, dataset_name);

  report_detail::Table table{
      "arithmetic operations per layer and in total",
      {"layer", "true_out", "check_split", "total_split", "check_fused",
       "total_fused", "check_savings_pct", "total_savings_pct",
       "formula_split", "formula_fused", "formula_matches"},
      {}};

  json layers = json::array();
  std::uint64_t tot_true = 0, tot_cs = 0, tot_cf = 0, tot_fs = 0, tot_ff = 0;
  for (std::size_t l = 0; l < split.layers.size(); ++l) {
    const std::uint64_t true_ops =
        (split.layers[l].phase1.true_ops + split.layers[l].phase2.true_ops)
            .total();
    const std::uint64_t check_split =
        (split.layers[l].phase1.check_ops + split.layers[l].phase2.check_ops)
            .total();
    const std::uint64_t check_fused =
        (fused.layers[l].phase1.check_ops + fused.layers[l].phase2.check_ops)
            .total();

    const std::size_t n = run.model.num_nodes();
    const std::size_t f = run.model.layers[l].weight.rows();
    const std::size_t h = run.model.layers[l].weight.cols();
    const std::optional<std::uint64_t> nnz_h =
        (l == 0 && run.features().is_sparse())
            ? std::optional<std::uint64_t>(run.features().nnz_or_dense())
            : std::nullopt;
    const std::uint64_t formula_split = check_ops_formula(
        CheckerKind::Split, n, f, h, nnz_h, run.model.adjacency.matrix.nnz());
    const std::uint64_t formula_fused = check_ops_formula(
        CheckerKind::Fused, n, f, h, nnz_h, run.model.adjacency.matrix.nnz());

    tot_true += true_ops;
    tot_cs += check_split;
    tot_cf += check_fused;
    tot_fs += formula_split;
    tot_ff += formula_fused;

    json jl;
    jl["layer"] = l;
    jl["n"] = n;
    jl["f"] = f;
    jl["h"] = h;
    if (nnz_h) jl["nnz_h"] = *nnz_h; else jl["nnz_h"] = nullptr;
    jl["true_out"] = true_ops;
    jl["check_split"] = check_split;
    jl["check_fused"] = check_fused;
    jl["formula_split"] = formula_split;
    jl["formula_fused"] = formula_fused;
    jl["formula_matches"] =
        formula_split == check_split && formula_fused == check_fused;
    layers.push_back(jl);

    const double sav_check =
        100.0 * (1.0 - double(check_fused) / double(check_split));
    const double sav_total =
        100.0 * (1.0 - double(true_ops + check_fused) /
                           double(true_ops + check_split));
    table.rows.push_back(
        {std::to_string(l), std::to_string(true_ops),
         std::to_string(check_split), std::to_string(true_ops + check_split),
         std::to_string(check_fused), std::to_string(true_ops + check_fused),
         report_detail::fmt(sav_check), report_detail::fmt(sav_total),
         std::to_string(formula_split), std::to_string(formula_fused),
         formula_split == check_split && formula_fused == check_fused
             ? "true"
             : "false"});
  }
  tree["layers"] = layers;

  json totals;
  totals["true_out"] = tot_true;
  totals["check_split"] = tot_cs;
  totals["total_split"] = tot_true + tot_cs;
  totals["check_fused"] = tot_cf;
  totals["total_fused"] = tot_true + tot_cf;
  totals["formula_split"] = tot_fs;
  totals["formula_fused"] = tot_ff;
  totals["formula_matches"] = tot_fs == tot_cs && tot_ff == tot_cf;
  totals["check_savings_pct"] = 100.0 * (1.0 - double(tot_cf) / double(tot_cs));
  totals["total_savings_pct"] =
      100.0 * (1.0 - double(tot_true + tot_cf) / double(tot_true + tot_cs));
  tree["totals"] = totals;

  table.rows.push_back(
      {"total", std::to_string(tot_true), std::to_string(tot_cs),
       std::to_string(tot_true + tot_cs), std::to_string(tot_cf),
       std::to_string(tot_true + tot_cf),
       report_detail::fmt(totals["check_savings_pct"].get<double>()),
       report_detail::fmt(totals["total_savings_pct"].get<double>()),
       std::to_string(tot_fs), std::to_string(tot_ff),
       totals["formula_matches"].get<bool>() ? "true" : "false"});

  return ReportDocument("opcount", std::move(tree), {table});
}

// ---------------------------------------------------------------------------
// phases command: per-layer share of phase-1 vs phase-2 true-output work,
// the artifact's runtime proxy.

inline ReportDocument build_phases_report(const PreparedRun& run,
                                          const std::string& dataset_name) {
  using nlohmann::json;
  const Census c = census(run.model, run.features(), CheckerKind::Fused);

  json tree;
  tree["command"] = "phases";
  tree["dataset"] = dataset_info(run, dataset_name);

  report_detail::Table table{
      "true-output op share per multiplication phase",
      {"layer", "phase1_ops", "phase2_ops", "phase1_share", "phase2_share"},
      {}};

  json layers = json::array();
  for (std::size_t l = 0; l < c.layers.size(); ++l) {
    const std::uint64_t p1 = c.layers[l].phase1.true_ops.total();
    const std::uint64_t p2 = c.layers[l].phase2.true_ops.total();
    const double denom = static_cast<double>(p1 + p2);
    const double share1 = denom > 0.0 ? p1 / denom : 0.0;
    json jl;
    jl["layer"] = l;
    jl["phase1_ops"] = p1;
    jl["phase2_ops"] = p2;
    jl["phase1_share"] = share1;
    jl["phase2_share"] = denom > 0.0 ? p2 / denom : 0.0;
    layers.push_back(jl);
    table.rows.push_back({std::to_string(l), std::to_string(p1),
                          std::to_string(p2), report_detail::fmt(share1),
                          report_detail::fmt(denom > 0.0 ? p2 / denom : 0.0)});
  }
  tree["layers"] = layers;
  return ReportDocument("phases", std::move(tree), {table});
}

}  // namespace gcnabft
