#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <future>
#include <string>
#include <vector>

#include <json.hpp>

#include "xrsim/config.hpp"
#include "xrsim/engine.hpp"
#include "xrsim/lba.hpp"
#include "xrsim/metrics.hpp"
#include "xrsim/qc.hpp"
#include "xrsim/reports.hpp"
#include "xrsim/trial_log.hpp"
#include "xrsim/version.hpp"

namespace xrsim {

inline EngineContext engine_context(const RunConfig& cfg) {
  EngineContext ctx;
  ctx.task = cfg.task;
  ctx.calib = cfg.calibration.resolve();
  ctx.gaze_params = cfg.gaze_transform;
  ctx.hand_agent = cfg.hand_agent;
  ctx.gaze_agent = cfg.gaze_agent;
  ctx.policy = cfg.policy;
  return ctx;
}

// Runs every participant session. Participants execute in parallel on worker
// threads into per-participant slots, then concatenate in participant order,
// so the output bytes never depend on scheduling.
inline SessionResult simulate_all(const RunConfig& cfg, int threads = 1) {
  const EngineContext ctx = engine_context(cfg);
  std::vector<SessionResult> slots(static_cast<std::size_t>(cfg.participants));

  std::atomic<int> next{0};
  auto worker = [&] {
    while (true) {
      const int pid = next.fetch_add(1);
      if (pid >= cfg.participants) return;
      const auto plan = plan_session(pid, ctx.task, cfg.master_seed);
      slots[static_cast<std::size_t>(pid)] = run_session(plan, ctx, cfg.master_seed);
    }
  };
  {
    std::vector<std::future<void>> pool;
    for (int t = 1; t < std::max(1, threads); ++t)
      pool.push_back(std::async(std::launch::async, worker));
    worker();
    for (auto& f : pool) f.get();
  }

  SessionResult all;
  for (auto& slot : slots) {
    all.records.insert(all.records.end(), std::make_move_iterator(slot.records.begin()),
                       std::make_move_iterator(slot.records.end()));
    all.actions.insert(all.actions.end(), slot.actions.begin(), slot.actions.end());
  }
  std::stable_sort(all.records.begin(), all.records.end(),
                   [](const TrialRecord& a, const TrialRecord& b) {
                     return std::tuple(a.spec.participant_id, a.spec.block_idx,
                                       a.spec.trial_idx) <
                            std::tuple(b.spec.participant_id, b.spec.block_idx,
                                       b.spec.trial_idx);
                   });
  std::stable_sort(all.actions.begin(), all.actions.end(),
                   [](const ActionLogEntry& a, const ActionLogEntry& b) {
                     return std::tuple(a.participant_id, a.block_idx, a.action.trial_idx) <
                            std::tuple(b.participant_id, b.block_idx, b.action.trial_idx);
                   });
  return all;
}

inline std::string manifest_json(const RunConfig& cfg,
                                 const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["tool"] = "xrsim";
  j["version"] = kVersion;
  j["trial_log_schema_version"] = kTrialLogSchemaVersion;
  j["config_hash"] = config_hash_hex(cfg);
  j["master_seed"] = cfg.master_seed;
  j["participants"] = cfg.participants;
  j["outputs"] = outputs;
  j["config"] = run_config_to_json(cfg);
  return j.dump(2) + "\n";
}

struct SimulatePaths {
  std::filesystem::path trials_csv;
  std::filesystem::path actions_csv;
  std::filesystem::path manifest;
};

inline SimulatePaths simulate_paths(const std::filesystem::path& out_dir) {
  return {out_dir / "trials.csv", out_dir / "actions.csv", out_dir / "run_manifest.json"};
}

inline SessionResult simulate_run(const RunConfig& cfg, const std::filesystem::path& out_dir,
                                  int threads = 1) {
  const auto result = simulate_all(cfg, threads);
  const auto paths = simulate_paths(out_dir);
  atomic_write_file(paths.trials_csv, export_trial_csv(result.records));
  atomic_write_file(paths.actions_csv, export_action_log_csv(result.actions));
  atomic_write_file(paths.manifest,
                    manifest_json(cfg, {paths.trials_csv.filename().string(),
                                        paths.actions_csv.filename().string()}));
  return result;
}

struct AnalysisResult {
  QcResult qc;
  SummaryReport summary;
  std::map<ConditionCell, FittsFit> fitts;
  std::vector<VerificationRow> verification;
};

inline AnalysisResult analyze_records(std::span<const TrialRecord> records) {
  AnalysisResult out;
  out.qc = qc_filter(records);
  out.summary = summarize(out.qc.valid);
  out.fitts = fitts_by_condition(out.qc.valid);
  out.verification = verification_rows(out.qc.valid);
  return out;
}

inline void write_analysis(const AnalysisResult& analysis,
                           const std::filesystem::path& out_dir) {
  atomic_write_file(out_dir / "metrics.json",
                    metrics_report_json(analysis.summary, analysis.fitts));
  atomic_write_file(out_dir / "table_performance.csv",
                    performance_table_csv(analysis.summary));
  atomic_write_file(out_dir / "table_error_types.csv",
                    error_types_table_csv(analysis.summary));
  atomic_write_file(out_dir / "table_conditions.csv", conditions_table_csv(analysis.summary));
  atomic_write_file(out_dir / "table_fitts.csv", fitts_table_csv(analysis.fitts));
  atomic_write_file(out_dir / "qc_ledger.csv", export_qc_ledger_csv(analysis.qc.ledger));
  atomic_write_file(out_dir / "verification_rts.csv",
                    export_verification_csv(analysis.verification));
}

// Verification-phase fits share one t0 cell per modality x UI mode.
inline int lba_cell_index(Modality m, UiMode u) {
  return static_cast<int>(m) * 2 + static_cast<int>(u);
}

inline const std::vector<std::string>& lba_cell_names() {
  static const std::vector<std::string> names = {"hand-static", "hand-adaptive",
                                                 "gaze-static", "gaze-adaptive"};
  return names;
}

inline std::vector<LbaTrial> lba_trials_from_rows(std::span<const VerificationRow> rows) {
  std::vector<LbaTrial> data;
  data.reserve(rows.size());
  for (const auto& r : rows)
    data.push_back({r.verification_rt_ms / 1000.0,
                    {r.id_bits, r.pressure == Pressure::time_limited,
                     lba_cell_index(r.modality, r.ui_mode)}});
  return data;
}

// Percentile bootstrap over trial resamples; refits with a reduced start
// count per replicate.
inline void bootstrap_lba(std::span<const LbaTrial> data, int replicates,
                          const LbaFitOptions& options, LbaFitResult& fit) {
  if (replicates <= 0) return;
  std::vector<std::vector<double>> draws;  // per replicate: packed estimates
  Rng rng(derive_seed(options.seed, {0x626f6f74ull}));
  LbaFitOptions rep_opts = options;
  rep_opts.n_starts = std::max(2, options.n_starts / 3);
  for (int b = 0; b < replicates; ++b) {
    std::vector<LbaTrial> resample;
    resample.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
      resample.push_back(
          data[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(data.size()) - 1))]);
    rep_opts.seed = derive_seed(options.seed, {0x626f6f74ull, static_cast<std::uint64_t>(b)});
    try {
      const auto rep = fit_mle(resample, rep_opts);
      std::vector<double> row = {rep.params.a_start, rep.params.k_gap,
                                 rep.params.v_commit_base, rep.params.beta_id,
                                 rep.params.beta_pressure};
      for (double t0 : rep.params.t0_s) row.push_back(t0);
      draws.push_back(std::move(row));
    } catch (const FitError&) {
      // failed replicate: skipped, interval reflects successful refits only
    }
  }
  if (draws.size() < 8) {
    fit.warnings.push_back("bootstrap: too few successful replicates for intervals");
    return;
  }
  std::vector<std::string> names = {"a_start", "k_gap", "v_commit_base", "beta_id",
                                    "beta_pressure"};
  for (std::size_t c = 0; c < fit.params.t0_s.size(); ++c)
    names.push_back("t0_" + std::to_string(c));
  for (std::size_t p = 0; p < names.size(); ++p) {
    std::vector<double> vals;
    for (const auto& d : draws) vals.push_back(d[p]);
    std::sort(vals.begin(), vals.end());
    const auto lo = static_cast<std::size_t>(0.025 * (vals.size() - 1));
    const auto hi = static_cast<std::size_t>(0.975 * (vals.size() - 1));
    fit.bootstrap_ci.push_back({names[p], {vals[lo], vals[hi]}});
  }
}

}  // namespace xrsim
