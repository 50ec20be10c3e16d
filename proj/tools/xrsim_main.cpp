#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xrsim/config.hpp"
#include "xrsim/csv.hpp"
#include "xrsim/run.hpp"
#include "xrsim/trial_log.hpp"
#include "xrsim/version.hpp"

namespace {

using namespace xrsim;

RunConfig load_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return run_config_from_text(read_file(path));
}

std::string plans_csv(const RunConfig& cfg) {
  std::ostringstream os;
  csv_write_row(os, {"participant_id", "williams_row", "block_idx", "trial_idx", "is_warmup",
                     "modality", "ui_mode", "pressure", "target_angle_deg", "width_px",
                     "distance_px", "id_bits"});
  for (int pid = 0; pid < cfg.participants; ++pid) {
    const auto plan = plan_session(pid, cfg.task, cfg.master_seed);
    for (const auto& block : plan.blocks)
      for (const auto& t : block.trials)
        csv_write_row(os, {std::to_string(pid), std::to_string(plan.williams_row_idx),
                           std::to_string(t.block_idx), std::to_string(t.trial_idx),
                           t.is_warmup ? "1" : "0", to_string(t.modality),
                           to_string(t.ui_mode), to_string(t.pressure),
                           csv_format(t.target_angle_deg), csv_format(t.width_px),
                           csv_format(t.distance_px), csv_format(t.id_bits)});
  }
  return os.str();
}

// Manifest for the analysis-side subcommands, keyed by the input file hash.
std::string input_manifest_json(const std::string& subcommand, const std::string& input_path,
                                const std::string& input_text,
                                const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["tool"] = "xrsim";
  j["version"] = kVersion;
  j["subcommand"] = subcommand;
  j["input"] = input_path;
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(input_text)));
  j["input_hash"] = buf;
  j["outputs"] = outputs;
  return j.dump(2) + "\n";
}

std::vector<VerificationRow> load_verification_any(const std::string& path) {
  const std::string text = read_file(path);
  std::istringstream is(text);
  std::vector<std::string> header;
  if (!csv_read_row(is, header)) throw DataError(path + ": empty file");
  if (header == trial_log_header()) return verification_rows(load_trial_csv_text(text));
  if (header == verification_header()) return load_verification_csv_text(text);
  throw DataError(path + ": not a trial log or verification export (unrecognized header)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic gaze/hand pointing simulation workbench"};
  app.set_version_flag("--version", xrsim::kVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir, input_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int participants = 0;
  int threads = 1;
  bool faithful_bug = false;
  int lba_starts = 10;
  int bootstrap = 0;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run-config JSON file (defaults when omitted)");
    cmd->add_option_function<std::uint64_t>(
           "--seed", [&](std::uint64_t v) { seed = v; seed_set = true; },
           "master seed override");
    cmd->add_option("--participants", participants, "participant count override");
  };

  auto* cmd_plan = app.add_subcommand("plan", "emit session plans");
  add_config(cmd_plan);
  cmd_plan->add_option("--out", out_dir, "output directory")->required();

  auto* cmd_sim = app.add_subcommand("simulate", "run sessions and write the trial log");
  add_config(cmd_sim);
  cmd_sim->add_option("--out", out_dir, "output directory")->required();
  cmd_sim->add_flag("--faithful-bug", faithful_bug,
                    "emit width-inflation actions without applying them");
  cmd_sim->add_option("--threads", threads, "participant-level worker threads");

  auto* cmd_analyze = app.add_subcommand("analyze", "QC, metrics and regression reports");
  cmd_analyze->add_option("--input", input_path, "trial log CSV")->required();
  cmd_analyze->add_option("--out", out_dir, "output directory")->required();

  auto* cmd_fit = app.add_subcommand("fit-lba", "fit the verification-phase race model");
  cmd_fit->add_option("--input", input_path, "verification export or trial log CSV")
      ->required();
  cmd_fit->add_option("--out", out_dir, "output directory")->required();
  cmd_fit->add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t v) { seed = v; seed_set = true; }, "fit seed");
  cmd_fit->add_option("--starts", lba_starts, "optimizer start count");
  cmd_fit->add_option("--bootstrap", bootstrap, "bootstrap replicates for intervals");
  cmd_fit->add_option("--threads", threads, "parallel optimizer starts");

  auto* cmd_qc = app.add_subcommand("qc", "emit the exclusion ledger only");
  cmd_qc->add_option("--input", input_path, "trial log CSV")->required();
  cmd_qc->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 1;
  }

  try {
    const std::filesystem::path out(out_dir);

    if (cmd_plan->parsed() || cmd_sim->parsed()) {
      RunConfig cfg = load_config(config_path);
      if (seed_set) cfg.master_seed = seed;
      if (participants > 0) cfg.participants = participants;

      if (cmd_plan->parsed()) {
        atomic_write_file(out / "plans.csv", plans_csv(cfg));
        atomic_write_file(out / "run_manifest.json", manifest_json(cfg, {"plans.csv"}));
        std::cout << "planned " << cfg.participants << " sessions ("
                  << cfg.participants * cfg.task.blocks * cfg.task.trials_per_block
                  << " trials) -> " << (out / "plans.csv").string() << "\n";
      } else {
        if (faithful_bug) cfg.policy.faithful_bug = true;
        const auto result = simulate_run(cfg, out, std::max(1, threads));
        std::cout << "simulated " << result.records.size() << " trials, "
                  << result.actions.size() << " policy actions -> "
                  << (out / "trials.csv").string() << "\n";
      }
      return 0;
    }

    if (cmd_analyze->parsed()) {
      const std::string text = read_file(input_path);
      const auto records = load_trial_csv_text(text);
      const auto analysis = analyze_records(records);
      write_analysis(analysis, out);
      atomic_write_file(
          out / "run_manifest.json",
          input_manifest_json("analyze", input_path, text,
                              {"metrics.json", "table_performance.csv",
                               "table_error_types.csv", "table_conditions.csv",
                               "table_fitts.csv", "qc_ledger.csv", "verification_rts.csv"}));
      std::cout << "analyzed " << records.size() << " trials: " << analysis.qc.valid.size()
                << " valid, " << analysis.qc.ledger.size() << " exclusion entries, "
                << analysis.summary.by_condition.size() << " condition cells -> "
                << (out / "metrics.json").string() << "\n";
      return 0;
    }

    if (cmd_fit->parsed()) {
      const std::string text = read_file(input_path);
      const auto rows = load_verification_any(input_path);
      if (rows.empty()) throw DataError("fit-lba: no verification-phase trials in input");
      const auto data = lba_trials_from_rows(rows);
      LbaFitOptions opts;
      opts.n_starts = lba_starts;
      opts.threads = std::max(1, threads);
      if (seed_set) opts.seed = seed;
      auto fit = fit_mle(data, opts);
      bootstrap_lba(data, bootstrap, opts, fit);
      atomic_write_file(out / "lba_fit.json", lba_report_json(fit, lba_cell_names()));
      atomic_write_file(out / "run_manifest.json",
                        input_manifest_json("fit-lba", input_path, text, {"lba_fit.json"}));
      for (const auto& w : fit.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "fitted " << data.size() << " verification RTs, nll=" << fit.nll << " -> "
                << (out / "lba_fit.json").string() << "\n";
      return 0;
    }

    if (cmd_qc->parsed()) {
      const std::string text = read_file(input_path);
      const auto records = load_trial_csv_text(text);
      const auto result = qc_filter(records);
      atomic_write_file(out / "qc_ledger.csv", export_qc_ledger_csv(result.ledger));
      atomic_write_file(out / "run_manifest.json",
                        input_manifest_json("qc", input_path, text, {"qc_ledger.csv"}));
      std::cout << "qc: " << result.valid.size() << " of " << records.size()
                << " trials valid, " << result.dropped_participants.size()
                << " participants dropped -> " << (out / "qc_ledger.csv").string() << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
