#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>
#include <vector>

#include "xrsim/csv.hpp"
#include "xrsim/rng.hpp"
#include "xrsim/trial_log.hpp"

using namespace xrsim;

namespace {

TrialRecord random_record(Rng& rng, int idx) {
  TrialRecord r;
  r.spec.participant_id = idx % 16;
  r.spec.block_idx = idx % 8;
  r.spec.trial_idx = idx % 27;
  r.spec.is_warmup = rng.bernoulli(0.1);
  r.spec.modality = rng.bernoulli(0.5) ? Modality::hand : Modality::gaze;
  r.spec.ui_mode = rng.bernoulli(0.5) ? UiMode::static_ui : UiMode::adaptive;
  r.spec.pressure = rng.bernoulli(0.5) ? Pressure::self_paced : Pressure::time_limited;
  r.spec.target_angle_deg = 45.0 * static_cast<double>(rng.uniform_int(0, 7));
  r.spec.width_px = rng.uniform(30.0, 80.0);
  r.spec.id_bits = rng.uniform(2.0, 6.0);
  r.spec.distance_px = r.spec.width_px * (std::exp2(r.spec.id_bits) - 1.0);

  const int oc = static_cast<int>(rng.uniform_int(0, 3));
  r.outcome = static_cast<Outcome>(oc);
  if (r.outcome != Outcome::timeout) {
    r.rt_ms = rng.uniform(300.0, 5500.0);
    r.endpoint_px = Vec2{rng.uniform(0.0, 3840.0), rng.uniform(0.0, 2160.0)};
    r.selected_element = r.outcome == Outcome::miss ? "" : "target_3";
    if (rng.bernoulli(0.8)) {
      r.first_entry_ms = *r.rt_ms * rng.uniform(0.3, 0.9);
      r.verification_ms = *r.rt_ms - *r.first_entry_ms;
    }
  }
  r.hover_total_ms = rng.uniform(0.0, 2000.0);
  r.submovement_count = static_cast<int>(rng.uniform_int(1, 5));
  r.width_scale_applied = rng.bernoulli(0.2) ? 1.5 : 1.0;
  r.declutter_active = rng.bernoulli(0.2);
  r.policy_triggered = rng.bernoulli(0.2);
  r.consecutive_errors_at_start = static_cast<int>(rng.uniform_int(0, 4));
  r.agent_profile = "hand-default";
  r.dpr = 1.0;
  r.zoom_level = 1.0;
  r.fullscreen = true;
  r.tab_hidden_ms = 0.0;
  r.px_per_mm = 4.0;
  r.ppd = 41.889;
  r.viewing_distance_mm = 600.0;
  r.viewport_w_px = 3840;
  r.viewport_h_px = 2160;
  r.trial_seed = rng.next_u64();
  r.tick_count = static_cast<int>(rng.uniform_int(1, 360));
  if (rng.bernoulli(0.1))
    for (auto& t : r.tlx) t = rng.uniform(0.0, 100.0);
  return r;
}

}  // namespace

TEST_CASE("csv quoting round-trips awkward fields", "[io]") {
  std::ostringstream os;
  csv_write_row(os, {"plain", "with,comma", "with\"quote", "with\nnewline", ""});
  std::istringstream is(os.str());
  std::vector<std::string> row;
  REQUIRE(csv_read_row(is, row));
  CHECK(row == std::vector<std::string>{"plain", "with,comma", "with\"quote", "with\nnewline", ""});
}

TEST_CASE("trial log round-trip is exact after one canonicalization", "[io]") {
  Rng rng(404);
  std::vector<TrialRecord> raw;
  for (int i = 0; i < 1000; ++i) raw.push_back(random_record(rng, i));

  // First pass quantizes floats to the six-significant-digit wire format.
  const auto canonical = load_trial_csv_text(export_trial_csv(raw));
  const std::string text = export_trial_csv(canonical);
  const auto reloaded = load_trial_csv_text(text);

  REQUIRE(reloaded.size() == canonical.size());
  for (std::size_t i = 0; i < reloaded.size(); ++i) REQUIRE(reloaded[i] == canonical[i]);
  CHECK(export_trial_csv(reloaded) == text);
}

TEST_CASE("header guard rejects shuffled columns", "[io]") {
  Rng rng(7);
  const std::vector<TrialRecord> records = {random_record(rng, 0)};
  std::string text = export_trial_csv(records);
  // Swap the first two header names.
  const auto pos = text.find("schema_version,participant_id");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, std::string("schema_version,participant_id").size(),
               "participant_id,schema_version");
  CHECK_THROWS_AS(load_trial_csv_text(text), DataError);
}

TEST_CASE("schema version mismatch names both versions", "[io]") {
  Rng rng(8);
  const std::vector<TrialRecord> records = {random_record(rng, 0)};
  std::string text = export_trial_csv(records);
  const auto header_end = text.find('\n');
  auto row = text.substr(header_end + 1);
  REQUIRE(row.rfind("1,", 0) == 0);
  row.replace(0, 1, "99");
  try {
    load_trial_csv_text(text.substr(0, header_end + 1) + row);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("expected 1") != std::string::npos);
    CHECK(msg.find("found 99") != std::string::npos);
  }
}

TEST_CASE("malformed rows report their line number", "[io]") {
  Rng rng(9);
  const std::vector<TrialRecord> records = {random_record(rng, 0), random_record(rng, 1)};
  std::string text = export_trial_csv(records);
  // Corrupt a numeric field in the second data row (line 3).
  const auto last = text.rfind("\n", text.size() - 2);
  auto broken = text;
  const auto angle_pos = broken.find(",", broken.find(",", last) + 1);
  broken.insert(angle_pos + 1, "not_a_number_");
  try {
    load_trial_csv_text(broken);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
}

TEST_CASE("the shipped schema file matches the column table", "[io]") {
  const auto path = std::filesystem::path(XRSIM_SOURCE_DIR) / "schema" /
                    "trial_log_schema.json";
  CHECK(read_file(path) == trial_log_schema_json());
}

TEST_CASE("verification export applies the validity window", "[io]") {
  Rng rng(11);
  std::vector<TrialRecord> records;
  auto mk = [&](Outcome o, std::optional<double> verif, bool warmup = false) {
    TrialRecord r = random_record(rng, 0);
    r.spec.is_warmup = warmup;
    r.outcome = o;
    r.verification_ms = verif;
    return r;
  };
  records.push_back(mk(Outcome::hit, 400.0));
  records.push_back(mk(Outcome::hit, 150.0));     // below window
  records.push_back(mk(Outcome::hit, 5500.0));    // above window
  records.push_back(mk(Outcome::slip, 600.0));    // not a hit
  records.push_back(mk(Outcome::hit, 700.0, true));  // warmup
  records.push_back(mk(Outcome::hit, std::nullopt));

  const auto rows = verification_rows(records);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].verification_rt_ms == Catch::Approx(400.0));

  const auto reloaded = load_verification_csv_text(export_verification_csv(rows));
  REQUIRE(reloaded.size() == 1);
  CHECK(reloaded[0].id_bits == Catch::Approx(rows[0].id_bits).margin(1e-4));
}

TEST_CASE("atomic write then read round-trips bytes", "[io]") {
  const auto dir = std::filesystem::temp_directory_path() / "xrsim_io_test";
  std::filesystem::remove_all(dir);
  const auto path = dir / "nested" / "file.txt";
  atomic_write_file(path, "payload\nline2\n");
  CHECK(read_file(path) == "payload\nline2\n");
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("action and qc ledgers serialize one row per entry", "[io]") {
  std::vector<ActionLogEntry> actions = {
      {3, 2, {PolicyActionKind::inflate_width, 1.5, 7}, false},
      {3, 2, {PolicyActionKind::declutter_on, 0.0, 9}, true}};
  const std::string a = export_action_log_csv(actions);
  CHECK(a.find("inflate_width,1.5,0") != std::string::npos);
  CHECK(a.find("declutter_on,0,1") != std::string::npos);

  std::vector<QcExclusion> ledger = {{1, 0, 4, QcReason::zoom},
                                     {2, -1, -1, QcReason::participant_dropped}};
  const std::string q = export_qc_ledger_csv(ledger);
  CHECK(q.find("1,0,4,zoom") != std::string::npos);
  CHECK(q.find("2,-1,-1,participant_dropped") != std::string::npos);
}
