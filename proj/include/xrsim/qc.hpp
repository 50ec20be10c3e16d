#pragma once

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "xrsim/common.hpp"
#include "xrsim/task.hpp"

namespace xrsim {

enum class QcReason { zoom, fullscreen, dpr_drift, tab_hidden, participant_dropped };

inline std::string to_string(QcReason r) {
  switch (r) {
    case QcReason::zoom: return "zoom";
    case QcReason::fullscreen: return "fullscreen";
    case QcReason::dpr_drift: return "dpr_drift";
    case QcReason::tab_hidden: return "tab_hidden";
    case QcReason::participant_dropped: return "participant_dropped";
  }
  return "unknown";
}

struct QcConfig {
  double zoom_tolerance = 1e-9;        // zoom must be exactly 100%
  double dpr_drift_threshold = 0.1;    // max DPR change between blocks
  double tab_hidden_max_ms = 500.0;
  double participant_drop_fraction = 0.40;  // strictly above drops the participant
};

struct QcExclusion {
  int participant_id = 0;
  int block_idx = -1;
  int trial_idx = -1;  // -1 for participant-level entries
  QcReason reason = QcReason::zoom;
};

struct QcResult {
  std::vector<TrialRecord> valid;
  std::vector<QcExclusion> ledger;
  std::vector<int> dropped_participants;
};

// Display-violation filter. Trial-level rules: zoom off 100%, fullscreen
// lost, DPR drifting more than the threshold from the previous block, tab
// hidden too long. Participants whose excluded share exceeds the drop
// fraction lose all remaining trials.
inline QcResult qc_filter(std::span<const TrialRecord> records, const QcConfig& cfg = {}) {
  // DPR per (participant, block): first record wins; blocks are homogeneous.
  std::map<std::pair<int, int>, double> block_dpr;
  for (const auto& r : records)
    block_dpr.try_emplace({r.spec.participant_id, r.spec.block_idx}, r.dpr);

  auto violation = [&](const TrialRecord& r) -> std::optional<QcReason> {
    if (std::abs(r.zoom_level - 1.0) > cfg.zoom_tolerance) return QcReason::zoom;
    if (!r.fullscreen) return QcReason::fullscreen;
    const auto prev = block_dpr.find({r.spec.participant_id, r.spec.block_idx - 1});
    if (prev != block_dpr.end() &&
        std::abs(r.dpr - prev->second) > cfg.dpr_drift_threshold)
      return QcReason::dpr_drift;
    if (r.tab_hidden_ms > cfg.tab_hidden_max_ms) return QcReason::tab_hidden;
    return std::nullopt;
  };

  std::map<int, int> totals, excluded;
  std::vector<std::optional<QcReason>> reasons(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    ++totals[r.spec.participant_id];
    reasons[i] = violation(r);
    if (reasons[i]) ++excluded[r.spec.participant_id];
  }

  QcResult result;
  std::map<int, bool> dropped;
  for (const auto& [pid, total] : totals) {
    const double frac = static_cast<double>(excluded[pid]) / total;
    dropped[pid] = frac > cfg.participant_drop_fraction;
    if (dropped[pid]) {
      result.dropped_participants.push_back(pid);
      result.ledger.push_back({pid, -1, -1, QcReason::participant_dropped});
    }
  }

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (reasons[i]) {
      result.ledger.push_back(
          {r.spec.participant_id, r.spec.block_idx, r.spec.trial_idx, *reasons[i]});
      continue;
    }
    if (dropped[r.spec.participant_id]) continue;
    result.valid.push_back(r);
  }
  return result;
}

}  // namespace xrsim
