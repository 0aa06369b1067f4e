#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ckdprog {

// One dated ICD-9 diagnosis row for a subject. Dates are integer days since
// 1970-01-01; no clock or timezone semantics.
struct DiagnosisEvent {
  std::string subject_id;
  std::string code;
  std::int64_t date = 0;
};

// Date-ordered diagnosis record for one subject. Same-day events keep their
// input order.
struct SubjectTimeline {
  std::string subject_id;
  std::vector<DiagnosisEvent> events;
};

struct ProgressionLabel {
  bool progressed = false;
  std::int64_t duration_days = 0;
  std::int64_t index_date = 0;
};

// Stage rank of a CKD ICD-9 code: 5851..5856 map to 1..6. 5859 (unspecified)
// and every non-CKD code carry no rank and can neither anchor nor trigger a
// progression.
std::optional<int> ckd_stage_rank(const std::string& code);

// Parses strict ISO-8601 calendar dates (YYYY-MM-DD) to days since epoch.
std::int64_t parse_iso_date(const std::string& text);

std::string format_iso_date(std::int64_t days_since_epoch);

// Reads a diagnosis CSV (header: subject_id,icd9_code,date) into one timeline
// per subject, events sorted ascending by date with a stable order for ties.
// Duplicated rows are retained. Malformed rows raise ValidationError with the
// 1-based line number.
std::vector<SubjectTimeline> load_cohort_events(const std::string& path);

// Labels CKD progression for one timeline:
//   - index date = date of the first staged diagnosis (codes 5851..5856);
//   - on each day the subject's state is the highest stage coded that day;
//   - progression fires at the first day whose state is strictly above the
//     lowest state on any strictly earlier day, and duration counts from the
//     index date to that day;
//   - otherwise the subject is censored at the last event of any kind.
// Throws NotStageableError when the timeline has no staged code.
ProgressionLabel label_progression(const SubjectTimeline& timeline);

}  // namespace ckdprog
