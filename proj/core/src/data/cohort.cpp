#include "ckdprog/data/cohort.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "ckdprog/common/csv.hpp"
#include "ckdprog/common/errors.hpp"

namespace ckdprog {

std::optional<int> ckd_stage_rank(const std::string& code) {
  if (code.size() == 4 && code.compare(0, 3, "585") == 0) {
    const char last = code[3];
    if (last >= '1' && last <= '6') return last - '0';
  }
  return std::nullopt;
}

namespace {

// Days from civil date, valid across the full proleptic Gregorian calendar.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

std::int64_t parse_iso_date(const std::string& text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
      !all_digits(text.substr(0, 4)) || !all_digits(text.substr(5, 2)) ||
      !all_digits(text.substr(8, 2))) {
    throw ValidationError("invalid ISO-8601 date: \"" + text + "\"");
  }
  const std::int64_t y = std::stoll(text.substr(0, 4));
  const unsigned m = static_cast<unsigned>(std::stoul(text.substr(5, 2)));
  const unsigned d = static_cast<unsigned>(std::stoul(text.substr(8, 2)));
  if (m < 1 || m > 12 || d < 1 || d > 31) {
    throw ValidationError("invalid ISO-8601 date: \"" + text + "\"");
  }
  const std::int64_t days = days_from_civil(y, m, d);
  // Round-trip rejects out-of-range days like February 30.
  std::int64_t ry;
  unsigned rm, rd;
  civil_from_days(days, ry, rm, rd);
  if (ry != y || rm != m || rd != d) {
    throw ValidationError("invalid ISO-8601 date: \"" + text + "\"");
  }
  return days;
}

std::string format_iso_date(std::int64_t days_since_epoch) {
  std::int64_t y;
  unsigned m, d;
  civil_from_days(days_since_epoch, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02u", static_cast<long long>(y), m, d);
  return buf;
}

std::vector<SubjectTimeline> load_cohort_events(const std::string& path) {
  const csv::Table table = csv::read_file(path);
  const std::vector<std::string> expected = {"subject_id", "icd9_code", "date"};
  if (table.header != expected) {
    std::string got;
    for (const auto& h : table.header) got += (got.empty() ? "" : ",") + h;
    throw ValidationError(path + ": unexpected columns \"" + got +
                          "\"; expected \"subject_id,icd9_code,date\"");
  }
  // Keyed map gives a deterministic subject order; per-subject event order
  // stays stable for same-day rows because sort below is stable.
  std::map<std::string, SubjectTimeline> by_subject;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const int line = static_cast<int>(r) + 2;  // 1-based, after the header
    if (row[0].empty()) {
      throw ValidationError(path + ": line " + std::to_string(line) + ": empty subject_id");
    }
    if (row[1].empty()) {
      throw ValidationError(path + ": line " + std::to_string(line) + ": empty icd9_code");
    }
    DiagnosisEvent event;
    event.subject_id = row[0];
    event.code = row[1];
    try {
      event.date = parse_iso_date(row[2]);
    } catch (const ValidationError& e) {
      throw ValidationError(path + ": line " + std::to_string(line) + ": " + e.what());
    }
    auto& timeline = by_subject[event.subject_id];
    timeline.subject_id = event.subject_id;
    timeline.events.push_back(std::move(event));
  }
  std::vector<SubjectTimeline> timelines;
  timelines.reserve(by_subject.size());
  for (auto& [id, timeline] : by_subject) {
    std::stable_sort(timeline.events.begin(), timeline.events.end(),
                     [](const DiagnosisEvent& a, const DiagnosisEvent& b) { return a.date < b.date; });
    timelines.push_back(std::move(timeline));
  }
  return timelines;
}

ProgressionLabel label_progression(const SubjectTimeline& timeline) {
  if (timeline.events.empty()) {
    throw ValidationError("label_progression: empty timeline for subject " + timeline.subject_id);
  }
  // Collapse staged events to one state per day: the highest stage coded that
  // day. Same-day stage conflicts therefore cannot trigger a progression.
  std::map<std::int64_t, int> day_state;
  std::int64_t last_event_date = timeline.events.front().date;
  for (const auto& event : timeline.events) {
    last_event_date = std::max(last_event_date, event.date);
    if (const auto rank = ckd_stage_rank(event.code)) {
      auto [it, inserted] = day_state.emplace(event.date, *rank);
      if (!inserted) it->second = std::max(it->second, *rank);
    }
  }
  if (day_state.empty()) {
    throw NotStageableError("label_progression: subject " + timeline.subject_id +
                            " has no staged CKD code (5851-5856)");
  }

  const std::int64_t index_date = day_state.begin()->first;
  int lowest_state_so_far = day_state.begin()->second;
  for (auto it = std::next(day_state.begin()); it != day_state.end(); ++it) {
    if (it->second > lowest_state_so_far) {
      return ProgressionLabel{true, it->first - index_date, index_date};
    }
    lowest_state_so_far = std::min(lowest_state_so_far, it->second);
  }
  return ProgressionLabel{false, last_event_date - index_date, index_date};
}

}  // namespace ckdprog
