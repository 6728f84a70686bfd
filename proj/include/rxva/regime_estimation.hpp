#pragma once

#include <chrono>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rxva {

using Date = std::chrono::year_month_day;

[[nodiscard]] Date parse_iso_date(const std::string& text);
[[nodiscard]] std::string format_iso_date(const Date& date);
/// Calendar days from a to b.
[[nodiscard]] long days_between(const Date& a, const Date& b);

struct Observation {
    Date date;
    double value = 0.0;  // basis points
};

struct StressSeries {
    std::vector<Observation> observations;
    std::size_t dropped_missing = 0;
    bool was_unsorted = false;

    void validate() const;
};

enum class ValueUnit { kBasisPoints, kPercent };

/// Reads a two-column CSV (date,value). Empty or "." values are dropped and
/// counted; rows are sorted by date.
[[nodiscard]] StressSeries load_series(std::istream& csv, ValueUnit unit = ValueUnit::kBasisPoints);
[[nodiscard]] StressSeries load_series_file(const std::string& path,
                                            ValueUnit unit = ValueUnit::kBasisPoints);

enum class RegimeLabel { kNormal, kCrisis };
[[nodiscard]] const char* to_string(RegimeLabel label);

enum class InitialLabel { kNormal, kCrisis, kFromFirstObservation };

struct ThresholdRule {
    enum class Kind { kSingle, kHysteresis };
    Kind kind = Kind::kSingle;
    double lower = 48.0;
    double upper = 80.0;  // hysteresis only
    InitialLabel initial = InitialLabel::kNormal;  // hysteresis only

    void validate() const;
    [[nodiscard]] static ThresholdRule single(double threshold);
    [[nodiscard]] static ThresholdRule hysteresis(double lower, double upper);
};

struct Segment {
    RegimeLabel label = RegimeLabel::kNormal;
    Date start;
    Date end;
    long days = 0;  // inclusive: end - start + 1
};

struct RegimeSegments {
    std::vector<Segment> segments;
};

/// Single rule: crisis iff value > lower. Hysteresis: enter crisis when
/// value > upper, return to normal when value < lower; anything in between
/// keeps the current label.
[[nodiscard]] RegimeSegments segment(const StressSeries& series, const ThresholdRule& rule);

struct EstimationResult {
    std::size_t count_normal = 0;
    std::size_t count_crisis = 0;
    std::optional<double> mean_normal_days;
    std::optional<double> mean_crisis_days;
    std::optional<double> mean_normal_years;
    std::optional<double> mean_crisis_years;
};

inline constexpr double kDaysPerYear = 365.0;

[[nodiscard]] EstimationResult estimate_means(const RegimeSegments& segments);

void write_segments_csv(std::ostream& out, const RegimeSegments& segments);
void write_estimates_csv(std::ostream& out, const EstimationResult& result);

}  // namespace rxva
