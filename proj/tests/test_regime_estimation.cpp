#include "doctest.h"

#include "rxva/regime_estimation.hpp"

#include <chrono>
#include <sstream>
#include <stdexcept>

using namespace rxva;
using namespace std::chrono;

namespace {

// Daily series: a run of `days` observations at `value` per block.
StressSeries blocks(std::initializer_list<std::pair<int, double>> spec) {
    StressSeries s;
    sys_days day = sys_days{2006y / January / 1};
    for (const auto& [count, value] : spec)
        for (int i = 0; i < count; ++i) {
            s.observations.push_back({year_month_day{day}, value});
            day += days{1};
        }
    return s;
}

}  // namespace

TEST_SUITE("regime_estimation") {

TEST_CASE("ISO dates") {
    const Date d = parse_iso_date("2008-09-15");
    CHECK(format_iso_date(d) == "2008-09-15");
    CHECK(days_between(parse_iso_date("2008-01-01"), parse_iso_date("2009-01-01")) == 366);
    CHECK_THROWS_AS((void)parse_iso_date("2008/09/15"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_iso_date("2007-02-29"), std::invalid_argument);
}

TEST_CASE("load two well-formed rows") {
    std::istringstream in("DATE,TEDRATE\n2006-01-02,0.38\n2006-01-03,0.41\n");
    const auto s = load_series(in, ValueUnit::kPercent);
    REQUIRE(s.observations.size() == 2);
    CHECK(s.observations[0].value == doctest::Approx(38.0));
    CHECK_FALSE(s.was_unsorted);
}

TEST_CASE("unsorted rows are sorted and flagged") {
    std::istringstream in("date,value\n2006-01-03,41\n2006-01-02,38\n");
    const auto s = load_series(in);
    REQUIRE(s.observations.size() == 2);
    CHECK(format_iso_date(s.observations[0].date) == "2006-01-02");
    CHECK(s.was_unsorted);
}

TEST_CASE("missing values are dropped and counted") {
    std::istringstream in("date,value\n2006-01-02,38\n2006-01-03,\n2006-01-04,.\n2006-01-05,40\n");
    const auto s = load_series(in);
    CHECK(s.observations.size() == 2);
    CHECK(s.dropped_missing == 2);
}

TEST_CASE("parse errors carry the line number") {
    std::istringstream bad_date("date,value\n2006-01-02,38\nyesterday,40\n");
    try {
        (void)load_series(bad_date);
        FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::istringstream bad_value("date,value\n2006-01-02,abc\n");
    CHECK_THROWS_WITH_AS((void)load_series(bad_value), doctest::Contains("line 2"), std::invalid_argument);
    std::istringstream empty("");
    CHECK_THROWS_AS((void)load_series(empty), std::invalid_argument);
    CHECK_THROWS_AS((void)load_series_file("/nonexistent/ted.csv"), std::runtime_error);
}

TEST_CASE("rule validation") {
    CHECK_THROWS_AS(ThresholdRule::single(0.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(ThresholdRule::hysteresis(80.0, 48.0).validate(), std::invalid_argument);
    CHECK_NOTHROW(ThresholdRule::hysteresis(48.0, 80.0).validate());
}

TEST_CASE("constant series below the threshold is one normal segment") {
    const auto s = blocks({{30, 20.0}});
    const auto seg = segment(s, ThresholdRule::single(48.0));
    REQUIRE(seg.segments.size() == 1);
    CHECK(seg.segments[0].label == RegimeLabel::kNormal);
    CHECK(seg.segments[0].days == 30);
}

TEST_CASE("synthetic hysteresis fixture") {
    const auto s = blocks({{100, 30.0}, {50, 100.0}, {100, 30.0}});
    const auto seg = segment(s, ThresholdRule::hysteresis(48.0, 80.0));
    REQUIRE(seg.segments.size() == 3);
    CHECK(seg.segments[0].label == RegimeLabel::kNormal);
    CHECK(seg.segments[0].days == 100);
    CHECK(seg.segments[1].label == RegimeLabel::kCrisis);
    CHECK(seg.segments[1].days == 50);
    CHECK(seg.segments[2].label == RegimeLabel::kNormal);
    CHECK(seg.segments[2].days == 100);
    const auto est = estimate_means(seg);
    CHECK(est.count_normal == 2);
    CHECK(est.count_crisis == 1);
    CHECK(*est.mean_normal_days == 100.0);
    CHECK(*est.mean_crisis_days == 50.0);
    CHECK(*est.mean_normal_years == doctest::Approx(100.0 / 365.0));
}

TEST_CASE("hysteresis band keeps the current label") {
    // 60 bp sits between the thresholds: no entry from normal, no exit from crisis.
    const auto s = blocks({{10, 30.0}, {10, 60.0}, {5, 90.0}, {10, 60.0}, {5, 48.0}, {5, 47.0}});
    const auto seg = segment(s, ThresholdRule::hysteresis(48.0, 80.0));
    REQUIRE(seg.segments.size() == 3);
    CHECK(seg.segments[0].days == 20);
    CHECK(seg.segments[1].label == RegimeLabel::kCrisis);
    CHECK(seg.segments[1].days == 20);  // 48 is not below the exit level
    CHECK(seg.segments[2].days == 5);
}

TEST_CASE("single rule is strict at the threshold") {
    const auto s = blocks({{3, 48.0}, {2, 48.5}});
    const auto seg = segment(s, ThresholdRule::single(48.0));
    REQUIRE(seg.segments.size() == 2);
    CHECK(seg.segments[0].label == RegimeLabel::kNormal);
    CHECK(seg.segments[1].label == RegimeLabel::kCrisis);
}

TEST_CASE("segments partition the window and alternate") {
    const auto s = blocks({{7, 10.0}, {3, 90.0}, {12, 70.0}, {4, 20.0}, {9, 85.0}, {6, 30.0}});
    for (const auto& rule : {ThresholdRule::single(48.0), ThresholdRule::hysteresis(48.0, 80.0)}) {
        const auto seg = segment(s, rule);
        REQUIRE(!seg.segments.empty());
        long total = 0;
        for (std::size_t k = 0; k < seg.segments.size(); ++k) {
            total += seg.segments[k].days;
            if (k > 0) {
                CHECK(seg.segments[k].label != seg.segments[k - 1].label);
                CHECK(days_between(seg.segments[k - 1].end, seg.segments[k].start) == 1);
            }
        }
        CHECK(total == static_cast<long>(s.observations.size()));
        CHECK(seg.segments.front().start == s.observations.front().date);
        CHECK(seg.segments.back().end == s.observations.back().date);
    }
}

TEST_CASE("hysteresis is invariant to non-crossing insertions") {
    StressSeries sparse = blocks({{40, 30.0}, {20, 100.0}, {40, 30.0}});
    StressSeries thinned;
    for (std::size_t i = 0; i < sparse.observations.size(); ++i)
        if (i % 3 == 0 || i == sparse.observations.size() - 1 || i == 40 || i == 60)
            thinned.observations.push_back(sparse.observations[i]);
    const auto a = segment(thinned, ThresholdRule::hysteresis(48.0, 80.0));
    const auto b = segment(sparse, ThresholdRule::hysteresis(48.0, 80.0));
    REQUIRE(a.segments.size() == b.segments.size());
    for (std::size_t k = 0; k < a.segments.size(); ++k) {
        CHECK(a.segments[k].label == b.segments[k].label);
        CHECK(a.segments[k].start == b.segments[k].start);
    }
}

TEST_CASE("missing label gives an absent mean") {
    const auto est = estimate_means(segment(blocks({{10, 10.0}}), ThresholdRule::single(48.0)));
    CHECK(est.count_crisis == 0);
    CHECK_FALSE(est.mean_crisis_days.has_value());
    CHECK_FALSE(est.mean_crisis_years.has_value());
}

TEST_CASE("too short a series is rejected") {
    CHECK_THROWS_AS((void)segment(blocks({{1, 10.0}}), ThresholdRule::single(48.0)), std::invalid_argument);
}

TEST_CASE("csv writers") {
    const auto seg = segment(blocks({{2, 10.0}, {3, 60.0}}), ThresholdRule::single(48.0));
    std::ostringstream a, b;
    write_segments_csv(a, seg);
    CHECK(a.str() == "label,start,end,days\nnormal,2006-01-01,2006-01-02,2\ncrisis,2006-01-03,2006-01-05,3\n");
    write_estimates_csv(b, estimate_means(seg));
    CHECK(b.str().rfind("count_normal,count_crisis,mean_normal_days,mean_crisis_days,"
                        "mean_normal_years,mean_crisis_years\n", 0) == 0);
}

}
