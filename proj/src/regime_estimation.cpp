#include "rxva/regime_estimation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rxva {

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

bool parse_double(const std::string& text, double& out) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && std::isfinite(out);
}

}  // namespace

Date parse_iso_date(const std::string& text) {
    int y = 0;
    unsigned m = 0, d = 0;
    char dash1 = 0, dash2 = 0;
    std::istringstream in(text);
    in >> y >> dash1 >> m >> dash2 >> d;
    if (!in || dash1 != '-' || dash2 != '-' || !in.eof())
        throw std::invalid_argument("not an ISO-8601 date: '" + text + "'");
    const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) throw std::invalid_argument("invalid calendar date: '" + text + "'");
    return date;
}

std::string format_iso_date(const Date& date) {
    std::ostringstream out;
    out << std::setfill('0') << std::setw(4) << static_cast<int>(date.year()) << '-'
        << std::setw(2) << static_cast<unsigned>(date.month()) << '-' << std::setw(2)
        << static_cast<unsigned>(date.day());
    return out.str();
}

long days_between(const Date& a, const Date& b) {
    return (std::chrono::sys_days{b} - std::chrono::sys_days{a}).count();
}

void StressSeries::validate() const {
    if (observations.empty()) throw std::invalid_argument("stress series is empty");
    for (std::size_t i = 0; i < observations.size(); ++i) {
        if (!std::isfinite(observations[i].value))
            throw std::invalid_argument("stress series has a non-finite value");
        if (i > 0 && !(observations[i - 1].date < observations[i].date))
            throw std::invalid_argument("stress series dates must be strictly increasing");
    }
}

StressSeries load_series(std::istream& csv, ValueUnit unit) {
    StressSeries series;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(csv, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (line.find(',') == std::string::npos)
                throw std::invalid_argument("line 1: expected a 'date,value' header");
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected two columns");
        const std::string date_text = trim(line.substr(0, comma));
        const std::string value_text = trim(line.substr(comma + 1));

        Date date;
        try {
            date = parse_iso_date(date_text);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (value_text.empty() || value_text == ".") {
            ++series.dropped_missing;
            continue;
        }
        double value = 0.0;
        if (!parse_double(value_text, value))
            throw std::invalid_argument("line " + std::to_string(line_no) + ": bad value '" +
                                        value_text + "'");
        if (unit == ValueUnit::kPercent) value *= 100.0;
        series.observations.push_back({date, value});
    }
    if (!header_seen) throw std::invalid_argument("stress series file is empty");
    if (series.observations.empty())
        throw std::invalid_argument("stress series has no usable observations");

    auto by_date = [](const Observation& a, const Observation& b) { return a.date < b.date; };
    if (!std::is_sorted(series.observations.begin(), series.observations.end(), by_date)) {
        series.was_unsorted = true;
        std::stable_sort(series.observations.begin(), series.observations.end(), by_date);
    }
    series.validate();
    return series;
}

StressSeries load_series_file(const std::string& path, ValueUnit unit) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open stress series '" + path + "'");
    return load_series(in, unit);
}

const char* to_string(RegimeLabel label) {
    return label == RegimeLabel::kNormal ? "normal" : "crisis";
}

void ThresholdRule::validate() const {
    if (kind == Kind::kSingle) {
        if (!(lower > 0.0)) throw std::invalid_argument("single threshold must be > 0");
    } else if (!(lower > 0.0 && lower < upper)) {
        throw std::invalid_argument("hysteresis thresholds need 0 < lower < upper");
    }
}

ThresholdRule ThresholdRule::single(double threshold) {
    ThresholdRule r;
    r.kind = Kind::kSingle;
    r.lower = threshold;
    return r;
}

ThresholdRule ThresholdRule::hysteresis(double lower, double upper) {
    ThresholdRule r;
    r.kind = Kind::kHysteresis;
    r.lower = lower;
    r.upper = upper;
    return r;
}

RegimeSegments segment(const StressSeries& series, const ThresholdRule& rule) {
    rule.validate();
    series.validate();
    const auto& obs = series.observations;
    if (obs.size() < 2) throw std::invalid_argument("segment: need at least 2 observations");

    std::vector<RegimeLabel> labels(obs.size());
    if (rule.kind == ThresholdRule::Kind::kSingle) {
        for (std::size_t i = 0; i < obs.size(); ++i)
            labels[i] = obs[i].value > rule.lower ? RegimeLabel::kCrisis : RegimeLabel::kNormal;
    } else {
        RegimeLabel current = RegimeLabel::kNormal;
        switch (rule.initial) {
            case InitialLabel::kNormal: current = RegimeLabel::kNormal; break;
            case InitialLabel::kCrisis: current = RegimeLabel::kCrisis; break;
            case InitialLabel::kFromFirstObservation:
                current = obs.front().value > rule.upper ? RegimeLabel::kCrisis
                                                         : RegimeLabel::kNormal;
                break;
        }
        for (std::size_t i = 0; i < obs.size(); ++i) {
            if (current == RegimeLabel::kNormal && obs[i].value > rule.upper)
                current = RegimeLabel::kCrisis;
            else if (current == RegimeLabel::kCrisis && obs[i].value < rule.lower)
                current = RegimeLabel::kNormal;
            labels[i] = current;
        }
    }

    RegimeSegments out;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= obs.size(); ++i) {
        if (i == obs.size() || labels[i] != labels[start]) {
            Segment seg;
            seg.label = labels[start];
            seg.start = obs[start].date;
            seg.end = obs[i - 1].date;
            seg.days = days_between(seg.start, seg.end) + 1;
            out.segments.push_back(seg);
            start = i;
        }
    }
    return out;
}

EstimationResult estimate_means(const RegimeSegments& segments) {
    EstimationResult r;
    double total_normal = 0.0, total_crisis = 0.0;
    for (const auto& s : segments.segments) {
        if (s.label == RegimeLabel::kNormal) {
            ++r.count_normal;
            total_normal += static_cast<double>(s.days);
        } else {
            ++r.count_crisis;
            total_crisis += static_cast<double>(s.days);
        }
    }
    if (r.count_normal > 0) {
        r.mean_normal_days = total_normal / static_cast<double>(r.count_normal);
        r.mean_normal_years = *r.mean_normal_days / kDaysPerYear;
    }
    if (r.count_crisis > 0) {
        r.mean_crisis_days = total_crisis / static_cast<double>(r.count_crisis);
        r.mean_crisis_years = *r.mean_crisis_days / kDaysPerYear;
    }
    return r;
}

void write_segments_csv(std::ostream& out, const RegimeSegments& segments) {
    out << "label,start,end,days\n";
    for (const auto& s : segments.segments)
        out << to_string(s.label) << ',' << format_iso_date(s.start) << ','
            << format_iso_date(s.end) << ',' << s.days << '\n';
}

void write_estimates_csv(std::ostream& out, const EstimationResult& r) {
    auto opt = [](const std::optional<double>& v) {
        if (!v) return std::string{};
        std::ostringstream s;
        s << std::setprecision(10) << *v;
        return s.str();
    };
    out << "count_normal,count_crisis,mean_normal_days,mean_crisis_days,mean_normal_years,"
           "mean_crisis_years\n";
    out << r.count_normal << ',' << r.count_crisis << ',' << opt(r.mean_normal_days) << ','
        << opt(r.mean_crisis_days) << ',' << opt(r.mean_normal_years) << ','
        << opt(r.mean_crisis_years) << '\n';
}

}  // namespace rxva
