#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bankml/dataset.hpp"
#include "bankml/errors.hpp"

namespace bankml {

struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    static bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

    static int days_in_month(int y, int m) {
        static constexpr int days[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        return m == 2 && is_leap(y) ? 29 : days[m - 1];
    }

    static Date parse(const std::string& s) {
        if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
            throw DataError("invalid date '" + s + "', expected YYYY-MM-DD");
        }
        Date d;
        try {
            d.year = std::stoi(s.substr(0, 4));
            d.month = std::stoi(s.substr(5, 2));
            d.day = std::stoi(s.substr(8, 2));
        } catch (const std::exception&) {
            throw DataError("invalid date '" + s + "', expected YYYY-MM-DD");
        }
        if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) {
            throw DataError("invalid date '" + s + "'");
        }
        return d;
    }

    std::string str() const {
        char buf[11];
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
        return buf;
    }
};

// Calendar shift by whole months, day-of-month clamped to the target month.
inline Date add_months(const Date& d, int months) {
    const int zero_based = d.year * 12 + (d.month - 1) + months;
    Date out;
    out.year = zero_based >= 0 ? zero_based / 12 : -((-zero_based + 11) / 12);
    out.month = zero_based - out.year * 12 + 1;
    out.day = std::min(d.day, Date::days_in_month(out.year, out.month));
    return out;
}

// Signed count of complete calendar months from one date to another.
inline int whole_months_between(const Date& from, const Date& to) {
    if (to < from) return -whole_months_between(to, from);
    int lo = 0;
    int hi = (to.year - from.year + 1) * 12;
    while (lo < hi) {
        const int mid = (lo + hi + 1) / 2;
        if (add_months(from, mid) <= to) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    return lo;
}

inline Date quarter_end(const Quarter& q) {
    static constexpr int month[4] = {3, 6, 9, 12};
    static constexpr int day[4] = {31, 30, 30, 31};
    return Date{q.year, month[q.q - 1], day[q.q - 1]};
}

struct TrendPoint {
    Quarter period;
    std::vector<std::optional<double>> probs; // parallel to TrendSeries::model_names
};

struct TrendSeries {
    std::string bank_id;
    std::vector<std::string> model_names;
    std::vector<TrendPoint> points;
    double threshold = 0.5;
    std::map<std::string, std::optional<Quarter>> warnings;

    std::size_t model_index(const std::string& name) const {
        for (std::size_t i = 0; i < model_names.size(); ++i) {
            if (model_names[i] == name) return i;
        }
        throw std::invalid_argument("trend: unknown model name '" + name + "'");
    }
};

using ProbFn = std::function<double(const std::vector<double>&)>;

struct NamedModel {
    std::string name;
    ProbFn prob;
};

struct QuarterReport {
    Quarter period;
    std::vector<double> values;
};

// Earliest period whose probability is strictly above the threshold; gaps
// never trigger.
inline std::optional<Quarter> first_warning(const TrendSeries& series, const std::string& model) {
    const std::size_t idx = series.model_index(model);
    for (const auto& pt : series.points) {
        if (pt.probs[idx] && *pt.probs[idx] > series.threshold) return pt.period;
    }
    return std::nullopt;
}

// Per-quarter bankruptcy probabilities under each model. A report with a
// missing feature value becomes a gap point carrying no probabilities.
inline TrendSeries probability_series(const std::string& bank_id,
                                      const std::vector<NamedModel>& models,
                                      std::vector<QuarterReport> reports,
                                      double threshold = 0.5) {
    if (models.empty()) throw ConfigError("trend: no models given");
    if (reports.empty()) throw DataError("trend: no quarterly reports given");

    std::sort(reports.begin(), reports.end(),
              [](const QuarterReport& a, const QuarterReport& b) { return a.period < b.period; });
    for (std::size_t i = 0; i + 1 < reports.size(); ++i) {
        if (reports[i].period == reports[i + 1].period) {
            throw DataError("trend: duplicate period " + reports[i].period.str());
        }
    }

    TrendSeries series;
    series.bank_id = bank_id;
    series.threshold = threshold;
    for (const auto& m : models) series.model_names.push_back(m.name);

    for (const auto& rep : reports) {
        TrendPoint pt;
        pt.period = rep.period;
        const bool gap = std::any_of(rep.values.begin(), rep.values.end(),
                                     [](double v) { return std::isnan(v); });
        for (const auto& m : models) {
            if (gap) {
                pt.probs.push_back(std::nullopt);
            } else {
                pt.probs.push_back(m.prob(rep.values));
            }
        }
        series.points.push_back(std::move(pt));
    }

    for (const auto& name : series.model_names) {
        series.warnings[name] = first_warning(series, name);
    }
    return series;
}

// Complete months from the first-warning quarter's end to the event date;
// positive means the warning preceded the event.
inline std::optional<int> lead_time(const TrendSeries& series, const std::string& model,
                                    const Date& event_date) {
    const auto warning = first_warning(series, model);
    if (!warning) return std::nullopt;
    return whole_months_between(quarter_end(*warning), event_date);
}

inline std::string render_trend_csv(const TrendSeries& series) {
    std::string out = "bank_id,period";
    for (const auto& name : series.model_names) out += "," + csv::quote(name);
    out += "\n";
    for (const auto& pt : series.points) {
        out += csv::quote(series.bank_id) + "," + pt.period.str();
        for (const auto& p : pt.probs) {
            out += ",";
            if (p) out += csv::format_double(*p);
        }
        out += "\n";
    }
    return out;
}

} // namespace bankml
