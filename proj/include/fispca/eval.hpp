#pragma once

// Error statistics, confusion matrices, per-class rates and report rendering
// (text tables, long-format CSV, JSON).

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fispca/behavior.hpp"
#include "fispca/error.hpp"
#include "fispca/json_io.hpp"
#include "fispca/text.hpp"

namespace fispca {

struct ErrorStats {
    double mae = 0.0;
    double sigma = 0.0;  ///< sample (n-1) standard deviation of |e|
    std::size_t n = 0;
};

inline ErrorStats error_stats(std::span<const double> eps) {
    if (eps.empty()) throw DataError("error statistics of an empty sample");
    ErrorStats s;
    s.n = eps.size();
    double sum = 0.0;
    for (double e : eps) sum += std::abs(e);
    s.mae = sum / static_cast<double>(s.n);
    const double first = std::abs(eps[0]);
    bool constant = true;
    for (double e : eps) constant = constant && std::abs(e) == first;
    if (constant) {
        // Avoids rounding residue from the mean: a constant sample has no spread.
        s.mae = first;
    } else if (s.n > 1) {
        double ss = 0.0;
        for (double e : eps) ss += (std::abs(e) - s.mae) * (std::abs(e) - s.mae);
        s.sigma = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

/// Rows are actual classes, columns predicted.
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, kClassCount>, kClassCount> counts{};

    [[nodiscard]] std::uint64_t at(BehaviorClass actual, BehaviorClass predicted) const {
        return counts[index_of(actual)][index_of(predicted)];
    }
    [[nodiscard]] std::uint64_t row_sum(std::size_t i) const {
        return counts[i][0] + counts[i][1] + counts[i][2];
    }
    [[nodiscard]] std::uint64_t col_sum(std::size_t j) const {
        return counts[0][j] + counts[1][j] + counts[2][j];
    }
    [[nodiscard]] std::uint64_t total() const { return row_sum(0) + row_sum(1) + row_sum(2); }
    [[nodiscard]] std::uint64_t correct() const { return counts[0][0] + counts[1][1] + counts[2][2]; }

    void add(BehaviorClass actual, BehaviorClass predicted) { ++counts[index_of(actual)][index_of(predicted)]; }

    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        for (std::size_t i = 0; i < kClassCount; ++i)
            for (std::size_t j = 0; j < kClassCount; ++j) counts[i][j] += o.counts[i][j];
        return *this;
    }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion(std::span<const BehaviorClass> actual, std::span<const BehaviorClass> predicted) {
    if (actual.size() != predicted.size())
        throw DataError("confusion: " + std::to_string(actual.size()) + " actual vs " +
                        std::to_string(predicted.size()) + " predicted labels");
    if (actual.empty()) throw DataError("confusion: no samples");
    ConfusionMatrix m;
    for (std::size_t k = 0; k < actual.size(); ++k) m.add(actual[k], predicted[k]);
    return m;
}

/// Exact count ratio; rounding happens only when rendered.
struct Ratio {
    std::uint64_t num = 0;
    std::uint64_t den = 0;

    [[nodiscard]] bool defined() const noexcept { return den > 0; }
    [[nodiscard]] std::optional<double> value() const {
        if (!defined()) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    }
    friend bool operator==(const Ratio&, const Ratio&) = default;
};

inline constexpr std::string_view kUndefined = "n/a";

/// Percentage with two decimals, rounded half-up from the exact fraction.
inline std::string format_percent(const Ratio& r) {
    if (!r.defined()) return std::string(kUndefined);
    const std::uint64_t hundredths = (r.num * 20000 + r.den) / (2 * r.den);
    const auto whole = hundredths / 100;
    const auto frac = hundredths % 100;
    return std::to_string(whole) + "." + (frac < 10 ? "0" : "") + std::to_string(frac) + "%";
}

/// `tnr` keeps the published-table convention: the row-wise misclassification
/// rate (1 - TPR). The conventional true-negative rate is `specificity`.
struct ClassMetrics {
    Ratio tpr;
    Ratio tnr;
    Ratio ppv;
    Ratio fdr;
    Ratio specificity;
};

inline std::array<ClassMetrics, kClassCount> class_metrics(const ConfusionMatrix& m) {
    std::array<ClassMetrics, kClassCount> out;
    const auto total = m.total();
    for (std::size_t i = 0; i < kClassCount; ++i) {
        const auto row = m.row_sum(i);
        const auto col = m.col_sum(i);
        const auto tp = m.counts[i][i];
        auto& c = out[i];
        c.tpr = {tp, row};
        c.tnr = {row - tp, row};
        c.ppv = {tp, col};
        c.fdr = {col - tp, col};
        const auto negatives = total - row;
        const auto false_pos = col - tp;
        c.specificity = {negatives - false_pos, negatives};
    }
    return out;
}

inline Ratio accuracy(const ConfusionMatrix& m) { return {m.correct(), m.total()}; }

// ---------------------------------------------------------------------------
// Reports

struct ErrorBlock {
    std::string dataset;
    BehaviorClass actual = BehaviorClass::drowsy;
    std::array<ErrorStats, kClassCount> per_model;  ///< FISd, FISn, FISa
};

struct EvaluationGroup {
    std::string name;
    std::vector<ErrorBlock> blocks;
    ConfusionMatrix confusion;
};

struct Report {
    std::string title;
    std::vector<EvaluationGroup> groups;
};

enum class ReportFormat { text, csv, json };

inline ReportFormat parse_report_format(std::string_view s) {
    if (s == "text") return ReportFormat::text;
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    throw UsageError("unknown report format '" + std::string(s) + "' (expected text, csv or json)");
}

inline constexpr std::array<std::string_view, kClassCount> kShortClassNames = {"Drow.", "Norm.", "Aggr."};
inline constexpr std::array<std::string_view, kClassCount> kModelNames = {"FISd", "FISn", "FISa"};

namespace detail {

inline std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

inline std::string rpad_line(std::string s) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s + "\n";
}

inline std::string render_errors_text(const EvaluationGroup& g) {
    std::string out = rpad_line(pad("Data", 10) + pad("", 7) + pad("FISd", 12) + pad("FISn", 12) + "FISa");
    for (const auto& b : g.blocks) {
        std::string mae = pad(b.dataset, 10) + pad("MAE", 7);
        std::string sig = pad("", 10) + pad("sigma", 7);
        for (std::size_t k = 0; k < kClassCount; ++k) {
            mae += pad(text::format_fixed(b.per_model[k].mae, 4), 12);
            sig += pad(text::format_fixed(b.per_model[k].sigma, 4), 12);
        }
        out += rpad_line(mae) + rpad_line(sig);
    }
    return out;
}

inline std::string render_confusion_text(const ConfusionMatrix& m) {
    const auto metrics = class_metrics(m);
    std::string out = rpad_line(pad("", 14) + "Predicted classes");
    out += rpad_line(pad("Actual", 14) + pad("Drow.", 9) + pad("Norm.", 9) + pad("Aggr.", 9) + pad("TPR", 10) + "TNR");
    for (std::size_t i = 0; i < kClassCount; ++i) {
        std::string line = pad(std::string(kShortClassNames[i]), 14);
        for (std::size_t j = 0; j < kClassCount; ++j) line += pad(std::to_string(m.counts[i][j]), 9);
        line += pad(format_percent(metrics[i].tpr), 10) + format_percent(metrics[i].tnr);
        out += rpad_line(line);
    }
    std::string ppv = pad("PPV", 14);
    std::string fdr = pad("FDR", 14);
    for (std::size_t j = 0; j < kClassCount; ++j) {
        ppv += pad(format_percent(metrics[j].ppv), 9);
        fdr += pad(format_percent(metrics[j].fdr), 9);
    }
    out += rpad_line(ppv) + rpad_line(fdr);
    std::string spec = pad("Specificity", 14);
    for (std::size_t j = 0; j < kClassCount; ++j) spec += pad(format_percent(metrics[j].specificity), 9);
    out += rpad_line(spec);
    out += "Accuracy      " + format_percent(accuracy(m)) + " (" + std::to_string(m.correct()) + "/" +
           std::to_string(m.total()) + ")\n";
    return out;
}

inline std::string render_text(const Report& r) {
    std::string out;
    if (!r.title.empty()) out += r.title + "\n\n";
    for (std::size_t gi = 0; gi < r.groups.size(); ++gi) {
        const auto& g = r.groups[gi];
        if (gi) out += "\n";
        out += "== " + g.name + " ==\n";
        if (!g.blocks.empty()) out += render_errors_text(g) + "\n";
        out += render_confusion_text(g.confusion);
    }
    return out;
}

inline std::string csv_ratio(const Ratio& r) { return r.defined() ? text::format_exact(*r.value()) : ""; }

inline std::string render_csv(const Report& r) {
    std::string out = "section,group,dataset,actual,column,metric,value\n";
    auto row = [&](std::string_view section, const std::string& group, const std::string& dataset,
                   std::string_view actual, std::string_view column, std::string_view metric, const std::string& value) {
        out += std::string(section) + "," + text::csv_field(group) + "," + text::csv_field(dataset) + "," +
               std::string(actual) + "," + std::string(column) + "," + std::string(metric) + "," + value + "\n";
    };
    for (const auto& g : r.groups) {
        for (const auto& b : g.blocks)
            for (std::size_t k = 0; k < kClassCount; ++k) {
                const auto& s = b.per_model[k];
                row("errors", g.name, b.dataset, to_string(b.actual), kModelNames[k], "mae", text::format_exact(s.mae));
                row("errors", g.name, b.dataset, to_string(b.actual), kModelNames[k], "sigma", text::format_exact(s.sigma));
                row("errors", g.name, b.dataset, to_string(b.actual), kModelNames[k], "n", std::to_string(s.n));
            }
        for (auto a : kAllClasses)
            for (auto p : kAllClasses)
                row("confusion", g.name, "", to_string(a), to_string(p), "count", std::to_string(g.confusion.at(a, p)));
        const auto metrics = class_metrics(g.confusion);
        for (auto c : kAllClasses) {
            const auto& m = metrics[index_of(c)];
            row("metrics", g.name, "", to_string(c), "", "tpr", csv_ratio(m.tpr));
            row("metrics", g.name, "", to_string(c), "", "tnr", csv_ratio(m.tnr));
            row("metrics", g.name, "", to_string(c), "", "ppv", csv_ratio(m.ppv));
            row("metrics", g.name, "", to_string(c), "", "fdr", csv_ratio(m.fdr));
            row("metrics", g.name, "", to_string(c), "", "specificity", csv_ratio(m.specificity));
        }
        row("metrics", g.name, "", "", "", "accuracy", csv_ratio(accuracy(g.confusion)));
    }
    return out;
}

inline json_io::Json ratio_json(const Ratio& r) {
    json_io::Json j;
    j["numerator"] = r.num;
    j["denominator"] = r.den;
    if (r.defined()) {
        j["value"] = *r.value();
        j["percent"] = format_percent(r);
    } else {
        j["value"] = nullptr;
        j["percent"] = nullptr;
    }
    return j;
}

inline json_io::Json report_json(const Report& r) {
    using json_io::Json;
    Json j;
    j["format"] = "fispca-report";
    j["version"] = 1;
    j["title"] = r.title;
    Json groups = Json::array();
    for (const auto& g : r.groups) {
        Json jg;
        jg["name"] = g.name;
        Json errors = Json::array();
        for (const auto& b : g.blocks) {
            Json jb;
            jb["dataset"] = b.dataset;
            jb["actual"] = to_string(b.actual);
            Json models;
            for (std::size_t k = 0; k < kClassCount; ++k)
                models[std::string(kModelNames[k])] = {
                    {"mae", b.per_model[k].mae}, {"sigma", b.per_model[k].sigma}, {"n", b.per_model[k].n}};
            jb["models"] = std::move(models);
            errors.push_back(std::move(jb));
        }
        jg["errors"] = std::move(errors);
        Json counts = Json::array();
        for (const auto& rowc : g.confusion.counts) counts.push_back(Json(rowc));
        jg["confusion"] = {{"labels", {"drowsy", "normal", "aggressive"}}, {"counts", std::move(counts)}};
        Json metrics;
        const auto cm = class_metrics(g.confusion);
        for (auto c : kAllClasses) {
            const auto& m = cm[index_of(c)];
            metrics[std::string(to_string(c))] = {{"tpr", ratio_json(m.tpr)},
                                                  {"tnr", ratio_json(m.tnr)},
                                                  {"ppv", ratio_json(m.ppv)},
                                                  {"fdr", ratio_json(m.fdr)},
                                                  {"specificity", ratio_json(m.specificity)}};
        }
        jg["metrics"] = std::move(metrics);
        jg["accuracy"] = ratio_json(accuracy(g.confusion));
        groups.push_back(std::move(jg));
    }
    j["groups"] = std::move(groups);
    return j;
}

}  // namespace detail

inline std::string render_report(const Report& r, ReportFormat f) {
    switch (f) {
        case ReportFormat::text: return detail::render_text(r);
        case ReportFormat::csv: return detail::render_csv(r);
        case ReportFormat::json: return json_io::dump(detail::report_json(r)) + "\n";
    }
    throw UsageError("unknown report format");
}

/// Confusion counts per group recovered from a CSV report.
inline std::map<std::string, ConfusionMatrix> parse_confusion_csv(std::string_view csv) {
    std::map<std::string, ConfusionMatrix> out;
    const auto all = text::lines(csv);
    for (std::size_t i = 1; i < all.size(); ++i) {
        if (text::trim(all[i]).empty()) continue;
        const auto f = text::parse_csv_record(all[i]);
        if (f.size() != 7) throw DataError("report csv line " + std::to_string(i + 1) + ": expected 7 fields");
        if (f[0] != "confusion") continue;
        const auto a = parse_behavior(f[3]);
        const auto p = parse_behavior(f[4]);
        const auto v = text::parse_int(f[6]);
        if (!a || !p || !v || *v < 0) throw DataError("report csv line " + std::to_string(i + 1) + ": bad confusion row");
        out[f[1]].counts[index_of(*a)][index_of(*p)] = static_cast<std::uint64_t>(*v);
    }
    return out;
}

}  // namespace fispca
