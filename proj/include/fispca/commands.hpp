#pragma once

// Command implementations behind the `fispca` tool. Each command writes its
// primary output to `out`, diagnostics to `err`, and returns an exit code:
// 0 success, 1 usage, 2 data error, 3 model error.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fispca/baselines.hpp"
#include "fispca/behavior.hpp"
#include "fispca/classifier.hpp"
#include "fispca/dataset.hpp"
#include "fispca/error.hpp"
#include "fispca/eval.hpp"
#include "fispca/fixture.hpp"
#include "fispca/model_io.hpp"
#include "fispca/pca.hpp"
#include "fispca/text.hpp"

namespace fispca {

namespace fs = std::filesystem;

inline constexpr const char* kConfigEnvVar = "FISPCA_CONFIG";

enum class DataProfile { normalized, uah, custom };

struct RunConfig {
    fs::path base_dir = ".";
    SensorConfig sensor;
    DataProfile profile = DataProfile::normalized;
    SourceProfile source = uah_profile();
    std::array<std::vector<fs::path>, kClassCount> train_by_class;
    std::vector<fs::path> train_labeled;
    std::vector<fs::path> eval;
    fs::path model = "model.json";
    std::uint64_t seed = 0;
    std::size_t knn_k = 10;
    ReportFormat format = ReportFormat::text;
    std::size_t window = 1;
};

namespace detail {

inline bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw UsageError("config key '" + std::string(key) + "': expected a boolean, got '" + std::string(v) + "'");
}

inline double parse_number(std::string_view key, std::string_view v) {
    const auto d = text::parse_double(v);
    if (!d) throw UsageError("config key '" + std::string(key) + "': expected a number, got '" + std::string(v) + "'");
    return *d;
}

inline std::uint64_t parse_count(std::string_view key, std::string_view v) {
    const auto i = text::parse_int(v);
    if (!i || *i < 0)
        throw UsageError("config key '" + std::string(key) + "': expected a non-negative integer, got '" +
                         std::string(v) + "'");
    return static_cast<std::uint64_t>(*i);
}

inline std::vector<fs::path> parse_paths(const fs::path& base, std::string_view v) {
    std::vector<fs::path> out;
    for (auto p : text::split(v, ',')) {
        p = text::trim(p);
        if (p.empty()) continue;
        fs::path path{std::string(p)};
        out.push_back(path.is_absolute() ? path : base / path);
    }
    return out;
}

}  // namespace detail

/// Applies one `key = value` setting. Unknown keys are usage errors.
inline void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
    using namespace detail;
    auto& s = c.sensor;
    if (key == "variant") s.variant = parse_variant(value);
    else if (key == "standardize") s.standardize = parse_bool(key, value);
    else if (key == "pca_threshold") s.pca_threshold = parse_number(key, value);
    else if (key == "radius") s.clustering.radius = parse_number(key, value);
    else if (key == "squash") s.clustering.squash = parse_number(key, value);
    else if (key == "accept_ratio") s.clustering.accept_ratio = parse_number(key, value);
    else if (key == "reject_ratio") s.clustering.reject_ratio = parse_number(key, value);
    else if (key == "epochs") s.training.epochs = parse_count(key, value);
    else if (key == "lr") s.training.learning_rate = parse_number(key, value);
    else if (key == "early_stop_tol") s.training.early_stop_tol = parse_number(key, value);
    else if (key == "pure_backprop") s.pure_backprop = parse_bool(key, value);
    else if (key == "a1") s.exponents.a1 = parse_number(key, value);
    else if (key == "a2") s.exponents.a2 = parse_number(key, value);
    else if (key == "a3") s.exponents.a3 = parse_number(key, value);
    else if (key == "seed") {
        c.seed = parse_count(key, value);
        s.training.shuffle_seed = c.seed;
    } else if (key == "profile") {
        if (value == "normalized") c.profile = DataProfile::normalized;
        else if (value == "uah") c.profile = DataProfile::uah, c.source = uah_profile();
        else if (value == "custom") {
            c.profile = DataProfile::custom;
            c.source.name = "custom";
            c.source.streams.clear();
        } else throw UsageError("unknown profile '" + std::string(value) + "' (normalized, uah or custom)");
    } else if (key.starts_with("stream.")) {
        c.source.streams.push_back({std::string(key.substr(7)), Schema::parse(value), false});
    } else if (key == "rate") c.source.rate = parse_number(key, value);
    else if (key == "kalman_q") c.source.kalman.q = parse_number(key, value);
    else if (key == "kalman_r") c.source.kalman.r = parse_number(key, value);
    else if (key == "max_malformed_fraction") c.source.parse.max_malformed_fraction = parse_number(key, value);
    else if (key == "train") c.train_labeled = parse_paths(c.base_dir, value);
    else if (key.starts_with("train.")) {
        const auto cls = parse_behavior(key.substr(6));
        if (!cls) throw UsageError("unknown class in config key '" + std::string(key) + "'");
        c.train_by_class[index_of(*cls)] = parse_paths(c.base_dir, value);
    } else if (key == "eval") c.eval = parse_paths(c.base_dir, value);
    else if (key == "model") c.model = parse_paths(c.base_dir, value).at(0);
    else if (key == "knn_k") c.knn_k = parse_count(key, value);
    else if (key == "format") c.format = parse_report_format(value);
    else if (key == "window") c.window = parse_count(key, value);
    else throw UsageError("unknown config key '" + std::string(key) + "'");
}

/// `key = value` lines; `#` starts a comment. Relative paths resolve against `base_dir`.
inline RunConfig parse_config(std::string_view content, const fs::path& base_dir = ".") {
    RunConfig c;
    c.base_dir = base_dir;
    const auto all = text::lines(content);
    for (std::size_t i = 0; i < all.size(); ++i) {
        auto line = all[i];
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = text::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw UsageError("config line " + std::to_string(i + 1) + ": expected key = value");
        apply_setting(c, text::trim(line.substr(0, eq)), text::trim(line.substr(eq + 1)));
    }
    return c;
}

inline RunConfig load_config(const fs::path& path) {
    if (!fs::exists(path)) throw UsageError("config file not found: " + path.string());
    return parse_config(read_file(path), path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

// ---------------------------------------------------------------------------
// Data loading

namespace detail {

inline std::vector<fs::path> csv_files(const fs::path& p) {
    std::vector<fs::path> out;
    if (fs::is_directory(p)) {
        for (const auto& e : fs::directory_iterator(p))
            if (e.is_regular_file() && e.path().extension() == ".csv") out.push_back(e.path());
        std::sort(out.begin(), out.end());
    } else {
        out.push_back(p);
    }
    return out;
}

inline std::string describe(std::optional<BehaviorClass> cls) {
    return cls ? std::string(to_string(*cls)) + ": " : std::string{};
}

}  // namespace detail

/// Loads one configured data path. With `assign`, rows are taken as that
/// class (and sessions of other classes are skipped); otherwise the data must
/// carry labels.
inline FeatureMatrix load_path(const fs::path& path, const RunConfig& cfg, std::optional<BehaviorClass> assign) {
    const auto variant = cfg.sensor.variant;
    if (!fs::exists(path)) throw DataError(detail::describe(assign) + "data path does not exist: " + path.string());
    auto out = FeatureMatrix::empty_of(variant);

    switch (cfg.profile) {
        case DataProfile::normalized: {
            for (const auto& file : detail::csv_files(path)) {
                const auto csv = read_normalized_csv(read_file(file), file.string());
                if (csv.variant != variant)
                    throw DataError("variant mismatch: " + file.string() + " holds variant " +
                                    std::string(to_string(csv.variant)) + " data, expected " +
                                    std::string(to_string(variant)));
                for (const auto& r : csv.rows) {
                    if (!row_is_finite(r)) continue;
                    if (assign && r.label && *r.label != *assign)
                        throw DataError(file.string() + ":" + std::to_string(r.line) + ": row labeled " +
                                        std::string(to_string(*r.label)) + " in " + std::string(to_string(*assign)) +
                                        " data");
                    if (!assign && !r.label) throw DataError(file.string() + ": label column required");
                    out.append(r.t, r.x, assign ? *assign : *r.label);
                }
            }
            break;
        }
        case DataProfile::uah: {
            auto sessions = uah::list_sessions(path);
            if (auto self = uah::parse_session_name(path)) sessions.insert(sessions.begin(), *self);
            for (const auto& s : sessions) {
                if (assign && s.label != *assign) continue;
                out.append_all(build_feature_matrix(uah::load_session(s, cfg.source), variant));
            }
            break;
        }
        case DataProfile::custom: {
            if (!assign) throw DataError("custom profile needs per-class paths (train.<class> = ...)");
            if (cfg.source.streams.empty()) throw UsageError("custom profile needs stream.<file> = <schema> entries");
            LabeledSeries series;
            series.label = *assign;
            series.records = load_session_records(path, cfg.source);
            out.append_all(build_feature_matrix(series, variant));
            break;
        }
    }
    if (assign && out.size() == 0)
        throw DataError(detail::describe(assign) + "no usable rows under " + path.string());
    return out;
}

inline std::array<FeatureMatrix, kClassCount> load_training_data(const RunConfig& cfg) {
    std::array<FeatureMatrix, kClassCount> data;
    for (auto c : kAllClasses) data[index_of(c)] = FeatureMatrix::empty_of(cfg.sensor.variant);
    for (const auto& p : cfg.train_labeled) {
        const auto m = load_path(p, cfg, std::nullopt);
        for (auto c : kAllClasses) data[index_of(c)].append_all(m.subset(c));
    }
    for (auto c : kAllClasses)
        for (const auto& p : cfg.train_by_class[index_of(c)]) data[index_of(c)].append_all(load_path(p, cfg, c));
    for (auto c : kAllClasses)
        if (data[index_of(c)].size() == 0)
            throw DataError("missing class: no training data for " + std::string(to_string(c)) +
                            " (set train." + std::string(to_string(c)) + " or train)");
    return data;
}

struct NamedDataset {
    std::string name;
    FeatureMatrix data;
};

inline std::vector<NamedDataset> load_eval_data(const std::vector<fs::path>& paths, const RunConfig& cfg) {
    std::vector<NamedDataset> out;
    for (const auto& p : paths) {
        auto m = load_path(p, cfg, std::nullopt);
        const auto name = fs::is_directory(p) ? p.filename().string() : p.stem().string();
        out.push_back({name.empty() ? p.string() : name, std::move(m)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

struct DatasetEvaluation {
    EvaluationGroup group;
    std::vector<BehaviorClass> predicted;
};

/// Per-label error blocks and the confusion matrix of one dataset.
inline DatasetEvaluation evaluate_dataset(const SoftSensor& s, const NamedDataset& ds) {
    if (ds.data.variant != s.variant)
        throw DataError("variant mismatch: dataset " + ds.name + " is variant " + std::string(to_string(ds.data.variant)) +
                        ", model is variant " + std::string(to_string(s.variant)));
    DatasetEvaluation ev;
    ev.group.name = ds.name;
    std::array<std::array<std::vector<double>, kClassCount>, kClassCount> eps;  // [actual][model]
    for (std::size_t i = 0; i < ds.data.size(); ++i) {
        const auto d = classify(s, ds.data.rows.row(i));
        const auto actual = ds.data.labels[i];
        for (auto m : kAllClasses) eps[index_of(actual)][index_of(m)].push_back(d.eps[m]);
        ev.group.confusion.add(actual, d.label);
        ev.predicted.push_back(d.label);
    }
    for (auto a : kAllClasses) {
        if (eps[index_of(a)][0].empty()) continue;
        ErrorBlock b;
        b.dataset = ds.name + short_tag(a);
        b.actual = a;
        for (auto m : kAllClasses) b.per_model[index_of(m)] = error_stats(eps[index_of(a)][index_of(m)]);
        ev.group.blocks.push_back(std::move(b));
    }
    return ev;
}

// ---------------------------------------------------------------------------
// Commands

namespace detail {

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::data);
    }
}

inline void print_pca_table(std::ostream& out, const std::string& name, const PcaResult& r) {
    out << "PCA " << name << " (k = " << r.selected << ")\n";
    out << "  comp  eigenvalue            evr       cumulative\n";
    double cum = 0.0;
    for (std::size_t i = 0; i < r.components.size(); ++i) {
        const auto& c = r.components[i];
        cum += c.evr;
        char buf[128];
        std::snprintf(buf, sizeof buf, "  %-4zu  %-20.10g  %-8.6f  %.6f\n", i + 1, c.eigenvalue, c.evr, cum);
        out << buf;
    }
}

}  // namespace detail

struct TrainOptions {
    bool fixture = false;
    FixtureOptions fixture_options;
};

inline int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err, const TrainOptions& opt = {}) {
    return detail::guarded(err, [&] {
        std::array<FeatureMatrix, kClassCount> data;
        if (opt.fixture) {
            auto fo = opt.fixture_options;
            fo.variant = cfg.sensor.variant;
            data = generate_fixture(cfg.seed, fo).train;
        } else {
            data = load_training_data(cfg);
        }
        if (!cfg.sensor.exponents.distinct()) err << "warning: exponents a1, a2, a3 are not pairwise distinct\n";
        const auto res = fit(data, cfg.sensor);
        save_model(res.sensor, cfg.model);

        out << "variant " << to_string(cfg.sensor.variant) << ", standardize "
            << (cfg.sensor.standardize ? "on" : "off") << "\n";
        detail::print_pca_table(out, "pooled (P1t)", res.report.pooled);
        for (auto c : kAllClasses)
            detail::print_pca_table(out, std::string(to_string(c)) + " (P1" + short_tag(c) + ")",
                                    res.report.per_class[index_of(c)]);
        for (const auto& r : res.report.classes) {
            out << "FIS" << short_tag(r.label) << ": " << r.samples << " samples, " << r.rules << " rules"
                << (r.ridge_used ? ", ridge consequents" : "") << "\n";
            out << "  loss " << text::format_exact(r.initial_mse);
            for (double l : r.loss_trace) out << ' ' << text::format_exact(l);
            out << "\n";
        }
        out << "model written to " << cfg.model.string() << "\n";
        return 0;
    });
}

struct ClassifyOptions {
    fs::path model;
    std::string input = "-";  ///< file path or "-" for standard input
    bool stream = false;
    std::size_t window = 1;
};

inline int cmd_classify(const ClassifyOptions& opt, std::istream& in, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        const auto sensor = load_model(opt.model);
        StreamClassifier sc(sensor, opt.window);
        std::size_t flagged = 0;
        std::optional<Variant> variant;
        std::size_t width = 0;
        bool labels = false;

        out << "t,eps_d,eps_n,eps_a,label\n";
        auto handle_header = [&](std::string_view line) {
            const auto csv = read_normalized_csv(std::string(line) + "\n", opt.input);
            variant = csv.variant;
            labels = csv.has_labels;
            if (*variant != sensor.variant)
                throw DataError("variant mismatch: input is variant " + std::string(to_string(*variant)) +
                                ", model is variant " + std::string(to_string(sensor.variant)));
            width = feature_count(*variant) + 1 + (labels ? 1 : 0);
        };
        auto handle_row = [&](std::string_view line, std::size_t ln) {
            const auto cells = text::parse_csv_record(line);
            if (cells.size() != width) {
                ++flagged;
                err << "warning: line " << ln << ": expected " << width << " fields, skipped\n";
                return;
            }
            const double t = text::parse_double(cells[0]).value_or(std::numeric_limits<double>::quiet_NaN());
            std::vector<double> x(feature_count(*variant));
            for (std::size_t i = 0; i < x.size(); ++i)
                x[i] = text::parse_double(cells[i + 1]).value_or(std::numeric_limits<double>::quiet_NaN());
            const auto res = std::isfinite(t) ? sc.push(x) : std::nullopt;
            if (!res) {
                ++flagged;
                err << "warning: line " << ln << ": invalid row skipped\n";
                return;
            }
            out << text::format_exact(t) << ',' << text::format_exact(res->smoothed.eps_d) << ','
                << text::format_exact(res->smoothed.eps_n) << ',' << text::format_exact(res->smoothed.eps_a) << ','
                << to_string(res->label) << '\n';
            if (opt.stream) out.flush();
        };

        std::ifstream file;
        std::istream* src = &in;
        if (opt.input != "-") {
            file.open(opt.input, std::ios::binary);
            if (!file) throw DataError("cannot open " + opt.input);
            src = &file;
        }
        std::string line;
        std::size_t ln = 0;
        while (std::getline(*src, line)) {
            ++ln;
            const auto trimmed = text::trim(line);
            if (trimmed.empty()) continue;
            if (!variant)
                handle_header(trimmed);
            else
                handle_row(trimmed, ln);
        }
        if (flagged) err << flagged << " rows flagged\n";
        return 0;
    });
}

struct EvaluateOptions {
    fs::path model;
    std::vector<fs::path> data;
    ReportFormat format = ReportFormat::text;
    std::optional<fs::path> trace_dir;  ///< per-dataset epsilon traces (CSV)
};

inline int cmd_evaluate(const RunConfig& cfg, const EvaluateOptions& opt, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        const auto sensor = load_model(opt.model);
        if (opt.data.empty()) throw UsageError("evaluate needs at least one data path");
        auto data_cfg = cfg;
        data_cfg.sensor.variant = sensor.variant;
        Report report;
        report.title = "Soft-sensor evaluation (variant " + std::string(to_string(sensor.variant)) + ")";
        for (const auto& p : opt.data) {
            // Validate the file variant against the model before loading under it.
            if (cfg.profile == DataProfile::normalized)
                for (const auto& f : detail::csv_files(p)) {
                    if (!fs::exists(f)) throw DataError("data path does not exist: " + f.string());
                    const auto csv = read_normalized_csv(read_file(f), f.string());
                    if (csv.variant != sensor.variant)
                        throw DataError("variant mismatch: " + f.string() + " is variant " +
                                        std::string(to_string(csv.variant)) + ", model is variant " +
                                        std::string(to_string(sensor.variant)));
                }
            for (const auto& ds : load_eval_data({p}, data_cfg)) {
                auto ev = evaluate_dataset(sensor, ds);
                if (opt.trace_dir) {
                    fs::create_directories(*opt.trace_dir);
                    std::ofstream tr(*opt.trace_dir / (ds.name + "_eps.csv"), std::ios::binary);
                    tr << "t,eps_d,eps_n,eps_a,label,actual\n";
                    for (std::size_t i = 0; i < ds.data.size(); ++i) {
                        const auto e = epsilons(sensor, ds.data.rows.row(i));
                        tr << text::format_exact(ds.data.timestamps[i]) << ',' << text::format_exact(e.eps_d) << ','
                           << text::format_exact(e.eps_n) << ',' << text::format_exact(e.eps_a) << ','
                           << to_string(ev.predicted[i]) << ',' << to_string(ds.data.labels[i]) << '\n';
                    }
                }
                report.groups.push_back(std::move(ev.group));
            }
        }
        out << render_report(report, opt.format);
        return 0;
    });
}

struct KnnCommandOptions {
    std::vector<fs::path> train;
    std::vector<fs::path> test;
    KnnOptions knn;
    ReportFormat format = ReportFormat::text;
};

inline int cmd_baseline_knn(const RunConfig& cfg, const KnnCommandOptions& opt, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        if (opt.train.empty() || opt.test.empty()) throw UsageError("baseline-knn needs --train and --test data");
        auto train = FeatureMatrix::empty_of(cfg.sensor.variant);
        for (const auto& ds : load_eval_data(opt.train, cfg)) train.append_all(ds.data);
        const auto model = knn_fit(train, opt.knn);
        Report report;
        report.title = "Weighted KNN baseline (k = " + std::to_string(model.k) + ", " +
                       std::to_string(model.components.size()) + " component(s))";
        EvaluationGroup overall{"overall", {}, {}};
        for (const auto& ds : load_eval_data(opt.test, cfg)) {
            EvaluationGroup g{ds.name, {}, {}};
            for (std::size_t i = 0; i < ds.data.size(); ++i)
                g.confusion.add(ds.data.labels[i], knn_predict(model, ds.data.rows.row(i)));
            overall.confusion += g.confusion;
            report.groups.push_back(std::move(g));
        }
        if (report.groups.size() > 1) report.groups.push_back(std::move(overall));
        out << render_report(report, opt.format);
        return 0;
    });
}

struct PcaReportOptions {
    std::vector<fs::path> data;
    std::optional<fs::path> model;
};

inline int cmd_pca_report(const RunConfig& cfg, const PcaReportOptions& opt, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        if (opt.model) {
            const auto s = load_model(*opt.model);
            out << "model variant " << to_string(s.variant) << ", standardized " << (s.standardized ? "yes" : "no")
                << "\n";
            const std::array<std::pair<const char*, const PrincipalComponent*>, 4> axes = {
                {{"P1d", &s.bank.p1d}, {"P1n", &s.bank.p1n}, {"P1a", &s.bank.p1a}, {"P1t", &s.bank.p1t}}};
            for (const auto& [name, pc] : axes) {
                out << name << " eigenvalue " << text::format_exact(pc->eigenvalue) << " evr "
                    << text::format_fixed(pc->evr, 6) << " axis";
                for (double a : pc->axis) out << ' ' << text::format_fixed(a, 6);
                out << "\n";
            }
        }
        if (opt.data.empty()) {
            if (!opt.model) throw UsageError("pca-report needs --data or --model");
            return 0;
        }
        auto pooled = FeatureMatrix::empty_of(cfg.sensor.variant);
        for (const auto& ds : load_eval_data(opt.data, cfg)) pooled.append_all(ds.data);
        const auto st = cfg.sensor.standardize ? fit_standardizer(pooled.rows, pooled.columns)
                                               : Standardizer::identity(pooled.dim());
        out << "variant " << to_string(cfg.sensor.variant) << ", standardize " << (cfg.sensor.standardize ? "on" : "off")
            << ", threshold " << cfg.sensor.pca_threshold << "\n";
        detail::print_pca_table(out, "pooled", fit_pca(st.apply(pooled.rows), cfg.sensor.pca_threshold));
        for (auto c : kAllClasses) {
            const auto part = pooled.subset(c);
            if (part.size() >= 2)
                detail::print_pca_table(out, std::string(to_string(c)), fit_pca(st.apply(part.rows), cfg.sensor.pca_threshold));
        }
        return 0;
    });
}

struct FixtureCommandOptions {
    fs::path out_dir;
    FixtureOptions fixture;
};

/// Writes train/test CSVs per class plus a ready-to-use config.
inline int cmd_fixture(const RunConfig& cfg, const FixtureCommandOptions& opt, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        auto fo = opt.fixture;
        fo.variant = cfg.sensor.variant;
        const auto fx = generate_fixture(cfg.seed, fo);
        fs::create_directories(opt.out_dir);
        for (auto c : kAllClasses) {
            const std::string name(to_string(c));
            std::ofstream tr(opt.out_dir / ("train_" + name + ".csv"), std::ios::binary);
            write_normalized_csv(tr, fx.train[index_of(c)]);
            std::ofstream te(opt.out_dir / ("test_" + name + ".csv"), std::ios::binary);
            write_normalized_csv(te, fx.test[index_of(c)]);
        }
        std::ofstream conf(opt.out_dir / "fixture.conf", std::ios::binary);
        conf << "# synthetic fixture, seed " << cfg.seed << "\n"
             << "variant = " << to_string(fo.variant) << "\n"
             << "seed = " << cfg.seed << "\n"
             << "train.drowsy = train_drowsy.csv\n"
             << "train.normal = train_normal.csv\n"
             << "train.aggressive = train_aggressive.csv\n"
             << "eval = test_drowsy.csv,test_normal.csv,test_aggressive.csv\n"
             << "model = model.json\n";
        out << "fixture written to " << opt.out_dir.string() << "\n";
        return 0;
    });
}

struct PrepareOptions {
    std::vector<fs::path> inputs;  ///< session directories or roots holding them
    fs::path out_dir;
    std::optional<BehaviorClass> label;  ///< required for the custom profile
};

/// Converts recording sessions into normalized CSV files, one per session.
inline int cmd_prepare(const RunConfig& cfg, const PrepareOptions& opt, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        if (cfg.profile == DataProfile::normalized)
            throw UsageError("prepare needs a raw profile (profile = uah or profile = custom)");
        if (opt.inputs.empty()) throw UsageError("prepare needs at least one input directory");
        fs::create_directories(opt.out_dir);
        std::size_t written = 0;
        for (const auto& in : opt.inputs) {
            if (!fs::exists(in)) throw DataError("data path does not exist: " + in.string());
            std::vector<std::pair<fs::path, LabeledSeries>> series;
            if (cfg.profile == DataProfile::uah) {
                auto sessions = uah::list_sessions(in);
                if (auto self = uah::parse_session_name(in)) sessions.insert(sessions.begin(), *self);
                for (const auto& s : sessions)
                    if (!opt.label || s.label == *opt.label) series.emplace_back(s.dir, uah::load_session(s, cfg.source));
            } else {
                if (!opt.label) throw UsageError("prepare with the custom profile needs --label");
                if (cfg.source.streams.empty()) throw UsageError("custom profile needs stream.<file> = <schema> entries");
                LabeledSeries s;
                s.label = *opt.label;
                s.records = load_session_records(in, cfg.source);
                series.emplace_back(in, std::move(s));
            }
            for (const auto& [dir, s] : series) {
                const auto m = build_feature_matrix(s, cfg.sensor.variant);
                auto name = dir.filename().string();
                if (name.empty()) name = "session";
                const auto target = opt.out_dir / (name + ".csv");
                std::ofstream os(target, std::ios::binary);
                if (!os) throw DataError("cannot write " + target.string());
                write_normalized_csv(os, m);
                out << target.string() << ": " << m.size() << " rows, " << to_string(s.label) << "\n";
                ++written;
            }
        }
        if (written == 0) throw DataError("no sessions found");
        return 0;
    });
}

}  // namespace fispca
