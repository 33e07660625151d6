#pragma once

// Telemetry ingestion: delimited-text parsing, NaN cleaning, multi-rate
// alignment, acceleration smoothing and feature-matrix assembly.

#include <algorithm>
#include <array>
#include <bitset>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fispca/behavior.hpp"
#include "fispca/error.hpp"
#include "fispca/matrix.hpp"
#include "fispca/text.hpp"

namespace fispca {

enum class Field : std::size_t { ax, ay, az, fax, fay, faz, v, vmax };
inline constexpr std::size_t kFieldCount = 8;
inline constexpr std::array<std::string_view, kFieldCount> kFieldNames = {
    "ax", "ay", "az", "fax", "fay", "faz", "v", "vmax"};

constexpr std::string_view to_string(Field f) noexcept { return kFieldNames[static_cast<std::size_t>(f)]; }

inline std::optional<Field> parse_field(std::string_view name) {
    for (std::size_t i = 0; i < kFieldCount; ++i)
        if (kFieldNames[i] == name) return static_cast<Field>(i);
    return std::nullopt;
}

/// Column-index to field mapping. Column 0 is always the timestamp.
struct Schema {
    std::vector<std::pair<std::size_t, Field>> columns;

    /// Parses "1:ax,2:ay,3:az".
    static Schema parse(std::string_view spec) {
        Schema s;
        for (auto item : text::split(spec, ',')) {
            item = text::trim(item);
            if (item.empty()) continue;
            const auto colon = item.find(':');
            if (colon == std::string_view::npos)
                throw UsageError("bad schema entry '" + std::string(item) + "' (expected index:field)");
            const auto idx = text::parse_int(item.substr(0, colon));
            const auto field = parse_field(text::trim(item.substr(colon + 1)));
            if (!idx || *idx < 1 || !field)
                throw UsageError("bad schema entry '" + std::string(item) + "'");
            s.columns.emplace_back(static_cast<std::size_t>(*idx), *field);
        }
        if (s.columns.empty()) throw UsageError("empty schema");
        return s;
    }

    [[nodiscard]] std::size_t max_index() const noexcept {
        std::size_t m = 0;
        for (const auto& [i, f] : columns) m = std::max(m, i);
        return m;
    }
};

/// One parsed line. Only fields in `present` carry data; unparseable cells are NaN.
struct PartialRecord {
    double t = 0.0;
    std::array<double, kFieldCount> values{};
    std::bitset<kFieldCount> present;

    PartialRecord() { values.fill(std::numeric_limits<double>::quiet_NaN()); }

    [[nodiscard]] bool has(Field f) const { return present.test(static_cast<std::size_t>(f)); }
    [[nodiscard]] double get(Field f) const { return values[static_cast<std::size_t>(f)]; }
    void set(Field f, double v) {
        values[static_cast<std::size_t>(f)] = v;
        present.set(static_cast<std::size_t>(f));
    }
};

struct ParseOptions {
    double max_malformed_fraction = 0.05;
};

/// Parses line-oriented delimited text. Blank lines and `#` comments are ignored.
/// A line is malformed when its timestamp is unreadable or it is too short for the
/// schema; malformed lines are skipped unless they exceed the configured fraction.
inline std::vector<PartialRecord> parse_stream(std::string_view input, const Schema& schema,
                                               const ParseOptions& opts = {}) {
    std::vector<PartialRecord> out;
    std::vector<std::size_t> malformed;
    std::size_t considered = 0;
    const std::size_t need = schema.max_index() + 1;

    const auto all = text::lines(input);
    for (std::size_t ln = 0; ln < all.size(); ++ln) {
        const auto line = text::trim(all[ln]);
        if (line.empty() || line.front() == '#') continue;
        ++considered;
        const auto cells = text::split_fields(line);
        const auto t = cells.empty() ? std::nullopt : text::parse_double(cells[0]);
        if (!t || cells.size() < need) {
            malformed.push_back(ln + 1);
            continue;
        }
        PartialRecord rec;
        rec.t = *t;
        for (const auto& [idx, field] : schema.columns)
            rec.set(field, text::parse_double(cells[idx]).value_or(std::numeric_limits<double>::quiet_NaN()));
        out.push_back(rec);
    }

    if (!malformed.empty() &&
        static_cast<double>(malformed.size()) > opts.max_malformed_fraction * static_cast<double>(considered)) {
        std::string msg = "parse failure: " + std::to_string(malformed.size()) + " of " +
                          std::to_string(considered) + " lines malformed (lines";
        for (std::size_t i = 0; i < malformed.size() && i < 10; ++i) msg += ' ' + std::to_string(malformed[i]);
        if (malformed.size() > 10) msg += " ...";
        throw DataError(msg + ")");
    }
    return out;
}

/// Fused sample on the common time grid.
struct DriveRecord {
    double t = 0.0;
    double ax = 0.0, ay = 0.0, az = 0.0;
    double fax = 0.0, fay = 0.0, faz = 0.0;
    double v = 0.0;
    std::optional<double> vmax;

    [[nodiscard]] double get(Field f) const {
        switch (f) {
            case Field::ax: return ax;
            case Field::ay: return ay;
            case Field::az: return az;
            case Field::fax: return fax;
            case Field::fay: return fay;
            case Field::faz: return faz;
            case Field::v: return v;
            case Field::vmax: return vmax.value_or(std::numeric_limits<double>::quiet_NaN());
        }
        return std::numeric_limits<double>::quiet_NaN();
    }
    void set(Field f, double value) {
        switch (f) {
            case Field::ax: ax = value; break;
            case Field::ay: ay = value; break;
            case Field::az: az = value; break;
            case Field::fax: fax = value; break;
            case Field::fay: fay = value; break;
            case Field::faz: faz = value; break;
            case Field::v: v = value; break;
            case Field::vmax: vmax = value; break;
        }
    }
};

inline bool row_is_finite(const PartialRecord& r) {
    if (!std::isfinite(r.t)) return false;
    for (std::size_t i = 0; i < kFieldCount; ++i)
        if (r.present.test(i) && !std::isfinite(r.values[i])) return false;
    return true;
}

inline bool row_is_finite(const DriveRecord& r) {
    for (double x : {r.t, r.ax, r.ay, r.az, r.fax, r.fay, r.faz, r.v})
        if (!std::isfinite(x)) return false;
    return !r.vmax || std::isfinite(*r.vmax);
}

template <class Row>
struct CleanResult {
    std::vector<Row> rows;
    std::size_t dropped = 0;
};

/// Drops every row holding a non-finite value in a populated field. Never imputes.
template <class Row>
CleanResult<Row> clean(std::vector<Row> rows) {
    CleanResult<Row> res;
    res.rows.reserve(rows.size());
    for (auto& r : rows) {
        if (row_is_finite(r))
            res.rows.push_back(std::move(r));
        else
            ++res.dropped;
    }
    return res;
}

/// Aligns streams on a uniform grid at `rate` Hz spanning the common time window.
/// Each signal is zero-order held from its latest observation at or before the grid
/// point. Fields no stream provides stay NaN (vmax stays empty).
inline std::vector<DriveRecord> resample_merge(std::span<const std::vector<PartialRecord>> streams,
                                               double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw UsageError("resample rate must be positive");
    if (streams.empty()) throw DataError("disjoint streams");

    double start = -std::numeric_limits<double>::infinity();
    double end = std::numeric_limits<double>::infinity();
    for (const auto& s : streams) {
        if (s.empty()) throw DataError("disjoint streams");
        start = std::max(start, s.front().t);
        end = std::min(end, s.back().t);
    }
    if (start > end) throw DataError("disjoint streams");

    // First stream that provides a field owns it.
    std::array<int, kFieldCount> owner;
    owner.fill(-1);
    for (std::size_t si = 0; si < streams.size(); ++si)
        for (std::size_t f = 0; f < kFieldCount; ++f)
            if (owner[f] < 0 && streams[si].front().present.test(f)) owner[f] = static_cast<int>(si);

    const double period = 1.0 / rate;
    const double slack = 1e-9 * period;
    const auto count = static_cast<std::size_t>(std::floor((end - start) * rate + 1e-9)) + 1;

    std::vector<std::size_t> cursor(streams.size(), 0);
    std::vector<DriveRecord> out;
    out.reserve(count);
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < count; ++i) {
        const double t = start + static_cast<double>(i) / rate;
        DriveRecord rec{t, nan, nan, nan, nan, nan, nan, nan, std::nullopt};
        for (std::size_t si = 0; si < streams.size(); ++si) {
            const auto& s = streams[si];
            while (cursor[si] + 1 < s.size() && s[cursor[si] + 1].t <= t + slack) ++cursor[si];
        }
        for (std::size_t f = 0; f < kFieldCount; ++f) {
            if (owner[f] < 0) continue;
            const auto si = static_cast<std::size_t>(owner[f]);
            rec.set(static_cast<Field>(f), streams[si][cursor[si]].get(static_cast<Field>(f)));
        }
        out.push_back(rec);
    }
    return out;
}

struct KalmanParams {
    double q = 1e-3;  ///< process variance
    double r = 1e-2;  ///< measurement variance
};

/// Scalar random-walk Kalman filter. The state starts at the first measurement
/// with variance r, so q = 0 reduces to the running mean.
inline std::vector<double> kalman_filter_accel(std::span<const double> z, double q, double r) {
    if (!(q >= 0.0) || !(r >= 0.0) || (q == 0.0 && r == 0.0))
        throw UsageError("kalman filter needs q >= 0, r >= 0, not both zero");
    std::vector<double> out;
    out.reserve(z.size());
    if (z.empty()) return out;
    for (double v : z)
        if (!std::isfinite(v)) throw DataError("kalman filter input contains non-finite samples; clean first");

    double x = z[0];
    double p = r;
    out.push_back(x);
    for (std::size_t k = 1; k < z.size(); ++k) {
        const double prior = p + q;
        const double gain = prior / (prior + r);
        x += gain * (z[k] - x);
        p = (1.0 - gain) * prior;
        out.push_back(x);
    }
    return out;
}

/// Fills fax/fay/faz from ax/ay/az for rows whose filtered channels are missing.
inline void fill_filtered_accel(std::vector<DriveRecord>& records, const KalmanParams& kp = {}) {
    if (records.empty()) return;
    const bool missing = std::any_of(records.begin(), records.end(), [](const DriveRecord& r) {
        return !std::isfinite(r.fax) || !std::isfinite(r.fay) || !std::isfinite(r.faz);
    });
    if (!missing) return;
    const std::array<std::pair<Field, Field>, 3> axes = {
        {{Field::ax, Field::fax}, {Field::ay, Field::fay}, {Field::az, Field::faz}}};
    for (const auto& [raw, filtered] : axes) {
        std::vector<double> z(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) z[i] = records[i].get(raw);
        const auto f = kalman_filter_accel(z, kp.q, kp.r);
        for (std::size_t i = 0; i < records.size(); ++i) records[i].set(filtered, f[i]);
    }
}

enum class Road { motorway, secondary };

constexpr std::string_view to_string(Road r) noexcept { return r == Road::motorway ? "motorway" : "secondary"; }

struct LabeledSeries {
    std::string driver;
    Road road = Road::motorway;
    BehaviorClass label = BehaviorClass::normal;
    std::vector<DriveRecord> records;
};

inline std::vector<std::string> feature_columns(Variant v) {
    std::vector<std::string> cols;
    for (std::size_t i = 0; i < feature_count(v); ++i) cols.emplace_back(kFieldNames[i]);
    return cols;
}

/// Labeled N x d design matrix. Column order is fixed per variant.
struct FeatureMatrix {
    Variant variant = Variant::B;
    std::vector<std::string> columns = feature_columns(Variant::B);
    Matrix rows;
    std::vector<double> timestamps;
    std::vector<BehaviorClass> labels;

    [[nodiscard]] std::size_t size() const noexcept { return rows.rows(); }
    [[nodiscard]] std::size_t dim() const noexcept { return columns.size(); }

    static FeatureMatrix empty_of(Variant v) {
        FeatureMatrix m;
        m.variant = v;
        m.columns = feature_columns(v);
        m.rows = Matrix(0, feature_count(v));
        return m;
    }

    void append(double t, std::span<const double> x, BehaviorClass label) {
        rows.append_row(x);
        timestamps.push_back(t);
        labels.push_back(label);
    }

    /// Rows carrying the given label, original order.
    [[nodiscard]] FeatureMatrix subset(BehaviorClass c) const {
        auto out = empty_of(variant);
        for (std::size_t i = 0; i < size(); ++i)
            if (labels[i] == c) out.append(timestamps[i], rows.row(i), c);
        return out;
    }

    void append_all(const FeatureMatrix& other) {
        if (other.variant != variant) throw DataError("variant mismatch while merging feature matrices");
        for (std::size_t i = 0; i < other.size(); ++i)
            append(other.timestamps[i], other.rows.row(i), other.labels[i]);
    }
};

inline FeatureMatrix build_feature_matrix(const LabeledSeries& series, Variant variant) {
    if (series.records.empty()) throw DataError("empty series");
    auto m = FeatureMatrix::empty_of(variant);
    std::vector<std::size_t> missing;
    std::vector<double> x(feature_count(variant));
    for (std::size_t i = 0; i < series.records.size(); ++i) {
        const auto& r = series.records[i];
        if (variant == Variant::A && !r.vmax) {
            missing.push_back(i);
            continue;
        }
        for (std::size_t f = 0; f < x.size(); ++f) x[f] = r.get(static_cast<Field>(f));
        m.append(r.t, x, series.label);
    }
    if (!missing.empty()) {
        std::string msg = "variant A requires vmax; missing on " + std::to_string(missing.size()) + " rows (rows";
        for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += ' ' + std::to_string(missing[i]);
        if (missing.size() > 10) msg += " ...";
        throw DataError(msg + ")");
    }
    return m;
}

// ---------------------------------------------------------------------------
// Normalized CSV: t,ax,ay,az,fax,fay,faz,v[,vmax][,label]

struct NormalizedRow {
    double t = 0.0;
    std::vector<double> x;
    std::optional<BehaviorClass> label;
    std::size_t line = 0;
};

struct NormalizedCsv {
    Variant variant = Variant::B;
    bool has_labels = false;
    std::vector<NormalizedRow> rows;
};

inline std::string normalized_header(Variant v, bool with_label = true) {
    std::string h = "t";
    for (const auto& c : feature_columns(v)) h += "," + c;
    if (with_label) h += ",label";
    return h;
}

inline void write_normalized_csv(std::ostream& os, const FeatureMatrix& m) {
    os << normalized_header(m.variant) << '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        os << text::format_exact(m.timestamps[i]);
        for (double v : m.rows.row(i)) os << ',' << text::format_exact(v);
        os << ',' << to_string(m.labels[i]) << '\n';
    }
}

/// Reads a normalized CSV. Unparseable numeric cells become NaN so callers can
/// flag or drop those rows; structural problems are DataErrors.
inline NormalizedCsv read_normalized_csv(std::string_view input, std::string_view source = "<input>") {
    NormalizedCsv out;
    const auto all = text::lines(input);
    std::size_t ln = 0;
    while (ln < all.size() && text::trim(all[ln]).empty()) ++ln;
    if (ln >= all.size()) return out;

    const auto header = text::parse_csv_record(text::trim(all[ln]));
    std::vector<std::string> names;
    for (const auto& h : header) names.emplace_back(text::trim(h));
    out.has_labels = !names.empty() && names.back() == "label";
    if (out.has_labels) names.pop_back();
    if (names == std::vector<std::string>{"t", "ax", "ay", "az", "fax", "fay", "faz", "v", "vmax"})
        out.variant = Variant::A;
    else if (names == std::vector<std::string>{"t", "ax", "ay", "az", "fax", "fay", "faz", "v"})
        out.variant = Variant::B;
    else
        throw DataError(std::string(source) + ": unrecognized header '" + std::string(all[ln]) + "'");

    const std::size_t width = names.size() + (out.has_labels ? 1 : 0);
    for (++ln; ln < all.size(); ++ln) {
        const auto line = text::trim(all[ln]);
        if (line.empty()) continue;
        const auto cells = text::parse_csv_record(line);
        if (cells.size() != width)
            throw DataError(std::string(source) + ":" + std::to_string(ln + 1) + ": expected " +
                            std::to_string(width) + " fields, got " + std::to_string(cells.size()));
        NormalizedRow row;
        row.line = ln + 1;
        constexpr double nan = std::numeric_limits<double>::quiet_NaN();
        row.t = text::parse_double(cells[0]).value_or(nan);
        for (std::size_t c = 1; c < names.size(); ++c) row.x.push_back(text::parse_double(cells[c]).value_or(nan));
        if (out.has_labels) {
            row.label = parse_behavior(text::trim(cells.back()));
            if (!row.label)
                throw DataError(std::string(source) + ":" + std::to_string(ln + 1) + ": unknown label '" +
                                cells.back() + "'");
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

inline bool row_is_finite(const NormalizedRow& r) {
    if (!std::isfinite(r.t)) return false;
    return std::all_of(r.x.begin(), r.x.end(), [](double v) { return std::isfinite(v); });
}

/// Labeled feature matrix from a normalized CSV; non-finite rows are dropped.
inline FeatureMatrix to_feature_matrix(const NormalizedCsv& csv, std::string_view source = "<input>") {
    if (!csv.has_labels) throw DataError(std::string(source) + ": label column required");
    auto m = FeatureMatrix::empty_of(csv.variant);
    for (const auto& r : csv.rows)
        if (row_is_finite(r)) m.append(r.t, r.x, *r.label);
    return m;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Session-directory profiles.

/// One file of a recording session and the schema to read it with.
struct StreamSpec {
    std::string filename;
    Schema schema;
    bool optional = false;
};

struct SourceProfile {
    std::string name;
    std::vector<StreamSpec> streams;
    double rate = 10.0;
    KalmanParams kalman;
    ParseOptions parse;
};

/// UAH-DriveSet layout: accelerometers at 10 Hz, GPS speed and map speed limit at 1 Hz.
inline SourceProfile uah_profile() {
    SourceProfile p;
    p.name = "uah";
    p.streams = {
        {"RAW_ACCELEROMETERS.txt", Schema::parse("2:ax,3:ay,4:az,5:fax,6:fay,7:faz"), false},
        {"RAW_GPS.txt", Schema::parse("1:v"), false},
        {"PROC_OPENSTREETMAP_DATA.txt", Schema::parse("1:vmax"), true},
    };
    return p;
}

/// Loads, cleans and aligns every stream of a session directory.
inline std::vector<DriveRecord> load_session_records(const std::filesystem::path& dir, const SourceProfile& profile) {
    std::vector<std::vector<PartialRecord>> streams;
    for (const auto& spec : profile.streams) {
        const auto path = dir / spec.filename;
        if (!std::filesystem::exists(path)) {
            if (spec.optional) continue;
            throw DataError("missing stream file " + path.string());
        }
        auto cleaned = clean(parse_stream(read_file(path), spec.schema, profile.parse));
        if (cleaned.rows.empty()) {
            if (spec.optional) continue;
            throw DataError("no usable rows in " + path.string());
        }
        std::stable_sort(cleaned.rows.begin(), cleaned.rows.end(),
                         [](const PartialRecord& a, const PartialRecord& b) { return a.t < b.t; });
        streams.push_back(std::move(cleaned.rows));
    }
    auto merged = resample_merge(streams, profile.rate);
    fill_filtered_accel(merged, profile.kalman);
    return clean(std::move(merged)).rows;
}

namespace uah {

struct SessionInfo {
    std::filesystem::path dir;
    std::string driver;
    Road road = Road::motorway;
    BehaviorClass label = BehaviorClass::normal;
};

/// Decodes names such as "20151110175712-16km-D1-NORMAL1-SECONDARY".
inline std::optional<SessionInfo> parse_session_name(const std::filesystem::path& dir) {
    const auto name = dir.filename().string();
    const auto parts = text::split(name, '-');
    if (parts.size() < 5) return std::nullopt;
    SessionInfo info;
    info.dir = dir;
    info.driver = std::string(parts[2]);
    std::string behavior(parts[3]);
    while (!behavior.empty() && std::isdigit(static_cast<unsigned char>(behavior.back()))) behavior.pop_back();
    const auto label = parse_behavior(behavior);
    if (!label) return std::nullopt;
    info.label = *label;
    std::string road(parts[4]);
    if (road == "MOTORWAY")
        info.road = Road::motorway;
    else if (road == "SECONDARY")
        info.road = Road::secondary;
    else
        return std::nullopt;
    return info;
}

/// All recognizable session directories under `root` (up to two levels deep), sorted by path.
inline std::vector<SessionInfo> list_sessions(const std::filesystem::path& root) {
    std::vector<SessionInfo> out;
    if (!std::filesystem::is_directory(root)) return out;
    auto visit = [&](const std::filesystem::path& dir) {
        if (auto info = parse_session_name(dir)) out.push_back(*info);
    };
    for (const auto& e : std::filesystem::directory_iterator(root)) {
        if (!e.is_directory()) continue;
        visit(e.path());
        for (const auto& sub : std::filesystem::directory_iterator(e.path()))
            if (sub.is_directory()) visit(sub.path());
    }
    std::sort(out.begin(), out.end(), [](const SessionInfo& a, const SessionInfo& b) { return a.dir < b.dir; });
    return out;
}

inline LabeledSeries load_session(const SessionInfo& info, const SourceProfile& profile = uah_profile()) {
    LabeledSeries s;
    s.driver = info.driver;
    s.road = info.road;
    s.label = info.label;
    s.records = load_session_records(info.dir, profile);
    return s;
}

}  // namespace uah

}  // namespace fispca
