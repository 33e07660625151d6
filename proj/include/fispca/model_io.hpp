#pragma once

// Versioned, checksummed JSON model file for a fitted SoftSensor.

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include "fispca/classifier.hpp"
#include "fispca/dataset.hpp"
#include "fispca/error.hpp"
#include "fispca/json_io.hpp"

namespace fispca {

inline constexpr std::string_view kModelFormat = "fispca-soft-sensor";
inline constexpr int kModelFormatVersion = 1;

namespace detail {

using json_io::Json;

inline Json component_json(const PrincipalComponent& c) {
    Json j;
    j["axis"] = c.axis;
    j["eigenvalue"] = c.eigenvalue;
    j["evr"] = c.evr;
    return j;
}

inline PrincipalComponent component_from(const Json& j) {
    return {j.at("axis").get<std::vector<double>>(), j.at("eigenvalue").get<double>(), j.at("evr").get<double>()};
}

inline Json ts_json(const TSModel& m) {
    Json j;
    j["n_inputs"] = m.n_inputs();
    Json rules = Json::array();
    for (const auto& r : m.rules()) {
        Json jr;
        std::vector<double> centers;
        std::vector<double> widths;
        for (const auto& mf : r.antecedents) {
            centers.push_back(mf.center);
            widths.push_back(mf.width);
        }
        jr["centers"] = centers;
        jr["widths"] = widths;
        jr["consequent"] = r.consequent;
        rules.push_back(std::move(jr));
    }
    j["rules"] = std::move(rules);
    return j;
}

inline TSModel ts_from(const Json& j) {
    const auto n = j.at("n_inputs").get<std::size_t>();
    std::vector<Rule> rules;
    for (const auto& jr : j.at("rules")) {
        const auto centers = jr.at("centers").get<std::vector<double>>();
        const auto widths = jr.at("widths").get<std::vector<double>>();
        if (centers.size() != widths.size()) throw ModelError("rule centers/widths length mismatch");
        Rule r;
        for (std::size_t i = 0; i < centers.size(); ++i) r.antecedents.push_back({centers[i], widths[i]});
        r.consequent = jr.at("consequent").get<std::vector<double>>();
        rules.push_back(std::move(r));
    }
    return TSModel(n, std::move(rules));
}

inline Json payload_json(const SoftSensor& s) {
    Json j;
    j["format"] = kModelFormat;
    j["format_version"] = kModelFormatVersion;
    j["variant"] = to_string(s.variant);
    j["standardized"] = s.standardized;
    j["columns"] = feature_columns(s.variant);
    j["standardizer"] = {{"mean", s.bank.standardizer.mean}, {"scale", s.bank.standardizer.scale}};
    Json proj;
    proj["p1d"] = component_json(s.bank.p1d);
    proj["p1n"] = component_json(s.bank.p1n);
    proj["p1a"] = component_json(s.bank.p1a);
    proj["p1t"] = component_json(s.bank.p1t);
    j["projections"] = std::move(proj);
    j["exponents"] = {{"a1", s.exponents.a1}, {"a2", s.exponents.a2}, {"a3", s.exponents.a3}};
    Json models;
    for (auto c : kAllClasses) models[std::string(to_string(c))] = ts_json(s.model(c));
    j["models"] = std::move(models);
    return j;
}

}  // namespace detail

inline std::string serialize_model(const SoftSensor& s) {
    auto j = detail::payload_json(s);
    const auto checksum = json_io::fnv1a64(json_io::dump(j));
    j["checksum"] = "fnv1a64:" + checksum;
    return json_io::dump(j) + "\n";
}

inline SoftSensor deserialize_model(std::string_view content) {
    using json_io::Json;
    Json j;
    try {
        j = Json::parse(content);
    } catch (const std::exception& e) {
        throw ModelError(std::string("corrupted model file: ") + e.what());
    }
    try {
        if (!j.is_object() || !j.contains("format") || j.at("format") != kModelFormat)
            throw ModelError("not a soft-sensor model file");
        const auto version = j.at("format_version");
        if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion)
            throw ModelError("unsupported model format version " + version.dump() + " (expected " +
                             std::to_string(kModelFormatVersion) + ")");
        if (!j.contains("checksum") || !j.at("checksum").is_string()) throw ModelError("model file has no checksum");
        const auto stored = j.at("checksum").get<std::string>();
        j.erase("checksum");
        if (stored != "fnv1a64:" + json_io::fnv1a64(json_io::dump(j)))
            throw ModelError("model checksum mismatch (file corrupted or edited)");

        SoftSensor s;
        s.variant = parse_variant(j.at("variant").get<std::string>());
        s.standardized = j.at("standardized").get<bool>();
        s.bank.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
        s.bank.standardizer.scale = j.at("standardizer").at("scale").get<std::vector<double>>();
        const auto& p = j.at("projections");
        s.bank.p1d = detail::component_from(p.at("p1d"));
        s.bank.p1n = detail::component_from(p.at("p1n"));
        s.bank.p1a = detail::component_from(p.at("p1a"));
        s.bank.p1t = detail::component_from(p.at("p1t"));
        const auto& e = j.at("exponents");
        s.exponents = {e.at("a1").get<double>(), e.at("a2").get<double>(), e.at("a3").get<double>()};
        for (auto c : kAllClasses) s.models[index_of(c)] = detail::ts_from(j.at("models").at(std::string(to_string(c))));
        s.validate();
        return s;
    } catch (const ModelError&) {
        throw;
    } catch (const std::exception& ex) {
        throw ModelError(std::string("malformed model file: ") + ex.what());
    }
}

inline void save_model(const SoftSensor& s, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ModelError("cannot write model file " + path.string());
    out << serialize_model(s);
    if (!out) throw ModelError("failed writing model file " + path.string());
}

inline SoftSensor load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot open model file " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(content);
}

}  // namespace fispca
