// fispca: train, apply and evaluate the driver-behavior soft sensor.

#include <cstdlib>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "fispca/commands.hpp"

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

void add_value(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(flag, [&ov, key](const std::string& v) { ov.emplace_back(key, v); }, help);
}

void add_switch(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key, const std::string& value,
                const std::string& help) {
    app->add_flag_callback(flag, [&ov, key, value] { ov.emplace_back(key, value); }, help);
}

void add_sensor_options(CLI::App* app, Overrides& ov) {
    add_value(app, ov, "--variant", "variant", "feature set: A (with vmax) or B (without)");
    add_switch(app, ov, "--standardize", "standardize", "true", "z-score features before PCA (default)");
    add_switch(app, ov, "--no-standardize", "standardize", "false", "project raw features");
    add_value(app, ov, "--threshold", "pca_threshold", "cumulative explained-variance threshold for k");
    add_value(app, ov, "--profile", "profile", "data profile: normalized, uah or custom");
    add_value(app, ov, "--seed", "seed", "random seed");
}

void add_training_options(CLI::App* app, Overrides& ov) {
    add_value(app, ov, "--radius", "radius", "subtractive clustering radius in the unit cube");
    add_value(app, ov, "--squash", "squash", "clustering squash factor");
    add_value(app, ov, "--accept-ratio", "accept_ratio", "clustering accept ratio");
    add_value(app, ov, "--reject-ratio", "reject_ratio", "clustering reject ratio");
    add_value(app, ov, "--epochs", "epochs", "backpropagation epochs");
    add_value(app, ov, "--lr", "lr", "backpropagation learning rate");
    add_value(app, ov, "--early-stop-tol", "early_stop_tol", "relative loss improvement that ends training");
    add_switch(app, ov, "--pure-backprop", "pure_backprop", "true", "skip least-squares consequent init");
    add_value(app, ov, "--a1", "a1", "drowsy target exponent");
    add_value(app, ov, "--a2", "a2", "normal target exponent");
    add_value(app, ov, "--a3", "a3", "aggressive target exponent");
    add_value(app, ov, "--train", "train", "labeled training data (comma-separated paths)");
    add_value(app, ov, "--train-drowsy", "train.drowsy", "drowsy training data");
    add_value(app, ov, "--train-normal", "train.normal", "normal training data");
    add_value(app, ov, "--train-aggressive", "train.aggressive", "aggressive training data");
}

}  // namespace

int main(int argc, char** argv) {
    using namespace fispca;

    CLI::App app{"Driver-behavior soft sensor: PCA projections feeding three Takagi-Sugeno fuzzy models."};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path,
                   std::string("key = value config file (default: $") + kConfigEnvVar + "); flags override it");
    Overrides ov;

    // train
    auto* train = app.add_subcommand("train", "fit the soft sensor and write a model file");
    add_sensor_options(train, ov);
    add_training_options(train, ov);
    add_value(train, ov, "--out,--model", "model", "model output path");
    TrainOptions train_opt;
    train->add_flag("--fixture", train_opt.fixture, "train on the built-in synthetic fixture");
    train->add_option("--fixture-rows", train_opt.fixture_options.rows_per_class, "fixture rows per class");
    train->add_option("--fixture-noise", train_opt.fixture_options.noise, "fixture noise level");

    // classify
    auto* classify_cmd = app.add_subcommand("classify", "label each row of a normalized CSV");
    ClassifyOptions cls_opt;
    std::string cls_model;
    classify_cmd->add_option("--model", cls_model, "model file (default: config key model)");
    classify_cmd->add_option("input", cls_opt.input, "normalized CSV, or - for standard input")->capture_default_str();
    classify_cmd->add_flag("--stream", cls_opt.stream, "flush each output row as soon as it is computed");
    classify_cmd->add_option("--window", cls_opt.window, "trailing moving-average window over epsilons")
        ->capture_default_str();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "error and confusion report on labeled data");
    EvaluateOptions ev_opt;
    std::string ev_model, ev_format, ev_trace;
    std::vector<std::string> ev_data;
    evaluate->add_option("--model", ev_model, "model file (default: config key model)");
    evaluate->add_option("data", ev_data, "labeled data paths (default: config key eval)");
    evaluate->add_option("--format", ev_format, "text, csv or json");
    evaluate->add_option("--trace-dir", ev_trace, "write per-dataset epsilon traces here");
    add_value(evaluate, ov, "--profile", "profile", "data profile: normalized, uah or custom");

    // baseline-knn
    auto* knn = app.add_subcommand("baseline-knn", "distance-weighted KNN on PCA scores");
    add_sensor_options(knn, ov);
    KnnCommandOptions knn_opt;
    std::vector<std::string> knn_train, knn_test;
    std::string knn_format;
    std::size_t knn_k = 0;
    knn->add_option("--train-data", knn_train, "labeled training data (default: config key train)");
    knn->add_option("--test-data", knn_test, "labeled test data (default: config key eval)");
    knn->add_option("--k", knn_k, "neighbours (default: config key knn_k, 10)");
    knn->add_option("--format", knn_format, "text, csv or json");

    // pca-report
    auto* pca = app.add_subcommand("pca-report", "eigenvalues, explained variance and chosen k");
    add_sensor_options(pca, ov);
    PcaReportOptions pca_opt;
    std::vector<std::string> pca_data;
    std::string pca_model;
    pca->add_option("--data", pca_data, "labeled data paths (default: config key train)");
    pca->add_option("--model", pca_model, "also print the axes stored in this model");

    // fixture
    auto* fixture = app.add_subcommand("fixture", "write the synthetic fixture as normalized CSVs");
    add_sensor_options(fixture, ov);
    FixtureCommandOptions fx_opt;
    std::string fx_out;
    fixture->add_option("--out", fx_out, "output directory")->required();
    fixture->add_option("--rows", fx_opt.fixture.rows_per_class, "rows per class")->capture_default_str();
    fixture->add_option("--noise", fx_opt.fixture.noise, "noise level")->capture_default_str();

    // prepare
    auto* prepare = app.add_subcommand("prepare", "convert raw recording sessions into normalized CSVs");
    add_sensor_options(prepare, ov);
    PrepareOptions prep_opt;
    std::vector<std::string> prep_in;
    std::string prep_out, prep_label;
    prepare->add_option("inputs", prep_in, "session directories or roots holding them")->required();
    prepare->add_option("--out", prep_out, "output directory")->required();
    prepare->add_option("--label", prep_label, "class of the sessions (custom profile) or class filter (uah)");
    add_value(prepare, ov, "--rate", "rate", "resampling rate in Hz");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(ErrorKind::usage);
    }

    RunConfig cfg;
    try {
        if (config_path.empty())
            if (const char* env = std::getenv(kConfigEnvVar); env && *env) config_path = env;
        if (!config_path.empty()) cfg = load_config(config_path);
        const auto base = cfg.base_dir;
        cfg.base_dir = ".";
        for (const auto& [k, v] : ov) apply_setting(cfg, k, v);
        cfg.base_dir = base;
        if (!ev_format.empty()) cfg.format = parse_report_format(ev_format);
        if (!knn_format.empty()) cfg.format = parse_report_format(knn_format);
        if (!prep_label.empty()) {
            prep_opt.label = parse_behavior(prep_label);
            if (!prep_opt.label) throw UsageError("unknown class '" + prep_label + "'");
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.kind());
    }

    auto& out = std::cout;
    auto& err = std::cerr;
    auto paths_or = [](const std::vector<std::string>& given, const std::vector<fs::path>& fallback) {
        if (given.empty()) return fallback;
        std::vector<fs::path> out(given.begin(), given.end());
        return out;
    };

    if (*train) return cmd_train(cfg, out, err, train_opt);
    if (*classify_cmd) {
        cls_opt.model = cls_model.empty() ? cfg.model : fs::path(cls_model);
        return cmd_classify(cls_opt, std::cin, out, err);
    }
    if (*evaluate) {
        ev_opt.model = ev_model.empty() ? cfg.model : fs::path(ev_model);
        ev_opt.data = paths_or(ev_data, cfg.eval);
        ev_opt.format = cfg.format;
        if (!ev_trace.empty()) ev_opt.trace_dir = ev_trace;
        return cmd_evaluate(cfg, ev_opt, out, err);
    }
    if (*knn) {
        knn_opt.train = paths_or(knn_train, cfg.train_labeled);
        if (knn_opt.train.empty())
            for (const auto& v : cfg.train_by_class) knn_opt.train.insert(knn_opt.train.end(), v.begin(), v.end());
        knn_opt.test = paths_or(knn_test, cfg.eval);
        knn_opt.knn.k = knn_k ? knn_k : cfg.knn_k;
        knn_opt.knn.pca_threshold = cfg.sensor.pca_threshold;
        knn_opt.knn.standardize = cfg.sensor.standardize;
        knn_opt.format = cfg.format;
        return cmd_baseline_knn(cfg, knn_opt, out, err);
    }
    if (*pca) {
        pca_opt.data = paths_or(pca_data, cfg.train_labeled);
        if (pca_data.empty())
            for (const auto& v : cfg.train_by_class) pca_opt.data.insert(pca_opt.data.end(), v.begin(), v.end());
        if (!pca_model.empty()) pca_opt.model = pca_model;
        return cmd_pca_report(cfg, pca_opt, out, err);
    }
    if (*fixture) {
        fx_opt.out_dir = fx_out;
        return cmd_fixture(cfg, fx_opt, out, err);
    }
    if (*prepare) {
        prep_opt.inputs.assign(prep_in.begin(), prep_in.end());
        prep_opt.out_dir = prep_out;
        return cmd_prepare(cfg, prep_opt, out, err);
    }
    return static_cast<int>(ErrorKind::usage);
}
