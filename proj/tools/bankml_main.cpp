#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bankml/bankml.hpp"

namespace fs = std::filesystem;
using namespace bankml;
using nlohmann::json;

namespace {

int g_exit = 0; // raised to 4 when a fit finishes without converging

struct Common {
    std::string out = ".";
    std::uint64_t seed = 42;
    unsigned jobs = 1;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--out", c.out, "output directory")->envname("BANKML_OUT")->capture_default_str();
    sub->add_option("--seed", c.seed, "master random seed")->capture_default_str();
    sub->add_option("--jobs", c.jobs, "worker threads for parallel stages")
        ->capture_default_str()
        ->check(CLI::Range(1u, 256u));
}

fs::path prepare_out(const Common& c) {
    fs::path dir(c.out);
    fs::create_directories(dir);
    return dir;
}

FeatureSchema load_schema_arg(const std::string& arg) {
    if (arg == "commercial") return commercial_schema();
    if (arg == "rural") return rural_schema();
    return FeatureSchema::load(arg);
}

bool is_rural(const FeatureSchema& schema) {
    return schema.codes() == rural_schema().codes();
}

void write_manifest(const fs::path& dir, const std::string& command, const json& inputs,
                    const json& options, const std::vector<std::string>& outputs) {
    json m;
    m["command"] = command;
    m["inputs"] = inputs;
    m["options"] = options;
    m["outputs"] = outputs;
    write_json_file((dir / "manifest.json").string(), m);
}

std::string percent2(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction);
    return buf;
}

std::string render_confusion_text(const ConfusionMatrix& cm) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "                     Predicted\n"
                  "                     Bankrupt    Active\n"
                  "Actual   Bankrupt  %10zu %9zu\n"
                  "         Active    %10zu %9zu\n"
                  "\n"
                  "Accuracy: %s%% (%zu/%zu)\n",
                  cm.tp, cm.fn, cm.fp, cm.tn, percent2(accuracy(cm)).c_str(), cm.tp + cm.tn,
                  cm.total());
    return buf;
}

json confusion_json(const ConfusionMatrix& cm) {
    return json{{"tp", cm.tp}, {"fn", cm.fn}, {"fp", cm.fp}, {"tn", cm.tn}};
}

json params_json(const ParamSet& params) {
    json j = json::object();
    for (const auto& [name, v] : params) j[name] = v;
    return j;
}

// Hyperparameter flags shared by train and gridsearch-refit paths.
struct HyperFlags {
    double ridge = 1e-8;
    std::size_t max_iter = 100;
    double grad_tol = 1e-8;
    std::size_t trees = 100;
    std::size_t p = 0;
    std::size_t min_samples_split = 2;
    bool no_bootstrap = false;
    double C = 1.0;
    std::string kernel = "linear";
    double gamma = 0.0;
    double tol = 1e-3;
    std::size_t max_passes = 1000;
};

void add_hyper_flags(CLI::App* sub, HyperFlags& h) {
    sub->add_option("--ridge", h.ridge, "logreg: ridge penalty on coefficients")
        ->capture_default_str();
    sub->add_option("--max-iter", h.max_iter, "logreg: Newton iteration cap")->capture_default_str();
    sub->add_option("--grad-tol", h.grad_tol, "logreg: gradient norm tolerance")
        ->capture_default_str();
    sub->add_option("--B,--trees", h.trees, "forest: number of trees")->capture_default_str();
    sub->add_option("--p", h.p, "forest: features tried per split (0 = floor(sqrt(m)))")
        ->capture_default_str();
    sub->add_option("--min-samples-split", h.min_samples_split,
                    "forest: smallest splittable node")
        ->capture_default_str();
    sub->add_flag("--no-bootstrap", h.no_bootstrap, "forest: grow every tree on the full data");
    sub->add_option("--C", h.C, "svm: soft-margin cost")->capture_default_str();
    sub->add_option("--kernel", h.kernel, "svm: linear or rbf")
        ->capture_default_str()
        ->check(CLI::IsMember({"linear", "rbf"}));
    sub->add_option("--gamma", h.gamma, "svm: rbf width (0 = 1/m)")->capture_default_str();
    sub->add_option("--tol", h.tol, "svm: KKT tolerance")->capture_default_str();
    sub->add_option("--max-passes", h.max_passes, "svm: optimizer sweep cap")
        ->capture_default_str();
}

ParamSet resolve_params(ModelKind kind, const HyperFlags& h, std::size_t m) {
    ParamSet params;
    switch (kind) {
        case ModelKind::logreg:
            params.emplace_back("ridge", h.ridge);
            params.emplace_back("max_iter", h.max_iter);
            params.emplace_back("grad_tol", h.grad_tol);
            break;
        case ModelKind::forest: {
            params.emplace_back("B", h.trees);
            std::size_t p = h.p;
            if (p == 0) {
                p = std::max<std::size_t>(
                    1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(m)))));
            }
            params.emplace_back("p", p);
            params.emplace_back("min_samples_split", h.min_samples_split);
            params.emplace_back("bootstrap", !h.no_bootstrap);
            break;
        }
        case ModelKind::svm:
            params.emplace_back("C", h.C);
            params.emplace_back("kernel", h.kernel);
            if (h.kernel == "rbf") {
                params.emplace_back("gamma", h.gamma > 0.0
                                                 ? h.gamma
                                                 : 1.0 / static_cast<double>(m));
            }
            params.emplace_back("tol", h.tol);
            params.emplace_back("max_passes", h.max_passes);
            break;
    }
    return params;
}

void report_fit_outcome(const AnyModel& model) {
    for (const auto& w : model_warnings(model)) std::cout << "warning: " << w << "\n";
    if (!model_converged(model)) {
        std::cout << "fit did not converge; diagnostics written\n";
        g_exit = 4;
    }
}

Predictor predictor_of(const std::shared_ptr<AnyModel>& model) {
    return [model](const std::vector<double>& x) { return model->predict(x); };
}

// Reads a dataset whose columns are dictated by an already-trained model.
Dataset ingest_for_model(const std::string& path, const AnyModel& model) {
    return ingest_csv(path, FeatureSchema::from_codes(model.feature_codes()));
}

std::vector<std::string> dedup_names(const std::vector<AnyModel>& models) {
    std::vector<std::string> names;
    for (const auto& m : models) {
        std::string name = m.kind;
        int suffix = 1;
        while (std::find(names.begin(), names.end(), name) != names.end()) {
            name = m.kind + "-" + std::to_string(++suffix);
        }
        names.push_back(name);
    }
    return names;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bankml: bankruptcy-risk modeling over CAMELS financial ratios"};
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "generate a synthetic ratio dataset");
    Common synth_c;
    std::string synth_schema = "commercial";
    std::size_t synth_active = 44;
    std::size_t synth_bankrupt = 21;
    std::string synth_recipe = "gaussian-sep2";
    synth->add_option("--schema", synth_schema, "commercial, rural, or a schema JSON path")
        ->capture_default_str();
    synth->add_option("--active", synth_active, "active (label 0) record count")
        ->capture_default_str();
    synth->add_option("--bankrupt", synth_bankrupt, "bankrupt (label 1) record count")
        ->capture_default_str();
    synth->add_option("--recipe", synth_recipe,
                      "gaussian, gaussian-sep<x>, or xor-pair generator")
        ->capture_default_str();
    add_common(synth, synth_c);
    synth->callback([&] {
        const auto dir = prepare_out(synth_c);
        const auto schema = load_schema_arg(synth_schema);
        const Dataset d = synth_dataset(synth_active, synth_bankrupt, schema, synth_recipe,
                                        synth_c.seed);
        write_csv(d, (dir / "synth.csv").string());
        write_manifest(dir, "synth", json::object(),
                       json{{"schema", synth_schema},
                            {"active", synth_active},
                            {"bankrupt", synth_bankrupt},
                            {"recipe", synth_recipe},
                            {"seed", synth_c.seed},
                            {"jobs", synth_c.jobs},
                            {"out", synth_c.out}},
                       {"synth.csv"});
        std::cout << "wrote " << (dir / "synth.csv").string() << " (" << d.n() << " records)\n";
    });

    // ---- clean ----
    auto* cln = app.add_subcommand("clean", "drop records with missing ratio values");
    Common clean_c;
    std::string clean_input;
    std::string clean_schema = "commercial";
    cln->add_option("--input", clean_input, "dataset CSV")->required();
    cln->add_option("--schema", clean_schema, "commercial, rural, or a schema JSON path")
        ->capture_default_str();
    add_common(cln, clean_c);
    cln->callback([&] {
        const auto dir = prepare_out(clean_c);
        const auto schema = load_schema_arg(clean_schema);
        const Dataset d = ingest_csv(clean_input, schema);
        const CleanResult res = clean(d);
        write_csv(res.data, (dir / "clean.csv").string());
        write_manifest(dir, "clean", json{{"input", clean_input}},
                       json{{"schema", clean_schema},
                            {"seed", clean_c.seed},
                            {"jobs", clean_c.jobs},
                            {"out", clean_c.out}},
                       {"clean.csv"});
        std::cout << "removed " << res.removed << " of " << d.n() << " records\n";
        if (res.emptied) std::cout << "warning: every record had missing values\n";
        std::cout << "wrote " << (dir / "clean.csv").string() << "\n";
    });

    // ---- smote ----
    auto* smote = app.add_subcommand("smote", "oversample the minority class to a target ratio");
    Common smote_c;
    std::string smote_input;
    std::string smote_schema = "commercial";
    std::size_t smote_k = 5;
    double smote_ratio = 1.0;
    smote->add_option("--input", smote_input, "dataset CSV")->required();
    smote->add_option("--schema", smote_schema, "commercial, rural, or a schema JSON path")
        ->capture_default_str();
    smote->add_option("--k", smote_k, "nearest minority neighbours per parent")
        ->capture_default_str();
    smote->add_option("--ratio", smote_ratio, "target minority:majority ratio")
        ->capture_default_str();
    add_common(smote, smote_c);
    smote->callback([&] {
        const auto dir = prepare_out(smote_c);
        const auto schema = load_schema_arg(smote_schema);
        const Dataset d = ingest_csv(smote_input, schema);
        const Dataset out = balance(d, {smote_k, smote_ratio, smote_c.seed});
        write_csv(out, (dir / "smote.csv").string());
        write_manifest(dir, "smote", json{{"input", smote_input}},
                       json{{"schema", smote_schema},
                            {"k", smote_k},
                            {"ratio", smote_ratio},
                            {"seed", smote_c.seed},
                            {"jobs", smote_c.jobs},
                            {"out", smote_c.out}},
                       {"smote.csv"});
        std::cout << "wrote " << (dir / "smote.csv").string() << " (" << d.n() << " -> " << out.n()
                  << " records: " << out.count_label(kActive) << " active, "
                  << out.count_label(kBankrupt) << " bankrupt)\n";
    });

    // ---- split ----
    auto* spl = app.add_subcommand("split", "seeded train/test partition");
    Common split_c;
    std::string split_input;
    std::string split_schema = "commercial";
    double split_fraction = 0.75;
    bool flag_stratified = false;
    bool flag_unstratified = false;
    bool smote_before = false;
    bool smote_after = false;
    std::size_t split_smote_k = 5;
    double split_smote_ratio = 1.0;
    spl->add_option("--input", split_input, "dataset CSV")->required();
    spl->add_option("--schema", split_schema, "commercial, rural, or a schema JSON path")
        ->capture_default_str();
    spl->add_option("--fraction", split_fraction, "training fraction")->capture_default_str();
    spl->add_flag("--stratified", flag_stratified, "force per-class proportional split");
    spl->add_flag("--unstratified", flag_unstratified, "force plain shuffled split");
    spl->add_flag("--smote", smote_before, "rebalance the whole dataset before splitting");
    spl->add_flag("--smote-after-split", smote_after,
                  "rebalance only the training partition after splitting");
    spl->add_option("--smote-k", split_smote_k, "SMOTE neighbour count")->capture_default_str();
    spl->add_option("--smote-ratio", split_smote_ratio, "SMOTE target ratio")
        ->capture_default_str();
    add_common(spl, split_c);
    spl->callback([&] {
        if (flag_stratified && flag_unstratified) {
            throw ConfigError("--stratified and --unstratified are mutually exclusive");
        }
        if (smote_before && smote_after) {
            throw ConfigError("--smote and --smote-after-split are mutually exclusive");
        }
        const auto dir = prepare_out(split_c);
        const auto schema = load_schema_arg(split_schema);
        Dataset d = ingest_csv(split_input, schema);
        const bool stratified = flag_stratified || !(flag_unstratified || is_rural(schema));
        const SmoteConfig smote_cfg{split_smote_k, split_smote_ratio,
                                    derive_seed(split_c.seed, 1)};
        if (smote_before) d = balance(d, smote_cfg);
        SplitPair pair = split(d, split_fraction, split_c.seed, stratified);
        if (smote_after) pair.train = balance(pair.train, smote_cfg);
        write_csv(pair.train, (dir / "train.csv").string());
        write_csv(pair.test, (dir / "test.csv").string());
        write_manifest(dir, "split", json{{"input", split_input}},
                       json{{"schema", split_schema},
                            {"fraction", split_fraction},
                            {"stratified", stratified},
                            {"smote", smote_before},
                            {"smote_after_split", smote_after},
                            {"smote_k", split_smote_k},
                            {"smote_ratio", split_smote_ratio},
                            {"smote_seed", smote_cfg.seed},
                            {"seed", split_c.seed},
                            {"jobs", split_c.jobs},
                            {"out", split_c.out}},
                       {"train.csv", "test.csv"});
        std::cout << "wrote " << (dir / "train.csv").string() << " (" << pair.train.n()
                  << " records: " << pair.train.count_label(kActive) << " active, "
                  << pair.train.count_label(kBankrupt) << " bankrupt)\n";
        std::cout << "wrote " << (dir / "test.csv").string() << " (" << pair.test.n()
                  << " records: " << pair.test.count_label(kActive) << " active, "
                  << pair.test.count_label(kBankrupt) << " bankrupt)\n";
    });

    // ---- train ----
    auto* trn = app.add_subcommand("train", "fit one model and persist it as JSON");
    Common train_c;
    std::string train_input;
    std::string train_schema = "commercial";
    std::string train_model;
    HyperFlags train_h;
    trn->add_option("--input", train_input, "training CSV")->required();
    trn->add_option("--schema", train_schema, "commercial, rural, or a schema JSON path")
        ->capture_default_str();
    trn->add_option("--model", train_model, "logreg, forest, or svm")
        ->required()
        ->check(CLI::IsMember({"logreg", "forest", "svm"}));
    add_hyper_flags(trn, train_h);
    add_common(trn, train_c);
    trn->callback([&] {
        const auto dir = prepare_out(train_c);
        const auto schema = load_schema_arg(train_schema);
        const Dataset d = ingest_csv(train_input, schema);
        const ModelKind kind = parse_model_kind(train_model);
        const ParamSet params = resolve_params(kind, train_h, d.m());
        const auto model_ptr = std::make_shared<AnyModel>(
            fit_any(kind, params, d, train_c.seed, train_c.jobs, /*calibrate=*/true));
        const AnyModel& model = *model_ptr;
        write_json_file((dir / "model.json").string(), model_to_json(model));
        const ConfusionMatrix cm = evaluate(d, predictor_of(model_ptr));
        json report;
        report["model"] = train_model;
        report["parameters"] = params_json(params);
        report["train_confusion"] = confusion_json(cm);
        report["train_accuracy"] = accuracy(cm);
        report["train_accuracy_percent"] = percent2(accuracy(cm));
        report["converged"] = model_converged(model);
        report["warnings"] = model_warnings(model);
        if (model.forest && model.forest->oob_accuracy) {
            report["oob_accuracy"] = *model.forest->oob_accuracy;
        }
        write_json_file((dir / "train_report.json").string(), report);
        write_manifest(dir, "train", json{{"input", train_input}},
                       json{{"schema", train_schema},
                            {"model", train_model},
                            {"parameters", params_json(params)},
                            {"seed", train_c.seed},
                            {"jobs", train_c.jobs},
                            {"out", train_c.out}},
                       {"model.json", "train_report.json"});
        std::cout << "wrote " << (dir / "model.json").string() << "\n";
        std::cout << "training accuracy: " << percent2(accuracy(cm)) << "%\n";
        report_fit_outcome(model);
    });

    // ---- evaluate ----
    auto* ev = app.add_subcommand("evaluate", "confusion matrix and accuracy of a saved model");
    Common eval_c;
    std::string eval_model_file;
    std::string eval_input;
    ev->add_option("--model-file", eval_model_file, "model JSON from train/gridsearch")
        ->required();
    ev->add_option("--input", eval_input, "evaluation CSV")->required();
    add_common(ev, eval_c);
    ev->callback([&] {
        const auto dir = prepare_out(eval_c);
        const auto model = std::make_shared<AnyModel>(load_model(eval_model_file));
        const Dataset d = ingest_for_model(eval_input, *model);
        const ConfusionMatrix cm = evaluate(d, predictor_of(model));
        const std::string table = render_confusion_text(cm);

        json report;
        report["model"] = model->kind;
        report["confusion"] = confusion_json(cm);
        report["accuracy"] = accuracy(cm);
        report["accuracy_percent"] = percent2(accuracy(cm));
        if (model->svm && model->svm->platt) {
            std::size_t disagreements = 0;
            for (const auto& r : d.records) {
                const int sign_class = model->svm->predict(r.values);
                const int platt_class =
                    model->svm->predict_proba(r.values) >= 0.5 ? kBankrupt : kActive;
                if (sign_class != platt_class) ++disagreements;
            }
            report["svm_sign_platt_disagreements"] = disagreements;
        }
        write_json_file((dir / "evaluation.json").string(), report);
        write_text_file((dir / "evaluation.txt").string(), table);
        write_manifest(dir, "evaluate",
                       json{{"model_file", eval_model_file}, {"input", eval_input}},
                       json{{"seed", eval_c.seed}, {"jobs", eval_c.jobs}, {"out", eval_c.out}},
                       {"evaluation.json", "evaluation.txt"});
        std::cout << table;
    });

    // ---- gridsearch ----
    auto* gs = app.add_subcommand("gridsearch",
                                  "cross-validated hyperparameter search, best model refit");
    Common grid_c;
    std::string grid_input;
    std::string grid_schema = "commercial";
    std::string grid_model;
    std::string grid_file;
    std::size_t grid_folds = 5;
    gs->add_option("--input", grid_input, "dataset CSV")->required();
    gs->add_option("--schema", grid_schema, "commercial, rural, or a schema JSON path")
        ->capture_default_str();
    gs->add_option("--model", grid_model, "logreg, forest, or svm (default grid)")
        ->check(CLI::IsMember({"logreg", "forest", "svm"}));
    gs->add_option("--grid", grid_file, "grid config JSON overriding the default axes");
    gs->add_option("--folds", grid_folds, "cross-validation folds")->capture_default_str();
    add_common(gs, grid_c);
    gs->callback([&] {
        if (grid_model.empty() && grid_file.empty()) {
            throw ConfigError("gridsearch needs --model or --grid");
        }
        const auto dir = prepare_out(grid_c);
        const auto schema = load_schema_arg(grid_schema);
        const Dataset d = ingest_csv(grid_input, schema);

        ModelKind kind;
        std::vector<GridAxis> axes;
        std::size_t folds = grid_folds;
        std::uint64_t seed = grid_c.seed;
        if (!grid_file.empty()) {
            GridConfig cfg = parse_grid_config(grid_file);
            if (!grid_model.empty() && parse_model_kind(grid_model) != cfg.kind) {
                throw ConfigError("--model disagrees with the grid config's model");
            }
            kind = cfg.kind;
            axes = std::move(cfg.axes);
            folds = cfg.folds;
            if (cfg.seed) seed = *cfg.seed;
        } else {
            kind = parse_model_kind(grid_model);
            axes = default_grid(kind, d.m());
        }

        const GridResult res =
            grid_search(d, axes, folds, seed, cv_factory(kind, seed), grid_c.jobs);
        for (const auto& w : res.warnings) std::cout << "warning: " << w << "\n";

        write_text_file((dir / "grid_results.csv").string(), render_grid_csv(res));
        const AnyModel best = fit_any(kind, res.best().params, d, seed, grid_c.jobs,
                                      /*calibrate=*/true);
        write_json_file((dir / "best_model.json").string(), model_to_json(best));

        json axes_echo = json::array();
        for (const auto& ax : axes) {
            axes_echo.push_back(json{{"name", ax.name}, {"values", ax.values}});
        }
        json report;
        report["model"] = model_kind_name(kind);
        report["best_parameters"] = params_json(res.best().params);
        report["best_mean_accuracy"] = res.best().mean;
        report["combinations"] = res.rows.size();
        report["folds"] = folds;
        report["warnings"] = res.warnings;
        write_json_file((dir / "grid_report.json").string(), report);
        write_manifest(dir, "gridsearch", json{{"input", grid_input}, {"grid", grid_file}},
                       json{{"schema", grid_schema},
                            {"model", model_kind_name(kind)},
                            {"axes", axes_echo},
                            {"folds", folds},
                            {"seed", seed},
                            {"jobs", grid_c.jobs},
                            {"out", grid_c.out}},
                       {"grid_results.csv", "best_model.json", "grid_report.json"});
        std::cout << "best " << model_kind_name(kind) << ": "
                  << params_json(res.best().params).dump() << " mean accuracy "
                  << percent2(res.best().mean) << "%\n";
        std::cout << "wrote " << (dir / "grid_results.csv").string() << "\n";
        std::cout << "wrote " << (dir / "best_model.json").string() << "\n";
        report_fit_outcome(best);
    });

    // ---- trend ----
    auto* tr = app.add_subcommand("trend",
                                  "per-quarter bankruptcy probabilities and first warnings");
    Common trend_c;
    std::vector<std::string> trend_model_files;
    std::string trend_input;
    double trend_threshold = 0.5;
    std::string trend_event_date;
    tr->add_option("--model-file", trend_model_files, "model JSON (repeatable)")->required();
    tr->add_option("--input", trend_input, "quarterly CSV with bank_id and period columns")
        ->required();
    tr->add_option("--threshold", trend_threshold, "warning threshold on probability")
        ->capture_default_str();
    tr->add_option("--event-date", trend_event_date,
                   "YYYY-MM-DD external event for lead-time reporting");
    add_common(tr, trend_c);
    tr->callback([&] {
        const auto dir = prepare_out(trend_c);
        std::vector<AnyModel> models;
        for (const auto& f : trend_model_files) models.push_back(load_model(f));
        for (const auto& m : models) {
            if (m.feature_codes() != models.front().feature_codes()) {
                throw DataError("trend: models were trained on different schemas");
            }
        }
        const auto names = dedup_names(models);
        const Dataset d = ingest_for_model(trend_input, models.front());

        std::vector<NamedModel> named;
        for (std::size_t i = 0; i < models.size(); ++i) {
            const AnyModel* m = &models[i];
            named.push_back({names[i], [m](const std::vector<double>& x) { return m->proba(x); }});
        }

        // Group quarterly reports per bank in first-appearance order.
        std::vector<std::string> bank_order;
        std::map<std::string, std::vector<QuarterReport>> reports;
        for (const auto& r : d.records) {
            if (!r.period) {
                throw DataError("trend: record '" + r.bank_id + "' has no period value");
            }
            if (reports.find(r.bank_id) == reports.end()) bank_order.push_back(r.bank_id);
            reports[r.bank_id].push_back({*r.period, r.values});
        }

        std::optional<Date> event;
        if (!trend_event_date.empty()) event = Date::parse(trend_event_date);

        std::string csv_out = "bank_id,period";
        for (const auto& n : names) csv_out += "," + csv::quote(n);
        csv_out += "\n";
        json summary;
        summary["threshold"] = trend_threshold;
        if (event) summary["event_date"] = event->str();
        summary["banks"] = json::object();
        for (const auto& bank : bank_order) {
            const TrendSeries series =
                probability_series(bank, named, reports[bank], trend_threshold);
            for (const auto& pt : series.points) {
                csv_out += csv::quote(bank) + "," + pt.period.str();
                for (const auto& p : pt.probs) {
                    csv_out += ",";
                    if (p) csv_out += csv::format_double(*p);
                }
                csv_out += "\n";
            }
            json bank_json;
            json warn = json::object();
            json leads = json::object();
            for (const auto& n : names) {
                const auto w = first_warning(series, n);
                warn[n] = w ? json(w->str()) : json(nullptr);
                if (event) {
                    const auto lt = lead_time(series, n, *event);
                    leads[n] = lt ? json(*lt) : json(nullptr);
                }
            }
            bank_json["warnings"] = warn;
            if (event) bank_json["lead_times_months"] = leads;
            summary["banks"][bank] = bank_json;
        }
        write_text_file((dir / "trend.csv").string(), csv_out);
        write_json_file((dir / "trend_summary.json").string(), summary);
        write_manifest(dir, "trend",
                       json{{"model_files", trend_model_files}, {"input", trend_input}},
                       json{{"threshold", trend_threshold},
                            {"event_date", trend_event_date},
                            {"seed", trend_c.seed},
                            {"jobs", trend_c.jobs},
                            {"out", trend_c.out}},
                       {"trend.csv", "trend_summary.json"});
        std::cout << "wrote " << (dir / "trend.csv").string() << "\n";
        std::cout << "wrote " << (dir / "trend_summary.json").string() << "\n";
        for (auto& [bank, info] : summary["banks"].items()) {
            for (auto& [model, period] : info["warnings"].items()) {
                std::cout << bank << " " << model << " first warning: "
                          << (period.is_null() ? "none" : period.get<std::string>()) << "\n";
            }
        }
    });

    // ---- compare ----
    auto* cp = app.add_subcommand("compare",
                                  "train/test accuracy table across saved models");
    Common cmp_c;
    std::vector<std::string> cmp_model_files;
    std::string cmp_train;
    std::string cmp_test;
    cp->add_option("--model-file", cmp_model_files, "model JSON (repeatable)")->required();
    cp->add_option("--train", cmp_train, "training CSV")->required();
    cp->add_option("--test", cmp_test, "testing CSV")->required();
    add_common(cp, cmp_c);
    cp->callback([&] {
        const auto dir = prepare_out(cmp_c);
        std::vector<AnyModel> models;
        for (const auto& f : cmp_model_files) models.push_back(load_model(f));
        for (const auto& m : models) {
            if (m.feature_codes() != models.front().feature_codes()) {
                throw DataError("compare: models were trained on different schemas");
            }
        }
        const auto names = dedup_names(models);
        const Dataset train_d = ingest_for_model(cmp_train, models.front());
        const Dataset test_d = ingest_for_model(cmp_test, models.front());

        std::string csv_out = "model,train_accuracy_percent,test_accuracy_percent\n";
        for (std::size_t i = 0; i < models.size(); ++i) {
            const AnyModel& m = models[i];
            const auto predict = [&m](const std::vector<double>& x) { return m.predict(x); };
            const double train_acc = accuracy(evaluate(train_d, predict));
            const double test_acc = accuracy(evaluate(test_d, predict));
            csv_out += csv::quote(names[i]) + "," + percent2(train_acc) + "," +
                       percent2(test_acc) + "\n";
        }
        write_text_file((dir / "compare.csv").string(), csv_out);
        write_manifest(dir, "compare",
                       json{{"model_files", cmp_model_files},
                            {"train", cmp_train},
                            {"test", cmp_test}},
                       json{{"seed", cmp_c.seed}, {"jobs", cmp_c.jobs}, {"out", cmp_c.out}},
                       {"compare.csv"});
        std::cout << csv_out;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const FitError& e) {
        std::cerr << "convergence error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return g_exit;
}
