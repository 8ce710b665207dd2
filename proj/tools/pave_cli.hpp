#pragma once
// `pave` command-line front end: synth, adapt, train, evaluate, derive,
// simulate and mixture-demo. Exit codes: 0 success, 1 validation/data error,
// 2 numerical failure.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "paveinput/paveinput.hpp"

namespace paveinput::cli {

enum ExitStatus : int { kSuccess = 0, kDataError = 1, kNumericalError = 2 };

struct SynthOptions {
    std::size_t n = 406;
    std::uint64_t seed = 0;
    std::filesystem::path out;
    bool with_truth = false;
};

struct CleanOptions {
    std::string missing = "impute_median";
    std::string outliers = "flag_only";
    double iqr = 1.5;

    CleanPolicy policy() const {
        CleanPolicy p;
        p.missing_strategy = missing == "drop_row" ? MissingStrategy::drop_row : MissingStrategy::impute_median;
        p.outlier_strategy = outliers == "drop_row" ? OutlierStrategy::drop_row : OutlierStrategy::flag_only;
        p.iqr_multiplier = iqr;
        return p;
    }
};

struct AdaptOptions {
    std::vector<std::filesystem::path> data;
    std::string key;
    std::string target{kTargetColumn};
    std::filesystem::path out;
    std::optional<std::filesystem::path> report;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    CleanOptions clean;
};

struct TrainOptions {
    std::filesystem::path data;
    std::filesystem::path out;
    std::uint64_t seed = 0;
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    std::vector<std::size_t> hidden{8, 8, 8};
    double train_fraction = 0.8;
    std::string target{kTargetColumn};
    CleanOptions clean;
};

struct EvaluateOptions {
    std::filesystem::path model;
    std::filesystem::path data;
    double level = 0.95;
    std::optional<std::filesystem::path> out;
    CleanOptions clean;
};

struct DeriveOptions {
    std::filesystem::path model;
    std::filesystem::path scenarios;
    double level = 0.95;
    std::optional<std::filesystem::path> out;
};

struct SimulateOptions {
    std::optional<std::filesystem::path> model;
    std::filesystem::path config;
    std::size_t reps = 1000;
    std::uint64_t seed = 0;
    std::filesystem::path out;
    unsigned threads = 1;
};

struct MixtureOptions {
    std::size_t n = 30000;
    std::uint64_t seed = 0;
    std::filesystem::path out;
    std::optional<std::filesystem::path> samples_out;
};

struct CliInvocation {
    std::string subcommand;
    SynthOptions synth;
    AdaptOptions adapt;
    TrainOptions train;
    EvaluateOptions evaluate;
    DeriveOptions derive;
    SimulateOptions simulate;
    MixtureOptions mixture;
};

struct ParseOutcome {
    std::optional<CliInvocation> invocation;
    int exit_code = kSuccess;
    std::string message; // help text or error
};

namespace detail {

inline CLI::Validator positive_integer() {
    return CLI::Validator(
        [](std::string& text) -> std::string {
            std::size_t v = 0;
            auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (ec != std::errc{} || end != text.data() + text.size() || v == 0)
                return "expected a positive integer, got '" + text + "'";
            return {};
        },
        "POSITIVE INT");
}

inline CLI::Validator positive_real() {
    return CLI::Validator(
        [](std::string& text) -> std::string {
            double v = 0.0;
            if (!parse_double(text, v) || !(v > 0.0) || !std::isfinite(v))
                return "expected a positive number, got '" + text + "'";
            return {};
        },
        "POSITIVE");
}

inline void add_clean_flags(CLI::App* app, CleanOptions& c) {
    app->add_option("--missing", c.missing, "Missing-value strategy")
        ->check(CLI::IsMember({"impute_median", "drop_row"}))
        ->capture_default_str();
    app->add_option("--outliers", c.outliers, "Outlier strategy")
        ->check(CLI::IsMember({"flag_only", "drop_row"}))
        ->capture_default_str();
    app->add_option("--iqr", c.iqr, "IQR fence multiplier")->check(positive_real())->capture_default_str();
}

inline std::string join_widths(const std::vector<std::size_t>& w) {
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
    return s;
}

inline void add_clean_params(Provenance& p, const CleanOptions& c) {
    p.params.emplace_back("missing", c.missing);
    p.params.emplace_back("outliers", c.outliers);
    p.params.emplace_back("iqr", format_double(c.iqr));
}

} // namespace detail

inline ParseOutcome parse_args(const std::vector<std::string>& args) {
    CliInvocation inv;
    CLI::App app{"Condition-aware simulation input modeling for road paving", "pave"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", std::string(kToolVersion));

    auto* synth = app.add_subcommand("synth", "Generate a synthetic paving dataset (CSV)");
    synth->add_option("--n", inv.synth.n, "Number of rows")->check(detail::positive_integer())->capture_default_str();
    synth->add_option("--seed", inv.synth.seed, "Random seed")->required();
    synth->add_option("--out", inv.synth.out, "Output CSV")->required();
    synth->add_flag("--with-truth", inv.synth.with_truth, "Append MuStar,SigmaStar ground-truth columns");

    auto* adapt = app.add_subcommand("adapt", "Join, clean, encode and split record tables into a dataset file");
    adapt->add_option("--data", inv.adapt.data, "Input CSV (repeat to join several sources)")
        ->required()
        ->check(CLI::ExistingFile);
    adapt->add_option("--key", inv.adapt.key, "Join key column (required with several --data)");
    adapt->add_option("--target", inv.adapt.target, "Target column")->capture_default_str();
    adapt->add_option("--out", inv.adapt.out, "Output dataset file")->required();
    adapt->add_option("--report", inv.adapt.report, "Cleaning report output");
    adapt->add_option("--train-fraction", inv.adapt.train_fraction, "Train share of the split")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    adapt->add_option("--seed", inv.adapt.seed, "Split seed")->required();
    detail::add_clean_flags(adapt, inv.adapt.clean);

    auto* train = app.add_subcommand("train", "Train the heteroscedastic network and write a model file");
    train->add_option("--data", inv.train.data, "Record CSV or adapted dataset file")
        ->required()
        ->check(CLI::ExistingFile);
    train->add_option("--out", inv.train.out, "Output model file")->required();
    train->add_option("--seed", inv.train.seed, "Master seed (split, init, shuffle)")->required();
    train->add_option("--epochs", inv.train.epochs, "Training epochs")->check(detail::positive_integer())->capture_default_str();
    train->add_option("--batch-size", inv.train.batch_size, "Mini-batch size")
        ->check(detail::positive_integer())
        ->capture_default_str();
    train->add_option("--lr", inv.train.learning_rate, "Adam learning rate")
        ->check(detail::positive_real())
        ->capture_default_str();
    train->add_option("--hidden", inv.train.hidden, "Hidden layer widths, comma separated")
        ->delimiter(',')
        ->check(detail::positive_integer());
    train->add_option("--train-fraction", inv.train.train_fraction, "Train share of the split (CSV input)")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    train->add_option("--target", inv.train.target, "Target column (CSV input)")->capture_default_str();
    detail::add_clean_flags(train, inv.train.clean);

    auto* evaluate = app.add_subcommand("evaluate", "Interval coverage on the held-out split");
    evaluate->add_option("--model", inv.evaluate.model, "Model file")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--data", inv.evaluate.data, "Record CSV or adapted dataset file")
        ->required()
        ->check(CLI::ExistingFile);
    evaluate->add_option("--level", inv.evaluate.level, "Interval level (0.90, 0.95, 0.99)")->capture_default_str();
    evaluate->add_option("--out", inv.evaluate.out, "Coverage report CSV");
    detail::add_clean_flags(evaluate, inv.evaluate.clean);

    auto* derive = app.add_subcommand("derive", "Derive Gaussian input models for scenario rows");
    derive->add_option("--model", inv.derive.model, "Model file")->required()->check(CLI::ExistingFile);
    derive->add_option("--scenarios", inv.derive.scenarios, "CSV of scenario feature rows")
        ->required()
        ->check(CLI::ExistingFile);
    derive->add_option("--level", inv.derive.level, "Interval level (0.90, 0.95, 0.99)")->capture_default_str();
    derive->add_option("--out", inv.derive.out, "Input model CSV");

    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo paving simulation");
    simulate->add_option("--model", inv.simulate.model, "Model file (when the config names a scenario)")
        ->check(CLI::ExistingFile);
    simulate->add_option("--config", inv.simulate.config, "Simulation config file")
        ->required()
        ->check(CLI::ExistingFile);
    simulate->add_option("--reps", inv.simulate.reps, "Replications")->check(detail::positive_integer())->capture_default_str();
    simulate->add_option("--seed", inv.simulate.seed, "Master seed")->required();
    simulate->add_option("--out", inv.simulate.out, "Per-replication CSV")->required();
    simulate->add_option("--threads", inv.simulate.threads, "Worker threads")
        ->check(detail::positive_integer())
        ->capture_default_str();

    auto* mixture = app.add_subcommand("mixture-demo", "Pooled vs weather-conditioned hauling-duration models");
    mixture->add_option("--n", inv.mixture.n, "Samples")->check(detail::positive_integer())->capture_default_str();
    mixture->add_option("--seed", inv.mixture.seed, "Random seed")->required();
    mixture->add_option("--out", inv.mixture.out, "Mixture comparison CSV")->required();
    mixture->add_option("--samples-out", inv.mixture.samples_out, "Labeled samples CSV");

    for (auto* sub : {synth, adapt, train, evaluate, derive, simulate, mixture})
        sub->add_option("--format", "Output format")->check(CLI::IsMember({"csv"}));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    ParseOutcome outcome;
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        outcome.message = app.help();
        return outcome;
    } catch (const CLI::CallForAllHelp&) {
        outcome.message = app.help("", CLI::AppFormatMode::All);
        return outcome;
    } catch (const CLI::CallForVersion&) {
        outcome.message = std::string(kToolVersion) + "\n";
        return outcome;
    } catch (const CLI::ParseError& e) {
        outcome.exit_code = kDataError;
        outcome.message = std::string("error: ") + e.what() + "\n";
        return outcome;
    }
    for (auto* sub : app.get_subcommands()) {
        if (sub->parsed()) inv.subcommand = sub->get_name();
    }
    outcome.invocation = std::move(inv);
    return outcome;
}

namespace detail {

struct PreparedData {
    Dataset train;
    Dataset test;
    double train_fraction = 0.8;
    std::uint64_t split_seed = 0;
    std::optional<CleanReport> report;
};

/// Adapted dataset file as-is, or a record CSV through clean/encode/split.
inline PreparedData prepare(const std::filesystem::path& path, const std::string& target, const CleanOptions& clean,
                            double train_fraction, std::uint64_t split_seed) {
    const std::string text = read_file(path);
    PreparedData p;
    if (is_json_document(text)) {
        auto a = dataset_from_string(text);
        p.train = std::move(a.train);
        p.test = std::move(a.test);
        p.train_fraction = a.train_fraction;
        p.split_seed = a.split_seed;
        return p;
    }
    auto table = parse_csv(text, path.string());
    auto cleaned = paveinput::clean(table, clean.policy());
    auto ds = encode_and_normalize(cleaned.table, target);
    auto parts = split(ds, train_fraction, split_seed);
    p.train = std::move(parts.train);
    p.test = std::move(parts.test);
    p.train_fraction = train_fraction;
    p.split_seed = split_seed;
    p.report = std::move(cleaned.report);
    return p;
}

inline int run_synth(const SynthOptions& o, std::ostream& out) {
    Provenance prov{"synth", {{"n", std::to_string(o.n)}, {"seed", std::to_string(o.seed)},
                              {"with_truth", o.with_truth ? "true" : "false"}}};
    out << "seed: " << o.seed << "\n";
    auto table = synth::generate_paving_dataset(o.n, o.seed, o.with_truth);
    write_file_atomic(o.out, prov.render("#") + to_csv(table));
    out << "wrote " << table.row_count() << " rows to " << o.out.string() << "\n";
    return kSuccess;
}

inline int run_adapt(const AdaptOptions& o, std::ostream& out) {
    Provenance prov{"adapt", {}};
    std::string sources;
    for (const auto& d : o.data) sources += (sources.empty() ? "" : ";") + d.string();
    prov.params = {{"data", sources},
                   {"key", o.key},
                   {"target", o.target},
                   {"train_fraction", format_double(o.train_fraction)},
                   {"seed", std::to_string(o.seed)}};
    add_clean_params(prov, o.clean);
    out << "seed: " << o.seed << "\n";

    std::vector<RecordTable> tables;
    for (const auto& d : o.data) tables.push_back(load_csv(d));
    RecordTable joined;
    std::vector<std::string> excluded;
    if (tables.size() > 1) {
        require(!o.key.empty(), "--key is required when joining several sources");
        auto j = join_sources(tables, o.key);
        out << "joined " << tables.size() << " sources: " << j.table.row_count() << " rows, " << j.dropped_rows
            << " unmatched rows dropped\n";
        joined = std::move(j.table);
    } else {
        joined = std::move(tables.front());
    }
    if (!o.key.empty()) excluded.push_back(o.key);
    auto cleaned = clean(joined, o.clean.policy());
    auto ds = encode_and_normalize(cleaned.table, o.target, excluded);
    auto parts = split(ds, o.train_fraction, o.seed);
    AdaptedDataset a{std::move(parts.train), std::move(parts.test), o.train_fraction, o.seed};
    if (o.report) write_file_atomic(*o.report, clean_report_to_string(cleaned.report, &prov));
    write_file_atomic(o.out, dataset_to_string(a, &prov));
    out << "dataset: " << a.train.size() << " train rows, " << a.test.size() << " test rows, "
        << a.train.stats.feature_count() << " features\n";
    return kSuccess;
}

inline int run_train(const TrainOptions& o, std::ostream& out) {
    hetnet::NetworkConfig net;
    net.hidden_widths = o.hidden;
    net.seed = derive_seed(o.seed, 1);
    hetnet::TrainConfig tc;
    tc.epochs = o.epochs;
    tc.batch_size = o.batch_size;
    tc.learning_rate = o.learning_rate;
    tc.shuffle_seed = derive_seed(o.seed, 2);

    auto data = prepare(o.data, o.target, o.clean, o.train_fraction, o.seed);
    net.input_dim = data.train.stats.feature_count();

    Provenance prov{"train",
                    {{"data", o.data.string()},
                     {"seed", std::to_string(o.seed)},
                     {"split_seed", std::to_string(data.split_seed)},
                     {"init_seed", std::to_string(net.seed)},
                     {"shuffle_seed", std::to_string(tc.shuffle_seed)},
                     {"train_fraction", format_double(data.train_fraction)},
                     {"hidden", join_widths(net.hidden_widths)},
                     {"epochs", std::to_string(tc.epochs)},
                     {"batch_size", std::to_string(tc.batch_size)},
                     {"lr", format_double(tc.learning_rate)},
                     {"target", o.target}}};
    add_clean_params(prov, o.clean);
    out << "seeds: split=" << data.split_seed << " init=" << net.seed << " shuffle=" << tc.shuffle_seed << "\n";

    auto res = hetnet::train(data.train, net, tc);
    ModelFile m{net, tc, std::move(res.params), data.train.stats, data.train_fraction, data.split_seed,
                res.report.final_loss};
    write_file_atomic(o.out, model_to_string(m, &prov));
    out << "trained on " << data.train.size() << " rows; final loss " << format_fixed(res.report.final_loss, 6)
        << "\n";
    return kSuccess;
}

inline int run_evaluate(const EvaluateOptions& o, std::ostream& out) {
    const auto model = load_model(o.model);
    z_value(o.level);
    auto data = prepare(o.data, model.stats.target_name, o.clean, model.train_fraction, model.split_seed);
    require(data.test.stats == model.stats, "data does not match the model's training data (normalization differs)");
    out << "seed: split=" << data.split_seed << "\n";
    const auto rep = coverage(model.params, model.stats, data.test, o.level);
    std::size_t hits = 0;
    for (const auto& r : rep.rows) hits += r.covered ? 1 : 0;
    if (o.out) {
        Provenance prov{"evaluate",
                        {{"model", o.model.string()},
                         {"data", o.data.string()},
                         {"level", format_double(o.level)},
                         {"split_seed", std::to_string(data.split_seed)}}};
        write_file_atomic(*o.out, prov.render("#") + coverage_to_csv(rep));
    }
    out << "coverage at " << format_fixed(o.level, 2) << ": " << format_fixed(rep.coverage_fraction, 4) << " ("
        << hits << "/" << rep.rows.size() << ")\n";
    return kSuccess;
}

inline int run_derive(const DeriveOptions& o, std::ostream& out) {
    const auto model = load_model(o.model);
    const auto table = load_csv(o.scenarios);
    require(table.row_count() >= 1, "scenario file has no rows");
    require(table.missing_count() == 0, "scenario file has missing cells");
    std::vector<std::size_t> cols;
    for (const auto& name : model.stats.feature_names) cols.push_back(table.index_of(name));

    std::string csv = "row,mean,variance,lo,hi\n";
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        std::vector<double> raw;
        for (auto c : cols) raw.push_back(*table.rows[r][c]);
        GaussianInputModel gm;
        if (model.stats.has_record_schema()) {
            std::array<double, 9> a{};
            std::copy(raw.begin(), raw.end(), a.begin());
            gm = derive(model.params, ScenarioFeatures::from_array(a), model.stats);
        } else {
            gm = derive(model.params, std::span<const double>(raw), model.stats);
        }
        const auto ci = confidence_interval(gm, o.level);
        out << "row " << (r + 1) << ": mean=" << format_fixed(gm.mean, 4) << " variance=" << format_fixed(gm.variance, 4)
            << " ci" << static_cast<int>(std::lround(o.level * 100)) << "=[" << format_fixed(ci.lower, 4) << ", "
            << format_fixed(ci.upper, 4) << "]\n";
        csv += std::to_string(r + 1) + ',' + format_double(gm.mean) + ',' + format_double(gm.variance) + ',' +
               format_double(ci.lower) + ',' + format_double(ci.upper) + '\n';
    }
    if (o.out) {
        Provenance prov{"derive",
                        {{"model", o.model.string()}, {"scenarios", o.scenarios.string()}, {"level", format_double(o.level)}}};
        write_file_atomic(*o.out, prov.render("#") + csv);
    }
    return kSuccess;
}

inline int run_simulate(const SimulateOptions& o, std::ostream& out) {
    auto file = sim::sim_config_from_string(read_file(o.config));
    sim::SimConfig cfg = file.config;
    if (file.scenario) {
        require(o.model.has_value(), "config names a scenario; --model is required");
        const auto model = load_model(*o.model);
        cfg.productivity = derive(model.params, *file.scenario, model.stats);
    } else {
        require(!o.model.has_value(), "config has an explicit productivity block; drop --model or use a scenario");
    }
    cfg.validate();
    out << "seed: " << o.seed << "\n";
    out << "productivity model: mean=" << format_fixed(cfg.productivity.mean, 4)
        << " variance=" << format_fixed(cfg.productivity.variance, 4) << "\n";
    auto res = sim::run_monte_carlo(cfg, o.reps, o.seed, o.threads);
    Provenance prov{"simulate",
                    {{"config", o.config.string()},
                     {"model", o.model ? o.model->string() : std::string("none")},
                     {"reps", std::to_string(o.reps)},
                     {"seed", std::to_string(o.seed)},
                     {"total_quantity", format_double(cfg.total_quantity)},
                     {"truck_count", std::to_string(cfg.truck_count)},
                     {"truck_capacity", format_double(cfg.truck_capacity)},
                     {"load_time", format_double(cfg.load_time)},
                     {"haul_time", format_double(cfg.haul_time)},
                     {"dump_time", format_double(cfg.dump_time)},
                     {"return_time", format_double(cfg.return_time)},
                     {"productivity_mean", format_double(cfg.productivity.mean)},
                     {"productivity_variance", format_double(cfg.productivity.variance)},
                     {"resample_mode", std::string(sim::to_string(cfg.resample_mode))},
                     {"clamp_floor", format_double(cfg.clamp_floor)}}};
    write_file_atomic(o.out, prov.render("#") + sim::sim_result_to_csv(res));
    const auto& s = res.summary;
    out << "completion time (h): mean=" << format_fixed(s.mean, 4) << " std=" << format_fixed(s.stddev, 4)
        << " p05=" << format_fixed(s.p05, 4) << " p95=" << format_fixed(s.p95, 4) << "\n";
    return kSuccess;
}

inline int run_mixture(const MixtureOptions& o, std::ostream& out) {
    out << "seed: " << o.seed << "\n";
    const auto spec = synth::default_weather_spec();
    const auto samples = synth::generate_weather_mixture(o.n, o.seed, spec);
    std::vector<WeightedModel> comps;
    for (std::size_t k = 0; k < samples.conditions.size(); ++k) {
        const auto xs = samples.of(k);
        if (xs.empty()) continue;
        comps.push_back({samples.conditions[k], static_cast<double>(xs.size()) / static_cast<double>(samples.size()),
                         pooled_fit(xs)});
    }
    // Empirical weights can miss 1 by rounding; renormalize.
    double w = 0.0;
    for (const auto& c : comps) w += c.weight;
    for (auto& c : comps) c.weight /= w;
    // Population moments decompose exactly, so this pooled model equals
    // pooled_fit over all samples up to rounding.
    const auto mc = compare_pooled_vs_conditioned(comps);

    Provenance prov{"mixture-demo", {{"n", std::to_string(o.n)}, {"seed", std::to_string(o.seed)}}};
    for (const auto& c : spec)
        prov.params.emplace_back("condition." + c.label, "N(" + format_double(c.mean) + ", " +
                                                             format_double(c.stddev * c.stddev) + ") weight " +
                                                             format_double(c.weight));
    write_file_atomic(o.out, prov.render("#") + mixture_to_csv(mc));
    if (o.samples_out) write_file_atomic(*o.samples_out, prov.render("#") + synth::samples_to_csv(samples));
    out << "pooled: mean=" << format_fixed(mc.pooled.mean, 4) << " variance=" << format_fixed(mc.pooled.variance, 4)
        << "\n";
    for (const auto& c : mc.components)
        out << c.label << ": weight=" << format_fixed(c.weight, 4) << " mean=" << format_fixed(c.model.mean, 4)
            << " variance=" << format_fixed(c.model.variance, 4) << "\n";
    return kSuccess;
}

} // namespace detail

inline int run(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
    try {
        if (inv.subcommand == "synth") return detail::run_synth(inv.synth, out);
        if (inv.subcommand == "adapt") return detail::run_adapt(inv.adapt, out);
        if (inv.subcommand == "train") return detail::run_train(inv.train, out);
        if (inv.subcommand == "evaluate") return detail::run_evaluate(inv.evaluate, out);
        if (inv.subcommand == "derive") return detail::run_derive(inv.derive, out);
        if (inv.subcommand == "simulate") return detail::run_simulate(inv.simulate, out);
        if (inv.subcommand == "mixture-demo") return detail::run_mixture(inv.mixture, out);
        err << "error: unknown subcommand '" << inv.subcommand << "'\n";
        return kDataError;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kNumericalError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kDataError;
    }
}

/// parse_args + run.
inline int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    auto parsed = parse_args(args);
    if (!parsed.invocation) {
        (parsed.exit_code == kSuccess ? out : err) << parsed.message;
        return parsed.exit_code;
    }
    return run(*parsed.invocation, out, err);
}

} // namespace paveinput::cli
