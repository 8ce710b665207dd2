#pragma once
// Structured-text documents: model files, adapted datasets and cleaning
// reports. All are JSON with an optional leading `//` provenance header.
// Doubles are written in shortest round-trip form, so load(save(x)) == x
// bit for bit.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "paveinput/data_adapter.hpp"
#include "paveinput/error.hpp"
#include "paveinput/hetnet.hpp"
#include "paveinput/io.hpp"

namespace paveinput {

using json = nlohmann::ordered_json;

inline constexpr int kModelFormatVersion = 1;

struct ModelFile {
    hetnet::NetworkConfig network;
    hetnet::TrainConfig training;
    hetnet::NetworkParams params;
    NormalizationStats stats;
    double train_fraction = 0.8;
    std::uint64_t split_seed = 0;
    double final_loss = 0.0;

    friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

namespace detail {

inline ColumnKind kind_from_string(const std::string& s) {
    if (s == "numeric") return ColumnKind::numeric;
    if (s == "boolean") return ColumnKind::boolean;
    if (s == "categorical") return ColumnKind::categorical;
    throw DataError("unknown column kind: " + s);
}

inline json to_json(const NormalizationStats& st) {
    json feats = json::array();
    for (std::size_t j = 0; j < st.feature_count(); ++j) {
        feats.push_back({{"name", st.feature_names[j]},
                         {"kind", std::string(to_string(st.feature_kinds[j]))},
                         {"mean", st.mean[j]},
                         {"std", st.stddev[j]}});
    }
    return {{"features", feats},
            {"target", {{"name", st.target_name}, {"mean", st.target_mean}, {"std", st.target_stddev}}}};
}

inline NormalizationStats stats_from_json(const json& j) {
    NormalizationStats st;
    for (const auto& f : j.at("features")) {
        st.feature_names.push_back(f.at("name").get<std::string>());
        st.feature_kinds.push_back(kind_from_string(f.at("kind").get<std::string>()));
        st.mean.push_back(f.at("mean").get<double>());
        st.stddev.push_back(f.at("std").get<double>());
        require(st.stddev.back() >= 0.0, "negative standard deviation in normalization stats");
    }
    const auto& t = j.at("target");
    st.target_name = t.at("name").get<std::string>();
    st.target_mean = t.at("mean").get<double>();
    st.target_stddev = t.at("std").get<double>();
    return st;
}

inline json to_json(const Matrix& m, std::span<const double> y, std::span<const std::size_t> ids) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        auto r = m.row(i);
        rows.push_back({{"id", ids[i]}, {"x", std::vector<double>(r.begin(), r.end())}, {"y", y[i]}});
    }
    return rows;
}

inline Dataset dataset_from_json(const json& rows, const NormalizationStats& st) {
    Dataset ds;
    ds.stats = st;
    ds.features = Matrix(rows.size(), st.feature_count());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        auto x = r.at("x").get<std::vector<double>>();
        require(x.size() == st.feature_count(), "dataset row " + std::to_string(i + 1) + " has the wrong width");
        std::copy(x.begin(), x.end(), ds.features.row(i).begin());
        ds.target.push_back(r.at("y").get<double>());
        ds.row_ids.push_back(r.at("id").get<std::size_t>());
    }
    ds.validate();
    return ds;
}

inline json parse_document(std::string_view text, std::string_view what) {
    try {
        return json::parse(text, nullptr, true, true);
    } catch (const json::exception& e) {
        throw DataError(std::string(what) + ": " + e.what());
    }
}

} // namespace detail

// ---------------------------------------------------------------- model

inline std::string model_to_string(const ModelFile& m, const Provenance* prov = nullptr) {
    json layers = json::array();
    for (const auto& l : m.params.layers)
        layers.push_back({{"in", l.in}, {"out", l.out}, {"weights", l.weights}, {"bias", l.bias}});
    json doc = {
        {"format", "pave-model"},
        {"version", kModelFormatVersion},
        {"network", {{"input_dim", m.network.input_dim}, {"hidden_widths", m.network.hidden_widths},
                     {"activation", "relu"}, {"seed", m.network.seed}}},
        {"training", {{"epochs", m.training.epochs}, {"batch_size", m.training.batch_size},
                      {"learning_rate", m.training.learning_rate}, {"adam_beta1", m.training.adam_beta1},
                      {"adam_beta2", m.training.adam_beta2}, {"adam_epsilon", m.training.adam_epsilon},
                      {"shuffle_seed", m.training.shuffle_seed}}},
        {"split", {{"train_fraction", m.train_fraction}, {"seed", m.split_seed}}},
        {"final_loss", m.final_loss},
        {"normalization", detail::to_json(m.stats)},
        {"layers", layers},
    };
    std::string out = prov ? prov->render("//") : std::string{};
    out += doc.dump(1);
    out += '\n';
    return out;
}

inline ModelFile model_from_string(std::string_view text) {
    const json doc = detail::parse_document(text, "model file");
    try {
        require(doc.at("format").get<std::string>() == "pave-model", "not a model file");
        require(doc.at("version").get<int>() == kModelFormatVersion, "unsupported model file version");
        ModelFile m;
        const auto& n = doc.at("network");
        m.network.input_dim = n.at("input_dim").get<std::size_t>();
        m.network.hidden_widths = n.at("hidden_widths").get<std::vector<std::size_t>>();
        m.network.seed = n.at("seed").get<std::uint64_t>();
        const auto& t = doc.at("training");
        m.training.epochs = t.at("epochs").get<std::size_t>();
        m.training.batch_size = t.at("batch_size").get<std::size_t>();
        m.training.learning_rate = t.at("learning_rate").get<double>();
        m.training.adam_beta1 = t.at("adam_beta1").get<double>();
        m.training.adam_beta2 = t.at("adam_beta2").get<double>();
        m.training.adam_epsilon = t.at("adam_epsilon").get<double>();
        m.training.shuffle_seed = t.at("shuffle_seed").get<std::uint64_t>();
        m.train_fraction = doc.at("split").at("train_fraction").get<double>();
        m.split_seed = doc.at("split").at("seed").get<std::uint64_t>();
        m.final_loss = doc.at("final_loss").get<double>();
        m.stats = detail::stats_from_json(doc.at("normalization"));
        for (const auto& l : doc.at("layers")) {
            hetnet::DenseLayer layer;
            layer.in = l.at("in").get<std::size_t>();
            layer.out = l.at("out").get<std::size_t>();
            layer.weights = l.at("weights").get<std::vector<double>>();
            layer.bias = l.at("bias").get<std::vector<double>>();
            m.params.layers.push_back(std::move(layer));
        }
        m.params.validate();
        require(m.params.input_dim() == m.network.input_dim, "model input width disagrees with its config");
        require(m.params.layers.size() == m.network.hidden_widths.size() + 1,
                "model layer count disagrees with its config");
        for (std::size_t k = 0; k < m.network.hidden_widths.size(); ++k)
            require(m.params.layers[k].out == m.network.hidden_widths[k], "model layer width disagrees with its config");
        require(m.stats.feature_count() == m.network.input_dim, "normalization stats disagree with the network input");
        return m;
    } catch (const json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
}

inline ModelFile load_model(const std::filesystem::path& path) { return model_from_string(read_file(path)); }

// ---------------------------------------------------------------- dataset

struct AdaptedDataset {
    Dataset train;
    Dataset test;
    double train_fraction = 0.8;
    std::uint64_t split_seed = 0;
};

inline std::string dataset_to_string(const AdaptedDataset& a, const Provenance* prov = nullptr) {
    json doc = {
        {"format", "pave-dataset"},
        {"version", 1},
        {"split", {{"train_fraction", a.train_fraction}, {"seed", a.split_seed}}},
        {"normalization", detail::to_json(a.train.stats)},
        {"train", detail::to_json(a.train.features, a.train.target, a.train.row_ids)},
        {"test", detail::to_json(a.test.features, a.test.target, a.test.row_ids)},
    };
    std::string out = prov ? prov->render("//") : std::string{};
    out += doc.dump(1);
    out += '\n';
    return out;
}

inline AdaptedDataset dataset_from_string(std::string_view text) {
    const json doc = detail::parse_document(text, "dataset file");
    try {
        require(doc.at("format").get<std::string>() == "pave-dataset", "not a dataset file");
        AdaptedDataset a;
        a.train_fraction = doc.at("split").at("train_fraction").get<double>();
        a.split_seed = doc.at("split").at("seed").get<std::uint64_t>();
        const auto st = detail::stats_from_json(doc.at("normalization"));
        a.train = detail::dataset_from_json(doc.at("train"), st);
        a.test = detail::dataset_from_json(doc.at("test"), st);
        return a;
    } catch (const json::exception& e) {
        throw DataError(std::string("dataset file: ") + e.what());
    }
}

/// True when the text looks like a JSON document (after any comment header).
inline bool is_json_document(std::string_view text) {
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        auto line = trim(text.substr(pos, eol - pos));
        pos = eol + 1;
        if (line.empty() || line.starts_with("//")) continue;
        return line.front() == '{';
    }
    return false;
}

// ---------------------------------------------------------------- clean report

inline std::string clean_report_to_string(const CleanReport& r, const Provenance* prov = nullptr) {
    json cols = json::array();
    for (const auto& c : r.columns) {
        json e = {{"column", c.column}, {"missing", c.missing}, {"imputed", c.imputed}, {"outliers", c.outliers}};
        if (c.fenced) {
            e["lower_fence"] = c.lower_fence;
            e["upper_fence"] = c.upper_fence;
        }
        e["outlier_rows"] = c.outlier_rows;
        cols.push_back(std::move(e));
    }
    json doc = {
        {"format", "pave-clean-report"},
        {"policy", {{"missing_strategy", r.policy.missing_strategy == MissingStrategy::drop_row ? "drop_row"
                                                                                                   : "impute_median"},
                    {"outlier_strategy", r.policy.outlier_strategy == OutlierStrategy::drop_row ? "drop_row"
                                                                                                  : "flag_only"},
                    {"iqr_multiplier", r.policy.iqr_multiplier}}},
        {"input_rows", r.input_rows},
        {"output_rows", r.output_rows},
        {"rows_dropped_missing", r.rows_dropped_missing},
        {"rows_dropped_outlier", r.rows_dropped_outlier},
        {"columns", cols},
    };
    std::string out = prov ? prov->render("//") : std::string{};
    out += doc.dump(1);
    out += '\n';
    return out;
}

} // namespace paveinput
