#pragma once
// Discrete-event simulation of a road-paving operation.
//
// K trucks start together at the batch plant at t = 0 and cycle
// load -> haul -> dump -> return. A truckload enters the paver hopper when
// its dump completes. The slip-form paver places hopper concrete load by
// load (FIFO) at a productivity P drawn from a Gaussian input model and
// clamped below at `clamp_floor`, idling when the hopper is empty. The
// replication completes when the last of ceil(Q / C) truckloads is placed.
//
// Closed form for a fixed P: loads arrive in batches of up to K at
// a + j*T (a = load + haul + dump, T = a + return), batch j carrying
// everything that remains when fewer than K loads are left. With a
// work-conserving paver the finish time is max_j(a + j*T + R_j / P), where
// R_j = Q - j*K*C is the quantity delivered from batch j on. R_j is affine in
// j, so the maximum sits at an end point:
//
//     completion = a + max(Q / P, J*T + (Q - J*K*C) / P),  J = ceil(N / K) - 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "paveinput/error.hpp"
#include "paveinput/input_model.hpp"
#include "paveinput/io.hpp"
#include "paveinput/random.hpp"
#include "paveinput/schema.hpp"
#include "paveinput/stats.hpp"

namespace paveinput::sim {

enum class ResampleMode { per_replication, per_truckload };

inline std::string_view to_string(ResampleMode m) {
    return m == ResampleMode::per_replication ? "per_replication" : "per_truckload";
}

inline ResampleMode resample_mode_from_string(std::string_view s) {
    if (s == "per_replication") return ResampleMode::per_replication;
    if (s == "per_truckload") return ResampleMode::per_truckload;
    throw DataError("unknown resample mode: " + std::string(s));
}

struct SimConfig {
    double total_quantity = 100.0; // m3
    std::size_t truck_count = 1;
    double truck_capacity = 10.0; // m3
    double load_time = 0.1;       // hours
    double haul_time = 0.5;
    double dump_time = 0.1;
    double return_time = 0.4;
    GaussianInputModel productivity{50.0, 0.0}; // m3/hr
    ResampleMode resample_mode = ResampleMode::per_replication;
    double clamp_floor = 1.0; // m3/hr

    double first_delivery_offset() const { return load_time + haul_time + dump_time; }
    double cycle_time() const { return load_time + haul_time + dump_time + return_time; }

    void validate() const {
        auto pos = [](double v, const char* name) {
            require(std::isfinite(v) && v > 0.0, std::string(name) + " must be positive");
        };
        pos(total_quantity, "total_quantity");
        pos(truck_capacity, "truck_capacity");
        pos(load_time, "load_time");
        pos(haul_time, "haul_time");
        pos(dump_time, "dump_time");
        pos(return_time, "return_time");
        pos(clamp_floor, "clamp_floor");
        require(truck_count >= 1, "truck_count must be at least 1");
        productivity.validate();
    }
};

/// Smallest N with N * capacity >= quantity.
inline std::size_t truckload_count(double quantity, double capacity) {
    auto n = static_cast<std::size_t>(std::ceil(quantity / capacity));
    if (n > 1 && static_cast<double>(n - 1) * capacity >= quantity) --n;
    return std::max<std::size_t>(n, 1);
}

struct CompletionRecord {
    double completion_time = 0.0;   // hours
    double paver_busy_time = 0.0;   // hours
    double paver_busy_fraction = 0.0;
    std::size_t truckloads_delivered = 0;
    double quantity_delivered = 0.0;
    std::vector<double> productivities; // as used, after clamping
    std::size_t clamped_draws = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const CompletionRecord&, const CompletionRecord&) = default;
};

namespace detail {

enum class EventKind : int { dump = 0, paver_finish = 1, plant_arrival = 2 };

struct Event {
    double time;
    EventKind kind;
    std::size_t index; // truck for dump/plant_arrival, load for paver_finish
};

struct Later {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.kind != b.kind) return static_cast<int>(a.kind) > static_cast<int>(b.kind);
        return a.index > b.index;
    }
};

} // namespace detail

/// Event-queue simulation with fixed per-load productivities.
inline CompletionRecord simulate_with_productivities(const SimConfig& cfg, const std::vector<double>& per_load_rate) {
    using detail::Event;
    using detail::EventKind;
    const std::size_t n_loads = truckload_count(cfg.total_quantity, cfg.truck_capacity);
    require(per_load_rate.size() == n_loads, "one productivity per truckload required");

    std::vector<double> load_qty(n_loads, cfg.truck_capacity);
    load_qty.back() = cfg.total_quantity - static_cast<double>(n_loads - 1) * cfg.truck_capacity;

    std::priority_queue<Event, std::vector<Event>, detail::Later> queue;
    for (std::size_t k = 0; k < cfg.truck_count; ++k) queue.push({0.0, EventKind::plant_arrival, k});

    std::vector<std::size_t> truck_load(cfg.truck_count, 0);
    std::deque<std::size_t> hopper;
    std::size_t dispatched = 0, placed = 0;
    bool paver_busy = false;
    CompletionRecord rec;

    auto start_next = [&](double now) {
        const std::size_t m = hopper.front();
        hopper.pop_front();
        paver_busy = true;
        const double dur = load_qty[m] / per_load_rate[m];
        rec.paver_busy_time += dur;
        queue.push({now + dur, EventKind::paver_finish, m});
    };

    while (!queue.empty()) {
        const Event ev = queue.top();
        queue.pop();
        switch (ev.kind) {
        case EventKind::plant_arrival:
            if (dispatched < n_loads) {
                truck_load[ev.index] = dispatched++;
                queue.push({ev.time + cfg.load_time + cfg.haul_time + cfg.dump_time, EventKind::dump, ev.index});
            }
            break;
        case EventKind::dump:
            hopper.push_back(truck_load[ev.index]);
            rec.quantity_delivered += load_qty[truck_load[ev.index]];
            ++rec.truckloads_delivered;
            queue.push({ev.time + cfg.return_time, EventKind::plant_arrival, ev.index});
            if (!paver_busy) start_next(ev.time);
            break;
        case EventKind::paver_finish:
            paver_busy = false;
            if (++placed == n_loads) {
                rec.completion_time = ev.time;
                rec.paver_busy_fraction = rec.paver_busy_time / rec.completion_time;
                rec.productivities = per_load_rate;
                return rec;
            }
            if (!hopper.empty()) start_next(ev.time);
            break;
        }
    }
    throw NumericalError("simulation ended before all truckloads were placed");
}

/// One seeded replication; productivities are drawn per replication or per
/// truckload (in load order) and clamped at clamp_floor.
inline CompletionRecord run_replication(const SimConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const std::size_t n_loads = truckload_count(cfg.total_quantity, cfg.truck_capacity);
    Rng rng(seed);
    const double sd = cfg.productivity.stddev();
    std::size_t clamped = 0;
    auto draw = [&] {
        const double p = rng.normal(cfg.productivity.mean, sd);
        if (!(p >= cfg.clamp_floor)) {
            ++clamped;
            return cfg.clamp_floor;
        }
        return p;
    };
    std::vector<double> rates(n_loads);
    if (cfg.resample_mode == ResampleMode::per_replication) {
        std::fill(rates.begin(), rates.end(), draw());
    } else {
        for (auto& r : rates) r = draw();
    }
    auto rec = simulate_with_productivities(cfg, rates);
    rec.clamped_draws = clamped;
    rec.seed = seed;
    return rec;
}

/// Closed-form completion time for a fixed productivity (see file comment).
inline double analytic_completion(const SimConfig& cfg, double fixed_productivity) {
    cfg.validate();
    require(fixed_productivity > 0.0, "fixed productivity must be positive");
    const double P = fixed_productivity;
    const double Q = cfg.total_quantity;
    const std::size_t n_loads = truckload_count(Q, cfg.truck_capacity);
    const std::size_t batches = (n_loads + cfg.truck_count - 1) / cfg.truck_count;
    const double J = static_cast<double>(batches - 1);
    const double K = static_cast<double>(cfg.truck_count);
    const double tail = J * cfg.cycle_time() + (Q - J * K * cfg.truck_capacity) / P;
    return cfg.first_delivery_offset() + std::max(Q / P, tail);
}

struct SimSummary {
    std::size_t replications = 0;
    double mean = 0.0;
    double stddev = 0.0; // population
    double min = 0.0;
    double max = 0.0;
    double p05 = 0.0;
    double p95 = 0.0;

    friend bool operator==(const SimSummary&, const SimSummary&) = default;
};

struct SimResult {
    std::vector<CompletionRecord> records; // by replication index
    SimSummary summary;
    std::uint64_t master_seed = 0;
};

inline SimSummary summarize(const std::vector<CompletionRecord>& records) {
    require(!records.empty(), "no replications to summarize");
    std::vector<double> t;
    t.reserve(records.size());
    for (const auto& r : records) t.push_back(r.completion_time);
    SimSummary s;
    s.replications = t.size();
    s.mean = stats::mean(t);
    s.stddev = stats::population_stddev(t);
    std::sort(t.begin(), t.end());
    s.min = t.front();
    s.max = t.back();
    s.p05 = stats::quantile_sorted(t, 0.05);
    s.p95 = stats::quantile_sorted(t, 0.95);
    return s;
}

inline std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t index) {
    return derive_seed(master_seed, index);
}

/// Replication i uses replication_seed(master_seed, i); records are stored by
/// index, so the result does not depend on `threads`.
inline SimResult run_monte_carlo(const SimConfig& cfg, std::size_t replications, std::uint64_t master_seed,
                                 unsigned threads = 1) {
    cfg.validate();
    require(replications >= 1, "replications must be at least 1");
    SimResult res;
    res.master_seed = master_seed;
    res.records.resize(replications);
    auto worker = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < replications; i += stride)
            res.records[i] = run_replication(cfg, replication_seed(master_seed, i));
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(replications)));
    if (threads == 1) {
        worker(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w, threads);
    }
    res.summary = summarize(res.records);
    return res;
}

// ---------------------------------------------------------------- files

/// Simulation config document. Productivity comes either from an explicit
/// {"mean", "variance"} block or from a scenario to be run through a model.
struct SimConfigFile {
    SimConfig config;
    bool has_productivity = false;
    std::optional<ScenarioFeatures> scenario;
};

inline SimConfigFile sim_config_from_string(std::string_view text) {
    using json = nlohmann::ordered_json;
    json doc;
    try {
        doc = json::parse(text, nullptr, true, true);
    } catch (const json::exception& e) {
        throw DataError(std::string("simulation config: ") + e.what());
    }
    try {
        SimConfigFile f;
        SimConfig& c = f.config;
        c.total_quantity = doc.at("total_quantity").get<double>();
        c.truck_count = doc.at("truck_count").get<std::size_t>();
        c.truck_capacity = doc.at("truck_capacity").get<double>();
        c.load_time = doc.at("load_time").get<double>();
        c.haul_time = doc.at("haul_time").get<double>();
        c.dump_time = doc.at("dump_time").get<double>();
        c.return_time = doc.at("return_time").get<double>();
        c.resample_mode = resample_mode_from_string(doc.value("resample_mode", std::string("per_replication")));
        c.clamp_floor = doc.value("clamp_floor", 1.0);
        if (doc.contains("productivity")) {
            c.productivity.mean = doc["productivity"].at("mean").get<double>();
            c.productivity.variance = doc["productivity"].at("variance").get<double>();
            f.has_productivity = true;
        }
        if (doc.contains("scenario")) {
            std::array<double, 9> v{};
            for (std::size_t j = 0; j < kFeatureColumns.size(); ++j)
                v[j] = doc["scenario"].at(std::string(kFeatureColumns[j])).get<double>();
            f.scenario = ScenarioFeatures::from_array(v);
        }
        require(f.has_productivity || f.scenario, "simulation config needs a productivity block or a scenario");
        if (f.has_productivity) c.validate();
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("simulation config: ") + e.what());
    }
}

inline std::string sim_result_to_csv(const SimResult& r) {
    std::string out = "replication,seed,completion_time,paver_busy_fraction,truckloads,clamped_draws,productivity_mean\n";
    for (std::size_t i = 0; i < r.records.size(); ++i) {
        const auto& rec = r.records[i];
        out += std::to_string(i) + ',' + std::to_string(rec.seed) + ',' + format_double(rec.completion_time) + ',' +
               format_double(rec.paver_busy_fraction) + ',' + std::to_string(rec.truckloads_delivered) + ',' +
               std::to_string(rec.clamped_draws) + ',' + format_double(stats::mean(rec.productivities)) + '\n';
    }
    const auto& s = r.summary;
    out += "# summary replications=" + std::to_string(s.replications) + '\n';
    out += "# summary mean=" + format_double(s.mean) + '\n';
    out += "# summary std=" + format_double(s.stddev) + '\n';
    out += "# summary min=" + format_double(s.min) + '\n';
    out += "# summary max=" + format_double(s.max) + '\n';
    out += "# summary p05=" + format_double(s.p05) + '\n';
    out += "# summary p95=" + format_double(s.p95) + '\n';
    return out;
}

} // namespace paveinput::sim
