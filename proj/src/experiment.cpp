#include "bnmf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <tuple>

namespace bnmf {

namespace {

enum SeedTag : std::uint64_t { kSplitTag = 1, kChainTag = 2, kNoiseTag = 3, kSweepTag = 4 };

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v + 0.0); }

struct Task {
    ModelKind model;
    std::size_t rank;
    double fraction;
    double noise_ratio;
    std::size_t repeat;
};

ExperimentReport summarize(const Trace& trace, ModelKind model, std::size_t rank) {
    ExperimentReport r;
    r.model = model;
    r.rank = rank;
    r.train_mse_final = trace.train_mse.back();
    r.w_mean = factor_mean(trace);
    r.w_sparsity = factor_sparsity(trace);
    return r;
}

std::size_t resolve_threads(const GridConfig& cfg) {
    return cfg.threads > 0 ? cfg.threads : default_thread_count();
}

} // namespace

void GridConfig::validate() const {
    if (models.empty()) throw ConfigError("no models selected");
    if (ranks.empty()) throw ConfigError("no latent dimensions selected");
    for (std::size_t k : ranks) {
        if (k == 0) throw ConfigError("latent dimension K must be at least 1");
    }
    for (double f : fractions) {
        if (!(f >= 0.0 && f < 1.0)) {
            throw ConfigError("unobserved fraction must lie in [0, 1), got " + std::to_string(f));
        }
    }
    for (double r : noise_ratios) {
        if (!(r >= 0.0) || !std::isfinite(r)) {
            throw ConfigError("noise ratio must be nonnegative, got " + std::to_string(r));
        }
    }
    if (repeats == 0) throw ConfigError("repeats must be at least 1");
    schedule.validate();
    hyper.validate();
    if (!(hyper.lambda_w > 0.0) || !(hyper.lambda_z > 0.0)) {
        throw ConfigError("prior rates must be positive to initialize a chain");
    }
}

std::uint64_t split_seed(std::uint64_t base, double fraction, std::size_t repeat) {
    return derive_seed(base, {kSplitTag, bits(fraction), repeat});
}

std::uint64_t chain_seed(std::uint64_t base, ModelKind model, std::size_t rank, double fraction,
                         std::size_t repeat) {
    return derive_seed(base,
                       {kChainTag, static_cast<std::uint64_t>(model), rank, bits(fraction), repeat});
}

std::uint64_t noise_seed(std::uint64_t base, double ratio, std::size_t repeat) {
    return derive_seed(base, {kNoiseTag, bits(ratio), repeat});
}

std::size_t default_thread_count() {
    if (const char* env = std::getenv("BNMF_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return static_cast<std::size_t>(v);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& task) {
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            if (failed.load()) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
            }
        }
    };

    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    }
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<GridRun> run_holdout_grid(const ObservedMatrix& data, const GridConfig& cfg) {
    cfg.validate();
    std::vector<Task> tasks;
    for (ModelKind model : cfg.models)
        for (std::size_t rank : cfg.ranks)
            for (double f : cfg.fractions)
                for (std::size_t rep = 0; rep < cfg.repeats; ++rep)
                    tasks.push_back({model, rank, f, 0.0, rep});

    const double variance = observed_variance(data);
    std::vector<GridRun> runs(tasks.size());
    parallel_for(tasks.size(), resolve_threads(cfg), [&](std::size_t i) {
        const Task& t = tasks[i];
        const HoldoutSplit split =
            holdout_split(data, SplitSpec{t.fraction, split_seed(cfg.seed, t.fraction, t.repeat)});
        const Trace trace =
            run_chain(split.train, t.rank, t.model, cfg.hyper, cfg.schedule,
                      chain_seed(cfg.seed, t.model, t.rank, t.fraction, t.repeat));
        GridRun run{t.model, t.rank, t.fraction, 0.0, t.repeat, variance,
                    trace.post_burn_in_sigma2_mean(cfg.schedule.burn_in),
                    summarize(trace, t.model, t.rank)};
        run.report.test_mse = evaluate_prediction(trace, split.test);
        runs[i] = std::move(run);
    });
    return runs;
}

std::vector<GridRun> run_noise_grid(const ObservedMatrix& data, const GridConfig& cfg) {
    cfg.validate();
    if (cfg.fractions.empty()) {
        throw ConfigError("noise protocol needs a holdout fraction");
    }
    const double fraction = cfg.fractions.front();
    std::vector<Task> tasks;
    for (ModelKind model : cfg.models)
        for (std::size_t rank : cfg.ranks)
            for (double ratio : cfg.noise_ratios)
                for (std::size_t rep = 0; rep < cfg.repeats; ++rep)
                    tasks.push_back({model, rank, fraction, ratio, rep});

    const double variance = observed_variance(data);
    std::vector<GridRun> runs(tasks.size());
    parallel_for(tasks.size(), resolve_threads(cfg), [&](std::size_t i) {
        const Task& t = tasks[i];
        const ObservedMatrix noisy =
            add_noise(data, t.noise_ratio, noise_seed(cfg.seed, t.noise_ratio, t.repeat));
        const HoldoutSplit split = holdout_split(
            noisy, SplitSpec{t.fraction, split_seed(cfg.seed, t.fraction, t.repeat)});
        const Trace trace =
            run_chain(split.train, t.rank, t.model, cfg.hyper, cfg.schedule,
                      chain_seed(cfg.seed, t.model, t.rank, t.fraction, t.repeat));
        GridRun run{t.model, t.rank, t.fraction, t.noise_ratio, t.repeat, variance,
                    trace.post_burn_in_sigma2_mean(cfg.schedule.burn_in),
                    summarize(trace, t.model, t.rank)};
        run.report.test_mse = evaluate_prediction(trace, split.test);
        run.report.noise_ratio = t.noise_ratio;
        run.report.variance_to_mse = variance_to_mse(variance, run.report.test_mse);
        runs[i] = std::move(run);
    });
    return runs;
}

std::vector<GridRun> run_rank_sweep(const ObservedMatrix& data, const GridConfig& cfg) {
    cfg.validate();
    std::vector<Task> tasks;
    for (ModelKind model : cfg.models)
        for (std::size_t rank : cfg.ranks)
            for (std::size_t rep = 0; rep < cfg.repeats; ++rep)
                tasks.push_back({model, rank, 0.0, 0.0, rep});

    const double variance = observed_variance(data);
    std::vector<GridRun> runs(tasks.size());
    parallel_for(tasks.size(), resolve_threads(cfg), [&](std::size_t i) {
        const Task& t = tasks[i];
        const std::uint64_t seed = derive_seed(
            cfg.seed, {kSweepTag, static_cast<std::uint64_t>(t.model), t.rank, t.repeat});
        const Trace trace = run_chain(data, t.rank, t.model, cfg.hyper, cfg.schedule, seed);
        runs[i] = GridRun{t.model, t.rank, 0.0, 0.0, t.repeat, variance,
                          trace.post_burn_in_sigma2_mean(cfg.schedule.burn_in),
                          summarize(trace, t.model, t.rank)};
    });
    return runs;
}

std::vector<GridCell> aggregate(const std::vector<GridRun>& runs) {
    using Key = std::tuple<ModelKind, std::size_t, double, double>;
    std::map<Key, GridCell> cells;
    for (const GridRun& r : runs) {
        GridCell& c = cells[Key{r.model, r.rank, r.fraction, r.noise_ratio}];
        c.model = r.model;
        c.rank = r.rank;
        c.fraction = r.fraction;
        c.noise_ratio = r.noise_ratio;
        c.data_variance = r.data_variance;
        ++c.repeats;
        c.test_mse += r.report.test_mse;
        c.train_mse_final += r.report.train_mse_final;
        c.w_mean += r.report.w_mean;
        c.w_sparsity += r.report.w_sparsity;
        c.sigma2_mean += r.sigma2_mean;
    }
    std::vector<GridCell> out;
    out.reserve(cells.size());
    for (auto& [key, c] : cells) {
        const auto n = static_cast<double>(c.repeats);
        c.test_mse /= n;
        c.train_mse_final /= n;
        c.w_mean /= n;
        c.w_sparsity /= n;
        c.sigma2_mean /= n;
        c.variance_to_mse = c.test_mse > 0.0 ? c.data_variance / c.test_mse : 0.0;
        out.push_back(c);
    }
    return out;
}

} // namespace bnmf
