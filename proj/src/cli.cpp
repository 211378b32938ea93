#include "bnmf/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bnmf/evaluate.hpp"
#include "bnmf/experiment.hpp"
#include "bnmf/gibbs.hpp"
#include "bnmf/ingest.hpp"

namespace bnmf {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kToolVersion = "1.0.0";

struct Options {
    std::string command;
    std::vector<std::string> models;
    std::vector<std::size_t> ranks;
    std::size_t iterations = 500;
    std::size_t burn_in = 300;
    std::size_t snapshot_window = 20;
    HyperParams hyper;
    std::uint64_t seed = 0;
    std::size_t repeats = 10;
    std::vector<double> fractions;
    std::vector<double> noise_ratios;
    std::string data;
    std::string recipe = "raw";
    std::string mask;
    bool header = false;
    std::string missing_token = "NA";
    std::string out = ".";
    bool deterministic = false;
    std::size_t threads = 0;
    // synth
    std::size_t rows = 30;
    std::size_t cols = 30;
    double synth_lambda = 0.1;
    double noise_var = 1.0;
    double observed_fraction = 1.0;
};

struct ScheduleFlags {
    CLI::Option* ranks = nullptr;
    CLI::Option* fractions = nullptr;
    CLI::Option* models = nullptr;
};

void add_run_flags(CLI::App* cmd, Options& o, ScheduleFlags& flags, bool grid) {
    flags.models = cmd->add_option("--model", o.models,
                                   grid ? "Models (comma list): gee, gl12, gl22, glinf, gl2inf"
                                        : "Model: gee, gl12, gl22, glinf, gl2inf")
                       ->delimiter(',');
    flags.ranks = cmd->add_option("--k", o.ranks, grid ? "Latent dimensions (comma list)"
                                                       : "Latent dimension K")
                      ->delimiter(',');
    cmd->add_option("--t", o.iterations, "Total Gibbs iterations")->capture_default_str();
    cmd->add_option("--burn-in", o.burn_in, "Burn-in iterations")->capture_default_str();
    cmd->add_option("--snapshot-window", o.snapshot_window,
                    "Final iterations whose factors are kept")
        ->capture_default_str();
    cmd->add_option("--lambda-w", o.hyper.lambda_w, "Prior rate for W")->capture_default_str();
    cmd->add_option("--lambda-z", o.hyper.lambda_z, "Prior rate for Z")->capture_default_str();
    cmd->add_option("--alpha-sigma", o.hyper.alpha_sigma, "Inverse-Gamma shape")
        ->capture_default_str();
    cmd->add_option("--beta-sigma", o.hyper.beta_sigma, "Inverse-Gamma scale")
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "Base random seed")->capture_default_str();
    cmd->add_option("--data", o.data, "Input CSV");
    cmd->add_option("--recipe", o.recipe, "Preprocessing: gdsc, meth or raw")->capture_default_str();
    cmd->add_option("--mask", o.mask, "0/1 CSV overriding the inferred mask");
    cmd->add_flag("--header", o.header, "Input files start with a header row");
    cmd->add_option("--missing-token", o.missing_token, "Cell text marking a missing value")
        ->capture_default_str();
    cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
    cmd->add_flag("--deterministic", o.deterministic, "Omit timestamps and wall times");
    if (grid) {
        cmd->add_option("--repeats", o.repeats, "Repeats per grid cell")->capture_default_str();
        flags.fractions = cmd->add_option("--fractions", o.fractions,
                                          "Unobserved fractions (comma list)")
                              ->delimiter(',');
        cmd->add_option("--noise-ratios", o.noise_ratios, "Noise-to-signal ratios (comma list)")
            ->delimiter(',');
        cmd->add_option("--threads", o.threads, "Worker threads (default: BNMF_THREADS or cores)");
    }
}

ObservedMatrix load_input(const Options& o) {
    if (o.data.empty()) {
        throw ConfigError("--data is required");
    }
    DatasetRecipe recipe;
    recipe.kind = parse_recipe(o.recipe);
    CsvOptions csv;
    csv.missing_token = o.missing_token;
    csv.has_header = o.header;
    CsvTable table = read_csv_table(fs::path(o.data), csv);
    if (!o.mask.empty()) {
        apply_mask(table, read_mask_csv(fs::path(o.mask), o.header));
    }
    return preprocess(table, recipe);
}

Schedule schedule_of(const Options& o) {
    Schedule s{o.iterations, o.burn_in, o.snapshot_window};
    s.validate();
    return s;
}

std::string now_utc() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json manifest(const Options& o, const std::vector<ModelKind>& models,
              const std::vector<std::size_t>& ranks) {
    json j;
    j["tool"] = "bnmf";
    j["version"] = kToolVersion;
    j["command"] = o.command;
    json models_json = json::array();
    for (ModelKind m : models) models_json.push_back(std::string(model_name(m)));
    j["models"] = models_json;
    j["k"] = ranks;
    j["iterations"] = o.iterations;
    j["burn_in"] = o.burn_in;
    j["snapshot_window"] = o.snapshot_window;
    j["lambda_w"] = o.hyper.lambda_w;
    j["lambda_z"] = o.hyper.lambda_z;
    j["alpha_sigma"] = o.hyper.alpha_sigma;
    j["beta_sigma"] = o.hyper.beta_sigma;
    j["seed"] = o.seed;
    j["data"] = o.data;
    j["recipe"] = o.recipe;
    j["mask"] = o.mask;
    if (!o.deterministic) {
        j["created_at"] = now_utc();
    }
    return j;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

std::ofstream open_csv(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path.string() + "'");
    return out;
}

fs::path prepare_out(const Options& o) {
    fs::path dir(o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw FormatError("cannot create output directory '" + o.out + "': " + ec.message());
    return dir;
}

std::vector<ModelKind> resolve_models(const Options& o) {
    if (o.models.empty()) return {kAllModels.begin(), kAllModels.end()};
    std::vector<ModelKind> out;
    for (const auto& name : o.models) out.push_back(parse_model(name));
    return out;
}

int cmd_fit(const Options& o, std::ostream& out) {
    if (o.models.size() > 1) throw ConfigError("fit takes a single --model");
    if (o.ranks.size() > 1) throw ConfigError("fit takes a single --k");
    const ModelKind model = o.models.empty() ? ModelKind::gl22 : parse_model(o.models.front());
    const std::size_t rank = o.ranks.empty() ? 10 : o.ranks.front();
    const Schedule schedule = schedule_of(o);
    o.hyper.validate();
    if (!(o.hyper.lambda_w > 0.0) || !(o.hyper.lambda_z > 0.0)) {
        throw ConfigError("prior rates must be positive to initialize a chain");
    }
    if (rank == 0) throw ConfigError("--k must be at least 1");
    const ObservedMatrix data = load_input(o);
    const fs::path dir = prepare_out(o);

    const auto start = std::chrono::steady_clock::now();
    const Trace trace = run_chain(data, rank, model, o.hyper, schedule, o.seed);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    {
        auto csv = open_csv(dir / "trace.csv");
        csv << "iteration,train_mse,sigma2\n";
        for (std::size_t t = 0; t < trace.train_mse.size(); ++t) {
            csv << (t + 1) << ',' << format_double(trace.train_mse[t]) << ','
                << format_double(trace.sigma2_history[t]) << '\n';
        }
    }
    write_matrix_csv(dir / "prediction.csv", *trace.posterior_mean_prediction);

    json summary;
    summary["model"] = std::string(model_name(model));
    summary["k"] = rank;
    summary["rows"] = data.rows();
    summary["cols"] = data.cols();
    summary["observed"] = data.observed_count();
    summary["iterations"] = schedule.iterations;
    summary["burn_in"] = schedule.burn_in;
    summary["final_train_mse"] = trace.train_mse.back();
    summary["posterior_sigma2_mean"] = trace.post_burn_in_sigma2_mean(schedule.burn_in);
    summary["w_mean"] = factor_mean(trace);
    summary["w_sparsity"] = factor_sparsity(trace);
    summary["sparsity_threshold"] = kSparsityThreshold;
    if (!o.deterministic) summary["wall_time_seconds"] = seconds;
    write_json(dir / "summary.json", summary);
    write_json(dir / "manifest.json", manifest(o, {model}, {rank}));

    out << "fit " << model_name(model) << " k=" << rank << " final_train_mse="
        << format_double(trace.train_mse.back()) << '\n';
    return kExitOk;
}

GridConfig grid_of(const Options& o, std::vector<std::size_t> default_ranks,
                   std::vector<double> default_fractions) {
    GridConfig cfg;
    cfg.models = resolve_models(o);
    cfg.ranks = o.ranks.empty() ? std::move(default_ranks) : o.ranks;
    cfg.fractions = o.fractions.empty() ? std::move(default_fractions) : o.fractions;
    if (!o.noise_ratios.empty()) cfg.noise_ratios = o.noise_ratios;
    cfg.repeats = o.repeats;
    cfg.schedule = schedule_of(o);
    cfg.hyper = o.hyper;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.validate();
    return cfg;
}

void write_runs_csv(const fs::path& path, const std::vector<GridRun>& runs) {
    auto csv = open_csv(path);
    csv << "model,k,fraction,noise_ratio,repeat,test_mse,train_mse_final,w_mean,w_sparsity,"
           "sigma2_mean\n";
    for (const GridRun& r : runs) {
        csv << model_name(r.model) << ',' << r.rank << ',' << format_double(r.fraction) << ','
            << format_double(r.noise_ratio) << ',' << r.repeat << ','
            << format_double(r.report.test_mse) << ',' << format_double(r.report.train_mse_final)
            << ',' << format_double(r.report.w_mean) << ',' << format_double(r.report.w_sparsity)
            << ',' << format_double(r.sigma2_mean) << '\n';
    }
}

int cmd_holdout(const Options& o, std::ostream& out) {
    const GridConfig cfg = grid_of(o, {20, 30, 40, 50}, {0.6, 0.7, 0.8});
    const ObservedMatrix data = load_input(o);
    const fs::path dir = prepare_out(o);
    const auto runs = run_holdout_grid(data, cfg);
    const auto cells = aggregate(runs);
    {
        auto csv = open_csv(dir / "holdout.csv");
        csv << "model,k,fraction,repeats,test_mse,train_mse_final,w_mean,w_sparsity\n";
        for (const GridCell& c : cells) {
            csv << model_name(c.model) << ',' << c.rank << ',' << format_double(c.fraction) << ','
                << c.repeats << ',' << format_double(c.test_mse) << ','
                << format_double(c.train_mse_final) << ',' << format_double(c.w_mean) << ','
                << format_double(c.w_sparsity) << '\n';
        }
    }
    write_runs_csv(dir / "holdout_runs.csv", runs);
    json m = manifest(o, cfg.models, cfg.ranks);
    m["fractions"] = cfg.fractions;
    m["repeats"] = cfg.repeats;
    write_json(dir / "manifest.json", m);
    out << "holdout cells=" << cells.size() << " runs=" << runs.size() << '\n';
    return kExitOk;
}

int cmd_noise(const Options& o, std::ostream& out) {
    const GridConfig cfg = grid_of(o, {10}, {0.2});
    const ObservedMatrix data = load_input(o);
    const fs::path dir = prepare_out(o);
    const auto runs = run_noise_grid(data, cfg);
    const auto cells = aggregate(runs);
    {
        auto csv = open_csv(dir / "noise.csv");
        csv << "model,k,fraction,noise_ratio,repeats,data_variance,test_mse,variance_to_mse\n";
        for (const GridCell& c : cells) {
            csv << model_name(c.model) << ',' << c.rank << ',' << format_double(c.fraction) << ','
                << format_double(c.noise_ratio) << ',' << c.repeats << ','
                << format_double(c.data_variance) << ',' << format_double(c.test_mse) << ','
                << format_double(c.variance_to_mse) << '\n';
        }
    }
    write_runs_csv(dir / "noise_runs.csv", runs);
    json m = manifest(o, cfg.models, cfg.ranks);
    m["fraction"] = cfg.fractions.front();
    m["noise_ratios"] = cfg.noise_ratios;
    m["repeats"] = cfg.repeats;
    write_json(dir / "manifest.json", m);
    out << "noise cells=" << cells.size() << " runs=" << runs.size() << '\n';
    return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
    const GridConfig cfg = grid_of(o, {10, 20, 30, 40, 50}, {});
    const ObservedMatrix data = load_input(o);
    const fs::path dir = prepare_out(o);
    const auto runs = run_rank_sweep(data, cfg);
    const auto cells = aggregate(runs);
    {
        auto csv = open_csv(dir / "sweep.csv");
        csv << "model,k,repeats,train_mse_final,sigma2_mean,w_mean,w_sparsity\n";
        for (const GridCell& c : cells) {
            csv << model_name(c.model) << ',' << c.rank << ',' << c.repeats << ','
                << format_double(c.train_mse_final) << ',' << format_double(c.sigma2_mean) << ','
                << format_double(c.w_mean) << ',' << format_double(c.w_sparsity) << '\n';
        }
    }
    write_runs_csv(dir / "sweep_runs.csv", runs);
    json m = manifest(o, cfg.models, cfg.ranks);
    m["repeats"] = cfg.repeats;
    write_json(dir / "manifest.json", m);
    out << "sweep cells=" << cells.size() << " runs=" << runs.size() << '\n';
    return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
    SynthSpec spec;
    spec.rows = o.rows;
    spec.cols = o.cols;
    spec.rank = o.ranks.empty() ? 5 : o.ranks.front();
    spec.lambda = o.synth_lambda;
    spec.noise_var = o.noise_var;
    spec.observed_fraction = o.observed_fraction;
    spec.seed = o.seed;
    const SyntheticData s = synth_gee(spec);
    const fs::path dir = prepare_out(o);
    write_csv(dir / "data.csv", s.data, o.missing_token);
    write_matrix_csv(dir / "truth_w.csv", s.truth.w());
    write_matrix_csv(dir / "truth_z.csv", s.truth.z());
    json j;
    j["tool"] = "bnmf";
    j["version"] = kToolVersion;
    j["command"] = "synth";
    j["rows"] = spec.rows;
    j["cols"] = spec.cols;
    j["k"] = spec.rank;
    j["lambda"] = spec.lambda;
    j["noise_var"] = spec.noise_var;
    j["observed_fraction"] = spec.observed_fraction;
    j["observed"] = s.data.observed_count();
    j["seed"] = spec.seed;
    if (!o.deterministic) j["created_at"] = now_utc();
    write_json(dir / "manifest.json", j);
    out << "synth " << spec.rows << "x" << spec.cols << " written to " << dir.string() << '\n';
    return kExitOk;
}

int fail(std::ostream& err, const char* kind, const std::string& reason, int code) {
    std::string line = reason;
    for (char& c : line) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    err << "error[" << kind << "]: " << line << '\n';
    return code;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Bayesian nonnegative matrix factorization by Gibbs sampling", "bnmf"};
    app.require_subcommand(1);

    ScheduleFlags fit_flags, holdout_flags, sweep_flags, noise_flags, synth_flags;
    auto* fit = app.add_subcommand("fit", "Run one chain and write its trace");
    add_run_flags(fit, o, fit_flags, false);
    auto* holdout = app.add_subcommand("holdout", "Held-out prediction grid");
    add_run_flags(holdout, o, holdout_flags, true);
    auto* sweep = app.add_subcommand("sweep", "Training fit and factor statistics across K");
    add_run_flags(sweep, o, sweep_flags, true);
    auto* noise = app.add_subcommand("noise", "Noise-sensitivity grid");
    add_run_flags(noise, o, noise_flags, true);
    auto* synth = app.add_subcommand("synth", "Generate a synthetic matrix from the GEE model");
    synth->add_option("--rows", o.rows, "Rows M")->capture_default_str();
    synth->add_option("--cols", o.cols, "Columns N")->capture_default_str();
    synth->add_option("--k", o.ranks, "True latent dimension")->delimiter(',');
    synth->add_option("--lambda", o.synth_lambda, "Exponential rate of the true factors")
        ->capture_default_str();
    synth->add_option("--noise-var", o.noise_var, "Gaussian noise variance")->capture_default_str();
    synth->add_option("--observed-fraction", o.observed_fraction, "Fraction of observed cells")
        ->capture_default_str();
    synth->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    synth->add_option("--missing-token", o.missing_token, "Text written for unobserved cells")
        ->capture_default_str();
    synth->add_option("--out", o.out, "Output directory")->capture_default_str();
    synth->add_flag("--deterministic", o.deterministic, "Omit timestamps");

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.emplace_back("bnmf");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        return fail(err, "config", e.what(), kExitConfig);
    }

    try {
        if (*fit) {
            o.command = "fit";
            return cmd_fit(o, out);
        }
        if (*holdout) {
            o.command = "holdout";
            return cmd_holdout(o, out);
        }
        if (*sweep) {
            o.command = "sweep";
            return cmd_sweep(o, out);
        }
        if (*noise) {
            o.command = "noise";
            return cmd_noise(o, out);
        }
        o.command = "synth";
        return cmd_synth(o, out);
    } catch (const ConfigError& e) {
        return fail(err, "config", e.what(), kExitConfig);
    } catch (const ParameterError& e) {
        return fail(err, "config", e.what(), kExitConfig);
    } catch (const NumericalError& e) {
        return fail(err, "numerical", e.what(), kExitNumerical);
    } catch (const Error& e) {
        return fail(err, "data", e.what(), kExitData);
    }
}

} // namespace bnmf
