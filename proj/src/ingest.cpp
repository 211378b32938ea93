#include "bnmf/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "bnmf/distributions.hpp"
#include "bnmf/random.hpp"

namespace bnmf {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            return cells;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open '" + path.string() + "'");
    }
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot write '" + path.string() + "'");
    }
    return out;
}

double round_half_away(double v) { return std::round(v); }

double apply_recipe(double v, const DatasetRecipe& recipe) {
    switch (recipe.kind) {
    case RecipeKind::raw:
        return v;
    case RecipeKind::gdsc_ic50: {
        if (recipe.cap_before_exp) {
            v = std::min(v, std::log(recipe.cap_value));
        }
        // exp overflows to +inf for huge inputs; the cap brings it back.
        const double natural = std::min(std::exp(v), recipe.cap_value);
        return round_half_away(natural);
    }
    case RecipeKind::gene_body_meth:
        return round_half_away(v * recipe.scale_factor);
    }
    return v;
}

} // namespace

std::string_view recipe_name(RecipeKind kind) noexcept {
    switch (kind) {
    case RecipeKind::raw:
        return "raw";
    case RecipeKind::gdsc_ic50:
        return "gdsc";
    case RecipeKind::gene_body_meth:
        return "meth";
    }
    return "unknown";
}

RecipeKind parse_recipe(std::string_view name) {
    for (RecipeKind k : {RecipeKind::raw, RecipeKind::gdsc_ic50, RecipeKind::gene_body_meth}) {
        if (recipe_name(k) == name) return k;
    }
    throw ConfigError("unknown recipe '" + std::string(name) + "' (expected gdsc, meth or raw)");
}

void DatasetRecipe::validate() const {
    if (!(cap_value > 0.0) || !std::isfinite(cap_value)) {
        throw ConfigError("recipe cap value must be positive");
    }
    if (!(scale_factor > 0.0) || !std::isfinite(scale_factor)) {
        throw ConfigError("recipe scale factor must be positive");
    }
}

CsvTable read_csv_table(std::istream& in, const CsvOptions& options) {
    std::vector<double> values;
    std::vector<std::uint8_t> mask;
    std::size_t width = 0;
    std::size_t rows = 0;
    std::size_t line_no = 0;
    bool header_pending = options.has_header;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        if (header_pending) {
            header_pending = false;
            continue;
        }
        const auto cells = split_commas(line);
        if (rows == 0) {
            width = cells.size();
        } else if (cells.size() != width) {
            throw FormatError("ragged row at line " + std::to_string(line_no) + ": expected " +
                              std::to_string(width) + " cells, found " +
                              std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string_view cell = cells[c];
            if (cell.empty() || cell == options.missing_token) {
                values.push_back(0.0);
                mask.push_back(0);
                continue;
            }
            double v = 0.0;
            const char* first = cell.data();
            const char* last = cell.data() + cell.size();
            if (*first == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
                throw ParseError("non-numeric cell '" + std::string(cell) + "' at row " +
                                     std::to_string(rows + 1) + ", column " + std::to_string(c + 1),
                                 rows + 1, c + 1);
            }
            values.push_back(v);
            mask.push_back(1);
        }
        ++rows;
    }
    if (rows == 0) {
        throw FormatError("no data rows in CSV input");
    }
    return CsvTable{Matrix(rows, width, std::move(values)), Mask(rows, width, std::move(mask))};
}

CsvTable read_csv_table(const std::filesystem::path& path, const CsvOptions& options) {
    auto in = open_input(path);
    return read_csv_table(in, options);
}

Mask read_mask_csv(const std::filesystem::path& path, bool has_header) {
    auto in = open_input(path);
    CsvOptions opts;
    opts.has_header = has_header;
    opts.missing_token = "";
    const CsvTable t = read_csv_table(in, opts);
    Mask mask(t.values.rows(), t.values.cols(), 0);
    for (std::size_t r = 0; r < mask.rows(); ++r) {
        for (std::size_t c = 0; c < mask.cols(); ++c) {
            const double v = t.values(r, c);
            if (t.mask(r, c) == 0 || (v != 0.0 && v != 1.0)) {
                throw ParseError("mask cell at row " + std::to_string(r + 1) + ", column " +
                                     std::to_string(c + 1) + " is not 0 or 1",
                                 r + 1, c + 1);
            }
            mask(r, c) = v == 1.0 ? 1 : 0;
        }
    }
    return mask;
}

void apply_mask(CsvTable& table, const Mask& mask) {
    if (!table.values.same_shape(mask)) {
        throw DimensionError("mask file shape does not match data shape");
    }
    for (std::size_t r = 0; r < mask.rows(); ++r) {
        for (std::size_t c = 0; c < mask.cols(); ++c) {
            if (mask(r, c) != 0 && table.mask(r, c) == 0) {
                throw FormatError("mask marks missing cell at row " + std::to_string(r + 1) +
                                  ", column " + std::to_string(c + 1) + " as observed");
            }
        }
    }
    table.mask = mask;
}

ObservedMatrix load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    CsvTable t = read_csv_table(path, options);
    return ObservedMatrix(std::move(t.values), std::move(t.mask));
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const ObservedMatrix& data, std::string_view missing_token) {
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t c = 0; c < data.cols(); ++c) {
            if (c > 0) out << ',';
            if (data.observed(r, c)) {
                out << format_double(data.values()(r, c));
            } else {
                out << missing_token;
            }
        }
        out << '\n';
    }
}

void write_csv(const std::filesystem::path& path, const ObservedMatrix& data,
               std::string_view missing_token) {
    auto out = open_output(path);
    write_csv(out, data, missing_token);
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c > 0) out << ',';
            out << format_double(m(r, c));
        }
        out << '\n';
    }
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
    auto out = open_output(path);
    write_matrix_csv(out, m);
}

ObservedMatrix preprocess(const CsvTable& table, const DatasetRecipe& recipe) {
    recipe.validate();
    Matrix out = table.values;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        for (std::size_t c = 0; c < out.cols(); ++c) {
            if (table.mask(r, c) != 0) out(r, c) = apply_recipe(out(r, c), recipe);
        }
    }
    return ObservedMatrix(std::move(out), table.mask);
}

ObservedMatrix preprocess(const ObservedMatrix& data, const DatasetRecipe& recipe) {
    return preprocess(CsvTable{data.values(), data.mask()}, recipe);
}

SyntheticData synth_gee(const SynthSpec& spec) {
    if (spec.rows == 0 || spec.cols == 0 || spec.rank == 0) {
        throw ConfigError("synthetic dimensions must be positive");
    }
    if (!(spec.lambda > 0.0) || !std::isfinite(spec.lambda)) {
        throw ConfigError("synthetic factor rate must be positive");
    }
    if (!(spec.noise_var >= 0.0) || !std::isfinite(spec.noise_var)) {
        throw ConfigError("synthetic noise variance must be nonnegative");
    }
    if (!(spec.observed_fraction > 0.0 && spec.observed_fraction <= 1.0)) {
        throw ConfigError("observed fraction must lie in (0, 1]");
    }

    CounterRng rng(spec.seed, 0);
    Matrix w(spec.rows, spec.rank);
    Matrix z(spec.rank, spec.cols);
    for (double& v : w.flat()) v = sample_exponential(spec.lambda, rng);
    for (double& v : z.flat()) v = sample_exponential(spec.lambda, rng);
    FactorPair truth(std::move(w), std::move(z));

    Matrix a = reconstruct(truth);
    const double sd = std::sqrt(spec.noise_var);
    for (double& v : a.flat()) {
        const double x = v + sd * rng.standard_normal();
        v = x > 0.0 ? x : 0.0;
    }

    const std::size_t cells = spec.rows * spec.cols;
    const auto wanted = static_cast<std::size_t>(
        std::llround(spec.observed_fraction * static_cast<double>(cells)));
    const std::size_t n_obs = std::clamp<std::size_t>(wanted, 1, cells);
    Mask mask(spec.rows, spec.cols, 0);
    if (n_obs == cells) {
        for (auto& o : mask.flat()) o = 1;
    } else {
        std::vector<std::size_t> idx(cells);
        for (std::size_t i = 0; i < cells; ++i) idx[i] = i;
        for (std::size_t i = 0; i < n_obs; ++i) {
            const std::size_t j = i + rng.uniform_below(cells - i);
            std::swap(idx[i], idx[j]);
            mask.flat()[idx[i]] = 1;
        }
    }
    return SyntheticData{ObservedMatrix(std::move(a), std::move(mask)), std::move(truth),
                         spec.noise_var};
}

} // namespace bnmf
