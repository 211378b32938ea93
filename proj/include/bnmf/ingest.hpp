#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "bnmf/matrix.hpp"

namespace bnmf {

enum class RecipeKind : std::uint8_t {
    raw,            ///< identity
    gdsc_ic50,      ///< exp, cap, round to integer
    gene_body_meth, ///< scale, round to integer
};

/// CLI spelling: raw, gdsc, meth.
std::string_view recipe_name(RecipeKind kind) noexcept;
RecipeKind parse_recipe(std::string_view name);

/// Preprocessing applied to a loaded table before fitting.
struct DatasetRecipe {
    RecipeKind kind = RecipeKind::raw;
    double cap_value = 100.0;
    double scale_factor = 20.0;
    /// GDSC only: cap the log-scale value at log(cap_value) before exp rather
    /// than capping after. Both orders give the same result for finite input;
    /// the flag exists because the published description is ambiguous.
    bool cap_before_exp = false;

    void validate() const;
};

struct CsvOptions {
    std::string missing_token = "NA";
    bool has_header = false;
};

/// Parsed numeric table. Unlike ObservedMatrix, values may be negative
/// (log-scale inputs) until a recipe has been applied.
struct CsvTable {
    Matrix values;
    Mask mask;
};

/// Parses comma-separated numbers. Empty cells and cells equal to
/// `missing_token` become mask 0. Blank lines are skipped.
///
/// Throws FormatError on empty input or ragged rows, ParseError (1-based
/// row/column in the message) on any other non-numeric cell.
CsvTable read_csv_table(std::istream& in, const CsvOptions& options = {});
CsvTable read_csv_table(const std::filesystem::path& path, const CsvOptions& options = {});

/// 0/1 mask file of the same layout; replaces the inferred mask of a table.
Mask read_mask_csv(const std::filesystem::path& path, bool has_header = false);
void apply_mask(CsvTable& table, const Mask& mask);

/// read_csv_table then validation as ObservedMatrix (finite, ≥ 0, non-empty).
ObservedMatrix load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Writes observed values in shortest round-trip form; unobserved cells are
/// written as `missing_token`.
void write_csv(std::ostream& out, const ObservedMatrix& data, std::string_view missing_token = "NA");
void write_csv(const std::filesystem::path& path, const ObservedMatrix& data,
               std::string_view missing_token = "NA");

/// Writes every cell of a dense matrix.
void write_matrix_csv(std::ostream& out, const Matrix& m);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

/// Applies the recipe to observed cells; the mask and shape never change.
/// Integer casting rounds half away from zero.
ObservedMatrix preprocess(const CsvTable& table, const DatasetRecipe& recipe);
ObservedMatrix preprocess(const ObservedMatrix& data, const DatasetRecipe& recipe);

struct SynthSpec {
    std::size_t rows = 30;
    std::size_t cols = 30;
    std::size_t rank = 5;
    double lambda = 0.1;
    double noise_var = 1.0;
    double observed_fraction = 1.0;
    std::uint64_t seed = 0;
};

struct SyntheticData {
    ObservedMatrix data;
    FactorPair truth;
    double true_sigma2;
};

/// Draws W, Z entrywise from Exp(lambda) and sets A = WZ + N(0, noise_var),
/// clamped at 0. Exactly max(1, round(fraction·M·N)) cells are observed.
///
/// Stream order: W row-major, Z row-major, one normal per cell row-major,
/// then the mask permutation.
SyntheticData synth_gee(const SynthSpec& spec);

} // namespace bnmf
