#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bnmf/ingest.hpp"
#include "bnmf/random.hpp"

using namespace bnmf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("bnmf_ingest_" + std::to_string(std::hash<std::string>{}(std::to_string(::time(nullptr)))) +
                "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

fs::path write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

CsvTable parse(const std::string& text, CsvOptions opts = {}) {
    std::istringstream in(text);
    return read_csv_table(in, opts);
}

} // namespace

TEST_CASE("csv cells, missing tokens and blank cells") {
    const CsvTable t = parse("1,2\n3,NA\n");
    CHECK(t.values.rows() == 2);
    CHECK(t.values.cols() == 2);
    CHECK(t.values(0, 1) == 2.0);
    CHECK(t.mask == Mask::from_rows({{1, 1}, {1, 0}}));

    const CsvTable blank = parse("1,,3\n\n4,5,6\n");
    CHECK(blank.mask == Mask::from_rows({{1, 0, 1}, {1, 1, 1}}));

    CsvOptions opts;
    opts.missing_token = "?";
    opts.has_header = true;
    const CsvTable h = parse("a,b\r\n?,-2.5e1\r\n", opts);
    CHECK(h.mask == Mask::from_rows({{0, 1}}));
    CHECK(h.values(0, 1) == -25.0);
}

TEST_CASE("csv errors") {
    CHECK_THROWS_AS(parse(""), FormatError);
    CHECK_THROWS_AS(parse("\n\n"), FormatError);
    CHECK_THROWS_AS(parse("1,2\n3\n"), FormatError);
    try {
        parse("1,2\n3,x7\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.row() == 2);
        CHECK(e.col() == 2);
    }
    CHECK_THROWS_AS(parse("1,inf\n"), ParseError);
}

TEST_CASE("load_csv validates observed values") {
    TempDir dir;
    const auto ok = load_csv(write_file(dir.path / "ok.csv", "1,2\n3,NA\n"));
    CHECK(ok.observed_count() == 3);
    CHECK_THROWS_AS(load_csv(write_file(dir.path / "neg.csv", "1,-2\n")), DomainError);
    CHECK_THROWS_AS(load_csv(write_file(dir.path / "empty.csv", "")), FormatError);
    CHECK_THROWS_AS(load_csv(dir.path / "missing.csv"), FormatError);
}

TEST_CASE("a GDSC-shaped file keeps its observed fraction") {
    TempDir dir;
    const std::size_t rows = 707, cols = 139;
    const auto missing = static_cast<std::size_t>(std::llround(0.194 * rows * cols));
    std::vector<char> is_missing(rows * cols, 0);
    CounterRng rng(3);
    for (std::size_t placed = 0; placed < missing;) {
        const auto i = rng.uniform_below(rows * cols);
        if (!is_missing[i]) {
            is_missing[i] = 1;
            ++placed;
        }
    }
    std::ostringstream text;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (c) text << ',';
            if (is_missing[r * cols + c]) text << "NA";
            else text << format_double(4.0 * rng.uniform_open());
        }
        text << '\n';
    }
    const auto data = load_csv(write_file(dir.path / "gdsc.csv", text.str()));
    CHECK(data.rows() == rows);
    CHECK(data.cols() == cols);
    CHECK(static_cast<double>(data.observed_count()) / (rows * cols) == doctest::Approx(0.806).epsilon(1e-3));
}

TEST_CASE("mask files override the inferred mask") {
    TempDir dir;
    CsvTable t = parse("1,2\n3,NA\n");
    apply_mask(t, read_mask_csv(write_file(dir.path / "m.csv", "1,0\n1,0\n")));
    CHECK(t.mask == Mask::from_rows({{1, 0}, {1, 0}}));

    CsvTable t2 = parse("1,2\n3,NA\n");
    CHECK_THROWS_AS(apply_mask(t2, read_mask_csv(write_file(dir.path / "bad.csv", "1,1\n1,1\n"))), FormatError);
    CHECK_THROWS_AS(apply_mask(t2, read_mask_csv(write_file(dir.path / "shape.csv", "1,1\n"))), DimensionError);
    CHECK_THROWS_AS(read_mask_csv(write_file(dir.path / "two.csv", "1,2\n")), ParseError);
}

TEST_CASE("write then load is the identity on observed cells and mask") {
    TempDir dir;
    CounterRng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix v(6, 4);
        Mask m(6, 4);
        for (double& x : v.flat()) x = 1e3 * rng.uniform_open() * rng.uniform_open();
        for (auto& o : m.flat()) o = rng.uniform_open() < 0.7;
        m(0, 0) = 1;
        v(1, 1) = 0.1 + 0.2;
        const ObservedMatrix data(v, m);
        const auto path = dir.path / "round.csv";
        write_csv(path, data);
        const ObservedMatrix back = load_csv(path);
        CHECK(back.mask() == data.mask());
        for (std::size_t r = 0; r < 6; ++r)
            for (std::size_t c = 0; c < 4; ++c)
                if (data.observed(r, c)) CHECK(back.values()(r, c) == data.values()(r, c));
    }
}

TEST_CASE("preprocessing recipes") {
    const ObservedMatrix raw(Matrix::from_rows({{std::log(50.0), 10.0}, {0.35, 0.0}}));
    DatasetRecipe gdsc{RecipeKind::gdsc_ic50};
    const ObservedMatrix g = preprocess(raw, gdsc);
    CHECK(g.values()(0, 0) == 50.0);
    CHECK(g.values()(0, 1) == 100.0);
    CHECK(g.values()(1, 1) == 1.0);

    DatasetRecipe meth{RecipeKind::gene_body_meth};
    CHECK(preprocess(raw, meth).values()(1, 0) == 7.0);
    CHECK(preprocess(raw, DatasetRecipe{RecipeKind::raw}) == raw);

    // Half-way values round away from zero.
    const ObservedMatrix half(Matrix::from_rows({{0.125, 0.075}}));
    CHECK(preprocess(half, meth).values() == Matrix::from_rows({{3.0, 2.0}}));

    CHECK(parse_recipe("gdsc") == RecipeKind::gdsc_ic50);
    CHECK(parse_recipe("meth") == RecipeKind::gene_body_meth);
    CHECK(parse_recipe("raw") == RecipeKind::raw);
    CHECK_THROWS_AS(parse_recipe("ic50"), ConfigError);
}

TEST_CASE("GDSC output is integral, capped, and keeps mask and shape") {
    CounterRng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        CsvTable t{Matrix(5, 7), Mask(5, 7)};
        for (double& x : t.values.flat()) x = 1000.0 * (rng.uniform_open() - 0.5);
        for (auto& o : t.mask.flat()) o = rng.uniform_open() < 0.8;
        t.mask(0, 0) = 1;
        const ObservedMatrix out = preprocess(t, DatasetRecipe{RecipeKind::gdsc_ic50});
        CHECK(out.mask() == t.mask);
        CHECK(out.rows() == 5);
        CHECK(out.cols() == 7);
        for (std::size_t r = 0; r < 5; ++r) {
            for (std::size_t c = 0; c < 7; ++c) {
                if (!out.observed(r, c)) continue;
                const double v = out.values()(r, c);
                CHECK(v == std::round(v));
                CHECK(v >= 0.0);
                CHECK(v <= 100.0);
            }
        }
    }
}

TEST_CASE("synthetic GEE data") {
    SynthSpec clean;
    clean.noise_var = 0.0;
    const SyntheticData s = synth_gee(clean);
    CHECK(masked_mse(s.data, reconstruct(s.truth)) == 0.0);
    CHECK(s.true_sigma2 == 0.0);

    SynthSpec spec;
    spec.seed = 8;
    const SyntheticData a = synth_gee(spec);
    const SyntheticData b = synth_gee(spec);
    CHECK(a.data == b.data);
    CHECK(a.truth == b.truth);

    // K·(1/λ)² = 500 for the default spec.
    double sum = 0.0;
    for (double v : a.data.values().flat()) sum += v;
    CHECK(sum / a.data.values().size() == doctest::Approx(500.0).epsilon(0.2));

    SynthSpec partial;
    partial.observed_fraction = 0.3;
    CHECK(synth_gee(partial).data.observed_count() == 270);
    partial.observed_fraction = 0.0;
    CHECK_THROWS_AS(synth_gee(partial), ConfigError);
}
