#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bnmf/evaluate.hpp"
#include "bnmf/gibbs.hpp"
#include "bnmf/ingest.hpp"
#include "bnmf/random.hpp"

using namespace bnmf;

namespace {

Trace trace_with_prediction(Matrix pred) {
    Trace t;
    t.posterior_mean_prediction = std::move(pred);
    return t;
}

Trace trace_with_snapshots(const std::vector<Matrix>& ws) {
    Trace t;
    std::uint64_t it = 1;
    for (const Matrix& w : ws) {
        t.snapshots.push_back(Snapshot{it++, FactorPair(w, Matrix(w.cols(), 1, 1.0))});
    }
    return t;
}

ObservedMatrix scaled(const ObservedMatrix& d, double c) {
    Matrix v = d.values();
    for (double& x : v.flat()) x *= c;
    return ObservedMatrix(v, d.mask());
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

} // namespace

TEST_CASE("holdout split is a disjoint cover of the observed cells") {
    CounterRng rng(1);
    for (int trial = 0; trial < 40; ++trial) {
        Matrix values(4, 5, 1.0);
        Mask mask(4, 5);
        for (auto& m : mask.flat()) m = rng.uniform_open() < 0.7;
        mask(0, 0) = 1;
        mask(3, 4) = 1;
        const ObservedMatrix data(values, mask);
        for (double f : {0.0, 0.1, 0.25, 0.5, 0.6, 0.8}) {
            const auto split = holdout_split(data, SplitSpec{f, 100u + trial});
            std::size_t test_count = 0;
            for (std::size_t r = 0; r < 4; ++r) {
                for (std::size_t c = 0; c < 5; ++c) {
                    const bool tr = split.train.observed(r, c);
                    const bool te = split.test.observed(r, c);
                    CHECK_FALSE((tr && te));
                    CHECK((tr || te) == data.observed(r, c));
                    test_count += te;
                }
            }
            CHECK(test_count == static_cast<std::size_t>(std::floor(f * data.observed_count())));
        }
    }
}

TEST_CASE("holdout split examples") {
    const ObservedMatrix data(Matrix(2, 5, 3.0));
    const auto none = holdout_split(data, SplitSpec{0.0, 1});
    CHECK(none.train == data);
    CHECK(none.test.observed_count() == 0);

    const auto half = holdout_split(data, SplitSpec{0.5, 1});
    CHECK(half.test.observed_count() == 5);
    CHECK(half.train.observed_count() == 5);
    CHECK(holdout_split(data, SplitSpec{0.5, 1}).test == half.test);

    CHECK_THROWS_AS(holdout_split(data, SplitSpec{1.0, 1}), ConfigError);
    CHECK_THROWS_AS(holdout_split(data, SplitSpec{-0.1, 1}), ConfigError);
    // One observed cell with fraction 0.99 keeps it in train.
    const ObservedMatrix one(Matrix(1, 2, 1.0), Mask::from_rows({{1, 0}}));
    CHECK(holdout_split(one, SplitSpec{0.99, 1}).train.observed_count() == 1);
}

TEST_CASE("independent splits overlap by the fraction itself") {
    const ObservedMatrix data(Matrix(707, 139, 1.0));
    const auto a = holdout_split(data, SplitSpec{0.6, 11});
    const auto b = holdout_split(data, SplitSpec{0.6, 12});
    std::size_t both = 0;
    for (std::size_t i = 0; i < a.test.mask().size(); ++i) {
        both += a.test.mask().flat()[i] && b.test.mask().flat()[i];
    }
    const double overlap = static_cast<double>(both) / static_cast<double>(a.test.observed_count());
    CHECK(overlap == doctest::Approx(0.6).epsilon(0.02));
}

TEST_CASE("evaluate_prediction") {
    const ObservedMatrix test(Matrix::from_rows({{3, 3}, {9, 3}}), Mask::from_rows({{1, 1}, {0, 1}}));
    CHECK(evaluate_prediction(trace_with_prediction(test.values()), test) == 0.0);
    CHECK(evaluate_prediction(trace_with_prediction(Matrix(2, 2, 1.0)), test) == 4.0);
    const auto empty = ObservedMatrix::possibly_empty(Matrix(2, 2, 1.0), Mask(2, 2, 0));
    CHECK_THROWS_AS(evaluate_prediction(trace_with_prediction(Matrix(2, 2, 1.0)), empty), EmptyMaskError);
}

TEST_CASE("factor statistics") {
    CHECK(factor_sparsity(Matrix::from_rows({{0.05, 0.2}, {0.0, 1.0}}), 0.1) == 0.5);
    CHECK(factor_sparsity(Matrix(3, 3, 0.0)) == 1.0);
    CHECK(factor_sparsity(Matrix(3, 3, 0.1)) == 0.0);
    CHECK(factor_mean(Matrix::from_rows({{1, 3}})) == 2.0);
    CHECK(factor_mean(Matrix(2, 2, 0.0)) == 0.0);

    const Trace t = trace_with_snapshots({Matrix(1, 1, 0.0), Matrix(1, 1, 2.0)});
    CHECK(factor_mean(t) == 1.0);
    CHECK(factor_sparsity(t) == 0.5);
}

TEST_CASE("factor_sparsity is nondecreasing in the threshold") {
    CounterRng rng(2);
    Matrix w(20, 10);
    for (double& v : w.flat()) v = 2.0 * rng.uniform_open() * rng.uniform_open();
    double prev = 0.0;
    for (double thr = 0.001; thr < 3.0; thr *= 1.3) {
        const double s = factor_sparsity(w, thr);
        CHECK(s >= prev);
        CHECK(s <= 1.0);
        prev = s;
    }
}

TEST_CASE("add_noise") {
    Matrix v(100, 100);
    for (std::size_t i = 0; i < v.size(); ++i) v.flat()[i] = (i % 2 == 0) ? 98.0 : 102.0;
    const ObservedMatrix data(v);
    CHECK(observed_variance(data) == 4.0);

    CHECK(add_noise(data, 0.0, 5) == data);

    const ObservedMatrix noisy = add_noise(data, 1.0, 5);
    CHECK(noisy.mask() == data.mask());
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double e = noisy.values().flat()[i] - v.flat()[i];
        s1 += e;
        s2 += e * e;
    }
    const double n = static_cast<double>(v.size());
    const double var = s2 / n - (s1 / n) * (s1 / n);
    CHECK(std::abs(var - 4.0) < 3.0 * 4.0 * std::sqrt(2.0 / n));
    CHECK(add_noise(data, 1.0, 5) == noisy);

    // Small values get clamped at zero, unobserved cells stay untouched.
    const ObservedMatrix tiny(Matrix::from_rows({{0.0, 1.0, 7.0}}), Mask::from_rows({{1, 1, 0}}));
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const ObservedMatrix out = add_noise(tiny, 5.0, seed);
        CHECK(out.values()(0, 0) >= 0.0);
        CHECK(out.values()(0, 1) >= 0.0);
        CHECK(out.values()(0, 2) == 7.0);
    }
}

TEST_CASE("variance_to_mse") {
    CHECK(variance_to_mse(10.0, 5.0) == 2.0);
    CHECK(variance_to_mse(3.0, 3.0) == 1.0);
    CHECK(variance_to_mse(3.0, 1.5) == 2.0 * variance_to_mse(3.0, 3.0));
    CHECK_THROWS_AS(variance_to_mse(3.0, 0.0), NumericalError);
}

TEST_CASE("scaling the data grows the quadratic-prior factors more than the squared-L1 ones") {
    // 50×40 GEE-generated matrix with entries of mean ≈5; five seeded runs.
    std::vector<double> gl12_ratio, gl22_growth;
    for (std::uint64_t r = 0; r < 5; ++r) {
        SynthSpec spec;
        spec.rows = 50;
        spec.cols = 40;
        spec.rank = 5;
        spec.lambda = 1.0;
        spec.noise_var = 1.0;
        spec.seed = 100 + r;
        const ObservedMatrix data = synth_gee(spec).data;
        const ObservedMatrix big = scaled(data, 100.0);
        const Schedule sched;
        const HyperParams h;
        const double gl12_small = factor_mean(run_chain(data, 10, ModelKind::gl12, h, sched, 7 + r));
        const double gl12_big = factor_mean(run_chain(big, 10, ModelKind::gl12, h, sched, 7 + r));
        const double gl22_small = factor_mean(run_chain(data, 10, ModelKind::gl22, h, sched, 7 + r));
        const double gl22_big = factor_mean(run_chain(big, 10, ModelKind::gl22, h, sched, 7 + r));
        gl12_ratio.push_back(gl12_big / (10.0 * gl12_small));
        gl22_growth.push_back(gl22_big / gl22_small);
    }
    CHECK(median(gl12_ratio) < 1.0);
    CHECK(median(gl22_growth) >= 5.0);
    CHECK(median(gl22_growth) <= 20.0);
}
