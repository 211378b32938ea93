#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "bnmf/matrix.hpp"
#include "bnmf/random.hpp"

namespace bnmf {

/// The five factor priors.
enum class ModelKind : std::uint8_t {
    gee,    ///< entrywise exponential (L1)
    gl12,   ///< squared L1 per row
    gl22,   ///< squared L2 per row
    glinf,  ///< row maximum (L∞)
    gl2inf, ///< squared L2 plus row maximum
};

inline constexpr std::array<ModelKind, 5> kAllModels = {
    ModelKind::gee, ModelKind::gl12, ModelKind::gl22, ModelKind::glinf, ModelKind::gl2inf};

/// CLI spelling: gee, gl12, gl22, glinf, gl2inf.
std::string_view model_name(ModelKind model) noexcept;

/// Inverse of model_name; throws ConfigError on unknown names.
ModelKind parse_model(std::string_view name);

/// Prior hyperparameters shared by every entry of W (lambda_w) and Z (lambda_z).
struct HyperParams {
    double lambda_w = 0.1;
    double lambda_z = 0.1;
    double alpha_sigma = 1.0;
    double beta_sigma = 1.0;

    /// Rates must be finite and ≥ 0 (0 switches the factor prior off, which
    /// is useful for comparisons but cannot seed a chain); the inverse-Gamma
    /// shape and scale must be strictly positive.
    void validate() const;
};

/// Current state of one Gibbs chain. The rng fully determines all future draws.
struct ChainState {
    FactorPair factors;
    double sigma2 = 1.0;
    std::uint64_t iteration = 0;
    CounterRng rng;

    friend bool operator==(const ChainState&, const ChainState&) = default;
};

} // namespace bnmf
