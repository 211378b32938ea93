#include "bnmf/model.hpp"

#include <cmath>
#include <string>

namespace bnmf {

std::string_view model_name(ModelKind model) noexcept {
    switch (model) {
    case ModelKind::gee:
        return "gee";
    case ModelKind::gl12:
        return "gl12";
    case ModelKind::gl22:
        return "gl22";
    case ModelKind::glinf:
        return "glinf";
    case ModelKind::gl2inf:
        return "gl2inf";
    }
    return "unknown";
}

ModelKind parse_model(std::string_view name) {
    for (ModelKind m : kAllModels) {
        if (model_name(m) == name) {
            return m;
        }
    }
    throw ConfigError("unknown model '" + std::string(name) +
                      "' (expected gee, gl12, gl22, glinf or gl2inf)");
}

void HyperParams::validate() const {
    auto rate_ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!rate_ok(lambda_w) || !rate_ok(lambda_z)) {
        throw ParameterError("prior rates must be finite and nonnegative");
    }
    if (!positive(alpha_sigma) || !positive(beta_sigma)) {
        throw ParameterError("inverse-Gamma shape and scale must be positive");
    }
}

} // namespace bnmf
