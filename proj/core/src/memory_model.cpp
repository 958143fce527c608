#include "activeteach/memory_model.hpp"

#include <cmath>
#include <string>

#include "activeteach/errors.hpp"

namespace activeteach {

ParamPoint ParamPoint::checked(double alpha, double beta) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw ConfigError("alpha must be finite and >= 0, got " + std::to_string(alpha));
    }
    if (!(beta > 0.0 && beta < 1.0)) {
        throw ConfigError("beta must lie in (0, 1), got " + std::to_string(beta));
    }
    return ParamPoint{alpha, beta};
}

std::string_view to_string(ModelKind kind) {
    return kind == ModelKind::EF ? "ef" : "isef";
}

ModelKind parse_model_kind(std::string_view text) {
    if (text == "ef" || text == "EF") return ModelKind::EF;
    if (text == "isef" || text == "ISEF") return ModelKind::ISEF;
    throw ConfigError("unknown model kind '" + std::string(text) + "' (expected ef or isef)");
}

double forgetting_rate(const ParamPoint& theta, std::uint32_t presentations) {
    if (presentations <= 1) return theta.alpha;
    return theta.alpha * std::pow(1.0 - theta.beta, static_cast<double>(presentations - 1));
}

double recall_probability(const ItemState& state, const ParamPoint& theta, Seconds now) {
    if (!state.seen() || !state.last_presentation) {
        throw UnseenItemError("recall is undefined before the first presentation");
    }
    const Seconds elapsed = now - *state.last_presentation;
    if (elapsed < 0.0) {
        throw TimeOrderError("recall queried at " + std::to_string(now) +
                             " before last presentation " +
                             std::to_string(*state.last_presentation));
    }
    return std::exp(-forgetting_rate(theta, state.presentations) * elapsed);
}

ItemState record_presentation(ItemState state, Seconds now) {
    if (state.last_presentation && now < *state.last_presentation) {
        throw TimeOrderError("presentation at " + std::to_string(now) + " after one at " +
                             std::to_string(*state.last_presentation));
    }
    ++state.presentations;
    state.last_presentation = now;
    return state;
}

}  // namespace activeteach
