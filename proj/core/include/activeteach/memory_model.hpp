#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace activeteach {

/// Wall-clock time in seconds. Teaching iterations and day-long breaks share this unit.
using Seconds = double;

/// Position of an item in a teacher's item universe (0 .. Q-1, universe order).
using ItemId = std::uint32_t;

/**
 * Exponential-forgetting parameters.
 *
 * alpha is the initial forgetting rate (1/s), beta the multiplicative reduction of that
 * rate brought by each additional presentation.
 */
struct ParamPoint {
    double alpha = 0.0;
    double beta = 0.5;

    /// Throws ConfigError unless alpha >= 0 and 0 < beta < 1.
    static ParamPoint checked(double alpha, double beta);

    friend bool operator==(const ParamPoint&, const ParamPoint&) = default;
};

enum class ModelKind { EF, ISEF };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

/// Presentation history of one item, summarised to what the forgetting law needs.
struct ItemState {
    std::uint32_t presentations = 0;
    std::optional<Seconds> last_presentation;

    bool seen() const { return presentations > 0; }

    friend bool operator==(const ItemState&, const ItemState&) = default;
};

/// alpha * (1 - beta)^(n - 1); the decay rate after n presentations.
double forgetting_rate(const ParamPoint& theta, std::uint32_t presentations);

/**
 * Probability that the item is recalled at `now`:
 * exp(-alpha * (1 - beta)^(n - 1) * (now - last_presentation)).
 *
 * Throws UnseenItemError for an item with no presentations and TimeOrderError when
 * `now` precedes the last presentation.
 */
double recall_probability(const ItemState& state, const ParamPoint& theta, Seconds now);

/// Returns `state` with one more presentation at `now`. Throws TimeOrderError if `now`
/// precedes the previous presentation.
ItemState record_presentation(ItemState state, Seconds now);

}  // namespace activeteach
