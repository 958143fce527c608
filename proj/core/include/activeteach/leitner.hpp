#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "activeteach/memory_model.hpp"

namespace activeteach {

/// Review delay for box k is delta_a * delta_b^k seconds.
struct LeitnerConfig {
    double delta_a = 4.0;
    double delta_b = 2.0;

    void validate() const;
    Seconds delay(std::uint32_t box) const;

    friend bool operator==(const LeitnerConfig&, const LeitnerConfig&) = default;
};

/// Box system over an item universe of size Q. Items are introduced in universe order.
struct LeitnerState {
    LeitnerConfig config;
    std::vector<std::optional<std::uint32_t>> box;            // unset until first presentation
    std::vector<Seconds> due;                                 // meaningful only for boxed items
    std::vector<std::optional<std::uint32_t>> waiting_since;  // step at which the item was first seen overdue
    ItemId next_new = 0;
    std::mt19937_64 rng;

    LeitnerState(std::uint32_t item_count, LeitnerConfig cfg, std::uint64_t seed);

    std::uint32_t item_count() const { return static_cast<std::uint32_t>(box.size()); }

    friend bool operator==(const LeitnerState&, const LeitnerState&) = default;
};

/**
 * Picks the item to present at `now` (global iteration index `step`).
 *
 * Among due items: longest time in the waiting queue, then smallest box, then a seeded random
 * draw. With nothing due, the next new item; with the universe exhausted, the earliest due item.
 * Marks newly overdue items as waiting.
 */
ItemId leitner_select(LeitnerState& state, Seconds now, std::uint32_t step);

/// Moves `item` between boxes after its presentation at `now` and reschedules it.
/// A first presentation always lands in box 1.
void leitner_update(LeitnerState& state, ItemId item, bool outcome, Seconds now);

}  // namespace activeteach
