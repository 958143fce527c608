#include "activeteach/leitner.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "activeteach/errors.hpp"

namespace activeteach {

void LeitnerConfig::validate() const {
    if (!(delta_a > 0.0)) throw ConfigError("leitner delta_a must be > 0");
    if (!(delta_b > 1.0)) throw ConfigError("leitner delta_b must be > 1");
}

Seconds LeitnerConfig::delay(std::uint32_t box) const {
    return delta_a * std::pow(delta_b, static_cast<double>(box));
}

LeitnerState::LeitnerState(std::uint32_t item_count, LeitnerConfig cfg, std::uint64_t seed)
    : config(cfg), box(item_count), due(item_count, 0.0), waiting_since(item_count), rng(seed) {
    config.validate();
    if (item_count == 0) throw ConfigError("leitner teacher needs at least one item");
}

ItemId leitner_select(LeitnerState& state, Seconds now, std::uint32_t step) {
    const std::uint32_t q = state.item_count();
    if (q == 0) throw ConfigError("item universe is empty");

    std::vector<ItemId> best;
    std::uint32_t best_wait = 0;
    std::uint32_t best_box = 0;
    for (ItemId item = 0; item < q; ++item) {
        if (!state.box[item] || state.due[item] > now) continue;
        if (!state.waiting_since[item]) state.waiting_since[item] = step;
        const std::uint32_t wait = step - *state.waiting_since[item];
        const std::uint32_t k = *state.box[item];
        if (best.empty() || wait > best_wait || (wait == best_wait && k < best_box)) {
            best.assign(1, item);
            best_wait = wait;
            best_box = k;
        } else if (wait == best_wait && k == best_box) {
            best.push_back(item);
        }
    }
    if (best.size() == 1) return best.front();
    if (best.size() > 1) {
        std::uniform_int_distribution<std::size_t> pick(0, best.size() - 1);
        return best[pick(state.rng)];
    }
    if (state.next_new < q) return state.next_new;

    ItemId earliest = 0;
    Seconds earliest_due = std::numeric_limits<Seconds>::infinity();
    for (ItemId item = 0; item < q; ++item) {
        if (state.box[item] && state.due[item] < earliest_due) {
            earliest_due = state.due[item];
            earliest = item;
        }
    }
    return earliest;
}

void leitner_update(LeitnerState& state, ItemId item, bool outcome, Seconds now) {
    if (item >= state.item_count()) {
        throw ConfigError("item " + std::to_string(item) + " outside the universe");
    }
    auto& k = state.box[item];
    if (!k) {
        k = 1;
    } else if (outcome) {
        ++*k;
    } else {
        k = *k > 0 ? *k - 1 : 0;
    }
    state.due[item] = now + state.config.delay(*k);
    state.waiting_since[item].reset();
    while (state.next_new < state.item_count() && state.box[state.next_new]) ++state.next_new;
}

}  // namespace activeteach
