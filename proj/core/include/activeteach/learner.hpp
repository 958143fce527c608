#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include "activeteach/leitner.hpp"
#include "activeteach/memory_model.hpp"
#include "activeteach/schedule.hpp"

namespace activeteach {

/// Artificial learner following exponential forgetting with known parameters.
struct LearnerSpec {
    ModelKind model = ModelKind::EF;
    std::vector<ParamPoint> params;  // one point (EF) or one per item (ISEF)
    std::uint64_t rng_seed = 0;

    const ParamPoint& params_for(ItemId item) const;
    /// Throws ConfigError if ISEF params do not cover `item_count` items.
    void validate(std::uint32_t item_count) const;
};

/// Bernoulli draw at the learner's true recall probability. A first presentation reveals the
/// answer and returns success without consuming randomness.
bool simulate_learner_response(const LearnerSpec& spec, std::mt19937_64& rng, ItemId item,
                               const ItemState& state, Seconds now);

/**
 * How artificial learners are drawn. Parameters come from a grid_points x grid_points Cartesian
 * product (log-spaced alpha, linear beta) within the bounds. EF learners take one cell, ISEF
 * learners one cell per item.
 */
struct PopulationConfig {
    double alpha_low = 2e-7;
    double alpha_high = 0.025;
    double beta_low = 0.0001;
    double beta_high = 0.9999;
    std::uint32_t grid_points = 20;
    /// Keep only cells (and learners) a Leitner teacher brings to >= 1 learned item.
    bool require_leitner_learning = true;
    std::uint32_t max_attempts = 10000;

    void validate() const;
};

/// Deterministic engine for (base seed, stream tag, index).
std::mt19937_64 make_rng(std::uint64_t base_seed, std::uint64_t stream, std::uint64_t index);

/// Every cell of the population grid, alpha-major.
std::vector<ParamPoint> population_cells(const PopulationConfig& population);

/**
 * Cells an EF learner can learn from: with `require_leitner_learning`, those for which a Leitner
 * run over `item_count` items ends with at least one learned item. Throws ConfigError when none
 * qualifies.
 */
std::vector<ParamPoint> viable_cells(const PopulationConfig& population, std::uint32_t item_count,
                                     const Schedule& schedule, const LeitnerConfig& leitner,
                                     double rho, std::uint64_t seed);

/// Draws a learner uniformly over `cells`, without the learner-level Leitner filter.
LearnerSpec draw_learner(std::span<const ParamPoint> cells, ModelKind model,
                         std::uint32_t item_count, std::mt19937_64& rng);

/// Items a Leitner teacher gets to recall >= rho at evaluation for this learner.
std::uint32_t leitner_items_learned(const LearnerSpec& spec, std::uint32_t item_count,
                                    const Schedule& schedule, const LeitnerConfig& leitner,
                                    double rho);

}  // namespace activeteach
