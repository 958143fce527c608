#include "activeteach/learner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "activeteach/errors.hpp"
#include "activeteach/teacher.hpp"

namespace activeteach {

const ParamPoint& LearnerSpec::params_for(ItemId item) const {
    if (model == ModelKind::EF) return params.front();
    return params.at(item);
}

void LearnerSpec::validate(std::uint32_t item_count) const {
    if (params.empty()) throw ConfigError("learner has no parameters");
    if (model == ModelKind::ISEF && params.size() < item_count) {
        throw ConfigError("item-specific learner covers " + std::to_string(params.size()) +
                          " of " + std::to_string(item_count) + " items");
    }
    for (const auto& p : params) (void)ParamPoint::checked(p.alpha, p.beta);
}

bool simulate_learner_response(const LearnerSpec& spec, std::mt19937_64& rng, ItemId item,
                               const ItemState& state, Seconds now) {
    if (!state.seen()) return true;
    const double p = recall_probability(state, spec.params_for(item), now);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    return unit(rng) < p;
}

void PopulationConfig::validate() const {
    if (!(alpha_low > 0.0 && alpha_high >= alpha_low)) {
        throw ConfigError("population alpha bounds must satisfy 0 < low <= high");
    }
    if (!(beta_low > 0.0 && beta_high < 1.0 && beta_low <= beta_high)) {
        throw ConfigError("population beta bounds must satisfy 0 < low <= high < 1");
    }
    if (grid_points < 2) throw ConfigError("population grid_points must be >= 2");
    if (max_attempts == 0) throw ConfigError("max_attempts must be >= 1");
}

std::mt19937_64 make_rng(std::uint64_t base_seed, std::uint64_t stream, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

std::vector<ParamPoint> population_cells(const PopulationConfig& population) {
    population.validate();
    const std::uint32_t k = population.grid_points;
    const double la = std::log(population.alpha_low);
    const double lb = std::log(population.alpha_high);
    std::vector<ParamPoint> cells;
    cells.reserve(static_cast<std::size_t>(k) * k);
    // Endpoints are pinned so the bounds are hit exactly.
    auto alpha_at = [&](std::uint32_t i) {
        if (i == 0) return population.alpha_low;
        if (i + 1 == k) return population.alpha_high;
        return std::exp(la + (lb - la) * i / (k - 1));
    };
    auto beta_at = [&](std::uint32_t j) {
        if (j + 1 == k) return population.beta_high;
        return population.beta_low + (population.beta_high - population.beta_low) * j / (k - 1);
    };
    for (std::uint32_t i = 0; i < k; ++i) {
        for (std::uint32_t j = 0; j < k; ++j) cells.push_back({alpha_at(i), beta_at(j)});
    }
    return cells;
}

std::vector<ParamPoint> viable_cells(const PopulationConfig& population, std::uint32_t item_count,
                                     const Schedule& schedule, const LeitnerConfig& leitner,
                                     double rho, std::uint64_t seed) {
    auto cells = population_cells(population);
    if (!population.require_leitner_learning) return cells;
    std::vector<ParamPoint> kept;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        LearnerSpec probe;
        probe.model = ModelKind::EF;
        probe.params = {cells[c]};
        probe.rng_seed = make_rng(seed, 0x43454C, c)();
        if (leitner_items_learned(probe, item_count, schedule, leitner, rho) >= 1) kept.push_back(cells[c]);
    }
    if (kept.empty()) throw ConfigError("no population cell lets a Leitner teacher learn any item");
    return kept;
}

LearnerSpec draw_learner(std::span<const ParamPoint> cells, ModelKind model,
                         std::uint32_t item_count, std::mt19937_64& rng) {
    if (cells.empty()) throw ConfigError("no population cells to draw from");
    std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
    LearnerSpec spec;
    spec.model = model;
    spec.rng_seed = rng();
    const std::uint32_t count = model == ModelKind::EF ? 1 : item_count;
    spec.params.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) spec.params.push_back(cells[pick(rng)]);
    return spec;
}

std::uint32_t leitner_items_learned(const LearnerSpec& spec, std::uint32_t item_count,
                                    const Schedule& schedule, const LeitnerConfig& leitner,
                                    double rho) {
    LeitnerTeacher teacher(item_count, leitner, spec.rng_seed);
    auto rng = make_rng(spec.rng_seed, 0x5C4EE7, 0);
    for (std::uint32_t step = 0; step < schedule.horizon(); ++step) {
        const Seconds t = schedule.time_of_step(step);
        const Decision d = teacher.next(t);
        const bool outcome =
            simulate_learner_response(spec, rng, d.item, teacher.history().items[d.item], t);
        teacher.observe(d.item, outcome, t);
    }
    std::uint32_t learned = 0;
    for (ItemId item : teacher.history().introduced) {
        const auto& state = teacher.history().items[item];
        if (recall_probability(state, spec.params_for(item), schedule.eval_time()) >= rho) ++learned;
    }
    return learned;
}

}  // namespace activeteach
