#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "activeteach/memory_model.hpp"

namespace activeteach {

/// Discretisation of the (alpha, beta) space: alpha log-spaced, beta linearly spaced.
struct GridSpec {
    std::size_t alpha_points = 100;
    double alpha_low = 2e-7;
    double alpha_high = 2.5e-2;
    std::size_t beta_points = 100;
    double beta_low = 0.0001;
    double beta_high = 0.9999;

    std::size_t size() const { return alpha_points * beta_points; }
    /// Throws ConfigError on counts < 2, unordered bounds, alpha_low <= 0 or beta outside (0, 1).
    void validate() const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/**
 * Immutable set of parameter points shared by every belief built on it.
 *
 * Point index is `ia * beta_points + ib` for grids built from a GridSpec. Per-presentation-count
 * decay rates are computed once and cached; the cache is internally synchronised so a grid may
 * be shared across threads.
 */
class ParamGrid {
public:
    explicit ParamGrid(const GridSpec& spec);
    /// Arbitrary support, mainly for small hand-checked cases.
    explicit ParamGrid(std::vector<ParamPoint> points);

    std::size_t size() const { return points_.size(); }
    std::span<const ParamPoint> points() const { return points_; }
    const std::optional<GridSpec>& spec() const { return spec_; }

    /// rate[i] = alpha_i * (1 - beta_i)^(n - 1).
    std::span<const double> rates(std::uint32_t presentations) const;

private:
    std::vector<ParamPoint> points_;
    std::optional<GridSpec> spec_;
    mutable std::mutex rate_mutex_;
    mutable std::map<std::uint32_t, std::unique_ptr<std::vector<double>>> rate_cache_;
};

/// Discrete posterior over a ParamGrid. Weights are kept normalised in both log and linear form.
class Belief {
public:
    /// Uniform weights over `grid`.
    explicit Belief(std::shared_ptr<const ParamGrid> grid);
    /// Non-negative weights with a positive sum; normalised on construction.
    Belief(std::shared_ptr<const ParamGrid> grid, std::vector<double> weights);

    const ParamGrid& grid() const { return *grid_; }
    const std::shared_ptr<const ParamGrid>& shared_grid() const { return grid_; }
    std::size_t size() const { return weights_.size(); }
    std::span<const double> weights() const { return weights_; }
    std::span<const double> log_weights() const { return log_weights_; }

    /// Bayes update with the exponential-forgetting likelihood of `outcome` for an item whose
    /// history before this observation is `state`. Throws UnseenItemError if the item was
    /// never presented and DegeneratePosteriorError if every grid point gets zero likelihood.
    void update(const ItemState& state, bool outcome, Seconds now);

    /// Posterior-expected recall probability.
    double expected_recall(const ItemState& state, Seconds now) const;

    /// Weighted mean of log(alpha) (returned exponentiated) and of beta.
    ParamPoint posterior_mean() const;

private:
    void normalize_from_log();

    std::shared_ptr<const ParamGrid> grid_;
    std::vector<double> log_weights_;
    std::vector<double> weights_;
};

Belief init_belief(const GridSpec& spec);
Belief update_belief(Belief belief, const ItemState& state, bool outcome, Seconds now);
ParamPoint posterior_mean(const Belief& belief);

/// Tab-separated `alpha beta weight` rows with a header line.
void write_belief_table(std::ostream& out, const Belief& belief);
Belief read_belief_table(std::istream& in);

/**
 * Per-learner set of beliefs.
 *
 * EF mode holds one global belief. ISEF mode holds one posterior per reviewed item; any other
 * item resolves to the pointwise mean of the reviewed posteriors (uniform while none exist).
 */
class BeliefBank {
public:
    BeliefBank(ModelKind mode, std::shared_ptr<const ParamGrid> grid);
    BeliefBank(ModelKind mode, const GridSpec& spec);

    ModelKind mode() const { return mode_; }
    const ParamGrid& grid() const { return *grid_; }

    /// Belief that currently governs `item`.
    const Belief& belief_for(ItemId item) const;
    /// ISEF only; throws ModeError in EF mode.
    Belief prior_for_new_item() const;
    bool reviewed(ItemId item) const;
    std::vector<ItemId> reviewed_items() const;
    std::uint64_t revision() const { return revision_; }

    /// Bayes update for an informative observation; `before` is the item history prior to it.
    void observe(ItemId item, const ItemState& before, bool outcome, Seconds now);

    double predict_recall(ItemId item, const ItemState& state, Seconds now) const;

private:
    const Belief& synthesized_prior() const;

    ModelKind mode_;
    std::shared_ptr<const ParamGrid> grid_;
    std::optional<Belief> global_;
    std::map<ItemId, Belief> per_item_;
    mutable std::optional<Belief> synthesized_;
    std::uint64_t revision_ = 0;
};

/// Source of the recall probabilities a planner consumes.
class RecallPredictor {
public:
    virtual ~RecallPredictor() = default;
    virtual double predict_recall(ItemId item, const ItemState& state, Seconds now) const = 0;
};

/// A predictor that also learns from observed outcomes.
class Psychologist : public RecallPredictor {
public:
    /// `before` is the item history prior to the observed presentation.
    virtual void observe(ItemId item, const ItemState& before, bool outcome, Seconds now) = 0;
    virtual bool omniscient() const = 0;
};

/// Grid-Bayesian psychologist with a memo of (belief, presentations, elapsed) evaluations.
class BayesianPsychologist final : public Psychologist {
public:
    explicit BayesianPsychologist(BeliefBank bank);

    double predict_recall(ItemId item, const ItemState& state, Seconds now) const override;
    void observe(ItemId item, const ItemState& before, bool outcome, Seconds now) override;
    bool omniscient() const override { return false; }

    const BeliefBank& bank() const { return bank_; }

private:
    struct MemoKey {
        std::uint32_t presentations;
        std::uint64_t elapsed_bits;
        friend bool operator==(const MemoKey&, const MemoKey&) = default;
    };
    struct MemoKeyHash {
        std::size_t operator()(const MemoKey& key) const noexcept;
    };
    using MemoTable = std::unordered_map<MemoKey, double, MemoKeyHash>;

    BeliefBank bank_;
    mutable std::unordered_map<ItemId, MemoTable> memo_;
};

/// Simulation-only psychologist that reads the learner's true parameters.
class OmniscientPsychologist final : public Psychologist {
public:
    /// EF: one point shared by all items. ISEF: one point per item.
    OmniscientPsychologist(ModelKind mode, std::vector<ParamPoint> truth);

    double predict_recall(ItemId item, const ItemState& state, Seconds now) const override;
    void observe(ItemId, const ItemState&, bool, Seconds) override {}
    bool omniscient() const override { return true; }

private:
    ModelKind mode_;
    std::vector<ParamPoint> truth_;
};

}  // namespace activeteach
