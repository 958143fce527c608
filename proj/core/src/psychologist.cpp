#include "activeteach/psychologist.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "activeteach/errors.hpp"

namespace activeteach {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr ItemId kSharedSource = std::numeric_limits<ItemId>::max();
constexpr std::size_t kMemoLimit = 1u << 16;

Seconds elapsed_since(const ItemState& state, Seconds now) {
    if (!state.seen() || !state.last_presentation) {
        throw UnseenItemError("no presentation recorded for this item");
    }
    const Seconds elapsed = now - *state.last_presentation;
    if (elapsed < 0.0) {
        throw TimeOrderError("query at " + std::to_string(now) + " precedes last presentation " +
                             std::to_string(*state.last_presentation));
    }
    return elapsed;
}

}  // namespace

void GridSpec::validate() const {
    if (alpha_points < 2 || beta_points < 2) {
        throw ConfigError("grid needs at least 2 points per axis");
    }
    if (!(alpha_low > 0.0)) {
        throw ConfigError("alpha_low must be > 0 for a logarithmic axis");
    }
    if (!(alpha_high > alpha_low) || !std::isfinite(alpha_high)) {
        throw ConfigError("alpha bounds must satisfy alpha_low < alpha_high");
    }
    if (!(beta_low > 0.0 && beta_high < 1.0 && beta_low < beta_high)) {
        throw ConfigError("beta bounds must satisfy 0 < beta_low < beta_high < 1");
    }
}

ParamGrid::ParamGrid(const GridSpec& spec) : spec_(spec) {
    spec.validate();
    points_.reserve(spec.size());
    const double log_low = std::log(spec.alpha_low);
    const double log_step =
        (std::log(spec.alpha_high) - log_low) / static_cast<double>(spec.alpha_points - 1);
    const double beta_step =
        (spec.beta_high - spec.beta_low) / static_cast<double>(spec.beta_points - 1);
    for (std::size_t ia = 0; ia < spec.alpha_points; ++ia) {
        const double alpha = std::exp(log_low + log_step * static_cast<double>(ia));
        for (std::size_t ib = 0; ib < spec.beta_points; ++ib) {
            points_.push_back({alpha, spec.beta_low + beta_step * static_cast<double>(ib)});
        }
    }
}

ParamGrid::ParamGrid(std::vector<ParamPoint> points) : points_(std::move(points)) {
    if (points_.empty()) throw ConfigError("parameter grid is empty");
    for (const auto& p : points_) (void)ParamPoint::checked(p.alpha, p.beta);
}

std::span<const double> ParamGrid::rates(std::uint32_t presentations) const {
    const std::uint32_t n = std::max<std::uint32_t>(presentations, 1);
    std::lock_guard lock(rate_mutex_);
    auto& slot = rate_cache_[n];
    if (!slot) {
        auto rates = std::make_unique<std::vector<double>>(points_.size());
        for (std::size_t i = 0; i < points_.size(); ++i) {
            (*rates)[i] = forgetting_rate(points_[i], n);
        }
        slot = std::move(rates);
    }
    return *slot;
}

Belief::Belief(std::shared_ptr<const ParamGrid> grid) : grid_(std::move(grid)) {
    const auto n = grid_->size();
    weights_.assign(n, 1.0 / static_cast<double>(n));
    log_weights_.assign(n, -std::log(static_cast<double>(n)));
}

Belief::Belief(std::shared_ptr<const ParamGrid> grid, std::vector<double> weights)
    : grid_(std::move(grid)) {
    if (weights.size() != grid_->size()) {
        throw ConfigError("belief has " + std::to_string(weights.size()) + " weights for " +
                          std::to_string(grid_->size()) + " grid points");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("belief weights must be >= 0");
        total += w;
    }
    if (!(total > 0.0)) throw DegeneratePosteriorError("belief weights sum to zero");
    log_weights_.resize(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        log_weights_[i] = weights[i] > 0.0 ? std::log(weights[i]) : kNegInf;
    }
    normalize_from_log();
}

void Belief::normalize_from_log() {
    const double top = *std::max_element(log_weights_.begin(), log_weights_.end());
    if (top == kNegInf || std::isnan(top)) {
        throw DegeneratePosteriorError("all grid points have zero likelihood");
    }
    double total = 0.0;
    for (double lw : log_weights_) total += std::exp(lw - top);
    const double log_norm = top + std::log(total);
    weights_.resize(log_weights_.size());
    for (std::size_t i = 0; i < log_weights_.size(); ++i) {
        log_weights_[i] -= log_norm;
        weights_[i] = std::exp(log_weights_[i]);
    }
}

void Belief::update(const ItemState& state, bool outcome, Seconds now) {
    const Seconds elapsed = elapsed_since(state, now);
    const auto rates = grid_->rates(state.presentations);
    std::vector<double> next(log_weights_.size());
    bool any_mass = false;
    for (std::size_t i = 0; i < next.size(); ++i) {
        const double exponent = rates[i] * elapsed;
        const double log_likelihood =
            outcome ? -exponent : (exponent > 0.0 ? std::log(-std::expm1(-exponent)) : kNegInf);
        next[i] = log_weights_[i] + log_likelihood;
        any_mass = any_mass || next[i] != kNegInf;
    }
    if (!any_mass) {
        throw DegeneratePosteriorError("observed failure where every grid point predicts recall 1");
    }
    log_weights_ = std::move(next);
    normalize_from_log();
}

double Belief::expected_recall(const ItemState& state, Seconds now) const {
    const Seconds elapsed = elapsed_since(state, now);
    if (elapsed == 0.0) return 1.0;
    const auto rates = grid_->rates(state.presentations);
    double total = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        total += weights_[i] * std::exp(-rates[i] * elapsed);
    }
    return std::min(total, 1.0);
}

ParamPoint Belief::posterior_mean() const {
    const auto points = grid_->points();
    double log_alpha = 0.0;
    double beta = 0.0;
    bool zero_alpha = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (weights_[i] == 0.0) continue;
        if (points[i].alpha == 0.0) {
            zero_alpha = true;
        } else {
            log_alpha += weights_[i] * std::log(points[i].alpha);
        }
        beta += weights_[i] * points[i].beta;
    }
    return ParamPoint{zero_alpha ? 0.0 : std::exp(log_alpha), beta};
}

Belief init_belief(const GridSpec& spec) {
    return Belief(std::make_shared<const ParamGrid>(spec));
}

Belief update_belief(Belief belief, const ItemState& state, bool outcome, Seconds now) {
    belief.update(state, outcome, now);
    return belief;
}

ParamPoint posterior_mean(const Belief& belief) { return belief.posterior_mean(); }

void write_belief_table(std::ostream& out, const Belief& belief) {
    const auto points = belief.grid().points();
    const auto weights = belief.weights();
    out << "alpha\tbeta\tweight\n";
    char line[128];
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::snprintf(line, sizeof line, "%.17g\t%.17g\t%.17g\n", points[i].alpha, points[i].beta,
                      weights[i]);
        out << line;
    }
}

Belief read_belief_table(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "alpha\tbeta\tweight") {
        throw ConfigError("belief table must start with 'alpha\\tbeta\\tweight'");
    }
    std::vector<ParamPoint> points;
    std::vector<double> weights;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        double alpha = 0.0, beta = 0.0, weight = 0.0;
        if (!(row >> alpha >> beta >> weight)) {
            throw ConfigError("malformed belief row at line " + std::to_string(line_no));
        }
        points.push_back(ParamPoint::checked(alpha, beta));
        weights.push_back(weight);
    }
    auto grid = std::make_shared<const ParamGrid>(std::move(points));
    return Belief(std::move(grid), std::move(weights));
}

BeliefBank::BeliefBank(ModelKind mode, std::shared_ptr<const ParamGrid> grid)
    : mode_(mode), grid_(std::move(grid)) {
    if (mode_ == ModelKind::EF) global_.emplace(grid_);
}

BeliefBank::BeliefBank(ModelKind mode, const GridSpec& spec)
    : BeliefBank(mode, std::make_shared<const ParamGrid>(spec)) {}

const Belief& BeliefBank::synthesized_prior() const {
    if (!synthesized_) synthesized_.emplace(prior_for_new_item());
    return *synthesized_;
}

const Belief& BeliefBank::belief_for(ItemId item) const {
    if (mode_ == ModelKind::EF) return *global_;
    if (auto it = per_item_.find(item); it != per_item_.end()) return it->second;
    return synthesized_prior();
}

Belief BeliefBank::prior_for_new_item() const {
    if (mode_ != ModelKind::ISEF) {
        throw ModeError("item priors only exist for the item-specific model");
    }
    if (per_item_.empty()) return Belief(grid_);
    std::vector<double> mean(grid_->size(), 0.0);
    for (const auto& [item, belief] : per_item_) {
        const auto w = belief.weights();
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += w[i];
    }
    const double count = static_cast<double>(per_item_.size());
    for (double& m : mean) m /= count;
    return Belief(grid_, std::move(mean));
}

bool BeliefBank::reviewed(ItemId item) const {
    return mode_ == ModelKind::ISEF && per_item_.contains(item);
}

std::vector<ItemId> BeliefBank::reviewed_items() const {
    std::vector<ItemId> out;
    out.reserve(per_item_.size());
    for (const auto& entry : per_item_) out.push_back(entry.first);
    return out;
}

void BeliefBank::observe(ItemId item, const ItemState& before, bool outcome, Seconds now) {
    if (mode_ == ModelKind::EF) {
        global_->update(before, outcome, now);
    } else if (auto it = per_item_.find(item); it != per_item_.end()) {
        it->second.update(before, outcome, now);
    } else {
        Belief posterior = synthesized_prior();
        posterior.update(before, outcome, now);
        per_item_.emplace(item, std::move(posterior));
    }
    synthesized_.reset();
    ++revision_;
}

double BeliefBank::predict_recall(ItemId item, const ItemState& state, Seconds now) const {
    return belief_for(item).expected_recall(state, now);
}

std::size_t BayesianPsychologist::MemoKeyHash::operator()(const MemoKey& key) const noexcept {
    std::uint64_t h = key.elapsed_bits * 0x9E3779B97F4A7C15ull;
    h ^= (static_cast<std::uint64_t>(key.presentations) + 0x632BE59BD9B4E019ull) + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
}

BayesianPsychologist::BayesianPsychologist(BeliefBank bank) : bank_(std::move(bank)) {}

double BayesianPsychologist::predict_recall(ItemId item, const ItemState& state,
                                            Seconds now) const {
    const Seconds elapsed = elapsed_since(state, now);
    if (elapsed == 0.0) return 1.0;
    ItemId source = 0;
    if (bank_.mode() == ModelKind::ISEF) source = bank_.reviewed(item) ? item : kSharedSource;
    auto& table = memo_[source];
    const MemoKey key{state.presentations, std::bit_cast<std::uint64_t>(elapsed)};
    if (auto it = table.find(key); it != table.end()) return it->second;
    if (table.size() >= kMemoLimit) table.clear();
    const double p = bank_.predict_recall(item, state, now);
    table.emplace(key, p);
    return p;
}

void BayesianPsychologist::observe(ItemId item, const ItemState& before, bool outcome,
                                   Seconds now) {
    bank_.observe(item, before, outcome, now);
    if (bank_.mode() == ModelKind::EF) {
        memo_.clear();
    } else {
        memo_.erase(item);
        memo_.erase(kSharedSource);
    }
}

OmniscientPsychologist::OmniscientPsychologist(ModelKind mode, std::vector<ParamPoint> truth)
    : mode_(mode), truth_(std::move(truth)) {
    if (truth_.empty()) throw ConfigError("omniscient psychologist needs learner parameters");
    if (mode_ == ModelKind::EF && truth_.size() != 1) {
        throw ConfigError("EF learners have exactly one parameter point");
    }
}

double OmniscientPsychologist::predict_recall(ItemId item, const ItemState& state,
                                              Seconds now) const {
    if (mode_ == ModelKind::EF) return recall_probability(state, truth_.front(), now);
    if (item >= truth_.size()) {
        throw ConfigError("no true parameters for item " + std::to_string(item));
    }
    return recall_probability(state, truth_[item], now);
}

}  // namespace activeteach
