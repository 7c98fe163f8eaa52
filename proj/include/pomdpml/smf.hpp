#pragma once
// Rolling-horizon controller: at each belief, solve the finite-horizon
// memoryless MILP whose terminal stage absorbs the discounted tail value,
// and play its observation-blind first action. Decisions are memoized per
// belief rounded to a fixed quantum, so recurring beliefs cost one lookup.

#include <cstdint>
#include <cstring>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "pomdpml/bnb.hpp"
#include "pomdpml/formulate.hpp"
#include "pomdpml/mdp.hpp"
#include "pomdpml/model.hpp"
#include "pomdpml/policy.hpp"
#include "pomdpml/rewards.hpp"

namespace pomdpml {

struct SolverTimedOutWithNoIncumbent : Error {
    using Error::Error;
};

struct SmfParams {
    int rolling_horizon = 2;
    bool cuts = true;        // tighter node bounds in the inner solves
    MilpParams milp;
    double cache_quantum = 1e-6;
};

struct ControllerStats {
    std::size_t decisions = 0;
    std::size_t cache_hits = 0;
    std::size_t unproven_solves = 0;  // decisions taken from a non-Optimal solve
};

/// A belief-to-action controller driven by the simulator.
class Controller {
  public:
    virtual ~Controller() = default;
    virtual std::size_t act(const Belief& b) = 0;
    virtual ControllerStats stats() const { return {}; }
};

class SmfController : public Controller {
  public:
    SmfController(const PomdpInstance& instance, const MdpValue& tail, SmfParams params = {})
        : instance_(instance), params_(params) {
        rewards_ = RewardSpec::tilde(instance_, params_.rolling_horizon, tail.values,
                                     instance_.discount);
    }

    std::size_t act(const Belief& b) override {
        std::lock_guard<std::mutex> lock(mutex_);
        ++stats_.decisions;
        if (instance_.n_actions() == 1) return 0;
        const std::string key = quantize_(b);
        if (auto it = cache_.find(key); it != cache_.end()) {
            ++stats_.cache_hits;
            return it->second;
        }
        const std::size_t action = solve_(b);
        cache_[key] = action;
        return action;
    }

    ControllerStats stats() const override {
        std::lock_guard<std::mutex> lock(mutex_);
        return stats_;
    }

  private:
    PomdpInstance instance_;
    SmfParams params_;
    RewardSpec rewards_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, std::size_t> cache_;
    ControllerStats stats_;

    std::string quantize_(const Belief& b) const {
        std::string key(b.size() * sizeof(std::int64_t), '\0');
        for (std::size_t s = 0; s < b.size(); ++s) {
            const auto q = static_cast<std::int64_t>(std::llround(b[s] / params_.cache_quantum));
            std::memcpy(key.data() + s * sizeof(q), &q, sizeof(q));
        }
        return key;
    }

    std::size_t solve_(const Belief& b) {
        PomdpInstance local = instance_;
        local.initial_belief = b;
        const LpModel model =
            build_memoryless_model(local, rewards_, {.cuts = params_.cuts, .integral = true});
        const MilpResult res = solve_milp(model, local, rewards_, params_.milp);
        if (!res.has_incumbent)
            throw SolverTimedOutWithNoIncumbent("rolling-horizon solve produced no policy");
        if (res.status != MilpStatus::Optimal) ++stats_.unproven_solves;
        return res.incumbent_policy.mode_action(0, 0);
    }
};

/**
 * One-shot variant of the controller's decision rule: the observation-blind
 * first action of the optimal finite-horizon memoryless policy from belief
 * b, with the tail value closing the objective. `cache` carries memoized
 * decisions across calls.
 */
using SmfCache = std::unordered_map<std::string, std::size_t>;

inline std::size_t smf_action(const PomdpInstance& instance, const Belief& b, int rolling_horizon,
                              const MdpValue& tail, const SmfParams& params, SmfCache& cache) {
    if (instance.n_actions() == 1) return 0;
    std::string key(b.size() * sizeof(std::int64_t), '\0');
    for (std::size_t s = 0; s < b.size(); ++s) {
        const auto q = static_cast<std::int64_t>(std::llround(b[s] / params.cache_quantum));
        std::memcpy(key.data() + s * sizeof(q), &q, sizeof(q));
    }
    if (auto it = cache.find(key); it != cache.end()) return it->second;

    PomdpInstance local = instance;
    local.initial_belief = b;
    const RewardSpec rewards =
        RewardSpec::tilde(local, rolling_horizon, tail.values, local.discount);
    const LpModel model =
        build_memoryless_model(local, rewards, {.cuts = params.cuts, .integral = true});
    const MilpResult res = solve_milp(model, local, rewards, params.milp);
    if (!res.has_incumbent)
        throw SolverTimedOutWithNoIncumbent("rolling-horizon solve produced no policy");
    const std::size_t action = res.incumbent_policy.mode_action(0, 0);
    cache[key] = action;
    return action;
}

}  // namespace pomdpml
