#pragma once

// Exact finite-horizon PO-MDP machinery: Bayes belief filtering, the
// control-dependent cost-to-go vector q_k(p_k), its minimum J_k, the
// optimal actuation policy, and Monte Carlo rollouts of that policy.
//
// Indexing: stages, states, controls and measurements are zero-based in this
// API. CLI and file outputs label controls and measurements one-based.

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "sensorctl/linalg.hpp"
#include "sensorctl/stats.hpp"

namespace sensorctl::pomdp {

inline constexpr double kStochasticTol = 1e-9;

/// Parameters of one decision stage k.
struct Stage {
    std::size_t n = 0; ///< states at stage k
    std::size_t m = 0; ///< controls at stage k
    std::size_t s = 0; ///< measurements at stage k
    std::vector<Matrix> F; ///< m matrices, n x n_{k+1}: transition probabilities
    std::vector<Matrix> G; ///< m matrices, n x n_{k+1}: transition costs
    std::vector<Matrix> H; ///< m_{k-1} matrices, n x s, indexed by the preceding control; empty at k = 0
};

/// Stage-indexed model. The terminal cost is folded into the stage K-1
/// transition costs, so there is no separate terminal-cost field.
struct Model {
    std::vector<Stage> stages; ///< K entries
    Matrix H0;                 ///< n_0 x s_0 initial observation probabilities
    Vector p0;                 ///< initial state distribution

    [[nodiscard]] std::size_t horizon() const noexcept { return stages.size(); }
    /// n_K, the column count of the last transition matrices.
    [[nodiscard]] std::size_t terminal_states() const;
};

struct Belief {
    std::size_t stage = 0;
    Vector p;
};

struct Rollout {
    std::uint64_t seed = 0;
    std::vector<std::size_t> states;       ///< K + 1 entries
    std::vector<std::size_t> controls;     ///< K entries
    std::vector<std::size_t> measurements; ///< K entries, z_0 .. z_{K-1}
    double realized_cost = 0.0;
};

/// Memo of q-vectors keyed on (stage, belief).
///
/// Exact mode keys on the bit pattern of the belief, so a cached run returns
/// bit-identical values to an uncached one. Rounded mode keys on the belief
/// rounded to 12 decimal digits and trades that guarantee for more hits in
/// dense plotting sweeps. Not thread-safe: use one cache per thread.
class BeliefCache {
public:
    enum class Mode { Exact, Rounded };

    explicit BeliefCache(Mode mode = Mode::Exact) : mode_(mode) {}

    [[nodiscard]] const Vector* find(const Belief& belief) const;
    void insert(const Belief& belief, Vector q);
    [[nodiscard]] std::size_t size() const noexcept { return table_.size(); }
    void clear() { table_.clear(); }

private:
    struct KeyHash {
        std::size_t operator()(const std::vector<std::uint64_t>& key) const noexcept;
    };
    [[nodiscard]] std::vector<std::uint64_t> key_of(const Belief& belief) const;

    Mode mode_;
    std::unordered_map<std::vector<std::uint64_t>, Vector, KeyHash> table_;
};

/// Throws DimensionMismatch or NonStochasticRow (naming stage, control, row).
void validate_model(const Model& model);

/// p_0 = normalize([H_0]_{z0} .* p_x0).
[[nodiscard]] Belief belief_init(const Model& model, std::size_t z0);

/// One prediction/correction step from stage k-1 to stage k (1 <= k <= K-1).
[[nodiscard]] Belief belief_update(const Model& model, const Belief& belief, std::size_t u, std::size_t z);

/// Control-dependent cost-to-go q_k(p_k) by direct recursion over the
/// (control, measurement) tree. Zero-probability measurement branches
/// contribute exactly 0 and their posterior is never formed.
[[nodiscard]] Vector q_vector(const Model& model, const Belief& belief, BeliefCache* cache = nullptr);

/// J_k(p_k) = min_u q_k(p_k)[u].
[[nodiscard]] double cost_to_go(const Model& model, const Belief& belief, BeliefCache* cache = nullptr);

/// Smallest index attaining min_u q_k(p_k)[u].
[[nodiscard]] std::size_t optimal_control(const Model& model, const Belief& belief,
                                          BeliefCache* cache = nullptr);

/// Entries within this relative distance of the minimum count as ties.
/// Analytically equal q entries (machine repair at stage K-2, for one)
/// otherwise split on rounding noise.
inline constexpr double kArgminTieTol = 1e-12;

/// Smallest index u with q[u] <= min(q) + kArgminTieTol * max(1, |min(q)|).
[[nodiscard]] std::size_t argmin_first(const Vector& q);

/// sum_{z0} Pr(z0) J_0(belief_init(z0)).
[[nodiscard]] double expected_total_cost(const Model& model, BeliefCache* cache = nullptr);

/// Expected cost of a fixed open-loop control sequence (one control per stage).
[[nodiscard]] double open_loop_cost(const Model& model, std::span<const std::size_t> controls);

/// One trajectory under the optimal closed-loop policy; deterministic in seed.
[[nodiscard]] Rollout simulate_rollout(const Model& model, std::uint64_t seed, BeliefCache* cache = nullptr);

/// Mean and standard error of n rollouts; rollout i uses child_seed(seed, i).
[[nodiscard]] MonteCarloEstimate monte_carlo_cost(const Model& model, std::size_t n, std::uint64_t seed);

} // namespace sensorctl::pomdp
