#include "sensorctl/pomdp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "sensorctl/parallel.hpp"
#include "sensorctl/rng.hpp"

namespace sensorctl::pomdp {
namespace {

std::string where(std::size_t stage, std::size_t control) {
    return "stage " + std::to_string(stage) + ", control " + std::to_string(control);
}

void check_shape(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& what) {
    if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != cols) {
        throw Error(ErrorKind::DimensionMismatch,
                    what + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                        ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    }
}

void check_stochastic_rows(const Matrix& m, const std::string& what) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const auto row = m.row(i);
        if (row.minCoeff() < 0.0 || std::abs(row.sum() - 1.0) > kStochasticTol)
            throw Error(ErrorKind::NonStochasticRow, what + ", row " + std::to_string(i));
    }
}

// Divides by the computed sum so beliefs do not drift off the simplex.
Belief normalized(std::size_t stage, Vector unnormalized, double mass) {
    unnormalized /= mass;
    return Belief{stage, std::move(unnormalized)};
}

} // namespace

std::size_t Model::terminal_states() const {
    if (stages.empty() || stages.back().F.empty())
        throw Error(ErrorKind::DimensionMismatch, "model has no stages");
    return static_cast<std::size_t>(stages.back().F.front().cols());
}

// --- BeliefCache -----------------------------------------------------------

std::size_t BeliefCache::KeyHash::operator()(const std::vector<std::uint64_t>& key) const noexcept {
    std::uint64_t h = 0x243F6A8885A308D3ULL;
    for (auto word : key)
        h = mix64(h ^ word);
    return static_cast<std::size_t>(h);
}

std::vector<std::uint64_t> BeliefCache::key_of(const Belief& belief) const {
    std::vector<std::uint64_t> key;
    key.reserve(static_cast<std::size_t>(belief.p.size()) + 1);
    key.push_back(belief.stage);
    for (Eigen::Index i = 0; i < belief.p.size(); ++i) {
        if (mode_ == Mode::Exact)
            key.push_back(std::bit_cast<std::uint64_t>(belief.p[i] + 0.0));
        else
            key.push_back(static_cast<std::uint64_t>(std::llround(belief.p[i] * 1e12)));
    }
    return key;
}

const Vector* BeliefCache::find(const Belief& belief) const {
    const auto it = table_.find(key_of(belief));
    return it == table_.end() ? nullptr : &it->second;
}

void BeliefCache::insert(const Belief& belief, Vector q) { table_.emplace(key_of(belief), std::move(q)); }

// --- validation ------------------------------------------------------------

void validate_model(const Model& model) {
    const std::size_t K = model.horizon();
    if (K == 0)
        throw Error(ErrorKind::DimensionMismatch, "model must have at least one stage");

    const std::size_t n0 = model.stages[0].n;
    check_shape(model.H0, n0, model.stages[0].s, "H0");
    check_stochastic_rows(model.H0, "H0");
    if (static_cast<std::size_t>(model.p0.size()) != n0)
        throw Error(ErrorKind::DimensionMismatch, "p0 has length " + std::to_string(model.p0.size()) +
                                                      ", expected " + std::to_string(n0));
    if (model.p0.minCoeff() < 0.0 || std::abs(model.p0.sum() - 1.0) > kStochasticTol)
        throw Error(ErrorKind::NonStochasticRow, "p0 is not a probability vector");

    for (std::size_t k = 0; k < K; ++k) {
        const Stage& st = model.stages[k];
        if (st.n == 0 || st.m == 0 || st.s == 0)
            throw Error(ErrorKind::DimensionMismatch, "stage " + std::to_string(k) + " has an empty space");
        if (st.F.size() != st.m || st.G.size() != st.m)
            throw Error(ErrorKind::DimensionMismatch,
                        "stage " + std::to_string(k) + " needs one F and one G matrix per control");
        const std::size_t n_next = k + 1 < K ? model.stages[k + 1].n : static_cast<std::size_t>(st.F[0].cols());
        for (std::size_t u = 0; u < st.m; ++u) {
            check_shape(st.F[u], st.n, n_next, "F at " + where(k, u));
            check_shape(st.G[u], st.n, n_next, "G at " + where(k, u));
            check_stochastic_rows(st.F[u], "F at " + where(k, u));
            if (!st.G[u].allFinite())
                throw Error(ErrorKind::InvalidParameters, "G at " + where(k, u) + " is not finite");
        }
        if (k == 0) {
            if (!st.H.empty())
                throw Error(ErrorKind::DimensionMismatch, "stage 0 observations come from H0, not H");
            continue;
        }
        const std::size_t m_prev = model.stages[k - 1].m;
        if (st.H.size() != m_prev)
            throw Error(ErrorKind::DimensionMismatch, "stage " + std::to_string(k) +
                                                          " needs one H matrix per preceding control");
        for (std::size_t u = 0; u < m_prev; ++u) {
            check_shape(st.H[u], st.n, st.s, "H at " + where(k, u));
            check_stochastic_rows(st.H[u], "H at " + where(k, u));
        }
    }
}

// --- estimation ------------------------------------------------------------

Belief belief_init(const Model& model, std::size_t z0) {
    if (z0 >= static_cast<std::size_t>(model.H0.cols()))
        throw Error(ErrorKind::IndexOutOfRange, "initial measurement " + std::to_string(z0));
    Vector joint = model.H0.col(static_cast<Eigen::Index>(z0)).cwiseProduct(model.p0);
    const double mass = joint.sum();
    if (!(mass > 0.0))
        throw Error(ErrorKind::ZeroProbabilityMeasurement, "initial measurement " + std::to_string(z0));
    return normalized(0, std::move(joint), mass);
}

Belief belief_update(const Model& model, const Belief& belief, std::size_t u, std::size_t z) {
    const std::size_t k = belief.stage + 1;
    if (k >= model.horizon())
        throw Error(ErrorKind::IndexOutOfRange, "no measurement follows stage " + std::to_string(belief.stage));
    const Stage& prev = model.stages[belief.stage];
    const Stage& next = model.stages[k];
    if (u >= prev.m || z >= next.s)
        throw Error(ErrorKind::IndexOutOfRange, "control or measurement index at " + where(k, u));
    const Vector predicted = prev.F[u].transpose() * belief.p;
    Vector joint = next.H[u].col(static_cast<Eigen::Index>(z)).cwiseProduct(predicted);
    const double mass = joint.sum();
    if (!(mass > 0.0))
        throw Error(ErrorKind::ZeroProbabilityMeasurement,
                    "measurement " + std::to_string(z) + " after " + where(belief.stage, u));
    return normalized(k, std::move(joint), mass);
}

// --- actuation -------------------------------------------------------------

std::size_t argmin_first(const Vector& q) {
    const double low = q.minCoeff();
    const double slack = kArgminTieTol * std::max(1.0, std::abs(low));
    Eigen::Index u = 0;
    while (q[u] > low + slack)
        ++u;
    return static_cast<std::size_t>(u);
}

Vector q_vector(const Model& model, const Belief& belief, BeliefCache* cache) {
    const std::size_t K = model.horizon();
    const std::size_t k = belief.stage;
    if (k >= K)
        throw Error(ErrorKind::IndexOutOfRange, "belief stage " + std::to_string(k));
    if (cache) {
        if (const Vector* hit = cache->find(belief))
            return *hit;
    }

    const Stage& st = model.stages[k];
    Vector q(static_cast<Eigen::Index>(st.m));
    for (std::size_t u = 0; u < st.m; ++u) {
        // p' (F .* G) e
        const Vector immediate_rows = st.F[u].cwiseProduct(st.G[u]).rowwise().sum();
        double value = belief.p.dot(immediate_rows);
        if (k + 1 < K) {
            const Stage& next = model.stages[k + 1];
            const Vector predicted = st.F[u].transpose() * belief.p;
            for (std::size_t z = 0; z < next.s; ++z) {
                Vector joint = next.H[u].col(static_cast<Eigen::Index>(z)).cwiseProduct(predicted);
                const double mass = joint.sum();
                if (!(mass > 0.0))
                    continue;
                const Belief posterior = normalized(k + 1, std::move(joint), mass);
                const Vector q_next = q_vector(model, posterior, cache);
                value += mass * q_next.minCoeff();
            }
        }
        q[static_cast<Eigen::Index>(u)] = value;
    }
    if (cache)
        cache->insert(belief, q);
    return q;
}

double cost_to_go(const Model& model, const Belief& belief, BeliefCache* cache) {
    return q_vector(model, belief, cache).minCoeff();
}

std::size_t optimal_control(const Model& model, const Belief& belief, BeliefCache* cache) {
    return argmin_first(q_vector(model, belief, cache));
}

double expected_total_cost(const Model& model, BeliefCache* cache) {
    double total = 0.0;
    for (Eigen::Index z0 = 0; z0 < model.H0.cols(); ++z0) {
        const double probability = model.H0.col(z0).dot(model.p0);
        if (!(probability > 0.0))
            continue;
        total += probability * cost_to_go(model, belief_init(model, static_cast<std::size_t>(z0)), cache);
    }
    return total;
}

double open_loop_cost(const Model& model, std::span<const std::size_t> controls) {
    if (controls.size() != model.horizon())
        throw Error(ErrorKind::DimensionMismatch, "open-loop sequence length differs from the horizon");
    Vector distribution = model.p0;
    double total = 0.0;
    for (std::size_t k = 0; k < model.horizon(); ++k) {
        const Stage& st = model.stages[k];
        const std::size_t u = controls[k];
        if (u >= st.m)
            throw Error(ErrorKind::IndexOutOfRange, "control at stage " + std::to_string(k));
        total += distribution.dot(st.F[u].cwiseProduct(st.G[u]).rowwise().sum());
        distribution = st.F[u].transpose() * distribution;
    }
    return total;
}

// --- simulation ------------------------------------------------------------

Rollout simulate_rollout(const Model& model, std::uint64_t seed, BeliefCache* cache) {
    const std::size_t K = model.horizon();
    CounterRng rng(seed);
    Rollout out;
    out.seed = seed;
    out.states.reserve(K + 1);
    out.controls.reserve(K);
    out.measurements.reserve(K);

    auto row_of = [](const Matrix& m, std::size_t i) -> Vector { return m.row(static_cast<Eigen::Index>(i)); };

    std::size_t x = rng.categorical(std::span<const double>(model.p0.data(), static_cast<std::size_t>(model.p0.size())));
    Vector h_row = row_of(model.H0, x);
    std::size_t z = rng.categorical(std::span<const double>(h_row.data(), static_cast<std::size_t>(h_row.size())));
    Belief belief = belief_init(model, z);
    out.states.push_back(x);
    out.measurements.push_back(z);

    for (std::size_t k = 0; k < K; ++k) {
        const Stage& st = model.stages[k];
        const std::size_t u = optimal_control(model, belief, cache);
        const Vector f_row = row_of(st.F[u], x);
        const std::size_t x_next =
            rng.categorical(std::span<const double>(f_row.data(), static_cast<std::size_t>(f_row.size())));
        out.realized_cost += st.G[u](static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x_next));
        out.controls.push_back(u);
        out.states.push_back(x_next);
        x = x_next;
        if (k + 1 < K) {
            h_row = row_of(model.stages[k + 1].H[u], x);
            z = rng.categorical(std::span<const double>(h_row.data(), static_cast<std::size_t>(h_row.size())));
            out.measurements.push_back(z);
            belief = belief_update(model, belief, u, z);
        }
    }
    return out;
}

MonteCarloEstimate monte_carlo_cost(const Model& model, std::size_t n, std::uint64_t seed) {
    if (n == 0)
        throw Error(ErrorKind::InvalidParameters, "rollout count must be positive");
    std::vector<double> costs(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        // Exact-key memo: every rollout revisits the same few beliefs.
        BeliefCache cache(BeliefCache::Mode::Exact);
        for (std::size_t i = begin; i < end; ++i)
            costs[i] = simulate_rollout(model, child_seed(seed, i), &cache).realized_cost;
    });
    return summarize(costs);
}

} // namespace sensorctl::pomdp
