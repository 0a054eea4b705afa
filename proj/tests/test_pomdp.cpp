#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sensorctl/error.hpp"
#include "sensorctl/machine_repair.hpp"
#include "sensorctl/pomdp.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace sensorctl;
using namespace sensorctl::pomdp;
namespace mr = sensorctl::machine_repair;
namespace ts = testing_support;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::ParseError;
}

Model zero_cost(Model m) {
    for (auto& st : m.stages)
        for (auto& g : st.G)
            g.setZero();
    return m;
}

// Hand Bayes for the machine-repair initial measurement.
double hand_rho0(const mr::Params& p, std::size_t z) {
    const double good = (1.0 - p.alpha) * (z == 1 ? p.eta_f : 1.0 - p.eta_f);
    const double bad = p.alpha * (z == 1 ? p.eta_d : 1.0 - p.eta_d);
    return bad / (good + bad);
}

// Two-state model: p = (1 - rho, rho) at stage k.
double J(const Model& m, std::size_t k, double rho) { return cost_to_go(m, mr::belief_from_rho(k, rho)); }

} // namespace

TEST_CASE("validate_model accepts the machine-repair model") {
    CHECK_NOTHROW(validate_model(mr::build_model(mr::Params{})));
}

TEST_CASE("validate_model reports non-stochastic rows") {
    Model m = mr::build_model(mr::Params{});
    m.stages[0].F[0](0, 1) -= 0.1; // row sums to 0.9
    CHECK(kind_of([&] { validate_model(m); }) == ErrorKind::NonStochasticRow);
    try {
        validate_model(m);
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("stage 0") != std::string::npos);
    }

    Model h = mr::build_model(mr::Params{});
    h.stages[2].H[1](1, 0) = -0.1;
    h.stages[2].H[1](1, 1) = 1.1;
    CHECK(kind_of([&] { validate_model(h); }) == ErrorKind::NonStochasticRow);

    Model p = mr::build_model(mr::Params{});
    p.p0[0] = 0.5;
    CHECK(kind_of([&] { validate_model(p); }) == ErrorKind::NonStochasticRow);
}

TEST_CASE("validate_model reports dimension mismatches") {
    Model m = mr::build_model(mr::Params{});
    m.stages[0].F[0] = Matrix::Constant(2, 3, 1.0 / 3.0);
    CHECK(kind_of([&] { validate_model(m); }) == ErrorKind::DimensionMismatch);

    Model h = mr::build_model(mr::Params{});
    h.stages[1].H.pop_back();
    CHECK(kind_of([&] { validate_model(h); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("belief_init applies Bayes' rule to the initial measurement") {
    const mr::Params p;
    const Model m = mr::build_model(p);
    const Belief b1 = belief_init(m, mr::kProbablyBad);
    CHECK(b1.stage == 0);
    CHECK(b1.p[1] == doctest::Approx(0.14 / 0.38).epsilon(1e-12));
    CHECK(b1.p[1] == doctest::Approx(hand_rho0(p, 1)).epsilon(1e-12));
    const Belief b0 = belief_init(m, mr::kProbablyGood);
    CHECK(b0.p[1] == doctest::Approx(0.06 / 0.62).epsilon(1e-12));
    CHECK(b0.p.sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("an uninformative initial sensor leaves the prior unchanged") {
    Model m = mr::build_model(mr::Params{});
    m.H0 = Matrix::Constant(2, 2, 0.5);
    for (std::size_t z = 0; z < 2; ++z) {
        const Belief b = belief_init(m, z);
        CHECK((b.p - m.p0).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("impossible measurements raise zero-probability errors") {
    Model m = mr::build_model(mr::Params{});
    m.H0 << 1.0, 0.0, 1.0, 0.0;
    CHECK(kind_of([&] { (void)belief_init(m, 1); }) == ErrorKind::ZeroProbabilityMeasurement);
    const Belief b = belief_init(m, 0);
    m.stages[1].H[0] << 1.0, 0.0, 1.0, 0.0;
    CHECK(kind_of([&] { (void)belief_update(m, b, 0, 1); }) == ErrorKind::ZeroProbabilityMeasurement);
}

TEST_CASE("belief_update after repair resets to the prior-based posterior") {
    const Model m = mr::build_model(mr::Params{});
    for (double rho : {0.0, 0.3, 0.9, 1.0}) {
        const Belief b = belief_update(m, mr::belief_from_rho(0, rho), mr::kRepair, mr::kProbablyBad);
        CHECK(b.stage == 1);
        CHECK(b.p[1] == doctest::Approx(0.14 / 0.38).epsilon(1e-12));
    }
}

TEST_CASE("belief_update with identity dynamics and no information is a no-op") {
    Model m = mr::build_model(mr::Params{});
    m.stages[0].F[0] = Matrix::Identity(2, 2);
    m.stages[1].H[0] = Matrix::Constant(2, 2, 0.5);
    const Belief b0 = mr::belief_from_rho(0, 0.37);
    for (std::size_t z = 0; z < 2; ++z) {
        const Belief b1 = belief_update(m, b0, 0, z);
        CHECK((b1.p - b0.p).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("belief_update from a point mass follows a deterministic transition") {
    Model m = mr::build_model(mr::Params{});
    m.stages[0].F[0] << 0.0, 1.0, 1.0, 0.0;
    m.stages[1].H[0] = Matrix::Constant(2, 2, 0.5);
    const Belief b = belief_update(m, mr::belief_from_rho(0, 0.0), 0, 0);
    CHECK(b.p[1] == 1.0);
    CHECK(b.p[0] == 0.0);
}

TEST_CASE("belief_update rejects out-of-range stages") {
    const Model m = mr::build_model(mr::Params{});
    CHECK(kind_of([&] { (void)belief_update(m, mr::belief_from_rho(5, 0.2), 0, 0); }) == ErrorKind::IndexOutOfRange);
}

TEST_CASE("final-stage q-vector is [rho c_B, rho (c_D + c_B), c_R]") {
    const mr::Params p;
    const Model m = mr::build_model(p);
    for (double rho : {0.0, 0.1, 0.25, 0.5, 0.77, 1.0}) {
        const Vector q = q_vector(m, mr::belief_from_rho(p.K - 1, rho));
        CHECK(q[0] == doctest::Approx(rho * p.c_B).epsilon(1e-12));
        CHECK(q[1] == doctest::Approx(rho * (p.c_D + p.c_B) + (1.0 - rho) * p.c_D).epsilon(1e-12));
        CHECK(q[2] == doctest::Approx(p.c_R).epsilon(1e-12));
    }
    const Vector half = q_vector(m, mr::belief_from_rho(p.K - 1, 0.5));
    CHECK(half[0] == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(half[1] == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(half[2] == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("zero costs propagate to zero q-vectors at every stage") {
    std::mt19937_64 g(1);
    const Model m = zero_cost(ts::random_pomdp(g, 3, 3, 2, 2));
    for (std::size_t k = 0; k < 3; ++k) {
        Belief b{k, Vector::Constant(3, 1.0 / 3.0)};
        CHECK(q_vector(m, b).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(expected_total_cost(m) == 0.0);
}

TEST_CASE("final-stage cost-to-go is min(rho c_B, c_R)") {
    const mr::Params p;
    const Model m = mr::build_model(p);
    CHECK(J(m, 5, 0.0) == 0.0);
    CHECK(J(m, 5, 1.0) == doctest::Approx(5.0).epsilon(1e-14));
    for (double rho = 0.0; rho <= 1.0; rho += 0.05)
        CHECK(J(m, 5, rho) == doctest::Approx(std::min(rho * p.c_B, p.c_R)).epsilon(1e-12));
}

TEST_CASE("final-stage policy: default up to the threshold, repair beyond, never diagnose") {
    const mr::Params p;
    const Model m = mr::build_model(p);
    CHECK(optimal_control(m, mr::belief_from_rho(5, p.c_R / p.c_B)) == mr::kDefault);
    CHECK(optimal_control(m, mr::belief_from_rho(5, 0.5 + 1e-9)) == mr::kRepair);
    for (int i = 0; i <= 100; ++i)
        CHECK(optimal_control(m, mr::belief_from_rho(5, i / 100.0)) != mr::kDiagnose);
}

TEST_CASE("argmin_first breaks ties toward the smallest index") {
    Vector q(4);
    q << 3.0, 1.0, 1.0, 2.0;
    CHECK(argmin_first(q) == 1);
    q << 1.0, 1.0, 1.0, 1.0;
    CHECK(argmin_first(q) == 0);
    // Rounding-level differences are ties; resolvable ones are not.
    q << 5.3000000000000007, 5.3, 6.0, 5.3;
    CHECK(argmin_first(q) == 0);
    q << 5.3 + 1e-9, 5.3, 6.0, 5.3;
    CHECK(argmin_first(q) == 1);
}

TEST_CASE("expected_total_cost for one stage matches a two-term hand computation") {
    mr::Params p;
    p.K = 1;
    const Model m = mr::build_model(p);
    const double pr_bad = (1.0 - p.alpha) * p.eta_f + p.alpha * p.eta_d;
    const double hand = (1.0 - pr_bad) * std::min(hand_rho0(p, 0) * p.c_B, p.c_R) +
                        pr_bad * std::min(hand_rho0(p, 1) * p.c_B, p.c_R);
    CHECK(expected_total_cost(m) == doctest::Approx(hand).epsilon(1e-13));
    CHECK(hand == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("expected cost plateaus at K c_R as failures become certain") {
    mr::Params p;
    p.alpha = 0.999;
    CHECK(expected_total_cost(mr::build_model(p)) == doctest::Approx(30.0).epsilon(0.01));
    p.alpha = 1.0;
    CHECK(expected_total_cost(mr::build_model(p)) == doctest::Approx(30.0).epsilon(1e-12));
}

TEST_CASE("value consistency: J is exactly the minimum of q") {
    std::mt19937_64 g(2);
    for (int t = 0; t < 20; ++t) {
        const Model m = ts::random_pomdp(g, 3, 3, 3, 2);
        Belief b{1, ts::random_stochastic(g, 1, 3).row(0).transpose()};
        CHECK(cost_to_go(m, b) == q_vector(m, b).minCoeff());
        const std::size_t u = optimal_control(m, b);
        CHECK(optimal_control(m, b) == u);
        CHECK(q_vector(m, b)[static_cast<Eigen::Index>(u)] <= q_vector(m, b).minCoeff() + 1e-12 * std::max(1.0, cost_to_go(m, b)));
    }
}

TEST_CASE("belief closure under random filtering sequences") {
    std::mt19937_64 g(3);
    for (int t = 0; t < 200; ++t) {
        const Model m = ts::random_pomdp(g, 4, 4, 3, 3, true);
        Belief b;
        try {
            b = belief_init(m, ts::index_in(g, 0, 2));
        } catch (const Error&) {
            continue;
        }
        for (std::size_t k = 1; k < 4; ++k) {
            try {
                b = belief_update(m, b, ts::index_in(g, 0, 2), ts::index_in(g, 0, 2));
            } catch (const Error& e) {
                CHECK(e.kind() == ErrorKind::ZeroProbabilityMeasurement);
                break;
            }
            CHECK(b.stage == k);
            CHECK(b.p.minCoeff() >= 0.0);
            CHECK(std::abs(b.p.sum() - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("zero-probability branches are skipped in the recursion") {
    std::mt19937_64 g(4);
    for (int t = 0; t < 30; ++t) {
        const Model m = ts::random_pomdp(g, 3, 3, 2, 3, true);
        const double v = expected_total_cost(m);
        CHECK(std::isfinite(v));
    }
}

TEST_CASE("cost-to-go is concave in the belief on two-state models") {
    std::mt19937_64 g(5);
    for (int t = 0; t < 10; ++t) {
        const Model m = ts::random_pomdp(g, 3, 2, 2, 2);
        for (std::size_t k = 0; k < 3; ++k) {
            std::vector<double> vals;
            const int n = 41;
            for (int i = 0; i < n; ++i)
                vals.push_back(J(m, k, i / double(n - 1)));
            for (int i = 0; i < n; ++i) {
                for (int j = i + 2; j < n; j += 2) {
                    const double mid = J(m, k, (i + j) / 2.0 / double(n - 1));
                    CHECK(mid >= 0.5 * (vals[i] + vals[j]) - 1e-9);
                    const double lam = 0.3;
                    const double rho = lam * i / double(n - 1) + (1 - lam) * j / double(n - 1);
                    CHECK(J(m, k, rho) >= lam * vals[i] + (1 - lam) * vals[j] - 1e-9);
                }
            }
        }
    }
}

TEST_CASE("cost-to-go is piecewise linear on two-state models") {
    std::mt19937_64 g(6);
    const int n = 401;
    const double h = 1.0 / (n - 1);
    for (int t = 0; t < 4; ++t) {
        const Model m = ts::random_pomdp(g, 3, 2, 2, 2);
        for (std::size_t k = 0; k < 3; ++k) {
            std::vector<double> v(n);
            for (int i = 0; i < n; ++i)
                v[i] = J(m, k, i * h);
            // Group cells into runs of equal slope: the affine pieces between breakpoints.
            std::vector<double> slope(n - 1);
            for (int i = 0; i + 1 < n; ++i)
                slope[i] = (v[i + 1] - v[i]) / h;
            int pieces = 0;
            for (int start = 0; start < n - 1;) {
                int end = start + 1;
                while (end < n - 1 && std::abs(slope[end] - slope[start]) <= 1e-6 * std::max(1.0, std::abs(slope[start])))
                    ++end;
                // A one-cell run straddles a breakpoint; longer runs are affine
                // pieces, checked at off-grid midpoints.
                if (end - start >= 2)
                    ++pieces;
                for (int i = start; end - start >= 2 && i < end; ++i) {
                    const double x = (i + 0.5) * h;
                    const double line = v[start] + slope[start] * (x - start * h);
                    CHECK(std::abs(J(m, k, x) - line) <= 1e-7);
                }
                start = end;
            }
            // A smooth curve would produce no multi-cell runs at all.
            CHECK(pieces >= 1);
            CHECK(pieces < 60);
        }
    }
}

TEST_CASE("closed-loop cost never exceeds the best open-loop sequence") {
    std::mt19937_64 g(7);
    for (int t = 0; t < 100; ++t) {
        const std::size_t K = ts::index_in(g, 1, 3);
        const std::size_t n = ts::index_in(g, 2, 3);
        const std::size_t mm = ts::index_in(g, 1, 3);
        const std::size_t s = ts::index_in(g, 1, 3);
        const Model m = ts::random_pomdp(g, K, n, mm, s, t % 2 == 0);
        const double closed = expected_total_cost(m);
        CHECK(closed <= ts::best_open_loop(m) + 1e-9);
    }
}

TEST_CASE("open_loop_cost agrees with forward propagation") {
    std::mt19937_64 g(8);
    for (int t = 0; t < 20; ++t) {
        const Model m = ts::random_pomdp(g, 3, 3, 3, 2);
        std::vector<std::size_t> seq{ts::index_in(g, 0, 2), ts::index_in(g, 0, 2), ts::index_in(g, 0, 2)};
        CHECK(open_loop_cost(m, seq) == doctest::Approx(ts::open_loop_oracle(m, seq)).epsilon(1e-12));
    }
}

TEST_CASE("exact belief cache returns bit-identical values") {
    std::mt19937_64 g(9);
    const Model m = ts::random_pomdp(g, 4, 3, 3, 2);
    BeliefCache cache;
    const double plain = expected_total_cost(m);
    CHECK(expected_total_cost(m, &cache) == plain);
    CHECK(cache.size() > 0);
    CHECK(expected_total_cost(m, &cache) == plain);

    BeliefCache rounded(BeliefCache::Mode::Rounded);
    CHECK(expected_total_cost(m, &rounded) == doctest::Approx(plain).epsilon(1e-10));
}

TEST_CASE("rollouts are deterministic and account for every transition cost") {
    const mr::Params p;
    const Model m = mr::build_model(p);
    for (std::uint64_t seed : {0ULL, 1ULL, 12345ULL}) {
        const Rollout a = simulate_rollout(m, seed);
        const Rollout b = simulate_rollout(m, seed);
        CHECK(a.states == b.states);
        CHECK(a.controls == b.controls);
        CHECK(a.measurements == b.measurements);
        CHECK(a.realized_cost == b.realized_cost);
        REQUIRE(a.states.size() == p.K + 1);
        REQUIRE(a.controls.size() == p.K);
        REQUIRE(a.measurements.size() == p.K);
        double total = 0.0;
        for (std::size_t k = 0; k < p.K; ++k)
            total += m.stages[k].G[a.controls[k]](static_cast<Eigen::Index>(a.states[k]),
                                                  static_cast<Eigen::Index>(a.states[k + 1]));
        CHECK(a.realized_cost == doctest::Approx(total).epsilon(1e-14));
    }
}

TEST_CASE("rollout controls follow the optimal policy at the filtered belief") {
    const Model m = mr::build_model(mr::Params{});
    const Rollout r = simulate_rollout(m, 77);
    Belief b = belief_init(m, r.measurements[0]);
    for (std::size_t k = 0; k < r.controls.size(); ++k) {
        CHECK(r.controls[k] == optimal_control(m, b));
        if (k + 1 < r.controls.size())
            b = belief_update(m, b, r.controls[k], r.measurements[k + 1]);
    }
}

TEST_CASE("zero-cost rollouts cost nothing") {
    std::mt19937_64 g(10);
    const Model m = zero_cost(ts::random_pomdp(g, 3, 3, 2, 2));
    for (std::uint64_t seed = 0; seed < 20; ++seed)
        CHECK(simulate_rollout(m, seed).realized_cost == 0.0);
    const auto e = monte_carlo_cost(m, 50, 3);
    CHECK(e.mean == 0.0);
    CHECK(e.standard_error == 0.0);
}

TEST_CASE("monte_carlo_cost conventions") {
    const Model m = mr::build_model(mr::Params{});
    const auto one = monte_carlo_cost(m, 1, 4);
    CHECK(one.standard_error == 0.0);
    CHECK(one.mean == simulate_rollout(m, child_seed(4, 0)).realized_cost);
    CHECK(kind_of([&] { (void)monte_carlo_cost(m, 0, 4); }) == ErrorKind::InvalidParameters);
    const auto a = monte_carlo_cost(m, 2000, 9);
    const auto b = monte_carlo_cost(m, 2000, 9);
    CHECK(a.mean == b.mean);
    CHECK(a.standard_error == b.standard_error);
}

TEST_CASE("Monte Carlo mean agrees with the exact expected cost") {
    const Model m = mr::build_model(mr::Params{});
    const double exact = expected_total_cost(m);
    const auto e = monte_carlo_cost(m, 100000, 2024);
    CHECK(std::abs(e.mean - exact) <= 3.0 * e.standard_error);
}
