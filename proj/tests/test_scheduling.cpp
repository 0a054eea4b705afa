#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "sensorctl/error.hpp"
#include "sensorctl/scheduling.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace sensorctl;
using namespace sensorctl::scheduling;
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

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

SensorMenu scalar_menu(std::size_t K, std::vector<SensorOption> per_stage) {
    SensorMenu menu;
    menu.base = ts::scalar_ones(K);
    menu.options.assign(K, std::move(per_stage));
    return menu;
}

Matrix psd_sqrt(const Matrix& m) { return Eigen::SelfAdjointEigenSolver<Matrix>(m).operatorSqrt(); }

} // namespace

TEST_CASE("covariance_step on the scalar all-ones model") {
    const SensorMenu menu = scalar_menu(2, {{scalar(1.0), 0.0}, {scalar(0.1), 1.0}});
    const Matrix s0 = initial_covariance(menu);
    CHECK(s0(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(covariance_step(menu, 0, s0, 0)(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(covariance_step(menu, 0, s0, 1)(0, 0) == doctest::Approx(1.5 * 0.1 / 1.6).epsilon(1e-15));
    CHECK(kind_of([&] { (void)covariance_step(menu, 0, s0, 2); }) == ErrorKind::IndexOutOfRange);
}

TEST_CASE("two-stage schedule cost by hand") {
    // P_0 = 0.9 and P_1 = 0.5 for the all-ones weights.
    const SensorMenu menu = scalar_menu(2, {{scalar(0.1), 1.0}, {scalar(4.0), 0.0}});
    const lqg::GainSchedule g = lqg::lqr_gains(menu.base);
    const double precise = 0.9 * 0.5 + 1.0 + 0.5 * (1.5 * 0.1 / 1.6) + 0.0;
    const double cheap = 0.9 * 0.5 + 0.0 + 0.5 * (1.5 * 4.0 / 5.5) + 0.0;
    CHECK(schedule_cost(menu, g, {0, 1}) == doctest::Approx(precise).epsilon(1e-14));
    CHECK(schedule_cost(menu, g, {1, 1}) == doctest::Approx(cheap).epsilon(1e-14));
    const ScheduleResult r = optimal_schedule(menu, g);
    CHECK(r.schedule == std::vector<std::size_t>{1, 1});
    CHECK(r.total_measurement_cost == doctest::Approx(cheap).epsilon(1e-14));
    REQUIRE(r.estimation_costs.size() == 2);
    CHECK(r.estimation_costs[0] == doctest::Approx(0.45).epsilon(1e-14));
    CHECK(r.measurement_costs[0] == 0.0);
    CHECK(r.covariances[1](0, 0) == doctest::Approx(1.5 * 4.0 / 5.5).epsilon(1e-14));
}

TEST_CASE("evaluate_schedule decomposes the cost") {
    std::mt19937_64 g(21);
    for (int t = 0; t < 20; ++t) {
        const SensorMenu menu = ts::random_menu(g);
        const auto gains = lqg::lqr_gains(menu.base);
        std::vector<std::size_t> y;
        for (const auto& opts : menu.options)
            y.push_back(ts::index_in(g, 0, opts.size() - 1));
        const ScheduleResult r = evaluate_schedule(menu, gains, y);
        double sum = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k)
            sum += r.estimation_costs[k] + r.measurement_costs[k];
        CHECK(r.total_measurement_cost == doctest::Approx(sum).epsilon(1e-12));
        CHECK(r.total_measurement_cost == doctest::Approx(ts::oracle_schedule_cost(menu, gains, y)).epsilon(1e-10));
    }
}

TEST_CASE("the final-stage sensor is the cheapest one, first on ties") {
    const SensorMenu menu = scalar_menu(3, {{scalar(0.1), 2.0}, {scalar(5.0), 0.5}, {scalar(9.0), 0.5}});
    const ScheduleResult r = optimal_schedule(menu, lqg::lqr_gains(menu.base));
    CHECK(r.schedule.back() == 1);
}

TEST_CASE("identical sensors resolve to the smaller index") {
    const SensorMenu menu = scalar_menu(4, {{scalar(0.5), 0.3}, {scalar(0.5), 0.3}});
    const ScheduleResult r = optimal_schedule(menu, lqg::lqr_gains(menu.base));
    CHECK(r.schedule == std::vector<std::size_t>{0, 0, 0, 0});
}

TEST_CASE("dynamic program matches exhaustive enumeration on random menus") {
    std::mt19937_64 g(22);
    for (int t = 0; t < 200; ++t) {
        const SensorMenu menu = ts::random_menu(g, t % 4 == 0);
        const auto gains = lqg::lqr_gains(menu.base);
        const ts::BestSchedule best = ts::enumerate_schedules(menu, gains);
        const ScheduleResult r = optimal_schedule(menu, gains);
        CHECK(std::abs(r.total_measurement_cost - best.cost) <= 1e-9 * std::max(1.0, best.cost));
        CHECK(r.schedule == best.schedule);
        const ScheduleResult ex = exhaustive_schedule_oracle(menu, gains);
        CHECK(ex.schedule == best.schedule);

        const auto& last = menu.options.back();
        std::size_t cheapest = 0;
        for (std::size_t i = 1; i < last.size(); ++i)
            if (last[i].cost < last[cheapest].cost)
                cheapest = i;
        CHECK(r.schedule.back() == cheapest);
    }
}

TEST_CASE("covariance merging does not change the result") {
    std::mt19937_64 g(23);
    for (int t = 0; t < 50; ++t) {
        const SensorMenu menu = ts::random_menu(g, true);
        const auto gains = lqg::lqr_gains(menu.base);
        const ScheduleResult merged = optimal_schedule(menu, gains, {true, 1e-12});
        const ScheduleResult plain = optimal_schedule(menu, gains, {false, 1e-12});
        CHECK(merged.schedule == plain.schedule);
        CHECK(merged.total_measurement_cost == doctest::Approx(plain.total_measurement_cost).epsilon(1e-12));
    }
}

TEST_CASE("the schedule ignores the prior mean") {
    std::mt19937_64 g(24);
    for (int t = 0; t < 20; ++t) {
        SensorMenu menu = ts::random_menu(g);
        const auto gains = lqg::lqr_gains(menu.base);
        const ScheduleResult a = optimal_schedule(menu, gains);
        menu.base.m_x0 *= -7.0;
        menu.base.m_x0.array() += 3.0;
        const ScheduleResult b = optimal_schedule(menu, gains);
        CHECK(a.schedule == b.schedule);
        CHECK(a.total_measurement_cost == b.total_measurement_cost);
    }
}

TEST_CASE("estimation cost equals the squared norm of P^1/2 Sigma^1/2") {
    std::mt19937_64 g(25);
    for (int t = 0; t < 30; ++t) {
        const SensorMenu menu = ts::random_menu(g);
        const auto gains = lqg::lqr_gains(menu.base);
        const ScheduleResult r = optimal_schedule(menu, gains);
        for (std::size_t k = 0; k < r.schedule.size(); ++k) {
            const Matrix sym = symmetrize(gains.P[k]);
            // P_k is PSD up to rounding; clip before the square root.
            Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
            const Matrix root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                                es.eigenvectors().transpose();
            const double frob = (root * psd_sqrt(r.covariances[k])).squaredNorm();
            CHECK(std::abs(r.estimation_costs[k] - frob) <= 1e-8 * std::max(1.0, frob));
        }
    }
}

TEST_CASE("free sensors: the least noisy one is used until the last stage") {
    std::mt19937_64 g(26);
    for (int t = 0; t < 20; ++t) {
        SensorMenu menu;
        const std::size_t K = ts::index_in(g, 2, 5);
        menu.base = ts::random_lqg(g, K, 2, 1, 2);
        const Matrix base = ts::random_spd(g, 2, 0.1);
        // Sensor 2 dominates sensors 0 and 1 in the Loewner order.
        menu.options.assign(K, {{2.0 * base, 0.0}, {3.0 * base, 0.0}, {0.5 * base, 0.0}});
        const ScheduleResult r = optimal_schedule(menu, lqg::lqr_gains(menu.base));
        for (std::size_t k = 0; k + 1 < K; ++k)
            CHECK(r.schedule[k] == 2);
        CHECK(r.schedule.back() == 0);
    }
}

TEST_CASE("scheduling errors") {
    SensorMenu big = scalar_menu(7, std::vector<SensorOption>(10, {scalar(1.0), 1.0}));
    const auto gains = lqg::lqr_gains(big.base);
    CHECK(kind_of([&] { (void)exhaustive_schedule_oracle(big, gains); }) == ErrorKind::SearchSpaceTooLarge);
    CHECK_NOTHROW((void)optimal_schedule(big, gains));

    const SensorMenu menu = scalar_menu(2, {{scalar(1.0), 0.0}});
    const auto g2 = lqg::lqr_gains(menu.base);
    CHECK(kind_of([&] { (void)evaluate_schedule(menu, g2, {0, 1}); }) == ErrorKind::IndexOutOfRange);

    SensorMenu short_menu = menu;
    short_menu.options.pop_back();
    CHECK(kind_of([&] { validate_menu(short_menu); }) == ErrorKind::DimensionMismatch);
    SensorMenu empty = menu;
    empty.options[0].clear();
    CHECK(kind_of([&] { validate_menu(empty); }) != ErrorKind::ParseError);
    SensorMenu wrong = menu;
    wrong.options[0][0].cov = Matrix::Identity(2, 2);
    CHECK(kind_of([&] { validate_menu(wrong); }) == ErrorKind::DimensionMismatch);
}
