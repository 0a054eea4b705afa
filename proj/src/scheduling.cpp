#include "sensorctl/scheduling.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sensorctl::scheduling {
namespace {

// Ties within this relative tolerance resolve to the smaller sensor index.
constexpr double kTieTol = 1e-12;

double tie_slack(double value) { return kTieTol * std::max(1.0, std::abs(value)); }

struct Node {
    Matrix cov;
    std::vector<std::size_t> children; // per sensor, index into the next layer
    double value = 0.0;                // H_k(cov)
    std::size_t best = 0;
};

std::size_t find_or_add(std::vector<Node>& layer, Matrix cov, const ScheduleOptions& options) {
    if (options.merge_covariances) {
        for (std::size_t i = 0; i < layer.size(); ++i) {
            if ((layer[i].cov - cov).cwiseAbs().maxCoeff() <= options.merge_tol)
                return i;
        }
    }
    layer.push_back(Node{std::move(cov), {}, 0.0, 0});
    return layer.size() - 1;
}

void check_schedule(const SensorMenu& menu, const std::vector<std::size_t>& schedule) {
    if (schedule.size() != menu.base.K)
        throw Error(ErrorKind::IndexOutOfRange, "schedule length must equal the horizon");
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        if (schedule[k] >= menu.options[k].size())
            throw Error(ErrorKind::IndexOutOfRange, "sensor " + std::to_string(schedule[k]) + " at stage " +
                                                        std::to_string(k));
    }
}

} // namespace

void validate_menu(const SensorMenu& menu) {
    lqg::validate_model(menu.base);
    if (menu.options.size() != menu.base.K)
        throw Error(ErrorKind::DimensionMismatch, "menu needs one option list per stage");
    for (std::size_t k = 0; k < menu.options.size(); ++k) {
        if (menu.options[k].empty())
            throw Error(ErrorKind::InvalidParameters, "stage " + std::to_string(k) + " has no sensors");
        for (const auto& opt : menu.options[k]) {
            if (static_cast<std::size_t>(opt.cov.rows()) != menu.base.s ||
                static_cast<std::size_t>(opt.cov.cols()) != menu.base.s)
                throw Error(ErrorKind::DimensionMismatch, "sensor covariance at stage " + std::to_string(k));
            require_symmetric(opt.cov, true, "sensor covariance");
            if (!std::isfinite(opt.cost))
                throw Error(ErrorKind::InvalidParameters, "sensor cost must be finite");
        }
    }
}

Matrix initial_covariance(const SensorMenu& menu) {
    const lqg::Model& b = menu.base;
    return lqg::correct_covariance(b.C[0], b.Sigma_x0, b.Sigma_v[0]);
}

Matrix covariance_step(const SensorMenu& menu, std::size_t k, const Matrix& sigma, std::size_t y) {
    const lqg::Model& b = menu.base;
    if (k + 1 >= b.K)
        throw Error(ErrorKind::IndexOutOfRange, "no measurement follows stage " + std::to_string(k));
    if (y >= menu.options[k].size())
        throw Error(ErrorKind::IndexOutOfRange, "sensor " + std::to_string(y) + " at stage " + std::to_string(k));
    const Matrix predicted = lqg::predict_covariance(b.A[k], sigma, b.Sigma_w[k]);
    return lqg::correct_covariance(b.C[k + 1], predicted, menu.options[k][y].cov);
}

ScheduleResult evaluate_schedule(const SensorMenu& menu, const lqg::GainSchedule& gains,
                                 const std::vector<std::size_t>& schedule) {
    check_schedule(menu, schedule);
    ScheduleResult out;
    out.schedule = schedule;
    Matrix sigma = initial_covariance(menu);
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        if (k > 0)
            sigma = covariance_step(menu, k - 1, sigma, schedule[k - 1]);
        // trace(P^{1/2} Sigma P^{1/2}) = trace(P Sigma)
        out.estimation_costs.push_back((gains.P[k] * sigma).trace());
        out.measurement_costs.push_back(menu.options[k][schedule[k]].cost);
        out.covariances.push_back(sigma);
    }
    for (std::size_t k = 0; k < schedule.size(); ++k)
        out.total_measurement_cost += out.estimation_costs[k] + out.measurement_costs[k];
    return out;
}

double schedule_cost(const SensorMenu& menu, const lqg::GainSchedule& gains,
                     const std::vector<std::size_t>& schedule) {
    return evaluate_schedule(menu, gains, schedule).total_measurement_cost;
}

ScheduleResult optimal_schedule(const SensorMenu& menu, const lqg::GainSchedule& gains,
                                const ScheduleOptions& options) {
    const std::size_t K = menu.base.K;
    std::vector<std::vector<Node>> layers(K);
    layers[0].push_back(Node{initial_covariance(menu), {}, 0.0, 0});

    for (std::size_t k = 0; k + 1 < K; ++k) {
        for (std::size_t i = 0; i < layers[k].size(); ++i) {
            for (std::size_t y = 0; y < menu.options[k].size(); ++y) {
                Matrix next = covariance_step(menu, k, layers[k][i].cov, y);
                const std::size_t child = find_or_add(layers[k + 1], std::move(next), options);
                layers[k][i].children.push_back(child);
            }
        }
    }

    for (std::size_t k = K; k-- > 0;) {
        const auto& opts = menu.options[k];
        for (Node& node : layers[k]) {
            std::vector<double> candidate(opts.size());
            for (std::size_t y = 0; y < opts.size(); ++y) {
                candidate[y] = opts[y].cost;
                if (k + 1 < K)
                    candidate[y] += layers[k + 1][node.children[y]].value;
            }
            double best = std::numeric_limits<double>::infinity();
            for (double c : candidate)
                best = std::min(best, c);
            std::size_t y = 0;
            while (candidate[y] > best + tie_slack(best))
                ++y;
            node.best = y;
            node.value = (gains.P[k] * node.cov).trace() + candidate[y];
        }
    }

    std::vector<std::size_t> schedule;
    std::size_t idx = 0;
    for (std::size_t k = 0; k < K; ++k) {
        const Node& node = layers[k][idx];
        schedule.push_back(node.best);
        if (k + 1 < K)
            idx = node.children[node.best];
    }
    ScheduleResult out = evaluate_schedule(menu, gains, schedule);
    out.total_measurement_cost = layers[0][0].value;
    return out;
}

ScheduleResult exhaustive_schedule_oracle(const SensorMenu& menu, const lqg::GainSchedule& gains) {
    const std::size_t K = menu.base.K;
    double count = 1.0;
    for (const auto& opts : menu.options)
        count *= static_cast<double>(opts.size());
    if (count > kMaxExhaustiveSchedules)
        throw Error(ErrorKind::SearchSpaceTooLarge, std::to_string(count) + " schedules");

    std::vector<std::size_t> schedule(K, 0);
    std::vector<std::size_t> best_schedule = schedule;
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        const double cost = schedule_cost(menu, gains, schedule);
        if (cost < best - (std::isinf(best) ? 0.0 : tie_slack(best))) {
            best = cost;
            best_schedule = schedule;
        }
        // Odometer increment, last stage fastest: lexicographic order.
        std::size_t k = K;
        while (k > 0) {
            --k;
            if (++schedule[k] < menu.options[k].size())
                break;
            schedule[k] = 0;
            if (k == 0) {
                return evaluate_schedule(menu, gains, best_schedule);
            }
        }
    }
}

} // namespace sensorctl::scheduling
