// sensorctl: command-line front end for the sensor-management toolkit.
//
// Every subcommand reads one model file, writes one table (CSV or JSON) and
// exits 0. On failure nothing is written, stderr carries a one-line
// structured message, and the exit status is 2 (parse error), 3 (invalid
// model) or 4 (numeric failure).

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sensorctl/direct_control.hpp"
#include "sensorctl/error.hpp"
#include "sensorctl/io.hpp"
#include "sensorctl/lqg.hpp"
#include "sensorctl/machine_repair.hpp"
#include "sensorctl/pomdp.hpp"
#include "sensorctl/rng.hpp"
#include "sensorctl/scheduling.hpp"

namespace {

using namespace sensorctl;
using io::csv_line;
using io::format_double;
using io::Json;
namespace dc = direct_control;
namespace mr = machine_repair;

constexpr int kExitParse = 2;
constexpr int kExitModel = 3;
constexpr int kExitNumeric = 4;

struct Config {
    std::string input;
    std::string output; // empty: stdout
    std::uint64_t seed = 0;
    std::size_t rollouts = 0; // 0: subcommand default
    std::size_t grid = 0;     // 0: subcommand default
    std::string format = "csv";
    std::string target;
    std::vector<double> values;
    std::optional<double> m00;
    std::vector<double> m00_offsets;
    std::vector<double> gammas;
    double u_min = -2.0;
    double u_max = 2.0;
    std::string q0_form = "published";
};

bool json_out(const Config& c) { return c.format == "json"; }

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::size_t or_default(std::size_t v, std::size_t fallback) { return v == 0 ? fallback : v; }

dc::Q0Form q0_form(const Config& c) {
    if (c.q0_form == "published")
        return dc::Q0Form::Published;
    if (c.q0_form == "exact")
        return dc::Q0Form::Exact;
    throw Error(ErrorKind::ParseError, "--q0-form must be published or exact");
}

std::string label(std::size_t zero_based) { return std::to_string(zero_based + 1); }

std::string mr_curves(const Config& c) {
    const mr::Params params = io::machine_repair_from_json(io::read_json_file(c.input));
    const auto tables = mr::policy_curves(params, or_default(c.grid, mr::kDefaultCurvePoints));
    if (json_out(c)) {
        Json out = Json::array();
        for (const auto& t : tables) {
            Json q = Json::array();
            Json arg = Json::array();
            for (std::size_t i = 0; i < t.grid.size(); ++i) {
                q.push_back({t.q[i][0], t.q[i][1], t.q[i][2]});
                arg.push_back(t.argmin[i] + 1);
            }
            out.push_back({{"stage", t.stage}, {"rho", t.grid}, {"q", q}, {"argmin", arg}});
        }
        return dump(out);
    }
    std::string csv = csv_line({"stage", "rho", "q1", "q2", "q3", "argmin"});
    for (const auto& t : tables) {
        for (std::size_t i = 0; i < t.grid.size(); ++i) {
            csv += csv_line({std::to_string(t.stage), format_double(t.grid[i]), format_double(t.q[i][0]),
                             format_double(t.q[i][1]), format_double(t.q[i][2]), label(t.argmin[i])});
        }
    }
    return csv;
}

std::string mr_sensitivity(const Config& c) {
    const mr::Params params = io::machine_repair_from_json(io::read_json_file(c.input));
    std::vector<mr::SweepTarget> targets;
    if (c.target.empty()) {
        targets = {mr::SweepTarget::Alpha, mr::SweepTarget::SensorAccuracy, mr::SweepTarget::DiagnosedAccuracy,
                   mr::SweepTarget::DiagnosisCost};
    } else {
        targets = {mr::parse_sweep_target(c.target)};
    }
    Json out = Json::array();
    std::string csv = csv_line({"param", "value", "expected_cost"});
    for (auto target : targets) {
        const std::vector<double> values =
            c.values.empty() ? mr::default_sweep_values(params, target, or_default(c.grid, 25)) : c.values;
        const std::string name(mr::to_string(target));
        for (const auto& row : mr::sensitivity_sweep(params, target, values)) {
            csv += csv_line({name, format_double(row.value), format_double(row.expected_cost)});
            out.push_back({{"param", name}, {"value", row.value}, {"expected_cost", row.expected_cost}});
        }
    }
    return json_out(c) ? dump(out) : csv;
}

std::string cost_summary(const pomdp::Model& model, const Config& c) {
    pomdp::validate_model(model);
    const std::size_t n = or_default(c.rollouts, 100000);
    pomdp::BeliefCache cache;
    const double exact = pomdp::expected_total_cost(model, &cache);
    const auto mc = pomdp::monte_carlo_cost(model, n, c.seed);
    if (json_out(c)) {
        return dump({{"expected_cost", exact},
                     {"mc_mean", mc.mean},
                     {"mc_stderr", mc.standard_error},
                     {"rollouts", n},
                     {"seed", c.seed}});
    }
    return csv_line({"expected_cost", "mc_mean", "mc_stderr", "rollouts", "seed"}) +
           csv_line({format_double(exact), format_double(mc.mean), format_double(mc.standard_error),
                     std::to_string(n), std::to_string(c.seed)});
}

std::string mr_cost(const Config& c) {
    const mr::Params params = io::machine_repair_from_json(io::read_json_file(c.input));
    return cost_summary(mr::build_model(params), c);
}

std::string pomdp_solve(const Config& c) {
    const pomdp::Model model = io::pomdp_from_json(io::read_json_file(c.input));
    pomdp::validate_model(model);
    pomdp::BeliefCache cache;
    Json rows = Json::array();
    std::string csv = csv_line({"z0", "probability", "cost_to_go", "control"});
    double total = 0.0;
    for (Eigen::Index z = 0; z < model.H0.cols(); ++z) {
        const double prob = model.H0.col(z).dot(model.p0);
        if (prob <= 0.0)
            continue;
        const pomdp::Belief b = pomdp::belief_init(model, static_cast<std::size_t>(z));
        const Vector q = pomdp::q_vector(model, b, &cache);
        const std::size_t u = pomdp::argmin_first(q);
        total += prob * q[static_cast<Eigen::Index>(u)];
        const auto zi = static_cast<std::size_t>(z);
        csv += csv_line({label(zi), format_double(prob), format_double(q[static_cast<Eigen::Index>(u)]), label(u)});
        rows.push_back({{"z0", zi + 1},
                        {"probability", prob},
                        {"belief", io::to_json(b.p)},
                        {"q", io::to_json(q)},
                        {"cost_to_go", q[static_cast<Eigen::Index>(u)]},
                        {"control", u + 1}});
    }
    if (json_out(c))
        return dump({{"initial_decisions", rows}, {"expected_total_cost", total}});
    return csv + csv_line({"all", format_double(1.0), format_double(total), ""});
}

std::string lqg_gains(const Config& c) {
    const lqg::Model model = io::lqg_from_json(io::read_json_file(c.input));
    lqg::validate_model(model);
    const lqg::GainSchedule g = lqg::lqr_gains(model);
    if (json_out(c)) {
        Json L = Json::array(), P = Json::array(), K = Json::array();
        for (const auto& m : g.L)
            L.push_back(io::to_json(m));
        for (const auto& m : g.P)
            P.push_back(io::to_json(m));
        for (const auto& m : g.K)
            K.push_back(io::to_json(m));
        return dump({{"L", L}, {"P", P}, {"K", K}});
    }
    std::string csv = csv_line({"stage", "matrix", "row", "col", "value"});
    auto emit = [&](const char* name, const std::vector<Matrix>& ms) {
        for (std::size_t k = 0; k < ms.size(); ++k) {
            for (Eigen::Index r = 0; r < ms[k].rows(); ++r) {
                for (Eigen::Index col = 0; col < ms[k].cols(); ++col) {
                    csv += csv_line({std::to_string(k), name, std::to_string(r + 1), std::to_string(col + 1),
                                     format_double(ms[k](r, col))});
                }
            }
        }
    };
    emit("L", g.L);
    emit("P", g.P);
    emit("K", g.K);
    return csv;
}

std::string lqg_simulate(const Config& c) {
    const lqg::Model model = io::lqg_from_json(io::read_json_file(c.input));
    lqg::validate_model(model);
    const lqg::GainSchedule gains = lqg::lqr_gains(model);
    const std::size_t n = or_default(c.rollouts, 1);

    std::vector<std::string> header{"rollout", "stage"};
    for (std::size_t i = 0; i < model.n; ++i)
        header.push_back("x" + std::to_string(i + 1));
    for (std::size_t i = 0; i < model.m; ++i)
        header.push_back("u" + std::to_string(i + 1));
    for (std::size_t i = 0; i < model.s; ++i)
        header.push_back("z" + std::to_string(i + 1));
    header.push_back("cost");
    std::string csv = csv_line(header);
    Json out = Json::array();

    for (std::size_t run = 0; run < n; ++run) {
        const std::uint64_t seed = n == 1 ? c.seed : child_seed(c.seed, run);
        const lqg::Trajectory traj = lqg::simulate_lqg(model, gains, seed);
        for (std::size_t k = 0; k <= model.K; ++k) {
            std::vector<std::string> cells{std::to_string(run), std::to_string(k)};
            auto append = [&](const std::vector<Vector>& seq, std::size_t dim) {
                for (std::size_t i = 0; i < dim; ++i)
                    cells.push_back(k < seq.size() ? format_double(seq[k][static_cast<Eigen::Index>(i)]) : "");
            };
            append(traj.states, model.n);
            append(traj.controls, model.m);
            append(traj.measurements, model.s);
            cells.push_back(format_double(traj.stage_costs[k]));
            csv += csv_line(cells);
        }
        Json states = Json::array(), controls = Json::array(), meas = Json::array();
        for (const auto& v : traj.states)
            states.push_back(io::to_json(v));
        for (const auto& v : traj.controls)
            controls.push_back(io::to_json(v));
        for (const auto& v : traj.measurements)
            meas.push_back(io::to_json(v));
        out.push_back({{"seed", seed},
                       {"states", states},
                       {"controls", controls},
                       {"measurements", meas},
                       {"stage_costs", traj.stage_costs},
                       {"total_cost", traj.total_cost}});
    }
    return json_out(c) ? dump(out) : csv;
}

std::string schedule(const Config& c) {
    const std::filesystem::path path(c.input);
    const scheduling::SensorMenu menu = io::menu_from_json(io::read_json_file(path), path.parent_path());
    scheduling::validate_menu(menu);
    const auto result = scheduling::optimal_schedule(menu, lqg::lqr_gains(menu.base));
    if (json_out(c))
        return dump(io::to_json(result));
    std::string csv = csv_line({"stage", "sensor", "estimation_cost", "measurement_cost", "cov_trace"});
    for (std::size_t k = 0; k < result.schedule.size(); ++k) {
        csv += csv_line({std::to_string(k), label(result.schedule[k]), format_double(result.estimation_costs[k]),
                         format_double(result.measurement_costs[k]), format_double(result.covariances[k].trace())});
    }
    double estimation = 0.0;
    double measurement = 0.0;
    for (std::size_t k = 0; k < result.schedule.size(); ++k) {
        estimation += result.estimation_costs[k];
        measurement += result.measurement_costs[k];
    }
    return csv + csv_line({"total", "", format_double(estimation), format_double(measurement), ""});
}

std::string dmc_curves(const Config& c) {
    const dc::ScalarTwoStageModel model = io::direct_control_from_json(io::read_json_file(c.input));
    dc::validate(model);
    const std::vector<double> offsets =
        c.m00_offsets.empty() ? std::vector<double>{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0} : c.m00_offsets;
    const std::vector<double> gammas = c.gammas.empty() ? std::vector<double>{1e-12, 1.0, 10.0, 100.0} : c.gammas;
    if (!(c.u_min < c.u_max))
        throw Error(ErrorKind::ParseError, "--u-min must be below --u-max");
    const std::size_t points = or_default(c.grid, 401);
    if (points < 2)
        throw Error(ErrorKind::ParseError, "--grid must be at least 2");
    std::vector<double> u_grid(points);
    for (std::size_t i = 0; i < points; ++i)
        u_grid[i] = c.u_min + (c.u_max - c.u_min) * static_cast<double>(i) / static_cast<double>(points - 1);
    const double s00 = dc::scalar_filter(model, 0.0).s00;
    std::vector<double> m00_cases;
    for (double o : offsets)
        m00_cases.push_back(model.m_x + o * std::sqrt(s00));

    const auto curves = dc::q0_curve(model, m00_cases, gammas, u_grid, q0_form(c));
    Json out = Json::array();
    std::string csv = csv_line({"case", "m00", "gamma", "u0", "Q", "is_minimizer"});
    for (const auto& curve : curves) {
        const std::string cs = std::to_string(curve.case_index + 1);
        for (std::size_t i = 0; i < curve.u0.size(); ++i) {
            csv += csv_line({cs, format_double(curve.m00), format_double(curve.gamma), format_double(curve.u0[i]),
                             format_double(curve.q[i]), "0"});
        }
        if (curve.has_minimizer) {
            csv += csv_line({cs, format_double(curve.m00), format_double(curve.gamma), format_double(curve.u0_star),
                             format_double(curve.q_star), "1"});
        }
        Json j = {{"case", curve.case_index + 1}, {"m00", curve.m00}, {"gamma", curve.gamma},
                  {"u0", curve.u0},              {"Q", curve.q},     {"has_minimizer", curve.has_minimizer}};
        if (curve.has_minimizer) {
            j["u0_star"] = curve.u0_star;
            j["Q_star"] = curve.q_star;
        }
        out.push_back(std::move(j));
    }
    return json_out(c) ? dump(out) : csv;
}

std::vector<double> default_u0_sweep_values(dc::U0SweepTarget target) {
    switch (target) {
    case dc::U0SweepTarget::Gamma: return {1e-12, 1.0, 10.0, 100.0};
    default: return {0.25, 1.0, 4.0};
    }
}

std::string dmc_sweep(const Config& c) {
    const dc::ScalarTwoStageModel model = io::direct_control_from_json(io::read_json_file(c.input));
    dc::validate(model);
    std::vector<dc::U0SweepTarget> targets;
    if (c.target.empty()) {
        targets = {dc::U0SweepTarget::SigmaW2, dc::U0SweepTarget::SigmaV2, dc::U0SweepTarget::Gamma,
                   dc::U0SweepTarget::TOverR};
    } else {
        targets = {dc::parse_u0_sweep_target(c.target)};
    }
    const std::vector<double> offsets = dc::unit_offsets(or_default(c.grid, 101));
    Json out = Json::array();
    std::string csv = csv_line({"param", "param_value", "m00", "u0_star", "status"});
    for (auto target : targets) {
        const std::vector<double> values = c.values.empty() ? default_u0_sweep_values(target) : c.values;
        const std::string name(dc::to_string(target));
        for (const auto& row : dc::sensitivity_sweep_u0(model, target, values, offsets, q0_form(c))) {
            const char* status = row.ok ? "ok" : "no-minimizer";
            csv += csv_line({name, format_double(row.param_value), format_double(row.m00),
                             format_double(row.u0_star), status});
            Json j = {{"param", name}, {"param_value", row.param_value}, {"m00", row.m00}, {"status", status}};
            j["u0_star"] = row.ok ? Json(row.u0_star) : Json(nullptr);
            out.push_back(std::move(j));
        }
    }
    return json_out(c) ? dump(out) : csv;
}

std::string dmc_solve(const Config& c) {
    const dc::ScalarTwoStageModel model = io::direct_control_from_json(io::read_json_file(c.input));
    dc::validate(model);
    const double m00 = c.m00.value_or(model.m_x);
    const dc::Q0Coefficients q = dc::q0_coefficients(model, m00, q0_form(c));
    const dc::U0Solution sol = dc::solve_u0(q, m00);
    if (json_out(c)) {
        return dump({{"m00", m00},
                     {"gamma", model.gamma},
                     {"u0_star", sol.u0},
                     {"Q", sol.q},
                     {"stationary_points", sol.stationary_points},
                     {"minima", sol.minima},
                     {"alpha", q.alpha},
                     {"beta0", q.beta0},
                     {"beta2", q.beta2},
                     {"delta", q.delta},
                     {"epsilon", q.epsilon}});
    }
    return csv_line({"m00", "gamma", "u0_star", "Q"}) +
           csv_line({format_double(m00), format_double(model.gamma), format_double(sol.u0), format_double(sol.q)});
}

int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::ParseError: return kExitParse;
    case ErrorKind::DimensionMismatch:
    case ErrorKind::NonStochasticRow:
    case ErrorKind::InvalidParameters:
    case ErrorKind::ConstraintViolation:
    case ErrorKind::IndexOutOfRange:
    case ErrorKind::SearchSpaceTooLarge: return kExitModel;
    default: return kExitNumeric;
    }
}

const char* category(int code) {
    switch (code) {
    case kExitParse: return "parse-error";
    case kExitModel: return "model-invalid";
    default: return "numeric-failure";
    }
}

int fail(int code, std::string_view kind, const std::string& message) {
    std::cerr << "sensorctl: error category=" << category(code) << " kind=" << kind << ": " << message << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-horizon stochastic control with sensor management"};
    app.require_subcommand(1);
    Config cfg;

    using Runner = std::string (*)(const Config&);
    struct Command {
        const char* name;
        const char* help;
        Runner run;
    };
    const Command commands[] = {
        {"mr-curves", "machine-repair policy curves q_k(rho) for every stage", mr_curves},
        {"mr-sensitivity", "machine-repair expected cost versus one parameter", mr_sensitivity},
        {"mr-cost", "machine-repair expected cost and Monte Carlo check", mr_cost},
        {"pomdp-solve", "expected cost and stage-0 decisions of a general PO-MDP", pomdp_solve},
        {"lqg-gains", "LQR gain schedule of a linear-Gaussian model", lqg_gains},
        {"lqg-simulate", "seeded closed-loop LQG trajectories", lqg_simulate},
        {"schedule", "optimal measurement schedule for a sensor menu", schedule},
        {"dmc-curves", "direct-control Q0 curves over u0", dmc_curves},
        {"dmc-sweep", "direct-control u0* versus m00 under a parameter sweep", dmc_sweep},
        {"dmc-solve", "direct-control optimal u0 for one m00", dmc_solve},
    };

    Runner selected = nullptr;
    for (const auto& cmd : commands) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        sub->add_option("--input", cfg.input, "model JSON")->required();
        sub->add_option("--output", cfg.output, "output file (stdout when omitted)");
        sub->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--rollouts", cfg.rollouts, "Monte Carlo rollouts")->check(CLI::PositiveNumber);
        sub->add_option("--grid", cfg.grid, "grid size")->check(CLI::PositiveNumber);
        sub->add_option("--target", cfg.target, "sweep parameter");
        sub->add_option("--values", cfg.values, "sweep values, comma separated")->delimiter(',');
        sub->add_option("--m00", cfg.m00, "conditional mean m_{0|0}");
        sub->add_option("--m00-offsets", cfg.m00_offsets, "m00 cases in units of sigma_{0|0}")->delimiter(',');
        sub->add_option("--gamma", cfg.gammas, "gamma values, comma separated")->delimiter(',');
        sub->add_option("--u-min", cfg.u_min, "lower end of the u0 grid");
        sub->add_option("--u-max", cfg.u_max, "upper end of the u0 grid");
        sub->add_option("--q0-form", cfg.q0_form, "published or exact")->check(CLI::IsMember({"published", "exact"}));
        sub->callback([&selected, run = cmd.run] { selected = run; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(kExitParse, "usage", e.what());
    }

    try {
        const std::string content = selected(cfg);
        if (cfg.output.empty())
            std::cout << content;
        else
            io::write_file_atomic(cfg.output, content);
    } catch (const Error& e) {
        const int code = exit_code(e.kind());
        return fail(code, to_string(e.kind()), e.what());
    } catch (const Json::exception& e) {
        return fail(kExitParse, "parse-error", e.what());
    } catch (const std::exception& e) {
        return fail(kExitNumeric, "internal", e.what());
    }
    return 0;
}
