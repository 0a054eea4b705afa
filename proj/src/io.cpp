#include "sensorctl/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sensorctl/error.hpp"

namespace sensorctl::io {
namespace {

[[noreturn]] void parse_fail(const std::string& msg) { throw Error(ErrorKind::ParseError, msg); }

const Json& field(const Json& j, const char* name) {
    if (!j.is_object())
        parse_fail(std::string("expected an object holding '") + name + "'");
    const auto it = j.find(name);
    if (it == j.end())
        parse_fail(std::string("missing field '") + name + "'");
    return *it;
}

double number(const Json& j, const char* name) {
    const Json& v = field(j, name);
    if (!v.is_number())
        parse_fail(std::string("field '") + name + "' must be a number");
    return v.get<double>();
}

std::size_t count(const Json& j, const char* name) {
    const Json& v = field(j, name);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        parse_fail(std::string("field '") + name + "' must be a nonnegative integer");
    return v.get<std::size_t>();
}

bool is_matrix_shaped(const Json& j) { return j.is_number() || (j.is_array() && !j.empty() && j[0].is_array()); }

std::vector<Matrix> matrix_list(const Json& j, const char* what) {
    if (!j.is_array())
        parse_fail(std::string(what) + " must be a list of matrices");
    std::vector<Matrix> out;
    for (const auto& item : j)
        out.push_back(matrix_from_json(item, what));
    return out;
}

// A single matrix stands for `copies` identical stages.
std::vector<Matrix> staged(const Json& j, const char* name, std::size_t copies) {
    const Json& v = field(j, name);
    if (is_matrix_shaped(v) && !(v.is_array() && v[0].is_array() && !v[0].empty() && v[0][0].is_array()))
        return std::vector<Matrix>(copies, matrix_from_json(v, name));
    return matrix_list(v, name);
}

Json matrix_list_json(const std::vector<Matrix>& ms) {
    Json out = Json::array();
    for (const auto& m : ms)
        out.push_back(to_json(m));
    return out;
}

} // namespace

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        parse_fail("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return Json::parse(buf.str());
    } catch (const Json::exception& e) {
        parse_fail(path.string() + ": " + e.what());
    }
}

Matrix matrix_from_json(const Json& j, const char* what) {
    if (j.is_number())
        return Matrix::Constant(1, 1, j.get<double>());
    if (!j.is_array() || j.empty() || !j[0].is_array())
        parse_fail(std::string(what) + " must be an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            parse_fail(std::string(what) + " has ragged rows");
        for (Eigen::Index c = 0; c < cols; ++c) {
            const Json& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number())
                parse_fail(std::string(what) + " has a non-numeric entry");
            m(r, c) = v.get<double>();
        }
    }
    return m;
}

Vector vector_from_json(const Json& j, const char* what) {
    if (j.is_number())
        return Vector::Constant(1, j.get<double>());
    if (!j.is_array())
        parse_fail(std::string(what) + " must be an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number())
            parse_fail(std::string(what) + " has a non-numeric entry");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Json to_json(const Matrix& m) {
    Json out = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

Json to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(v[i]);
    return out;
}

pomdp::Model pomdp_from_json(const Json& j) {
    const std::size_t K = count(j, "K");
    const Json& stages = field(j, "stages");
    if (!stages.is_array() || stages.size() != K)
        parse_fail("'stages' must list K stages");
    pomdp::Model model;
    for (std::size_t k = 0; k < K; ++k) {
        const Json& st = stages[k];
        pomdp::Stage stage;
        stage.n = count(st, "n");
        stage.m = count(st, "m");
        stage.s = count(st, "s");
        stage.F = matrix_list(field(st, "F"), "F");
        stage.G = matrix_list(field(st, "G"), "G");
        if (k > 0)
            stage.H = matrix_list(field(st, "H"), "H");
        model.stages.push_back(std::move(stage));
    }
    model.H0 = matrix_from_json(field(j, "H0"), "H0");
    model.p0 = vector_from_json(field(j, "p0"), "p0");
    return model;
}

Json to_json(const pomdp::Model& model) {
    Json stages = Json::array();
    for (std::size_t k = 0; k < model.stages.size(); ++k) {
        const auto& st = model.stages[k];
        Json s = {{"n", st.n}, {"m", st.m}, {"s", st.s}, {"F", matrix_list_json(st.F)}, {"G", matrix_list_json(st.G)}};
        if (k > 0)
            s["H"] = matrix_list_json(st.H);
        stages.push_back(std::move(s));
    }
    return {{"K", model.stages.size()}, {"stages", stages}, {"H0", to_json(model.H0)}, {"p0", to_json(model.p0)}};
}

machine_repair::Params machine_repair_from_json(const Json& j) {
    machine_repair::Params p;
    p.alpha = number(j, "alpha");
    p.eta_f = number(j, "eta_f");
    p.eta_d = number(j, "eta_d");
    p.gamma_f = number(j, "gamma_f");
    p.gamma_d = number(j, "gamma_d");
    p.c_R = number(j, "c_R");
    p.c_B = number(j, "c_B");
    p.c_D = number(j, "c_D");
    p.K = count(j, "K");
    return p;
}

Json to_json(const machine_repair::Params& p) {
    return {{"alpha", p.alpha}, {"eta_f", p.eta_f}, {"eta_d", p.eta_d}, {"gamma_f", p.gamma_f},
            {"gamma_d", p.gamma_d}, {"c_R", p.c_R},  {"c_B", p.c_B},  {"c_D", p.c_D}, {"K", p.K}};
}

lqg::Model lqg_from_json(const Json& j) {
    lqg::Model m;
    m.K = count(j, "K");
    if (m.K == 0)
        parse_fail("K must be positive");
    m.n = count(j, "n");
    m.m = count(j, "m");
    m.s = count(j, "s");
    m.A = staged(j, "A", m.K);
    m.B = staged(j, "B", m.K);
    m.C = staged(j, "C", m.K);
    if (m.K > 1)
        m.D = staged(j, "D", m.K - 1);
    m.T = staged(j, "T", m.K + 1);
    m.R = staged(j, "R", m.K);
    m.Sigma_w = staged(j, "Sigma_w", m.K);
    m.Sigma_v = staged(j, "Sigma_v", m.K);
    m.m_x0 = vector_from_json(field(j, "m_x0"), "m_x0");
    m.Sigma_x0 = matrix_from_json(field(j, "Sigma_x0"), "Sigma_x0");
    return m;
}

Json to_json(const lqg::Model& m) {
    return {{"K", m.K},
            {"n", m.n},
            {"m", m.m},
            {"s", m.s},
            {"A", matrix_list_json(m.A)},
            {"B", matrix_list_json(m.B)},
            {"C", matrix_list_json(m.C)},
            {"D", matrix_list_json(m.D)},
            {"T", matrix_list_json(m.T)},
            {"R", matrix_list_json(m.R)},
            {"Sigma_w", matrix_list_json(m.Sigma_w)},
            {"Sigma_v", matrix_list_json(m.Sigma_v)},
            {"m_x0", to_json(m.m_x0)},
            {"Sigma_x0", to_json(m.Sigma_x0)}};
}

scheduling::SensorMenu menu_from_json(const Json& j, const std::filesystem::path& base_dir) {
    scheduling::SensorMenu menu;
    const Json& model = field(j, "model");
    if (model.is_string())
        menu.base = lqg_from_json(read_json_file(base_dir / model.get<std::string>()));
    else
        menu.base = lqg_from_json(model);
    const Json& stages = field(j, "stages");
    if (!stages.is_array())
        parse_fail("'stages' must be a list of sensor lists");
    for (const auto& list : stages) {
        if (!list.is_array())
            parse_fail("each stage must be a list of sensors");
        std::vector<scheduling::SensorOption> opts;
        for (const auto& sensor : list)
            opts.push_back({matrix_from_json(field(sensor, "cov"), "cov"), number(sensor, "cost")});
        menu.options.push_back(std::move(opts));
    }
    return menu;
}

Json to_json(const scheduling::ScheduleResult& r) {
    Json schedule = Json::array();
    Json stages = Json::array();
    for (std::size_t k = 0; k < r.schedule.size(); ++k) {
        schedule.push_back(r.schedule[k] + 1);
        stages.push_back({{"stage", k},
                          {"sensor", r.schedule[k] + 1},
                          {"estimation_cost", r.estimation_costs[k]},
                          {"measurement_cost", r.measurement_costs[k]},
                          {"covariance", to_json(r.covariances[k])}});
    }
    return {{"schedule", schedule}, {"total_measurement_cost", r.total_measurement_cost}, {"stages", stages}};
}

direct_control::ScalarTwoStageModel direct_control_from_json(const Json& j) {
    direct_control::ScalarTwoStageModel m;
    m.m_x = number(j, "m_x");
    m.sigma_x2 = number(j, "sigma_x2");
    m.a = number(j, "a");
    m.b = number(j, "b");
    m.sigma_w2 = number(j, "sigma_w2");
    m.c = number(j, "c");
    m.d = number(j, "d");
    m.sigma_v2 = number(j, "sigma_v2");
    m.gamma = number(j, "gamma");
    m.t = number(j, "t");
    m.r = number(j, "r");
    return m;
}

Json to_json(const direct_control::ScalarTwoStageModel& m) {
    return {{"m_x", m.m_x}, {"sigma_x2", m.sigma_x2}, {"a", m.a},         {"b", m.b},
            {"sigma_w2", m.sigma_w2}, {"c", m.c},     {"d", m.d},         {"sigma_v2", m.sigma_v2},
            {"gamma", m.gamma},       {"t", m.t},     {"r", m.r}};
}

std::string format_double(double value) {
    if (std::isnan(value))
        return "nan";
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string csv_line(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0)
            out += ',';
        out += cells[i];
    }
    out += '\n';
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorKind::ParseError, "cannot write " + tmp.string());
        out << content;
        if (!out.flush()) {
            std::filesystem::remove(tmp);
            throw Error(ErrorKind::ParseError, "write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace sensorctl::io
