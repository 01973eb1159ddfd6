#include "salab/config.hpp"

#include "salab/error.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace salab {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg)
{
    throw Error(ErrorCode::Config, path + ": " + msg);
}

std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

void require_object(const json& j, const std::string& path)
{
    if (!j.is_object())
        fail(path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed)
{
    require_object(j, path);
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!ok.count(key))
            fail(join(path, key), "unknown field");
}

const json& field(const json& j, const std::string& path, const char* key)
{
    if (!j.contains(key))
        fail(join(path, key), "missing required field");
    return j.at(key);
}

double number(const json& j, const std::string& path)
{
    if (!j.is_number())
        fail(path, "expected a number");
    return j.get<double>();
}

double number_or(const json& j, const std::string& path, const char* key, double fallback)
{
    return j.contains(key) ? number(j.at(key), join(path, key)) : fallback;
}

std::uint64_t count(const json& j, const std::string& path)
{
    if (!j.is_number_unsigned())
        fail(path, "expected a non-negative integer");
    return j.get<std::uint64_t>();
}

std::string text(const json& j, const std::string& path)
{
    if (!j.is_string())
        fail(path, "expected a string");
    return j.get<std::string>();
}

Vector vector_of(const json& j, const std::string& path)
{
    if (!j.is_array() || j.empty())
        fail(path, "expected a non-empty array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = number(j[i], path + "[" + std::to_string(i) + "]");
    return v;
}

Matrix matrix_of(const json& j, const std::string& path)
{
    if (!j.is_array() || j.empty())
        fail(path, "expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    Eigen::Index cols = -1;
    Matrix m;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::string rp = path + "[" + std::to_string(r) + "]";
        const Vector row = vector_of(j[static_cast<std::size_t>(r)], rp);
        if (cols < 0) {
            cols = row.size();
            m.resize(rows, cols);
        } else if (row.size() != cols) {
            fail(rp, "rows must all have the same length");
        }
        m.row(r) = row.transpose();
    }
    return m;
}

template <class F>
auto rethrow_as_config(const std::string& path, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Config)
            throw;
        fail(path, e.what());
    }
}

IIDCentered parse_iid(const json& j, const std::string& path)
{
    check_keys(j, path, {"family", "distribution", "sigma", "tail", "scale", "nu", "p"});
    IIDCentered m;
    const std::string dist = text(field(j, path, "distribution"), join(path, "distribution"));
    const auto only = [&](std::initializer_list<const char*> allowed) {
        std::set<std::string> ok{"family", "distribution", "p"};
        ok.insert(allowed.begin(), allowed.end());
        for (const auto& [key, _] : j.items())
            if (!ok.count(key))
                fail(join(path, key), "not a parameter of distribution '" + dist + "'");
    };
    if (dist == "gaussian") {
        only({"sigma"});
        m.distribution = IIDDistribution::Gaussian;
        m.sigma = number_or(j, path, "sigma", 1.0);
        m.p_declared = number_or(j, path, "p", 2.0);
    } else if (dist == "pareto") {
        only({"tail", "scale"});
        m.distribution = IIDDistribution::SymmetricPareto;
        m.tail = number(field(j, path, "tail"), join(path, "tail"));
        m.scale = number_or(j, path, "scale", 1.0);
        m.p_declared = number_or(j, path, "p", 0.5 * (1.0 + m.tail));
    } else if (dist == "student_t") {
        only({"nu", "scale"});
        m.distribution = IIDDistribution::StudentT;
        m.nu = number(field(j, path, "nu"), join(path, "nu"));
        m.scale = number_or(j, path, "scale", 1.0);
        m.p_declared = number_or(j, path, "p", 0.5 * (1.0 + m.nu));
    } else if (dist == "two_point") {
        only({});
        m.distribution = IIDDistribution::TwoPoint;
        m.p_declared = number_or(j, path, "p", 2.0);
    } else {
        fail(join(path, "distribution"), "unknown distribution '" + dist + "'");
    }
    return m;
}

} // namespace

StepSchedule parse_schedule(const json& j, const std::string& path)
{
    check_keys(j, path, {"kind", "alpha", "K", "xi"});
    const std::string kind = j.contains("kind") ? text(j.at("kind"), join(path, "kind")) : "polynomial";
    const double alpha = number_or(j, path, "alpha", 1.0);
    return rethrow_as_config(path, [&] {
        if (kind == "polynomial")
            return StepSchedule::polynomial(alpha, number_or(j, path, "K", 1.0),
                                            number(field(j, path, "xi"), join(path, "xi")));
        if (kind == "constant") {
            if (j.contains("xi") || j.contains("K"))
                fail(path, "constant schedules take only alpha");
            return StepSchedule::constant(alpha);
        }
        fail(join(path, "kind"), "unknown schedule kind '" + kind + "'");
    });
}

Operator parse_operator(const json& j, const std::string& path)
{
    require_object(j, path);
    const std::string family = text(field(j, path, "family"), join(path, "family"));
    if (family == "selector_control") {
        check_keys(j, path, {"family"});
        return make_selector_control();
    }
    if (family == "contractive") {
        check_keys(j, path, {"family", "gamma", "target", "weights"});
        const double gamma = number(field(j, path, "gamma"), join(path, "gamma"));
        const Vector target = vector_of(field(j, path, "target"), join(path, "target"));
        const Vector weights = j.contains("weights") ? vector_of(j.at("weights"), join(path, "weights"))
                                                     : Vector::Ones(target.size());
        return rethrow_as_config(path, [&] { return make_contractive_affine(gamma, target, weights); });
    }
    if (family == "hurwitz") {
        check_keys(j, path, {"family", "A", "b"});
        const Matrix A = matrix_of(field(j, path, "A"), join(path, "A"));
        const Vector b = j.contains("b") ? vector_of(j.at("b"), join(path, "b")) : Vector::Zero(A.rows());
        return rethrow_as_config(path, [&] { return make_hurwitz_linear(A, b); });
    }
    if (family == "pl_gradient") {
        check_keys(j, path, {"family", "kind", "spectrum", "step", "target"});
        const std::string kind = j.contains("kind") ? text(j.at("kind"), join(path, "kind")) : "quadratic";
        PLKind k;
        if (kind == "quadratic")
            k = PLKind::Quadratic;
        else if (kind == "rotated_quadratic")
            k = PLKind::RotatedQuadratic;
        else
            fail(join(path, "kind"), "unknown kind '" + kind + "'");
        const Vector spectrum = vector_of(field(j, path, "spectrum"), join(path, "spectrum"));
        const double step = number(field(j, path, "step"), join(path, "step"));
        const Vector target = j.contains("target") ? vector_of(j.at("target"), join(path, "target"))
                                                   : Vector::Zero(spectrum.size());
        return rethrow_as_config(path, [&] { return make_pl_gradient(k, spectrum, step, target); });
    }
    if (family == "nonexpansive") {
        check_keys(j, path, {"family", "kind", "spectrum", "eta"});
        if (j.contains("kind") && text(j.at("kind"), join(path, "kind")) != "convex_gradient_step")
            fail(join(path, "kind"), "only 'convex_gradient_step' is supported");
        const Vector spectrum = vector_of(field(j, path, "spectrum"), join(path, "spectrum"));
        const double eta = number(field(j, path, "eta"), join(path, "eta"));
        return rethrow_as_config(
            path, [&] { return make_nonexpansive(NonexpansiveKind::ConvexGradientStep, spectrum, eta); });
    }
    if (family == "constant_mean") {
        check_keys(j, path, {"family", "mu"});
        const json& mu = field(j, path, "mu");
        const Vector m = mu.is_array() ? vector_of(mu, join(path, "mu"))
                                       : Vector::Constant(1, number(mu, join(path, "mu")));
        return make_constant_mean(m);
    }
    fail(join(path, "family"), "unknown operator family '" + family + "'");
}

NoiseModel parse_noise(const json& j, int dim, const Vector& reference, const std::string& path)
{
    require_object(j, path);
    const std::string family = text(field(j, path, "family"), join(path, "family"));
    if (family == "zero") {
        check_keys(j, path, {"family"});
        return NoiseModel::zero(dim);
    }
    if (family == "three_point") {
        check_keys(j, path, {"family", "alpha", "K", "xi", "p", "c", "direction"});
        ThreePointMDS m;
        m.alpha = number_or(j, path, "alpha", 1.0);
        m.K = number_or(j, path, "K", 1.0);
        m.xi = number(field(j, path, "xi"), join(path, "xi"));
        m.p = number(field(j, path, "p"), join(path, "p"));
        m.c = number_or(j, path, "c", 0.5);
        Vector dir;
        if (j.contains("direction"))
            dir = vector_of(j.at("direction"), join(path, "direction"));
        return rethrow_as_config(path, [&] { return NoiseModel::three_point(m, dim, dir); });
    }
    if (family == "iid") {
        const IIDCentered m = parse_iid(j, path);
        return rethrow_as_config(path, [&] { return NoiseModel::iid(m, dim); });
    }
    if (family == "multiplicative") {
        check_keys(j, path, {"family", "lambda", "base"});
        const double lambda = number(field(j, path, "lambda"), join(path, "lambda"));
        const NoiseModel base = parse_noise(field(j, path, "base"), dim, reference, join(path, "base"));
        return rethrow_as_config(path, [&] { return wrap_multiplicative(base, lambda, reference); });
    }
    fail(join(path, "family"), "unknown noise family '" + family + "'");
}

LyapunovFunction parse_lyapunov(const json& j, const Operator& op, const std::string& path)
{
    require_object(j, path);
    const std::string kind = text(field(j, path, "kind"), join(path, "kind"));
    const int d = op.dim();
    return rethrow_as_config(path, [&]() -> LyapunovFunction {
        if (kind == "quadratic") {
            check_keys(j, path, {"kind", "P"});
            const Matrix P = j.contains("P") ? matrix_of(j.at("P"), join(path, "P")) : Matrix::Identity(d, d);
            if (P.rows() != d)
                fail(join(path, "P"), "dimension does not match the operator");
            return LyapunovFunction::weighted_quadratic(P);
        }
        if (kind == "piecewise_quadratic") {
            check_keys(j, path, {"kind", "P", "eta", "k"});
            const LyapunovFunction def = LyapunovFunction::standard_piecewise();
            const Matrix P = j.contains("P") ? matrix_of(j.at("P"), join(path, "P")) : def.P();
            const Vector k = j.contains("k") ? vector_of(j.at("k"), join(path, "k")) : def.switch_normal();
            if (P.rows() != d)
                fail(join(path, "P"), "dimension does not match the operator");
            return LyapunovFunction::piecewise_quadratic(P, number_or(j, path, "eta", def.switch_gain()), k);
        }
        if (kind == "lyapunov_equation") {
            check_keys(j, path, {"kind", "Q"});
            if (!op.drift_matrix())
                fail(path, "lyapunov_equation needs a hurwitz operator");
            const Matrix Q = j.contains("Q") ? matrix_of(j.at("Q"), join(path, "Q")) : Matrix::Identity(d, d);
            return LyapunovFunction::weighted_quadratic(solve_continuous_lyapunov(*op.drift_matrix(), Q));
        }
        if (kind == "power") {
            check_keys(j, path, {"kind", "base", "p"});
            const LyapunovFunction base = parse_lyapunov(field(j, path, "base"), op, join(path, "base"));
            return power_transform(base, number(field(j, path, "p"), join(path, "p")));
        }
        fail(join(path, "kind"), "unknown lyapunov kind '" + kind + "'");
    });
}

DiagnosticsConfig parse_diagnostics(const json& j, const std::string& path)
{
    check_keys(j, path, {"epsilon", "jump_threshold", "tail_fraction", "D", "p"});
    DiagnosticsConfig d;
    if (j.contains("epsilon")) {
        d.epsilon = number(j.at("epsilon"), join(path, "epsilon"));
        if (!(*d.epsilon > 0.0))
            fail(join(path, "epsilon"), "must be > 0");
    }
    d.jump_threshold = number_or(j, path, "jump_threshold", d.jump_threshold);
    d.tail_fraction = number_or(j, path, "tail_fraction", d.tail_fraction);
    d.D = number_or(j, path, "D", d.D);
    d.p = number_or(j, path, "p", d.p);
    if (!(d.jump_threshold > 0.0))
        fail(join(path, "jump_threshold"), "must be > 0");
    if (!(d.tail_fraction > 0.0 && d.tail_fraction <= 1.0))
        fail(join(path, "tail_fraction"), "must lie in (0, 1]");
    if (!(d.D > 0.0))
        fail(join(path, "D"), "must be > 0");
    if (!(d.p >= 1.0))
        fail(join(path, "p"), "must be >= 1");
    return d;
}

ScenarioConfig parse_scenario_config(const json& j)
{
    check_keys(j, "", {"name", "operator", "noise", "schedule", "x0", "horizon", "n_trajectories", "seed",
                       "diagnostics", "xi_list", "lyapunov", "certify"});
    const std::string name = text(field(j, "", "name"), "name");
    if (name.empty() || name.find_first_of("/\\") != std::string::npos)
        fail("name", "must be a non-empty file-name-safe string");

    Operator op = parse_operator(field(j, "", "operator"));
    const Vector reference = op.fixed_point() ? *op.fixed_point() : Vector::Zero(op.dim());
    NoiseModel noise = j.contains("noise") ? parse_noise(j.at("noise"), op.dim(), reference)
                                           : NoiseModel::zero(op.dim());
    StepSchedule schedule = j.contains("schedule") ? parse_schedule(j.at("schedule"))
                                                   : StepSchedule::polynomial(1.0, 1.0, 1.0);
    DiagnosticsConfig diag = j.contains("diagnostics") ? parse_diagnostics(j.at("diagnostics"))
                                                       : DiagnosticsConfig{};
    if (!j.contains("diagnostics") || !j.at("diagnostics").contains("p"))
        diag.p = noise.declared_bound().p > 1.0 ? noise.declared_bound().p : 2.0;

    if (const auto* tp = noise.three_point_params()) {
        if (schedule.kind() != ScheduleKind::Polynomial || tp->alpha != schedule.alpha() || tp->K != schedule.K() ||
            tp->xi != schedule.xi())
            fail("noise", "three_point alpha, K and xi must match the schedule");
    }

    Vector x0 = j.contains("x0") ? vector_of(j.at("x0"), "x0") : Vector::Ones(op.dim());
    if (x0.size() != op.dim())
        fail("x0", "dimension does not match the operator");

    ScenarioConfig cfg{Scenario{name, std::move(op), std::move(noise), schedule, std::move(x0), 1, 1, 0, diag},
                       {}, std::nullopt, {}};
    Scenario& s = cfg.scenario;
    if (j.contains("horizon")) {
        s.horizon = count(j.at("horizon"), "horizon");
        if (s.horizon < 1)
            fail("horizon", "must be >= 1");
    }
    if (j.contains("n_trajectories")) {
        s.n_trajectories = count(j.at("n_trajectories"), "n_trajectories");
        if (s.n_trajectories < 1)
            fail("n_trajectories", "must be >= 1");
    }
    if (j.contains("seed"))
        s.seed = count(j.at("seed"), "seed");
    if (j.contains("xi_list")) {
        const Vector xs = vector_of(j.at("xi_list"), "xi_list");
        cfg.xi_list.assign(xs.data(), xs.data() + xs.size());
        for (std::size_t i = 0; i < cfg.xi_list.size(); ++i)
            if (!(cfg.xi_list[i] > 0.0 && cfg.xi_list[i] <= 1.0))
                fail("xi_list[" + std::to_string(i) + "]", "must lie in (0, 1]");
    }
    if (j.contains("lyapunov"))
        cfg.lyapunov = parse_lyapunov(j.at("lyapunov"), s.op);
    if (j.contains("certify")) {
        const json& c = j.at("certify");
        check_keys(c, "certify", {"samples", "r_min", "R"});
        if (c.contains("samples"))
            cfg.certify.samples = count(c.at("samples"), "certify.samples");
        cfg.certify.region.r_min = number_or(c, "certify", "r_min", cfg.certify.region.r_min);
        cfg.certify.region.R = number_or(c, "certify", "R", cfg.certify.region.R);
        if (!(cfg.certify.region.r_min > 0.0) || !(cfg.certify.region.R > cfg.certify.region.r_min))
            fail("certify", "needs 0 < r_min < R");
    }
    return cfg;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot read config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Config, path.string() + ": malformed JSON: " + e.what());
    }
    return parse_scenario_config(j);
}

std::vector<double> parse_xi_list(const std::string& csv)
{
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos)
            continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            fail("--xi", "not a number: '" + item + "'");
        }
        if (item.find_first_not_of(" \t", used) != std::string::npos)
            fail("--xi", "not a number: '" + item + "'");
        if (!(v > 0.0 && v <= 1.0))
            fail("--xi", "xi must lie in (0, 1]");
        out.push_back(v);
    }
    if (out.empty())
        fail("--xi", "xi list is empty");
    return out;
}

} // namespace salab
