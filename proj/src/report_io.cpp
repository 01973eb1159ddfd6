#include "salab/report_io.hpp"

#include "salab/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace salab {

using nlohmann::ordered_json;

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 30.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 70.0;

std::string fixed2(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape_xml(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

ordered_json number_or_null(double v)
{
    return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

ordered_json quantiles_json(const Quantiles& q)
{
    return {{"q10", number_or_null(q.q10)}, {"q25", number_or_null(q.q25)}, {"median", number_or_null(q.q50)},
            {"q75", number_or_null(q.q75)}, {"q90", number_or_null(q.q90)}};
}

/// Plot frame mapping data coordinates to the SVG canvas.
struct Frame {
    double x0, x1, y0, y1;

    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void svg_open(std::ostringstream& os, const std::string& title)
{
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" height=\"600\">\n"
       << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n"
       << "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
       << escape_xml(title) << "</text>\n";
}

void svg_axes(std::ostringstream& os, const std::string& xlabel, const std::string& ylabel)
{
    const double xa = kLeft;
    const double ya = kHeight - kBottom;
    os << "<line x1=\"" << fixed2(xa) << "\" y1=\"" << fixed2(ya) << "\" x2=\"" << fixed2(kWidth - kRight)
       << "\" y2=\"" << fixed2(ya) << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << fixed2(xa) << "\" y1=\"" << fixed2(kTop) << "\" x2=\"" << fixed2(xa) << "\" y2=\""
       << fixed2(ya) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << fixed2(0.5 * (kLeft + kWidth - kRight)) << "\" y=\"" << fixed2(kHeight - 20.0)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << escape_xml(xlabel)
       << "</text>\n"
       << "<text x=\"20\" y=\"" << fixed2(0.5 * (kTop + kHeight - kBottom))
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" transform=\"rotate(-90 20 "
       << fixed2(0.5 * (kTop + kHeight - kBottom)) << ")\">" << escape_xml(ylabel) << "</text>\n";
}

void svg_xtick(std::ostringstream& os, double px, const std::string& label)
{
    const double ya = kHeight - kBottom;
    os << "<line x1=\"" << fixed2(px) << "\" y1=\"" << fixed2(ya) << "\" x2=\"" << fixed2(px) << "\" y2=\""
       << fixed2(ya + 6.0) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << fixed2(px) << "\" y=\"" << fixed2(ya + 22.0)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << label << "</text>\n";
}

void svg_ytick(std::ostringstream& os, double py, const std::string& label)
{
    os << "<line x1=\"" << fixed2(kLeft - 6.0) << "\" y1=\"" << fixed2(py) << "\" x2=\"" << fixed2(kLeft)
       << "\" y2=\"" << fixed2(py) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << fixed2(kLeft - 10.0) << "\" y=\"" << fixed2(py + 4.0)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << label << "</text>\n";
}

std::string decade_label(int e)
{
    return "1e" + std::to_string(e);
}

} // namespace

std::string format_g17(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trajectories_csv(const std::vector<TrajectoryRecord>& records)
{
    std::string out = "trajectory_id,k,u\n";
    for (const auto& rec : records)
        for (const auto& cp : rec.checkpoints) {
            out += std::to_string(rec.trajectory_id);
            out += ',';
            out += std::to_string(cp.k);
            out += ',';
            out += format_g17(cp.u);
            out += '\n';
        }
    return out;
}

ordered_json summary_json(const EnsembleReport& r)
{
    ordered_json j;
    j["scenario"] = r.scenario;
    j["operator"] = r.operator_family;
    j["n_trajectories"] = r.n_trajectories;
    j["horizon"] = r.horizon;
    j["epsilon"] = number_or_null(r.epsilon);
    j["converged_fraction"] = r.converged_fraction;
    j["diverged_fraction"] = r.diverged_fraction;
    j["nonfinite_count"] = r.nonfinite_count;
    j["tail_sup"] = quantiles_json(r.tail_sup);
    j["final_u"] = quantiles_json(r.final_u);
    j["mean_jump_events"] = r.mean_jump_events;
    j["jump_events_se"] = r.jump_events_se;
    j["mean_large_steps"] = r.mean_large_steps;
    j["mean_noise_firings"] = r.mean_noise_firings;
    j["mean_upcrossings"] = r.mean_upcrossings;
    j["expected_jump_count"] = r.expected_jump_count ? ordered_json(*r.expected_jump_count) : ordered_json(nullptr);
    j["p"] = r.p;
    if (r.admissibility)
        j["schedule"] = {{"sum_divergent", r.admissibility->sum_divergent},
                         {"p_power_summable", r.admissibility->p_power_summable},
                         {"admissible", r.admissibility->admissible}};
    else
        j["schedule"] = nullptr;
    ordered_json bands = ordered_json::array();
    for (const auto& b : r.bands)
        bands.push_back({{"k", b.k}, {"q25", number_or_null(b.q25)}, {"median", number_or_null(b.median)},
                         {"q75", number_or_null(b.q75)}});
    j["checkpoints"] = std::move(bands);
    return j;
}

ordered_json certificate_json(const DriftCertificate& c)
{
    ordered_json violations = ordered_json::array();
    for (const auto& v : c.violations) {
        ordered_json point = ordered_json::array();
        for (Eigen::Index i = 0; i < v.point.size(); ++i)
            point.push_back(v.point(i));
        violations.push_back({{"point", std::move(point)}, {"margin", v.margin}});
    }
    ordered_json j;
    j["eta_hat"] = number_or_null(c.eta_hat);
    j["L2_hat"] = number_or_null(c.L2_hat);
    j["c1_hat"] = number_or_null(c.c1_hat);
    j["c2_hat"] = number_or_null(c.c2_hat);
    j["violations"] = std::move(violations);
    j["violation_count"] = c.violation_count;
    j["samples"] = c.samples;
    j["region"] = {{"r_min", c.region.r_min}, {"R", c.region.R}};
    j["passed"] = c.passed();
    j["evidence"] = "sampled";
    return j;
}

std::string phase_csv(const std::vector<PhaseRow>& rows)
{
    std::string out = "xi,admissible,converged_fraction,mean_jumps,analytic_jumps\n";
    for (const auto& r : rows) {
        out += format_g17(r.xi);
        out += r.admissible ? ",true," : ",false,";
        out += format_g17(r.converged_fraction);
        out += ',';
        out += format_g17(r.mean_jumps);
        out += ',';
        out += r.analytic_jumps ? format_g17(*r.analytic_jumps) : std::string();
        out += '\n';
    }
    return out;
}

std::string u_vs_k_svg(const EnsembleReport& r)
{
    // Log axes need positive values: k is plotted as k + 1 and u is floored.
    double umin = std::numeric_limits<double>::infinity();
    double umax = 0.0;
    for (const auto& b : r.bands)
        for (double v : {b.q25, b.median, b.q75})
            if (std::isfinite(v) && v > 0.0) {
                umin = std::min(umin, v);
                umax = std::max(umax, v);
            }
    if (!std::isfinite(umin)) {
        umin = 1e-3;
        umax = 1.0;
    }
    int ylo = static_cast<int>(std::floor(std::log10(umin)));
    int yhi = static_cast<int>(std::ceil(std::log10(umax)));
    if (yhi <= ylo)
        yhi = ylo + 1;
    const int xhi = std::max(1, static_cast<int>(std::ceil(std::log10(static_cast<double>(r.horizon) + 1.0))));
    const Frame f{0.0, static_cast<double>(xhi), static_cast<double>(ylo), static_cast<double>(yhi)};

    const auto ly = [&](double v) {
        if (!std::isfinite(v))
            return static_cast<double>(yhi);
        return std::clamp(std::log10(std::max(v, std::pow(10.0, ylo))), static_cast<double>(ylo),
                          static_cast<double>(yhi));
    };

    std::ostringstream os;
    svg_open(os, r.scenario + ": median distance to solution");
    svg_axes(os, "k + 1", "u_k");
    for (int e = 0; e <= xhi; ++e)
        svg_xtick(os, f.px(e), decade_label(e));
    const int ystep = std::max(1, (yhi - ylo) / 12);
    for (int e = ylo; e <= yhi; e += ystep)
        svg_ytick(os, f.py(e), decade_label(e));

    if (!r.bands.empty()) {
        os << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
        for (const auto& b : r.bands)
            os << fixed2(f.px(std::log10(static_cast<double>(b.k) + 1.0))) << ',' << fixed2(f.py(ly(b.q75))) << ' ';
        for (auto it = r.bands.rbegin(); it != r.bands.rend(); ++it)
            os << fixed2(f.px(std::log10(static_cast<double>(it->k) + 1.0))) << ',' << fixed2(f.py(ly(it->q25)))
               << ' ';
        os << "\"/>\n";
        os << "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\" points=\"";
        for (const auto& b : r.bands)
            os << fixed2(f.px(std::log10(static_cast<double>(b.k) + 1.0))) << ',' << fixed2(f.py(ly(b.median)))
               << ' ';
        os << "\"/>\n";
    }
    if (std::isfinite(r.epsilon) && r.epsilon > 0.0) {
        const double y = f.py(ly(r.epsilon));
        os << "<line x1=\"" << fixed2(kLeft) << "\" y1=\"" << fixed2(y) << "\" x2=\"" << fixed2(kWidth - kRight)
           << "\" y2=\"" << fixed2(y) << "\" stroke=\"#cb181d\" stroke-dasharray=\"6,4\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string phase_svg(const std::vector<PhaseRow>& rows, double p, const std::string& title)
{
    const Frame f{0.0, 1.0, 0.0, 1.0};
    std::ostringstream os;
    svg_open(os, title + ": converged fraction vs xi");
    svg_axes(os, "xi", "converged fraction");
    for (int i = 0; i <= 10; ++i) {
        char label[16];
        std::snprintf(label, sizeof label, "%.1f", i / 10.0);
        svg_xtick(os, f.px(i / 10.0), label);
        svg_ytick(os, f.py(i / 10.0), label);
    }
    if (p > 1.0) {
        const double x = f.px(1.0 / p);
        os << "<line x1=\"" << fixed2(x) << "\" y1=\"" << fixed2(kTop) << "\" x2=\"" << fixed2(x) << "\" y2=\""
           << fixed2(kHeight - kBottom) << "\" stroke=\"#cb181d\" stroke-dasharray=\"6,4\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\" points=\"";
    for (const auto& r : rows)
        os << fixed2(f.px(r.xi)) << ',' << fixed2(f.py(r.converged_fraction)) << ' ';
    os << "\"/>\n";
    for (const auto& r : rows)
        os << "<circle cx=\"" << fixed2(f.px(r.xi)) << "\" cy=\"" << fixed2(f.py(r.converged_fraction))
           << "\" r=\"5\" fill=\"" << (r.admissible ? "#08519c" : "white") << "\" stroke=\"#08519c\"/>\n";
    os << "</svg>\n";
    return os.str();
}

std::string to_text(const ordered_json& j)
{
    return j.dump(2) + "\n";
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out)
        throw Error(ErrorCode::Io, "failed writing " + path.string());
}

} // namespace salab
