#include <gtspec/profile.hpp>
#include <gtspec/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gtspec {

namespace {

double wrap_to_period(double x) {
    double y = std::fmod(x, two_pi);
    if (y < 0) y += two_pi;
    // fmod can land exactly on 2pi after the correction for tiny negatives
    if (y >= two_pi) y = 0.0;
    return y;
}

void check_grid(const std::vector<double>& bps, size_t nvals) {
    if (bps.size() < 2)
        throw format_error("profile needs at least two breakpoints");
    if (bps.size() != nvals + 1)
        throw format_error("profile needs exactly one value per cell");
    if (std::abs(bps.front()) > breakpoint_tol)
        throw format_error("first breakpoint must be 0");
    if (std::abs(bps.back() - two_pi) > breakpoint_tol)
        throw format_error("last breakpoint must be 2pi");
    for (size_t i = 1; i < bps.size(); ++i)
        if (bps[i] - bps[i - 1] <= breakpoint_tol)
            throw format_error("breakpoints must be strictly increasing");
}

// Normalizes endpoints to exactly 0 and 2pi so downstream arithmetic is exact.
std::vector<double> pin_endpoints(std::vector<double> bps) {
    bps.front() = 0.0;
    bps.back() = two_pi;
    return bps;
}

} // namespace

double PiecewiseConstant::eval(double x) const {
    double y = wrap_to_period(x);
    // first breakpoint strictly greater than y, minus one cell
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), y);
    size_t k = static_cast<size_t>(it - breakpoints.begin());
    if (k == 0) k = 1;                     // y == 0 edge
    if (k > values.size()) k = values.size();
    return values[k - 1];
}

double PiecewiseConstant::integral() const {
    double s = 0.0;
    for (size_t k = 0; k < values.size(); ++k)
        s += values[k] * (breakpoints[k + 1] - breakpoints[k]);
    return s;
}

double SigmaProfile::max_value() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
}

SigmaProfile make_piecewise(const std::vector<double>& breakpoints,
                            const std::vector<double>& values) {
    check_grid(breakpoints, values.size());
    for (double v : values)
        if (!(v >= 0.0))
            throw domain_error("jump rate must be nonnegative everywhere");
    SigmaProfile p;
    p.breakpoints = pin_endpoints(breakpoints);
    p.values = values;
    return p;
}

SigmaProfile make_constant(double value) {
    return make_piecewise({0.0, two_pi}, {value});
}

SigmaDirection make_direction(const std::vector<double>& breakpoints,
                              const std::vector<double>& values) {
    check_grid(breakpoints, values.size());
    SigmaDirection d;
    d.breakpoints = pin_endpoints(breakpoints);
    d.values = values;
    return d;
}

SigmaDirection cell_indicator(int k, int K) {
    if (K < 1 || k < 0 || k >= K)
        throw domain_error("cell index out of range");
    std::vector<double> bps(static_cast<size_t>(K) + 1);
    for (int i = 0; i <= K; ++i) bps[static_cast<size_t>(i)] = two_pi * i / K;
    std::vector<double> vals(static_cast<size_t>(K), 0.0);
    vals[static_cast<size_t>(k)] = 1.0;
    return make_direction(bps, vals);
}

std::vector<double> merge_breakpoints(const std::vector<double>& a,
                                      const std::vector<double>& b) {
    std::vector<double> m;
    m.reserve(a.size() + b.size());
    m.insert(m.end(), a.begin(), a.end());
    m.insert(m.end(), b.begin(), b.end());
    std::sort(m.begin(), m.end());
    std::vector<double> out;
    for (double x : m)
        if (out.empty() || x - out.back() > breakpoint_tol)
            out.push_back(x);
    return pin_endpoints(std::move(out));
}

SigmaProfile perturb(const SigmaProfile& sigma, const SigmaDirection& eta, double eps) {
    std::vector<double> bps = merge_breakpoints(sigma.breakpoints, eta.breakpoints);
    std::vector<double> vals(bps.size() - 1);
    for (size_t k = 0; k + 1 < bps.size(); ++k) {
        double mid = 0.5 * (bps[k] + bps[k + 1]);
        double v = sigma.eval(mid) + eps * eta.eval(mid);
        if (v < 0.0)
            throw domain_error("perturbed jump rate dips below zero");
        vals[k] = v;
    }
    SigmaProfile p;
    p.breakpoints = std::move(bps);
    p.values = std::move(vals);
    return p;
}

SigmaProfile sample_uniform(const std::vector<double>& midpoint_values) {
    int K = static_cast<int>(midpoint_values.size());
    if (K < 1) throw domain_error("need at least one cell");
    std::vector<double> bps(static_cast<size_t>(K) + 1);
    for (int i = 0; i <= K; ++i) bps[static_cast<size_t>(i)] = two_pi * i / K;
    return make_piecewise(bps, midpoint_values);
}

SigmaProfile read_profile(std::istream& in) {
    std::vector<double> bps, vals;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double x;
        if (!(ls >> x)) continue; // blank or comment-only line
        std::string rest;
        ls >> rest;
        bps.push_back(x);
        if (rest.empty() || rest == "-" || rest == "\xe2\x80\x94") {
            // terminator line carries no value
            continue;
        }
        try {
            size_t used = 0;
            double v = std::stod(rest, &used);
            if (used != rest.size()) throw std::invalid_argument(rest);
            vals.push_back(v);
        } catch (const std::exception&) {
            throw format_error("profile line " + std::to_string(lineno) +
                               ": bad value '" + rest + "'");
        }
    }
    if (bps.empty()) throw format_error("empty profile file");
    if (std::abs(bps.back() - two_pi) > breakpoint_tol)
        throw format_error("profile file must end with the 2pi terminator line");
    return make_piecewise(bps, vals);
}

SigmaProfile read_profile_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw format_error("cannot open profile file '" + path + "'");
    return read_profile(in);
}

void write_profile(std::ostream& out, const SigmaProfile& sigma) {
    char buf[64];
    out << "# piecewise-constant jump rate: lines are 'x_break value', final line is '2pi -'\n";
    for (int k = 0; k < sigma.cells(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n",
                      sigma.breakpoints[static_cast<size_t>(k)],
                      sigma.values[static_cast<size_t>(k)]);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g -\n", sigma.breakpoints.back());
    out << buf;
}

void write_profile_file(const std::string& path, const SigmaProfile& sigma) {
    std::ofstream out(path);
    if (!out) throw format_error("cannot open '" + path + "' for writing");
    write_profile(out, sigma);
}

} // namespace gtspec
