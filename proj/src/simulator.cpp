#include "gtspec/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gtspec/errors.hpp"

namespace gtspec {

double mass(const KineticState& state) {
    double dx = two_pi / state.n;
    double s = 0.0;
    for (double r : state.rho) s += r;
    return s * dx;
}

double l2_norm(const KineticState& state) {
    double dx = two_pi / state.n;
    double s = 0.0;
    for (int i = 0; i < state.n; ++i)
        s += state.rho[static_cast<size_t>(i)] * state.rho[static_cast<size_t>(i)] +
             state.j[static_cast<size_t>(i)] * state.j[static_cast<size_t>(i)];
    return std::sqrt(s * dx);
}

KineticState init_state(int n, const std::function<double(double)>& rho_fn,
                        const std::function<double(double)>& j_fn) {
    if (n < 16) throw domain_error("init_state: grid size must be at least 16");
    KineticState st;
    st.n = n;
    st.rho.resize(static_cast<size_t>(n));
    st.j.resize(static_cast<size_t>(n));
    double dx = two_pi / n;
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = (i + 0.5) * dx;
        st.rho[static_cast<size_t>(i)] = rho_fn(x);
        st.j[static_cast<size_t>(i)] = j_fn(x);
        mean += st.rho[static_cast<size_t>(i)];
    }
    mean /= n;
    for (double& r : st.rho) r -= mean;
    return st;
}

namespace {

// Per-cell relaxation factors exp(-sigma(x_i) dt/2), sampled at cell centers.
std::vector<double> relax_factors(const SigmaProfile& sigma, int n, double dt) {
    std::vector<double> f(static_cast<size_t>(n));
    double dx = two_pi / n;
    for (int i = 0; i < n; ++i)
        f[static_cast<size_t>(i)] = std::exp(-sigma.eval((i + 0.5) * dx) * dt * 0.5);
    return f;
}

// The characteristic variables are u = (rho+j)/sqrt2 and v = (rho-j)/sqrt2;
// we carry the unnormalized p = rho+j, q = rho-j instead so the two 1/sqrt2
// scalings fold into one exact halving and the shift stays a pure permutation.
void step_in_place(KineticState& st, const std::vector<double>& relax,
                   std::vector<double>& p, std::vector<double>& q, double dt) {
    int n = st.n;
    for (int i = 0; i < n; ++i) st.j[static_cast<size_t>(i)] *= relax[static_cast<size_t>(i)];
    for (int i = 0; i < n; ++i) {
        p[static_cast<size_t>(i)] = st.rho[static_cast<size_t>(i)] + st.j[static_cast<size_t>(i)];
        q[static_cast<size_t>(i)] = st.rho[static_cast<size_t>(i)] - st.j[static_cast<size_t>(i)];
    }
    for (int i = 0; i < n; ++i) {
        int left = (i + n - 1) % n;  // p moves right by one cell
        int right = (i + 1) % n;     // q moves left by one cell
        st.rho[static_cast<size_t>(i)] =
            0.5 * (p[static_cast<size_t>(left)] + q[static_cast<size_t>(right)]);
        st.j[static_cast<size_t>(i)] =
            0.5 * (p[static_cast<size_t>(left)] - q[static_cast<size_t>(right)]);
    }
    for (int i = 0; i < n; ++i) st.j[static_cast<size_t>(i)] *= relax[static_cast<size_t>(i)];
    st.time += dt;
}

void check_dt(int n, double dt) {
    double dx = two_pi / n;
    if (!(std::abs(dt - dx) <= 1e-12 * dx))
        throw domain_error("step: dt must equal the cell width 2pi/n (exact-shift scheme)");
}

} // namespace

KineticState step(const KineticState& state, const SigmaProfile& sigma, double dt) {
    check_dt(state.n, dt);
    KineticState st = state;
    auto relax = relax_factors(sigma, st.n, dt);
    std::vector<double> u(static_cast<size_t>(st.n)), v(static_cast<size_t>(st.n));
    step_in_place(st, relax, u, v, dt);
    return st;
}

DecayTrace run_decay(KineticState state, const SigmaProfile& sigma, double T) {
    if (!(T > 0.0)) throw domain_error("run_decay: horizon must be positive");
    double dt = two_pi / state.n;
    long total_steps = std::lround(T / dt);
    if (total_steps < 1) total_steps = 1;
    long stride = std::lround(1.0 / dt);
    if (stride < 1) stride = 1;

    auto relax = relax_factors(sigma, state.n, dt);
    std::vector<double> u(static_cast<size_t>(state.n)), v(static_cast<size_t>(state.n));

    DecayTrace trace;
    trace.times.push_back(state.time);
    trace.norms.push_back(l2_norm(state));
    trace.masses.push_back(mass(state));

    // The fit uses every step in the final third: the leading eigenvalues can
    // be complex, so the norm carries a periodic modulation, and a sparse
    // per-unit-time sample aliases against it and biases the slope.
    double t_cut = (2.0 / 3.0) * total_steps * dt;
    double st_ = 0, sy = 0, stt = 0, sty = 0;
    long m = 0;
    for (long s = 1; s <= total_steps; ++s) {
        step_in_place(state, relax, u, v, dt);
        bool want_record = (s % stride == 0 || s == total_steps);
        bool want_fit = state.time >= t_cut;
        if (!want_record && !want_fit) continue;
        double norm = l2_norm(state);
        if (want_record) {
            trace.times.push_back(state.time);
            trace.norms.push_back(norm);
            trace.masses.push_back(mass(state));
        }
        if (norm < 1e-280) break; // underflow guard: truncate the trace
        if (want_fit) {
            double t = state.time, y = std::log(norm);
            st_ += t; sy += y; stt += t * t; sty += t * y;
            ++m;
        }
    }

    if (m >= 2) {
        double denom = m * stt - st_ * st_;
        trace.fitted_rate = -(m * sty - st_ * sy) / denom;
    } else {
        // fit on the recorded samples over the final third of what we have
        double t_end = trace.times.back();
        double cut = t_end - (t_end - trace.times.front()) / 3.0;
        st_ = sy = stt = sty = 0; m = 0;
        for (size_t i = 0; i < trace.times.size(); ++i) {
            if (trace.times[i] < cut || trace.norms[i] <= 0.0) continue;
            double t = trace.times[i], y = std::log(trace.norms[i]);
            st_ += t; sy += y; stt += t * t; sty += t * y;
            ++m;
        }
        if (m >= 2) {
            double denom = m * stt - st_ * st_;
            trace.fitted_rate = -(m * sty - st_ * sy) / denom;
        }
    }
    return trace;
}

void write_decay_csv(std::ostream& out, const DecayTrace& trace) {
    out << "t,norm,mass\n";
    char buf[96];
    for (size_t i = 0; i < trace.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", trace.times[i],
                      trace.norms[i], trace.masses[i]);
        out << buf;
    }
}

void write_decay_csv_file(const std::string& path, const DecayTrace& trace) {
    std::ofstream out(path);
    if (!out) throw format_error("cannot open output file: " + path);
    write_decay_csv(out, trace);
}

} // namespace gtspec
