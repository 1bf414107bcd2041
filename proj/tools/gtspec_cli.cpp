// gtspec: command-line front end for the kinetic spectral-gap library.
//
// Commands: spectrum, gap, schrodinger, simulate, sweep, optimize.
// Every command prints a stable-keyed summary to stdout (or the command's CSV
// artifact with --format csv) and can write the CSV to --out.  Timing goes to
// stderr only, so stdout stays byte-reproducible for equal configurations.
//
// Exit codes: 0 ok, 1 usage, 2 domain, 3 numerical non-convergence,
// 4 internal inconsistency.

#include "gtspec/errors.hpp"
#include "gtspec/optimizer.hpp"
#include "gtspec/profile.hpp"
#include "gtspec/schroedinger.hpp"
#include "gtspec/simulator.hpp"
#include "gtspec/spectrum.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace gtspec;

// Post-parse problems that are still the caller's fault (exit code 1).
struct usage_error : std::runtime_error {
    explicit usage_error(const std::string& what) : std::runtime_error(what) {}
};

struct CliOptions {
    std::string command;
    double sigma_const = 0.0;
    bool have_sigma_const = false;
    std::string sigma_file;
    double tol = default_root_tol;
    double im_cutoff = 0.0; // 0 = per-profile default
    int n = 512;
    double horizon = 30.0;
    int cells = 8;
    int max_iters = 200;
    unsigned long seed = 1;
    int threads = 0;
    std::string out;
    std::string format = "summary";
    std::string init;
    double cluster_tol = 1e-6;
    std::string const_range;
    bool selftest = false;
};

void kv(const char* key, double value) { std::printf("%s = %.12g\n", key, value); }
void kv(const char* key, int value) { std::printf("%s = %d\n", key, value); }
void kv(const char* key, const char* value) { std::printf("%s = %s\n", key, value); }
void kv(const char* key, const std::string& value) { kv(key, value.c_str()); }
void kv(const char* key, bool value) { kv(key, value ? "true" : "false"); }

SigmaProfile load_profile(const CliOptions& o) {
    if (o.have_sigma_const) return make_constant(o.sigma_const);
    if (!o.sigma_file.empty()) return read_profile_file(o.sigma_file);
    throw usage_error("command '" + o.command + "' needs --sigma-const or --sigma-file");
}

double effective_cutoff(const CliOptions& o, const SigmaProfile& sigma) {
    return o.im_cutoff > 0.0 ? o.im_cutoff : default_im_cutoff(sigma);
}

void profile_summary(const SigmaProfile& sigma) {
    double l1 = sigma.l1_norm();
    kv("sigma_cells", sigma.cells());
    kv("sigma_l1", l1);
    kv("accumulation_line", -l1 / (2.0 * two_pi));
    kv("kinetic_bound", l1 / (2.0 * two_pi));
}

// The closed-form diffusive threshold is a valid gap bound exactly when the
// slow-eigenvalue certificate succeeds; report it only then.
void diffusive_summary(const SigmaProfile& sigma) {
    if (sigma.l1_norm() <= 2.0 * two_pi) {
        kv("diffusive_bound_status", "not-applicable");
        return;
    }
    try {
        SlowEigenvalue cert = find_slow_eigenvalue_certified(sigma);
        kv("diffusive_bound_status", "certified");
        kv("diffusive_bound", -cert.lambda_s);
        kv("slow_eigenvalue", cert.lambda_star);
    } catch (const convergence_error&) {
        kv("diffusive_bound_status", "uncertified");
    }
}

void write_csv_artifact(const CliOptions& o, const std::string& csv) {
    if (o.format == "csv") std::fputs(csv.c_str(), stdout);
    if (!o.out.empty()) {
        std::ofstream f(o.out);
        if (!f) throw format_error("cannot open output file: " + o.out);
        f << csv;
    }
}

std::string spectrum_csv(const std::vector<EigenvalueRecord>& records) {
    std::ostringstream s;
    write_spectrum_csv(s, records);
    return s.str();
}

void run_spectrum(const CliOptions& o) {
    SigmaProfile sigma = load_profile(o);
    GapResult g = spectral_gap(sigma, o.im_cutoff, o.tol);
    if (o.format == "summary") {
        kv("command", "spectrum");
        profile_summary(sigma);
        kv("search_re_lo", g.search_box.re_lo);
        kv("search_re_hi", g.search_box.re_hi);
        kv("search_im_lo", g.search_box.im_lo);
        kv("search_im_hi", g.search_box.im_hi);
        kv("eigenvalues_in_box", static_cast<int>(g.inside.size()));
        kv("at_accumulation_line", g.at_accumulation_line);
        kv("tol", o.tol);
        kv("im_cutoff", effective_cutoff(o, sigma));
        if (!g.note.empty()) kv("note", g.note);
    }
    std::vector<EigenvalueRecord> rows = g.inside;
    if (g.at_accumulation_line)
        rows.insert(rows.end(), g.leading.begin(), g.leading.end());
    write_csv_artifact(o, spectrum_csv(rows));
}

void run_gap(const CliOptions& o) {
    SigmaProfile sigma = load_profile(o);
    GapResult g = spectral_gap(sigma, o.im_cutoff, o.tol);
    if (o.format == "summary") {
        kv("command", "gap");
        profile_summary(sigma);
        kv("gap", g.gap);
        kv("at_accumulation_line", g.at_accumulation_line);
        int winding = 0, kernel = 0;
        for (const auto& r : g.leading) {
            winding += r.multiplicity;
            kernel += r.kernel_dim > 0 ? r.kernel_dim : r.multiplicity;
        }
        kv("cluster_members", static_cast<int>(g.leading.size()));
        kv("cluster_multiplicity", kernel);
        kv("cluster_winding", winding);
        if (!g.leading.empty()) {
            const EigenvalueRecord& lead = g.leading.front();
            kv("leading_re", lead.lambda.real());
            kv("leading_im", std::abs(lead.lambda.imag()));
            kv("leading_kernel_dim", lead.kernel_dim);
            kv("leading_residual", lead.residual);
        }
        diffusive_summary(sigma);
        kv("tol", o.tol);
        kv("im_cutoff", effective_cutoff(o, sigma));
        if (!g.note.empty()) kv("note", g.note);
    }
    std::vector<EigenvalueRecord> rows = g.inside;
    if (g.at_accumulation_line)
        rows.insert(rows.end(), g.leading.begin(), g.leading.end());
    write_csv_artifact(o, spectrum_csv(rows));
}

void run_schrodinger(const CliOptions& o) {
    SigmaProfile sigma = load_profile(o);
    if (sigma.l1_norm() <= 2.0 * two_pi)
        throw domain_error("the slow-eigenvalue certificate needs ||sigma||_1 > 4*pi");
    SlowEigenvalue cert = find_slow_eigenvalue_certified(sigma);
    if (o.format == "summary") {
        kv("command", "schrodinger");
        profile_summary(sigma);
        kv("lambda_s", cert.lambda_s);
        kv("lambda_star", cert.lambda_star);
        kv("mu2_residual", cert.mu2);
        kv("det_m_residual", cert.det_m_abs);
        kv("grid_points", cert.n_grid);
        kv("diffusive_bound", -cert.lambda_s);
    }
    char buf[256];
    std::snprintf(buf, sizeof buf, "lambda_s,lambda_star,mu2,det_m,n_grid\n%.12g,%.12g,%.12g,%.12g,%d\n",
                  cert.lambda_s, cert.lambda_star, cert.mu2, cert.det_m_abs, cert.n_grid);
    write_csv_artifact(o, buf);
}

void run_simulate(const CliOptions& o) {
    SigmaProfile sigma = load_profile(o);
    KineticState state = init_state(
        o.n, [](double x) { return std::cos(x); }, [](double) { return 0.0; });
    DecayTrace trace = run_decay(state, sigma, o.horizon);
    GapResult g = spectral_gap(sigma, o.im_cutoff, o.tol);
    if (o.format == "summary") {
        kv("command", "simulate");
        profile_summary(sigma);
        kv("grid_cells", o.n);
        kv("horizon", o.horizon);
        kv("fitted_rate", trace.fitted_rate);
        kv("gap", g.gap);
        double rel = g.gap > 0 ? std::abs(trace.fitted_rate - g.gap) / g.gap : 0.0;
        kv("rate_vs_gap_rel_error", rel);
        double drift = 0.0;
        bool monotone = true;
        for (size_t i = 0; i < trace.masses.size(); ++i) {
            drift = std::max(drift, std::abs(trace.masses[i]));
            if (i > 0 && trace.norms[i] > trace.norms[i - 1] + 1e-14) monotone = false;
        }
        kv("mass_drift", drift);
        kv("norm_monotone", monotone);
        kv("tol", o.tol);
        kv("im_cutoff", effective_cutoff(o, sigma));
    }
    std::ostringstream s;
    write_decay_csv(s, trace);
    write_csv_artifact(o, s.str());
}

void run_sweep(const CliOptions& o) {
    double lo = 0.0, hi = 0.0;
    int steps = 0;
    char tail = 0;
    if (o.const_range.empty() ||
        std::sscanf(o.const_range.c_str(), "%lf:%lf:%d%c", &lo, &hi, &steps, &tail) != 3)
        throw usage_error("sweep needs --const-range lo:hi:steps");
    if (lo < 0.0 || hi <= lo || steps < 2)
        throw usage_error("bad --const-range: need 0 <= lo < hi and steps >= 2");
    std::vector<GapCurvePoint> curve = gap_curve_constant(lo, hi, steps);
    if (o.format == "summary") {
        kv("command", "sweep");
        kv("sigma_min", lo);
        kv("sigma_max", hi);
        kv("points", steps);
        const GapCurvePoint* best = &curve.front();
        for (const auto& pt : curve)
            if (pt.gap > best->gap) best = &pt;
        kv("gap_max", best->gap);
        kv("gap_argmax", best->sigma);
    }
    std::ostringstream s;
    write_gap_curve_csv(s, curve);
    write_csv_artifact(o, s.str());
}

SigmaProfile optimize_initial(const CliOptions& o) {
    if (o.init.empty()) {
        if (o.have_sigma_const || !o.sigma_file.empty()) return load_profile(o);
        throw usage_error("optimize needs --init (const:<v>, random, file:<path>) or a sigma source");
    }
    if (o.init.rfind("const:", 0) == 0) {
        char tail = 0;
        double v = 0.0;
        if (std::sscanf(o.init.c_str() + 6, "%lf%c", &v, &tail) != 1)
            throw usage_error("bad --init const value: " + o.init);
        return make_constant(v);
    }
    if (o.init == "random") {
        std::mt19937 rng(static_cast<unsigned>(o.seed));
        std::uniform_real_distribution<double> dist(0.5, 5.0);
        std::vector<double> vals(static_cast<size_t>(o.cells));
        for (auto& v : vals) v = dist(rng);
        return sample_uniform(vals);
    }
    if (o.init.rfind("file:", 0) == 0) return read_profile_file(o.init.substr(5));
    throw usage_error("bad --init (want const:<v>, random, or file:<path>): " + o.init);
}

void run_optimize(const CliOptions& o) {
    SigmaProfile initial = optimize_initial(o);
    OptOptions opts;
    opts.cluster_tol = o.cluster_tol;
    opts.im_cutoff = o.im_cutoff;
    OptResult result = optimize_gap(initial, o.cells, o.max_iters, opts);
    const OptIterate& last = result.trajectory.back();
    if (o.format == "summary") {
        kv("command", "optimize");
        kv("cells", o.cells);
        kv("iterations", static_cast<int>(result.trajectory.size()) - 1);
        kv("stop_reason", to_string(result.stop_reason));
        kv("converged", result.converged);
        kv("gap", last.gap);
        kv("cluster_multiplicity", last.cluster_size);
        std::string vals;
        char buf[64];
        for (double v : result.final.values) {
            std::snprintf(buf, sizeof buf, "%s%.12g", vals.empty() ? "" : " ", v);
            vals += buf;
        }
        kv("final_sigma", vals);
        double l1 = result.final.l1_norm();
        kv("final_l1", l1);
        kv("final_accumulation_line", -l1 / (2.0 * two_pi));
        kv("cluster_tol", o.cluster_tol);
        kv("grad_tol", opts.grad_tol);
    }
    std::ostringstream s;
    write_trajectory_csv(s, result);
    write_csv_artifact(o, s.str());
}

// Constant-profile oracle suite: closed-form spectra, gap-curve values and a
// profile file round-trip, checked end-to-end through the public entry points.
int run_selftest() {
    int failures = 0;
    auto report = [&](const char* name, bool ok) {
        std::printf("selftest %-32s %s\n", name, ok ? "pass" : "FAIL");
        if (!ok) ++failures;
    };

    for (double value : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        SigmaProfile sigma = make_constant(value);
        Box box{-value - 0.51, 0.25, -6.05, 6.05};
        std::vector<EigenvalueRecord> found = find_eigenvalues(sigma, box);
        std::vector<cdouble> oracle;
        for (cdouble z : constant_sigma_spectrum(value, 8))
            if (std::abs(z.imag()) <= 6.0 && box.contains(z)) oracle.push_back(z);
        bool ok = true;
        for (cdouble z : oracle) {
            double best = 1e300;
            for (const auto& r : found) best = std::min(best, std::abs(r.lambda - z));
            if (best > 1e-8) ok = false;
        }
        // every found record must be the mass mode or an oracle position
        for (const auto& r : found) {
            if (std::abs(r.lambda) < 1e-8) continue;
            double best = 1e300;
            for (cdouble z : oracle) best = std::min(best, std::abs(r.lambda - z));
            if (best > 1e-8) ok = false;
        }
        char name[64];
        std::snprintf(name, sizeof name, "constant-spectrum sigma=%g", value);
        report(name, ok);
    }

    report("gap-curve sigma=1", std::abs(constant_gap(1.0) - 0.5) < 1e-12);
    report("gap-curve sigma=2", std::abs(constant_gap(2.0) - 1.0) < 1e-12);
    report("gap-curve sigma=6", std::abs(constant_gap(6.0) - (3.0 - std::sqrt(8.0))) < 1e-12);

    GapResult g2 = spectral_gap(make_constant(2.0));
    report("gap sigma=2", std::abs(g2.gap - 1.0) < 1e-6 && !g2.leading.empty() &&
                              g2.leading.front().kernel_dim == 2);

    SigmaProfile p = make_piecewise({0.0, two_pi / 4, two_pi}, {1.25, 3.5});
    std::stringstream io;
    write_profile(io, p);
    SigmaProfile q = read_profile(io);
    report("profile round-trip",
           q.breakpoints == p.breakpoints && q.values == p.values);

    std::printf("selftest: %s\n", failures == 0 ? "all passed" : "FAILED");
    return failures == 0 ? 0 : 4;
}

int dispatch(const CliOptions& o) {
    if (o.selftest) return run_selftest();
    if (o.command == "spectrum") run_spectrum(o);
    else if (o.command == "gap") run_gap(o);
    else if (o.command == "schrodinger") run_schrodinger(o);
    else if (o.command == "simulate") run_simulate(o);
    else if (o.command == "sweep") run_sweep(o);
    else if (o.command == "optimize") run_optimize(o);
    else throw usage_error("missing command (spectrum, gap, schrodinger, simulate, sweep, optimize)");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CliOptions o;
    CLI::App app{"Spectral-gap toolbox for the two-velocity kinetic model on the torus"};
    app.set_config("--config", "", "key=value file; command-line flags override file values");
    app.allow_config_extras(false);

    app.add_option("command", o.command, "spectrum | gap | schrodinger | simulate | sweep | optimize")
        ->check(CLI::IsMember({"spectrum", "gap", "schrodinger", "simulate", "sweep", "optimize"}));
    auto* sc = app.add_option("--sigma-const", o.sigma_const, "constant jump rate sigma(x) = value");
    auto* sf = app.add_option("--sigma-file", o.sigma_file, "piecewise-constant profile file");
    sc->excludes(sf);
    sf->excludes(sc);
    app.add_option("--tol", o.tol, "root tolerance for the spectral solver")
        ->capture_default_str()->check(CLI::PositiveNumber)->envname("GTSPEC_TOL");
    app.add_option("--im-cutoff", o.im_cutoff, "search height |Im lambda| (0 = automatic)")
        ->capture_default_str()->check(CLI::NonNegativeNumber)->envname("GTSPEC_IM_CUTOFF");
    app.add_option("--n", o.n, "simulation grid cells (dt = 2*pi/n)")
        ->capture_default_str()->check(CLI::Range(16, 1 << 22))->envname("GTSPEC_N");
    app.add_option("--T", o.horizon, "simulation horizon")
        ->capture_default_str()->check(CLI::PositiveNumber)->envname("GTSPEC_T");
    app.add_option("--k", o.cells, "optimizer profile cells")
        ->capture_default_str()->check(CLI::Range(1, 4096))->envname("GTSPEC_K");
    app.add_option("--max-iters", o.max_iters, "optimizer iteration cap")
        ->capture_default_str()->check(CLI::NonNegativeNumber)->envname("GTSPEC_MAX_ITERS");
    app.add_option("--seed", o.seed, "seed for --init random")
        ->capture_default_str()->envname("GTSPEC_SEED");
    app.add_option("--threads", o.threads, "worker threads (reserved; modules run single-threaded)")
        ->check(CLI::PositiveNumber)->envname("GTSPEC_THREADS");
    app.add_option("--out", o.out, "write the command's CSV artifact to this path")
        ->envname("GTSPEC_OUT");
    app.add_option("--format", o.format, "stdout content")
        ->capture_default_str()->check(CLI::IsMember({"summary", "csv"}))->envname("GTSPEC_FORMAT");
    app.add_option("--init", o.init, "optimize start: const:<v> | random | file:<path>");
    app.add_option("--cluster-tol", o.cluster_tol, "leading-cluster window for the optimizer")
        ->capture_default_str()->check(CLI::PositiveNumber)->envname("GTSPEC_CLUSTER_TOL");
    app.add_option("--const-range", o.const_range, "sweep range lo:hi:steps");
    app.add_flag("--selftest", o.selftest, "run the constant-profile oracle suite and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (dynamic_cast<const CLI::CallForHelp*>(&e) != nullptr ||
            dynamic_cast<const CLI::CallForAllHelp*>(&e) != nullptr) {
            app.exit(e);
            return 0;
        }
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    }
    o.have_sigma_const = sc->count() > 0;
    if (o.threads == 0) o.threads = static_cast<int>(std::thread::hardware_concurrency());

    auto start = std::chrono::steady_clock::now();
    try {
        int status = dispatch(o);
        std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        std::fprintf(stderr, "timing: %s %.3f s\n",
                     o.selftest ? "selftest" : o.command.c_str(), elapsed.count());
        return status;
    } catch (const usage_error& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const domain_error& e) {
        std::fprintf(stderr, "domain error: %s\n", e.what());
        return 2;
    } catch (const format_error& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const degeneracy_error& e) {
        std::fprintf(stderr, "domain error: %s\n", e.what());
        return 2;
    } catch (const convergence_error& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const internal_error& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    }
}
