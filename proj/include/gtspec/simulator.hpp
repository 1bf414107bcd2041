#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gtspec/profile.hpp"

namespace gtspec {

// Cell-centered samples of (rho, j) on n uniform cells of [0, 2pi).
struct KineticState {
    int n = 0;
    std::vector<double> rho;
    std::vector<double> j;
    double time = 0.0;
};

// Total mass sum(rho) * dx.
double mass(const KineticState& state);

// Discrete L2 norm sqrt(sum(rho^2 + j^2) * dx).
double l2_norm(const KineticState& state);

// Samples rho_fn and j_fn at cell centers and removes the mean of rho,
// so the state lies in the zero-mass subspace. Requires n >= 16.
KineticState init_state(int n, const std::function<double(double)>& rho_fn,
                        const std::function<double(double)>& j_fn);

// One Strang step: half relaxation j *= exp(-sigma dt/2), exact transport
// shift of the characteristic variables u = (rho+j)/sqrt2 (right one cell)
// and v = (rho-j)/sqrt2 (left one cell), half relaxation again.
// dt must equal the cell width 2pi/n so the shifts are exact.
KineticState step(const KineticState& state, const SigmaProfile& sigma, double dt);

// Norm/mass samples recorded roughly once per unit time plus the endpoints.
struct DecayTrace {
    std::vector<double> times;
    std::vector<double> norms;
    std::vector<double> masses;
    double fitted_rate = 0.0; // decay rate (positive = decaying)
};

// Runs until time T and fits the decay rate from log(norm) over the final
// third of the trace by least squares. If the norm underflows (< 1e-280)
// the trace is truncated and the fit uses the recorded part.
DecayTrace run_decay(KineticState state, const SigmaProfile& sigma, double T);

// CSV with header "t,norm,mass".
void write_decay_csv(std::ostream& out, const DecayTrace& trace);
void write_decay_csv_file(const std::string& path, const DecayTrace& trace);

} // namespace gtspec
