#pragma once

namespace kslab {

/// Value and first two derivatives of a scalar function at one point.
struct Jet2 {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// Smooth nondecreasing step: 0 on [0,1], 1 on [2,inf), and
/// exp(1 + 1/((t-2)^2 - 1)) in between. Derivatives are closed form.
double chi(double t);
Jet2 chi_jet(double t);

/// Two-sided cutoff: chi(2s/eps) on [0,1], 1 - chi(eps s) beyond.
/// Identically 1 on [eps, 1/eps], supported in [eps/2, 2/eps].
double zeta(double eps, double s);
double zeta_d1(double eps, double s);
double zeta_d2(double eps, double s);
Jet2 zeta_jet(double eps, double s);

/// max{2 sup|chi'|, 4 sup|chi''|}, maximised on successively refined grids
/// over [1,2] until two refinements agree to 1e-6 relative, then polished by
/// golden-section search at the maxima. Computed once.
double k_chi();

/// sup|chi'| and sup|chi''| found along the way.
struct ChiBounds {
    double max_d1;
    double max_d2;
    double k_chi;
};
const ChiBounds& chi_bounds();

}  // namespace kslab
