// Temperature-dependent conductivity laws sigma(s) with derivatives, the
// growth-hypothesis checker, and the empirical A2-weight diagnostic.
//
// Every model carries a claimed set of growth constants
//   c0 e^{-beta s} <= sigma(s) <= c1,   |sigma'(s)| <= c2 e^{gamma s}
// which verify_h1 tests by sampling. The built-in defaults
// (c0,c1,c2,c3,beta,gamma) = (0.1, 1.2, 1.0, 0.5, 1.0, 1.0) are artifact
// choices; no canonical values exist.

#ifndef THERMISTOR_CONDUCTIVITY_HPP
#define THERMISTOR_CONDUCTIVITY_HPP

#include <string>
#include <vector>

#include "thermistor/grid.hpp"

namespace thermistor {

enum class SigmaKind { Constant, ExponentialDecay, OscillatorySine, Tabulated };

struct H1Constants {
    double c0 = 0.1;
    double c1 = 1.2;
    double c2 = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
};

class ConductivityModel {
public:
    // sigma(s) = value
    static ConductivityModel constant(double value);
    // sigma(s) = e^{-rate s}
    static ConductivityModel exponential_decay(double rate);
    // sigma(s) = c3 (1 + sin e^{gamma s}) + c0 e^{-beta s}; the claimed
    // constants are derived: c1 = 2 c3 + c0, c2 = c3 gamma + c0 beta.
    static ConductivityModel oscillatory_sine(double c3, double c0, double beta, double gamma);
    // Sorted (s, sigma) samples, monotone-cubic interpolation; the
    // derivative comes from the interpolant. Evaluation outside
    // [s.front(), s.back()] throws ExtrapolationError.
    static ConductivityModel tabulated(std::vector<double> s, std::vector<double> sig);

    double eval(double s) const;
    double deriv(double s) const;

    SigmaKind kind() const { return kind_; }
    const H1Constants& h1() const { return h1_; }
    void set_h1(const H1Constants& c) { h1_ = c; }
    double oscillatory_c3() const { return c3_; }
    double oscillatory_c0() const { return c0_; }
    double oscillatory_beta() const { return beta_; }
    double oscillatory_gamma() const { return gamma_; }
    double constant_value() const { return value_; }
    double decay_rate() const { return rate_; }
    const std::vector<double>& table_s() const { return tab_s_; }
    const std::vector<double>& table_sigma() const { return tab_sig_; }

private:
    ConductivityModel() = default;

    SigmaKind kind_ = SigmaKind::Constant;
    H1Constants h1_;
    double value_ = 1.0;                    // Constant
    double rate_ = 1.0;                     // ExponentialDecay
    double c3_ = 0.5, c0_ = 0.1;            // OscillatorySine
    double beta_ = 1.0, gamma_ = 1.0;       // OscillatorySine
    std::vector<double> tab_s_, tab_sig_;   // Tabulated
    std::vector<double> tab_d_;             // interpolant slopes at knots
};

struct H1Bound {
    bool ok = true;
    double worst_s = 0.0;
    double margin = 0.0;  // ok <=> margin >= 0
};

struct H1Report {
    H1Bound lower;   // sigma(s) - c0 e^{-beta s}
    H1Bound upper;   // c1 - sigma(s)
    H1Bound deriv;   // c2 e^{gamma s} - |sigma'(s)|
    bool all_ok() const { return lower.ok && upper.ok && deriv.ok; }
};

// Sample s uniformly on [0, s_max] and report the worst margin of each of
// the three growth bounds against the model's claimed constants.
H1Report verify_h1(const ConductivityModel& model, double s_max, int n_samples);

// Empirical A2 product: over all axis-aligned windows of 2r nodes per axis
// (all positions inside the grid, for each radius r in window_radii),
// compute (mean sigma)(mean 1/sigma) and return the maximum. Always >= 1.
double a2_diagnostic(const Field& sigma_values, const std::vector<int>& window_radii);

}  // namespace thermistor

#endif
