#include "thermistor/conductivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "thermistor/errors.hpp"

namespace thermistor {

namespace {

void check_nonneg(double s) {
    if (std::isnan(s) || s < 0.0)
        throw ArgumentError("sigma: argument must be >= 0, got " + std::to_string(s));
}

// Fritsch-Carlson slopes: the interpolant stays monotone on monotone data
// and is C1 everywhere.
std::vector<double> monotone_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    std::vector<double> delta(n - 1), d(n);
    for (size_t i = 0; i + 1 < n; ++i) delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    for (size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) {
            d[i] = 0.0;
        } else {
            const double w1 = 2.0 * (x[i + 1] - x[i]) + (x[i] - x[i - 1]);
            const double w2 = (x[i + 1] - x[i]) + 2.0 * (x[i] - x[i - 1]);
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    for (size_t i = 0; i + 1 < n; ++i) {
        if (delta[i] == 0.0) {
            d[i] = 0.0;
            d[i + 1] = 0.0;
            continue;
        }
        const double a = d[i] / delta[i];
        const double b = d[i + 1] / delta[i];
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            d[i] = tau * a * delta[i];
            d[i + 1] = tau * b * delta[i];
        }
    }
    return d;
}

size_t find_interval(const std::vector<double>& x, double s) {
    auto it = std::upper_bound(x.begin(), x.end(), s);
    size_t i = static_cast<size_t>(it - x.begin());
    if (i == 0) i = 1;
    if (i == x.size()) i = x.size() - 1;
    return i - 1;
}

}  // namespace

ConductivityModel ConductivityModel::constant(double value) {
    if (!(value > 0.0)) throw ArgumentError("sigma constant: value must be positive");
    ConductivityModel m;
    m.kind_ = SigmaKind::Constant;
    m.value_ = value;
    m.h1_.c0 = value;
    m.h1_.c1 = value;
    return m;
}

ConductivityModel ConductivityModel::exponential_decay(double rate) {
    if (!(rate > 0.0)) throw ArgumentError("sigma exponential_decay: rate must be positive");
    ConductivityModel m;
    m.kind_ = SigmaKind::ExponentialDecay;
    m.rate_ = rate;
    m.h1_.c0 = 1.0;
    m.h1_.beta = rate;
    m.h1_.c1 = 1.0;
    m.h1_.c2 = rate;
    m.h1_.gamma = 1.0;
    return m;
}

ConductivityModel ConductivityModel::oscillatory_sine(double c3, double c0, double beta,
                                                      double gamma) {
    if (!(c3 > 0.0) || !(c0 > 0.0) || !(beta > 0.0) || !(gamma > 0.0))
        throw ArgumentError("sigma oscillatory_sine: parameters must be positive");
    ConductivityModel m;
    m.kind_ = SigmaKind::OscillatorySine;
    m.c3_ = c3;
    m.c0_ = c0;
    m.beta_ = beta;
    m.gamma_ = gamma;
    m.h1_.c0 = c0;
    m.h1_.c1 = 2.0 * c3 + c0;
    m.h1_.c2 = c3 * gamma + c0 * beta;
    m.h1_.beta = beta;
    m.h1_.gamma = gamma;
    return m;
}

ConductivityModel ConductivityModel::tabulated(std::vector<double> s, std::vector<double> sig) {
    if (s.size() < 2 || s.size() != sig.size())
        throw ArgumentError("sigma tabulated: need >= 2 samples of equal length");
    for (size_t i = 0; i + 1 < s.size(); ++i)
        if (!(s[i] < s[i + 1])) throw ArgumentError("sigma tabulated: s samples must increase");
    for (double v : sig)
        if (!(v > 0.0)) throw ArgumentError("sigma tabulated: sigma samples must be positive");
    if (s.front() > 0.0) throw ArgumentError("sigma tabulated: table must start at s = 0");
    ConductivityModel m;
    m.kind_ = SigmaKind::Tabulated;
    m.tab_d_ = monotone_slopes(s, sig);
    m.tab_s_ = std::move(s);
    m.tab_sig_ = std::move(sig);
    return m;
}

double ConductivityModel::eval(double s) const {
    check_nonneg(s);
    switch (kind_) {
        case SigmaKind::Constant:
            return value_;
        case SigmaKind::ExponentialDecay:
            return std::exp(-rate_ * s);
        case SigmaKind::OscillatorySine:
            return c3_ * (1.0 + std::sin(std::exp(gamma_ * s))) + c0_ * std::exp(-beta_ * s);
        case SigmaKind::Tabulated: {
            if (s > tab_s_.back())
                throw ExtrapolationError("sigma tabulated: s = " + std::to_string(s) +
                                         " beyond table end " + std::to_string(tab_s_.back()));
            const size_t i = find_interval(tab_s_, s);
            const double hh = tab_s_[i + 1] - tab_s_[i];
            const double t = (s - tab_s_[i]) / hh;
            const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
            const double h10 = t * (1.0 - t) * (1.0 - t);
            const double h01 = t * t * (3.0 - 2.0 * t);
            const double h11 = t * t * (t - 1.0);
            return h00 * tab_sig_[i] + h10 * hh * tab_d_[i] + h01 * tab_sig_[i + 1] +
                   h11 * hh * tab_d_[i + 1];
        }
    }
    return 0.0;  // unreachable
}

double ConductivityModel::deriv(double s) const {
    check_nonneg(s);
    switch (kind_) {
        case SigmaKind::Constant:
            return 0.0;
        case SigmaKind::ExponentialDecay:
            return -rate_ * std::exp(-rate_ * s);
        case SigmaKind::OscillatorySine: {
            const double e = std::exp(gamma_ * s);
            return c3_ * std::cos(e) * gamma_ * e - c0_ * beta_ * std::exp(-beta_ * s);
        }
        case SigmaKind::Tabulated: {
            if (s > tab_s_.back())
                throw ExtrapolationError("sigma tabulated: s = " + std::to_string(s) +
                                         " beyond table end " + std::to_string(tab_s_.back()));
            const size_t i = find_interval(tab_s_, s);
            const double hh = tab_s_[i + 1] - tab_s_[i];
            const double t = (s - tab_s_[i]) / hh;
            const double dh00 = 6.0 * t * (t - 1.0) / hh;
            const double dh10 = (3.0 * t * t - 4.0 * t + 1.0);
            const double dh01 = -6.0 * t * (t - 1.0) / hh;
            const double dh11 = (3.0 * t * t - 2.0 * t);
            return dh00 * tab_sig_[i] + dh10 * tab_d_[i] + dh01 * tab_sig_[i + 1] +
                   dh11 * tab_d_[i + 1];
        }
    }
    return 0.0;  // unreachable
}

H1Report verify_h1(const ConductivityModel& model, double s_max, int n_samples) {
    if (!(s_max > 0.0)) throw ArgumentError("verify_h1: s_max must be positive");
    if (n_samples < 2) throw ArgumentError("verify_h1: need at least 2 samples");
    const H1Constants& c = model.h1();
    H1Report r;
    r.lower.margin = r.upper.margin = r.deriv.margin =
        std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_samples; ++k) {
        const double s = s_max * k / (n_samples - 1);
        const double sig = model.eval(s);
        const double dsig = model.deriv(s);
        const double lower = sig - c.c0 * std::exp(-c.beta * s);
        const double upper = c.c1 - sig;
        const double deriv = c.c2 * std::exp(c.gamma * s) - std::abs(dsig);
        if (lower < r.lower.margin) r.lower = {lower >= 0.0, s, lower};
        if (upper < r.upper.margin) r.upper = {upper >= 0.0, s, upper};
        if (deriv < r.deriv.margin) r.deriv = {deriv >= 0.0, s, deriv};
    }
    r.lower.ok = r.lower.margin >= 0.0;
    r.upper.ok = r.upper.margin >= 0.0;
    r.deriv.ok = r.deriv.margin >= 0.0;
    return r;
}

double a2_diagnostic(const Field& sigma_values, const std::vector<int>& window_radii) {
    sigma_values.require_finite("a2_diagnostic");
    const GridSpec& g = sigma_values.grid;
    if (window_radii.empty()) throw ArgumentError("a2_diagnostic: no window radii given");
    double worst = 1.0;
    for (int r : window_radii) {
        if (r < 1) throw ArgumentError("a2_diagnostic: window radius must be >= 1");
        const int w = 2 * r;  // window edge, in nodes
        if (w > g.nx || (g.dim == 2 && w > g.ny))
            throw ArgumentError("a2_diagnostic: window of " + std::to_string(w) +
                                " nodes exceeds the domain");
        const int jmax = g.dim == 2 ? g.ny - w : 0;
        for (int j0 = 0; j0 <= jmax; ++j0) {
            for (int i0 = 0; i0 + w <= g.nx; ++i0) {
                double mean = 0.0, mean_inv = 0.0;
                const int jspan = g.dim == 2 ? w : 1;
                for (int j = 0; j < jspan; ++j) {
                    for (int i = 0; i < w; ++i) {
                        const double v = sigma_values.at(i0 + i, j0 + j);
                        mean += v;
                        mean_inv += 1.0 / v;
                    }
                }
                const double count = static_cast<double>(w * jspan);
                worst = std::max(worst, (mean / count) * (mean_inv / count));
            }
        }
    }
    return worst;
}

}  // namespace thermistor
